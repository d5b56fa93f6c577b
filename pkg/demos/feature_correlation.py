"""
How the four statistics relate
==============================

Mean, variance, skew and kurtosis of the DFT amplitude are not
independent.  The correlation matrix of a feature cube shows which
channels carry the same information.
"""

import numpy as np

from afmdomains.features import STATS, FeatureOptions, build_feature_cube, correlation_matrix
from afmdomains.synth import SynthSpec, synth_texture_image
from afmdomains.tiling import TileSpec

cubes = []
for seed in range(3):
    image, _ = synth_texture_image(SynthSpec(seed=seed, width=160, height=160, layout="disk"))
    cube = build_feature_cube(image, TileSpec(12, 12, stride=2), "dft", FeatureOptions(channels=STATS))
    cubes.append(cube.vectors())

###########################################################################
# Pool the tiles of all images and correlate the channels.

corr = correlation_matrix(np.concatenate(cubes))
print("          " + "".join(f"{s:>10s}" for s in STATS))
for name, row in zip(STATS, corr):
    print(f"{name:>10s}" + "".join(f"{v:10.3f}" for v in row))

###########################################################################
# Skew and kurtosis of an amplitude spectrum move together almost
# perfectly here, so keeping both adds little.

print("skew/kurtosis correlation:", round(corr[2, 3], 4))
