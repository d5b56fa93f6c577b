"""
Four views of one tile
======================

Each segmentation method looks at a small tile through a different
transform.  Here one noisy tile and one smooth tile go through all four,
and we print the statistics the feature cube would keep.
"""

import numpy as np

from afmdomains.features import FeatureOptions, extract_features, stats4
from afmdomains.transforms import dct2, dft2_amplitude, dwt2_multilevel, radon_sinogram

rng = np.random.default_rng(0)
noisy = 170 + rng.uniform(-60, 60, size=(12, 12))
yy, xx = np.mgrid[:12, :12]
smooth = 40 + 25 * np.sin(2 * np.pi * xx / 16) * np.sin(2 * np.pi * yy / 16)

###########################################################################
# The DFT amplitude keeps the mean in its DC term.  Noise spreads energy
# over every frequency, which is what the variance statistic sees.

for name, tile in [("noisy", noisy), ("smooth", smooth)]:
    amp = dft2_amplitude(tile)
    print(f"{name:6s} DC {amp[0, 0]:7.2f}  amplitude stats {np.round(stats4(amp), 3)}")

###########################################################################
# The DCT uses a flat 2/sqrt(MN) scale, so its first coefficient is
# 2/sqrt(MN) times the tile sum rather than the mean.

print("dct[0, 0] =", round(dct2(noisy)[0, 0], 3), " 2*sum/12 =", round(2 * noisy.sum() / 12, 3))

###########################################################################
# A two-level Haar decomposition gives four subbands per level.  The
# transform is invertible, so nothing is lost before the statistics.

pyr = dwt2_multilevel(noisy, "haar", levels=2)
for i, lev in enumerate(pyr.levels, start=1):
    print(f"level {i}: subband shapes {[b.shape for b in lev.subbands()]}")
opts = FeatureOptions(channels=("variance",), levels=2)
print("dwt variance features:", np.round(extract_features(noisy, "dwt", opts), 1))

###########################################################################
# The Radon sinogram holds one projection per angle.  Every projection
# integrates the whole tile, so each column sums to the same total.

sino = radon_sinogram(noisy, n_angles=36)
print("sinogram", sino.values.shape, "column sums agree:",
      np.allclose(sino.values.sum(axis=0), noisy.sum()))
