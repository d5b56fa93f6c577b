"""Unsupervised segmentation of two-phase texture domains in grayscale micrographs."""

__version__ = "0.1.0"

from .cluster import IndexMap, KMeansResult, kmeans, label_domains  # noqa: E402
from .domsize import aggregate_stats, local_thickness, size_distribution  # noqa: E402
from .features import (FeatureCube, FeatureOptions, build_feature_cube,  # noqa: E402
                       correlation_matrix, extract_features, stats4, zscore_normalize)
from .imgio import GrayImage, load_image, normalize_intensity  # noqa: E402
from .metrics import accuracy, dice, iou, score  # noqa: E402
from .tiling import TileGrid, TileSpec, extract_tiles, tile_dims  # noqa: E402
from .transforms import (dct2, dft2_amplitude, dwt2_multilevel,  # noqa: E402
                         idwt2_multilevel, radon_sinogram)
