"""Mosaic-based evaluation of saliency maps.

Builds 2x2 image mosaics, tallies signed feature importance into a
confusion matrix per (mosaic, method) pair, derives seven
classification-style metrics from it, and assesses the metrics
themselves via inter-rater (Krippendorff's alpha) and inter-method
(Spearman's rho) reliability.
"""

from .confusion import ConfusionTally, quadrant_class, tally_confusion
from .metrics import METRIC_NAMES, MetricVector, compute_metrics
from .mosaics import (
    CELL_PIXELS,
    MOSAIC_PIXELS,
    DatasetBuildConfig,
    ImageRecord,
    MosaicManifest,
    MosaicSpec,
    assemble_mosaic,
    build_dataset,
    sample_mosaic_spec,
)
from .reliability import (
    AlphaResult,
    RatingMatrix,
    RhoMatrix,
    inter_method_matrix,
    krippendorff_alpha,
    rank_row,
    spearman_rho,
)
from .saliency_io import (
    MethodDescriptor,
    SaliencyMap,
    normalize_max_scale,
    read_saliency,
    write_saliency,
)
from .synthetic import OracleConfig, gen_method_family, gen_oracle_map

__all__ = [
    "CELL_PIXELS",
    "MOSAIC_PIXELS",
    "METRIC_NAMES",
    "AlphaResult",
    "ConfusionTally",
    "DatasetBuildConfig",
    "ImageRecord",
    "MethodDescriptor",
    "MetricVector",
    "MosaicManifest",
    "MosaicSpec",
    "OracleConfig",
    "RatingMatrix",
    "RhoMatrix",
    "SaliencyMap",
    "assemble_mosaic",
    "build_dataset",
    "compute_metrics",
    "gen_method_family",
    "gen_oracle_map",
    "inter_method_matrix",
    "krippendorff_alpha",
    "normalize_max_scale",
    "quadrant_class",
    "rank_row",
    "read_saliency",
    "sample_mosaic_spec",
    "spearman_rho",
    "tally_confusion",
    "write_saliency",
]

__version__ = "0.1.0"
