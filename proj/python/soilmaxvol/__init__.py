"""Maximum-volume soil sampling designs from gridded terrain."""

from ._core import (
    BenchmarkProtocol,
    ClhsOptions,
    FeatureMatrix,
    MaxvolResult,
    NaiveBayesModel,
    RasterGrid,
    SampleDesign,
    SiteSpec,
    accuracy,
    balanced_accuracy,
    build_feature_matrix,
    derive_terrain,
    generate_site,
    kennard_stone_order,
    maxvol_rect,
    maxvol_square,
    nb_fit,
    nb_predict,
    read_asc,
    read_feature_matrix,
    run_benchmark,
    sample,
    vol_rect,
    vol_square,
    write_asc,
    write_feature_matrix,
)

__all__ = [
    "BenchmarkProtocol",
    "ClhsOptions",
    "FeatureMatrix",
    "MaxvolResult",
    "NaiveBayesModel",
    "RasterGrid",
    "SampleDesign",
    "SiteSpec",
    "accuracy",
    "balanced_accuracy",
    "build_feature_matrix",
    "derive_terrain",
    "generate_site",
    "kennard_stone_order",
    "maxvol_rect",
    "maxvol_square",
    "nb_fit",
    "nb_predict",
    "read_asc",
    "read_feature_matrix",
    "run_benchmark",
    "sample",
    "vol_rect",
    "vol_square",
    "write_asc",
    "write_feature_matrix",
]
