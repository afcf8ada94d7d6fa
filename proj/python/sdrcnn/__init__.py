"""Dense residual pansharpening network, classical baselines and quality metrics.

Images are float64 numpy arrays shaped (bands, height, width); a PAN image
may also be given as (height, width).
"""

from ._sdrcnn import (
    DataError,
    DatasetSplit,
    Model,
    ModelConfig,
    ShapeError,
    UsageError,
    aem,
    budget_width,
    cli,
    degrade_ms,
    degrade_pan,
    ergas,
    full_metrics,
    gaussian_kernel,
    gram_schmidt,
    pca_features,
    q2n,
    read_raster,
    reduced_metrics,
    sam,
    scc,
    sfim,
    smooth_loss,
    split,
    synth_scene,
    train,
    upsample_bicubic,
    write_raster,
)

__all__ = [
    "DataError",
    "DatasetSplit",
    "Model",
    "ModelConfig",
    "ShapeError",
    "UsageError",
    "aem",
    "budget_width",
    "cli",
    "degrade_ms",
    "degrade_pan",
    "ergas",
    "full_metrics",
    "gaussian_kernel",
    "gram_schmidt",
    "pca_features",
    "q2n",
    "read_raster",
    "reduced_metrics",
    "sam",
    "scc",
    "sfim",
    "smooth_loss",
    "split",
    "synth_scene",
    "train",
    "upsample_bicubic",
    "write_raster",
]
