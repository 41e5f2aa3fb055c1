"""Deterministic turbulence-style image degradation, dataset generation and evaluation."""

from turbgen.imagebuf import Image, load_png, save_png
from turbgen.turbsim import (
    CompositionOrder,
    DegradationParams,
    DegradedQuad,
    Kernel1D,
    VectorField,
    accumulate_field,
    degrade,
    field_from_params,
    gaussian_blur,
    gaussian_kernel,
    patch_field,
    visualize_field,
    warp,
)
from turbgen.metrics import MetricReport, evaluate_pairs, feature_distance, psnr, ssim
from turbgen.datagen import (
    DatasetConfig,
    Manifest,
    ManifestRow,
    derive_seed,
    generate_dataset,
    sample_params,
)

__all__ = [
    "Image",
    "load_png",
    "save_png",
    "CompositionOrder",
    "DegradationParams",
    "DegradedQuad",
    "Kernel1D",
    "VectorField",
    "accumulate_field",
    "degrade",
    "field_from_params",
    "gaussian_blur",
    "gaussian_kernel",
    "patch_field",
    "visualize_field",
    "warp",
    "MetricReport",
    "evaluate_pairs",
    "feature_distance",
    "psnr",
    "ssim",
    "DatasetConfig",
    "Manifest",
    "ManifestRow",
    "derive_seed",
    "generate_dataset",
    "sample_params",
]
