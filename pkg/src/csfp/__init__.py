"""Contrast-sensitivity-weighted perceptual image quality toolkit."""

from .csf_map import (
    AttentionMap,
    CsfBand,
    Spectrum,
    ViewingGeometry,
    bandpass,
    cycles_per_degree,
    dft2,
    generate_map,
    idft2,
    resize_map,
    uniform_map,
)
from .distort import DistortionKind, DistortionSpec, SplitMix64, apply, make_corpus
from .errors import CsfpError
from .features import FeatureStack, LayerKind, WeightBundle, forward, list_layers, load_weights
from .losses import (
    DistanceKind,
    LossConfig,
    LossKind,
    LossReport,
    attentive_contextual_loss,
    attentive_perceptual_loss,
    combined_loss,
    contextual_loss,
    l2_loss,
    perceptual_loss,
)
from .metrics import SsimConfig, psnr, ssim
from .oqa import (
    FitModel,
    OqaRecord,
    evaluate_corpus,
    fit_curve,
    lcc,
    rmse,
    run_oqa,
    srocc,
)
from .tensor_core import (
    Colorspace,
    PlanarImage,
    load_image,
    luma_plane,
    read_tnsr,
    resize_bilinear,
    save_image,
    to_luma,
    write_tnsr,
)

__version__ = "0.1.0"

__all__ = [
    "AttentionMap",
    "CsfBand",
    "Colorspace",
    "CsfpError",
    "DistanceKind",
    "DistortionKind",
    "DistortionSpec",
    "FeatureStack",
    "FitModel",
    "LayerKind",
    "LossConfig",
    "LossKind",
    "LossReport",
    "OqaRecord",
    "PlanarImage",
    "Spectrum",
    "SplitMix64",
    "SsimConfig",
    "ViewingGeometry",
    "WeightBundle",
    "apply",
    "attentive_contextual_loss",
    "attentive_perceptual_loss",
    "bandpass",
    "combined_loss",
    "contextual_loss",
    "cycles_per_degree",
    "dft2",
    "evaluate_corpus",
    "fit_curve",
    "forward",
    "generate_map",
    "idft2",
    "l2_loss",
    "lcc",
    "list_layers",
    "load_image",
    "load_weights",
    "luma_plane",
    "make_corpus",
    "perceptual_loss",
    "psnr",
    "read_tnsr",
    "resize_bilinear",
    "resize_map",
    "rmse",
    "run_oqa",
    "save_image",
    "srocc",
    "ssim",
    "to_luma",
    "uniform_map",
    "write_tnsr",
]
