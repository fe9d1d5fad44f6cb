"""Depthwise-separable deep JSCC toolkit (Python bindings)."""

from ._core import (
    Codec,
    ConfigError,
    Error,
    FormatError,
    NumericError,
    ShapeError,
    analyze,
    awgn,
    conv2d,
    depthwise_conv2d,
    depthwise_tconv2d,
    finite_diff_check,
    layer_kinds,
    pointwise_conv2d,
    power_normalize,
    prelu,
    psnr,
    reduction,
    sigma_from_snr,
    sigmoid,
    tconv2d,
    variants,
)

__all__ = [
    "Codec",
    "ConfigError",
    "Error",
    "FormatError",
    "NumericError",
    "ShapeError",
    "analyze",
    "awgn",
    "conv2d",
    "depthwise_conv2d",
    "depthwise_tconv2d",
    "finite_diff_check",
    "layer_kinds",
    "pointwise_conv2d",
    "power_normalize",
    "prelu",
    "psnr",
    "reduction",
    "sigma_from_snr",
    "sigmoid",
    "tconv2d",
    "variants",
]
