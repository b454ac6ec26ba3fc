"""Quantile regression forest with kernel-smoothed density forecasts."""

from ._core import (
    ConditionalCDF,
    DensityCurve,
    Forest,
    PredictionInterval,
    QrfsjError,
    bias,
    default_tau_grid,
    epanechnikov,
    fit,
    kde_evaluate,
    mape,
    picp,
    pinaw,
    pinball_loss,
    r_squared,
    rmse,
    sj_bandwidth,
)

__all__ = [
    "ConditionalCDF",
    "DensityCurve",
    "Forest",
    "PredictionInterval",
    "QrfsjError",
    "bias",
    "default_tau_grid",
    "epanechnikov",
    "fit",
    "kde_evaluate",
    "mape",
    "picp",
    "pinaw",
    "pinball_loss",
    "r_squared",
    "rmse",
    "sj_bandwidth",
]
