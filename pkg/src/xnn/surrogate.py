"""Distilling an arbitrary base model into an explainable surrogate.

The surrogate never sees ground truth: it is trained on the base model's
predictions over a probe set, and fidelity is measured against those same
predictions on the holdout split.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from xnn.data import Dataset
from xnn.errors import ValidationError
from xnn.model import XnnConfig, XnnModel
from xnn.training import TrainConfig, fit


@dataclass
class FidelityReport:
    """How closely the surrogate tracks its teacher on held-out probes."""

    surrogate_mse: float
    r_squared: float
    n_probe: int


def distill(
    probe_features: np.ndarray,
    base_predictions: np.ndarray,
    xcfg: XnnConfig,
    tcfg: TrainConfig,
    feature_names: list[str] | None = None,
) -> tuple[XnnModel, FidelityReport]:
    """Fit a surrogate to a base model's predictions and score its fidelity.

    ``r_squared`` is 1 - mse / var(base predictions on the holdout split); a
    constant teacher has zero variance, in which case it is 1 for a perfect
    surrogate and -inf otherwise.
    """
    probe_features = np.asarray(probe_features, dtype=np.float64)
    base_predictions = np.asarray(base_predictions, dtype=np.float64)
    if probe_features.ndim != 2 or base_predictions.shape != (probe_features.shape[0],):
        raise ValidationError(
            f"probe shapes disagree: features {probe_features.shape}, "
            f"predictions {base_predictions.shape}"
        )
    if probe_features.shape[0] < 2:
        raise ValidationError("distillation needs at least 2 probe rows")
    if feature_names is None:
        feature_names = [f"x{j}" for j in range(1, probe_features.shape[1] + 1)]
    probe = Dataset(probe_features, base_predictions, feature_names, "distill")
    model, fit_report = fit(probe, xcfg, tcfg)

    surrogate_mse = fit_report.final_holdout_mse
    holdout = fit_report.holdout_indices
    eval_preds = base_predictions[holdout] if holdout.size else base_predictions
    variance = float(np.var(eval_preds))
    if variance > 0.0:
        r_squared = 1.0 - surrogate_mse / variance
    else:
        r_squared = 1.0 if surrogate_mse == 0.0 else float("-inf")
    fidelity = FidelityReport(
        surrogate_mse=surrogate_mse,
        r_squared=r_squared,
        n_probe=probe_features.shape[0],
    )
    return model, fidelity
