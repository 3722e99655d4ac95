"""Model fitting: adaptive-moment mini-batch descent with proximal L1 shrinkage.

Every optimizer step updates all parameters from the exact mean-squared-error
gradients, then soft-thresholds the projection coefficients and the ridge
weights.  The threshold is ``learning_rate * lambda``, so penalized entries
reach exactly zero instead of merely shrinking.  Subnetwork internals, biases,
and the global shift are never thresholded.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from xnn.data import Dataset, StandardizationParams, standardize_fit  # noqa: F401 (re-export)
from xnn.errors import NumericDivergenceError, ValidationError
from xnn.explain import active_subnets
from xnn.model import Gradients, XnnConfig, XnnModel, gradient, init_model, param_items
from xnn.rng import SeededRng


@dataclass(frozen=True)
class TrainConfig:
    """All optimizer, penalty, batching, and stopping knobs."""

    learning_rate: float = 1e-3
    batch_size: int = 64
    max_epochs: int = 2000
    lambda_beta: float = 0.0
    lambda_gamma: float = 0.0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    holdout_fraction: float = 0.2
    patience: int = 100
    shuffle_seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValidationError("batch_size must be positive")
        if self.max_epochs < 1:
            raise ValidationError("max_epochs must be positive")
        if self.lambda_beta < 0 or self.lambda_gamma < 0:
            raise ValidationError("penalty strengths must be nonnegative")
        if not (0 < self.adam_beta1 < 1 and 0 < self.adam_beta2 < 1):
            raise ValidationError("adam betas must lie in (0, 1)")
        if self.adam_eps <= 0:
            raise ValidationError("adam_eps must be positive")
        if not 0 <= self.holdout_fraction < 1:
            raise ValidationError("holdout_fraction must lie in [0, 1)")
        if self.patience < 1:
            raise ValidationError("patience must be positive")
        if not 0 <= int(self.shuffle_seed) < 2**64:
            raise ValidationError("shuffle_seed must fit in 64 unsigned bits")


@dataclass
class FitReport:
    """What happened during a fit.  Loss histories are in raw response units."""

    epochs_run: int
    train_loss_history: list[float]
    holdout_loss_history: list[float]
    final_holdout_mse: float
    final_train_mse: float
    best_epoch: int
    active_subnet_count: int
    nonzero_beta_count: int
    holdout_indices: np.ndarray

    def to_dict(self) -> dict:
        return {
            "epochs_run": self.epochs_run,
            "train_loss_history": list(self.train_loss_history),
            "holdout_loss_history": list(self.holdout_loss_history),
            "final_holdout_mse": self.final_holdout_mse,
            "final_train_mse": self.final_train_mse,
            "best_epoch": self.best_epoch,
            "active_subnet_count": self.active_subnet_count,
            "nonzero_beta_count": self.nonzero_beta_count,
            "holdout_indices": [int(i) for i in self.holdout_indices],
        }


@dataclass
class AdamState:
    """First/second moment accumulators for every parameter.

    Moments live in two flat vectors (mu first, then every array parameter in
    ``param_items`` order); the ``m``/``v`` dicts expose reshaped views into
    them for inspection.
    """

    step: int
    m_flat: np.ndarray
    v_flat: np.ndarray
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    slices: list[tuple[str, slice, tuple[int, ...]]]

    @classmethod
    def for_model(cls, model: XnnModel) -> "AdamState":
        slices = []
        offset = 1  # element 0 is mu
        for name, arr in param_items(model):
            slices.append((name, slice(offset, offset + arr.size), arr.shape))
            offset += arr.size
        m_flat = np.zeros(offset)
        v_flat = np.zeros(offset)
        m = {name: m_flat[sl].reshape(shape) for name, sl, shape in slices}
        v = {name: v_flat[sl].reshape(shape) for name, sl, shape in slices}
        return cls(step=0, m_flat=m_flat, v_flat=v_flat, m=m, v=v, slices=slices)

    @property
    def m_mu(self) -> float:
        return float(self.m_flat[0])

    @property
    def v_mu(self) -> float:
        return float(self.v_flat[0])


def l1_proximal_step(values: np.ndarray, threshold: float) -> np.ndarray:
    """Elementwise soft-thresholding: sign(v) * max(|v| - threshold, 0)."""
    if threshold < 0:
        raise ValidationError("threshold must be nonnegative")
    values = np.asarray(values, dtype=np.float64)
    return np.sign(values) * np.maximum(np.abs(values) - threshold, 0.0)


def train_step(
    model: XnnModel,
    state: AdamState,
    X_batch: np.ndarray,
    y_batch: np.ndarray,
    config: TrainConfig,
) -> tuple[XnnModel, AdamState, float]:
    """One adaptive-moment update on all parameters, then proximal shrinkage.

    Mutates ``model`` and ``state`` in place and returns them with the batch
    loss (standardized units, before the update).
    """
    loss, grads = gradient(model, X_batch, y_batch)
    state.step += 1
    lr = config.learning_rate
    b1, b2, eps = config.adam_beta1, config.adam_beta2, config.adam_eps
    c1 = 1.0 - b1**state.step
    c2 = 1.0 - b2**state.step

    g_flat = np.concatenate(
        [
            [grads.d_mu],
            grads.d_betas.ravel(),
            grads.d_gammas.ravel(),
            *(a.ravel() for pair in zip(grads.d_weights, grads.d_biases) for a in pair),
        ]
    )
    m, v = state.m_flat, state.v_flat
    m *= b1
    m += (1 - b1) * g_flat
    v *= b2
    v += (1 - b2) * (g_flat * g_flat)
    update = lr * (m / c1) / (np.sqrt(v / c2) + eps)

    model.mu -= float(update[0])
    for (name, sl, shape), (_, arr) in zip(state.slices, param_items(model)):
        arr -= update[sl].reshape(shape)

    model.betas[...] = l1_proximal_step(model.betas, lr * config.lambda_beta)
    model.gammas[...] = l1_proximal_step(model.gammas, lr * config.lambda_gamma)

    if not np.isfinite(model.mu):
        raise NumericDivergenceError("mu diverged")
    for name, arr in param_items(model):
        if not np.isfinite(arr).all():
            raise NumericDivergenceError(f"{name} diverged")
    return model, state, loss


def _mse(model: XnnModel, X: np.ndarray, y: np.ndarray) -> float:
    from xnn.model import _forward_batch

    y_hat, _ = _forward_batch(model, X)
    err = y_hat - y
    return float(err @ err) / len(y)


def fit(data: Dataset, xcfg: XnnConfig, tcfg: TrainConfig) -> tuple[XnnModel, FitReport]:
    """Standardize, split, train with early stopping, return the best-epoch model.

    The holdout MSE is tracked each epoch in raw response units; training stops
    once it fails to improve for ``patience`` epochs, and the parameters from
    the best epoch are restored before returning.  With ``holdout_fraction``
    zero the training split itself is used for stopping.
    """
    if xcfg.input_dim != data.num_features:
        raise ValidationError(
            f"config expects {xcfg.input_dim} features, dataset has {data.num_features}"
        )
    ds, std_params = standardize_fit(data)
    scale = std_params.response_std**2  # converts standardized MSE to raw units

    rng = SeededRng(tcfg.shuffle_seed)
    n = ds.num_rows
    perm = rng.permutation(n)
    n_holdout = int(round(tcfg.holdout_fraction * n))
    holdout_idx = perm[:n_holdout]
    train_idx = perm[n_holdout:]
    if train_idx.size == 0:
        raise ValidationError("holdout split leaves an empty training set")
    X_train, y_train = ds.features[train_idx], ds.response[train_idx]
    if n_holdout > 0:
        X_eval, y_eval = ds.features[holdout_idx], ds.response[holdout_idx]
    else:
        X_eval, y_eval = X_train, y_train

    model = init_model(xcfg)
    model.standardization = std_params
    state = AdamState.for_model(model)

    train_history: list[float] = []
    holdout_history: list[float] = []
    best_loss = np.inf
    best_epoch = -1
    best_params = None
    epochs_run = 0
    n_train = train_idx.size

    for epoch in range(tcfg.max_epochs):
        order = rng.permutation(n_train)
        for batch_no, start in enumerate(range(0, n_train, tcfg.batch_size)):
            rows = order[start : start + tcfg.batch_size]
            try:
                train_step(model, state, X_train[rows], y_train[rows], tcfg)
            except NumericDivergenceError as exc:
                raise NumericDivergenceError(str(exc), epoch=epoch, batch=batch_no) from exc
        epochs_run = epoch + 1
        train_history.append(_mse(model, X_train, y_train) * scale)
        holdout_mse = _mse(model, X_eval, y_eval) * scale
        holdout_history.append(holdout_mse)
        if holdout_mse < best_loss:
            best_loss = holdout_mse
            best_epoch = epoch
            best_params = (
                model.mu,
                model.betas.copy(),
                [w.copy() for w in model.weights],
                [b.copy() for b in model.biases],
                model.gammas.copy(),
            )
        elif epoch - best_epoch >= tcfg.patience:
            break

    model.mu, model.betas, model.weights, model.biases, model.gammas = best_params

    report = FitReport(
        epochs_run=epochs_run,
        train_loss_history=train_history,
        holdout_loss_history=holdout_history,
        final_holdout_mse=best_loss,
        final_train_mse=train_history[best_epoch],
        best_epoch=best_epoch,
        active_subnet_count=len(active_subnets(model, X_train)),
        nonzero_beta_count=int(np.count_nonzero(model.betas)),
        holdout_indices=holdout_idx,
    )
    return model, report
