"""Additive-index model core.

The model computes ``f(x) = mu + sum_k gammas[k] * h_k(betas[k] @ x)`` where
each ridge function ``h_k`` is a small fully connected network with scalar
input and scalar output.  All subnetworks share one layer geometry, so their
parameters are stored stacked along a leading subnetwork axis: ``weights[l]``
has shape ``(K, out, in)`` and ``biases[l]`` shape ``(K, out)``.  That keeps
forward and backward passes fully vectorized over both samples and
subnetworks; the per-subnetwork view is available through
:attr:`XnnModel.subnets`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from xnn.data import StandardizationParams
from xnn.errors import NumericDivergenceError, ValidationError
from xnn.rng import SeededRng

ACTIVATIONS = ("tanh",)


@dataclass(frozen=True)
class XnnConfig:
    """Architecture of an additive-index network."""

    input_dim: int
    num_subnets: int
    subnet_hidden: tuple[int, ...] = (12, 6)
    activation: str = "tanh"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "subnet_hidden", tuple(int(w) for w in self.subnet_hidden))
        if self.input_dim < 1:
            raise ValidationError(f"input_dim must be >= 1, got {self.input_dim}")
        if self.num_subnets < 1:
            raise ValidationError(f"num_subnets must be >= 1, got {self.num_subnets}")
        if any(w < 1 for w in self.subnet_hidden):
            raise ValidationError(f"hidden widths must be >= 1, got {self.subnet_hidden}")
        if self.activation not in ACTIVATIONS:
            raise ValidationError(f"unsupported activation '{self.activation}'")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError(f"seed must fit in 64 unsigned bits, got {self.seed}")

    @property
    def layer_sizes(self) -> list[tuple[int, int]]:
        """(in, out) pairs for each subnetwork layer, input 1 through output 1."""
        dims = [1, *self.subnet_hidden, 1]
        return list(zip(dims[:-1], dims[1:]))


@dataclass
class DenseLayer:
    weights: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: str  # "tanh" | "linear"

    def __post_init__(self):
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ValidationError(
                f"inconsistent layer shapes {self.weights.shape} / {self.bias.shape}"
            )
        if self.activation not in ("tanh", "linear"):
            raise ValidationError(f"unsupported layer activation '{self.activation}'")
        if not (np.isfinite(self.weights).all() and np.isfinite(self.bias).all()):
            raise ValidationError("layer parameters contain non-finite values")


@dataclass
class Subnetwork:
    """A scalar-in, scalar-out network learning one ridge function."""

    layers: list[DenseLayer]

    def __post_init__(self):
        if not self.layers:
            raise ValidationError("subnetwork needs at least one layer")
        if self.layers[0].weights.shape[1] != 1:
            raise ValidationError("subnetwork input must be univariate")
        last = self.layers[-1]
        if last.weights.shape[0] != 1 or last.activation != "linear":
            raise ValidationError("subnetwork output must be a single linear node")
        for prev, nxt in zip(self.layers[:-1], self.layers[1:]):
            if nxt.weights.shape[1] != prev.weights.shape[0]:
                raise ValidationError("subnetwork layer widths do not chain")

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        """The ridge function itself: maps scalars to scalars, elementwise."""
        a = np.asarray(t, dtype=np.float64).reshape(-1, 1)
        for layer in self.layers:
            a = a @ layer.weights.T + layer.bias
            if layer.activation == "tanh":
                a = np.tanh(a)
        return a[:, 0]


@dataclass
class XnnModel:
    """Full parameter set of an additive-index network."""

    config: XnnConfig
    mu: float
    betas: np.ndarray  # (K, p) projection coefficients
    weights: list[np.ndarray]  # stacked subnetwork layer weights, each (K, out, in)
    biases: list[np.ndarray]  # stacked subnetwork layer biases, each (K, out)
    gammas: np.ndarray  # (K,) ridge-function weights
    standardization: StandardizationParams | None = None

    @property
    def num_subnets(self) -> int:
        return self.config.num_subnets

    @property
    def input_dim(self) -> int:
        return self.config.input_dim

    @property
    def subnets(self) -> list[Subnetwork]:
        """Per-subnetwork view; layer arrays are views into the stacked storage."""
        num_layers = len(self.weights)
        out = []
        for k in range(self.num_subnets):
            layers = [
                DenseLayer(
                    self.weights[l][k],
                    self.biases[l][k],
                    "linear" if l == num_layers - 1 else self.config.activation,
                )
                for l in range(num_layers)
            ]
            out.append(Subnetwork(layers))
        return out

    def copy(self) -> "XnnModel":
        return XnnModel(
            config=self.config,
            mu=self.mu,
            betas=self.betas.copy(),
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            gammas=self.gammas.copy(),
            standardization=self.standardization,
        )


@dataclass
class Gradients:
    """Loss partials, shape-congruent with the model's parameters."""

    d_mu: float
    d_betas: np.ndarray
    d_weights: list[np.ndarray]
    d_biases: list[np.ndarray]
    d_gammas: np.ndarray


class ForwardCache(NamedTuple):
    """Intermediate activations kept for reuse by the backward pass.

    Arrays are laid out subnetwork-major: ``proj`` and ``ridge`` are (K, n),
    layer activations are (K, n, width).
    """

    proj: np.ndarray  # (K, n) projections betas @ x
    pre: list[np.ndarray]  # per layer pre-activations, (K, n, width)
    post: list[np.ndarray]  # per layer post-activations, (K, n, width)
    ridge: np.ndarray  # (K, n) subnetwork outputs h_k


def param_items(model: XnnModel) -> list[tuple[str, np.ndarray]]:
    """Named references to every array parameter (mu is a plain float, handled apart)."""
    items = [("betas", model.betas), ("gammas", model.gammas)]
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        items.append((f"weights[{l}]", w))
        items.append((f"biases[{l}]", b))
    return items


def validate_model(model: XnnModel) -> None:
    """Check every structural invariant; raises ValidationError on the first breach."""
    cfg = model.config
    k, p = cfg.num_subnets, cfg.input_dim
    if model.betas.shape != (k, p):
        raise ValidationError(f"betas: expected shape ({k}, {p}), got {model.betas.shape}")
    if model.gammas.shape != (k,):
        raise ValidationError(f"gammas: expected {k} entries, got {model.gammas.shape[0]}")
    sizes = cfg.layer_sizes
    if len(model.weights) != len(sizes) or len(model.biases) != len(sizes):
        raise ValidationError(
            f"subnetworks: expected {len(sizes)} layers, got {len(model.weights)}"
        )
    for l, (in_dim, out_dim) in enumerate(sizes):
        if model.weights[l].shape != (k, out_dim, in_dim):
            raise ValidationError(
                f"weights[{l}]: expected shape ({k}, {out_dim}, {in_dim}), "
                f"got {model.weights[l].shape}"
            )
        if model.biases[l].shape != (k, out_dim):
            raise ValidationError(
                f"biases[{l}]: expected shape ({k}, {out_dim}), got {model.biases[l].shape}"
            )
    if not np.isfinite(model.mu):
        raise ValidationError("mu is not finite")
    for name, arr in param_items(model):
        if not np.isfinite(arr).all():
            raise ValidationError(f"{name} contains non-finite values")


def init_model(config: XnnConfig) -> XnnModel:
    """Deterministically initialize a model from its config.

    Projection rows are uniform on [-1/sqrt(p), 1/sqrt(p)], layer weights are
    fan-scaled uniform (Glorot bounds), biases start at zero, ridge weights are
    uniform on [-0.5, 0.5], and mu starts at zero.  Equal configs give
    bit-identical models.
    """
    rng = SeededRng(config.seed)
    k, p = config.num_subnets, config.input_dim
    betas = rng.uniform(-1.0 / np.sqrt(p), 1.0 / np.sqrt(p), (k, p))
    weights, biases = [], []
    for in_dim, out_dim in config.layer_sizes:
        limit = np.sqrt(6.0 / (in_dim + out_dim))
        weights.append(rng.uniform(-limit, limit, (k, out_dim, in_dim)))
        biases.append(np.zeros((k, out_dim)))
    gammas = rng.uniform(-0.5, 0.5, k)
    model = XnnModel(
        config=config, mu=0.0, betas=betas, weights=weights, biases=biases, gammas=gammas
    )
    validate_model(model)
    return model


def _forward_batch(model: XnnModel, X: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.input_dim:
        raise ValidationError(
            f"expected feature matrix with {model.input_dim} columns, got shape {X.shape}"
        )
    proj = model.betas @ X.T  # (K, n)
    a = proj[:, :, None]
    num_layers = len(model.weights)
    pre, post = [], []
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = a @ w.transpose(0, 2, 1) + b[:, None, :]  # (K, n, out)
        a = z if l == num_layers - 1 else np.tanh(z)
        pre.append(z)
        post.append(a)
    ridge = a[:, :, 0]
    y_hat = model.mu + model.gammas @ ridge
    return y_hat, ForwardCache(proj, pre, post, ridge)


def forward(model: XnnModel, x: np.ndarray) -> tuple[float, ForwardCache]:
    """Evaluate the model at one point (standardized units)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.input_dim,):
        raise ValidationError(f"expected input of length {model.input_dim}, got {x.shape}")
    y, cache = _forward_batch(model, x[None, :])
    return float(y[0]), cache


def predict_batch(model: XnnModel, X: np.ndarray, raw_units: bool = False) -> np.ndarray:
    """Evaluate the model over the rows of X.

    With ``raw_units`` the stored standardization is applied to the inputs and
    inverted on the outputs, so both sides of the call are in original data
    units.
    """
    X = np.asarray(X, dtype=np.float64)
    if raw_units:
        if model.standardization is None:
            raise ValidationError("raw_units requires a model with standardization params")
        X = model.standardization.transform_features(X)
    y, _ = _forward_batch(model, X)
    if raw_units:
        y = model.standardization.invert_response(y)
    return y


def eval_subnet(model: XnnModel, index: int, t: np.ndarray) -> np.ndarray:
    """Evaluate ridge function ``h_index`` (unscaled) over an array of projections."""
    if not 0 <= index < model.num_subnets:
        raise ValidationError(f"subnet index {index} out of range [0, {model.num_subnets})")
    a = np.asarray(t, dtype=np.float64).reshape(-1, 1)
    num_layers = len(model.weights)
    for l in range(num_layers):
        a = a @ model.weights[l][index].T + model.biases[l][index]
        if l < num_layers - 1:
            a = np.tanh(a)
    return a[:, 0]


def gradient(model: XnnModel, X: np.ndarray, y: np.ndarray) -> tuple[float, Gradients]:
    """Mean-squared-error loss and its exact partials for every parameter.

    Penalty terms are not part of the loss here; sparsity is applied
    proximally during training.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (X.shape[0],) or X.shape[0] < 1:
        raise ValidationError(f"batch shapes disagree: X {X.shape}, y {y.shape}")
    y_hat, cache = _forward_batch(model, X)
    n = X.shape[0]
    err = y_hat - y
    loss = float(err @ err) / n
    resid = (2.0 / n) * err  # dL/dy_hat

    d_mu = float(resid.sum())
    d_gammas = cache.ridge @ resid
    num_layers = len(model.weights)
    d_weights: list[np.ndarray] = [np.empty(0)] * num_layers
    d_biases: list[np.ndarray] = [np.empty(0)] * num_layers
    # dL/d(subnet output), then walk the layers backwards
    delta = (model.gammas[:, None] * resid[None, :])[:, :, None]  # (K, n, 1)
    for l in reversed(range(num_layers)):
        if l < num_layers - 1:  # hidden layers are tanh; output layer is linear
            delta = delta * (1.0 - cache.post[l] ** 2)
        a_in = cache.post[l - 1] if l > 0 else cache.proj[:, :, None]
        d_weights[l] = delta.transpose(0, 2, 1) @ a_in  # (K, out, in)
        d_biases[l] = delta.sum(axis=1)
        delta = delta @ model.weights[l]  # (K, n, in)
    d_betas = delta[:, :, 0] @ X

    grads = Gradients(d_mu, d_betas, d_weights, d_biases, d_gammas)
    if not np.isfinite(loss):
        raise NumericDivergenceError("loss is not finite")
    for name, arr in (("d_betas", d_betas), ("d_gammas", d_gammas)):
        if not np.isfinite(arr).all():
            raise NumericDivergenceError(f"{name} contains non-finite values")
    for l in range(num_layers):
        if not np.isfinite(d_weights[l]).all() or not np.isfinite(d_biases[l]).all():
            raise NumericDivergenceError(f"d_weights[{l}]/d_biases[{l}] non-finite")
    return loss, grads


def input_partials(model: XnnModel, x: np.ndarray) -> np.ndarray:
    """Analytic partial derivatives of the model output with respect to each input.

    Chain rule through the structure: df/dx_j = sum_k gammas[k] * h_k'(t_k) * betas[k, j].
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.input_dim,):
        raise ValidationError(f"expected input of length {model.input_dim}, got {x.shape}")
    t = model.betas @ x  # (K,)
    a = t[:, None]
    deriv = np.ones((model.num_subnets, 1))  # d a / d t, propagated forward
    num_layers = len(model.weights)
    for l in range(num_layers):
        w = model.weights[l]
        z = np.einsum("ki,koi->ko", a, w) + model.biases[l]
        dz = np.einsum("ki,koi->ko", deriv, w)
        if l < num_layers - 1:
            a = np.tanh(z)
            deriv = (1.0 - a**2) * dz
        else:
            a = z
            deriv = dz
    ridge_slopes = deriv[:, 0]  # h_k'(t_k)
    return (model.gammas * ridge_slopes) @ model.betas
