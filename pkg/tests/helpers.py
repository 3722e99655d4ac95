"""Shared test oracles, written independently of the library's fast paths."""
from __future__ import annotations

import math

import numpy as np

from xnn.model import XnnModel, param_items


def loop_forward(model: XnnModel, x: np.ndarray) -> float:
    """Straight-line re-evaluation of mu + sum_k gamma_k h_k(beta_k . x).

    Deliberately scalar and loop-based: no shared code with the vectorized
    forward pass beyond the parameter arrays themselves.
    """
    total = model.mu
    num_layers = len(model.weights)
    for k in range(model.config.num_subnets):
        t = 0.0
        for j in range(model.config.input_dim):
            t += model.betas[k, j] * x[j]
        a = [t]
        for l in range(num_layers):
            w = model.weights[l][k]
            b = model.biases[l][k]
            out = []
            for o in range(w.shape[0]):
                z = b[o]
                for i in range(w.shape[1]):
                    z += w[o, i] * a[i]
                out.append(math.tanh(z) if l < num_layers - 1 else z)
            a = out
        total += model.gammas[k] * a[0]
    return total


def loop_subnet(model: XnnModel, k: int, t: float) -> float:
    """Scalar loop evaluation of one unscaled ridge function."""
    num_layers = len(model.weights)
    a = [float(t)]
    for l in range(num_layers):
        w = model.weights[l][k]
        b = model.biases[l][k]
        out = []
        for o in range(w.shape[0]):
            z = b[o]
            for i in range(w.shape[1]):
                z += w[o, i] * a[i]
            out.append(math.tanh(z) if l < num_layers - 1 else z)
        a = out
    return a[0]


def batch_loss(model: XnnModel, X: np.ndarray, y: np.ndarray) -> float:
    preds = np.array([loop_forward(model, row) for row in X])
    return float(np.mean((preds - y) ** 2))


def finite_diff_gradients(model: XnnModel, X: np.ndarray, y: np.ndarray, step: float = 1e-5):
    """Central finite differences of the batch loss for every parameter.

    Returns (d_mu, {name: array}) matching param_items naming.
    """
    def loss_now():
        return batch_loss(model, X, y)

    model.mu += step
    f_plus = loss_now()
    model.mu -= 2 * step
    f_minus = loss_now()
    model.mu += step
    d_mu = (f_plus - f_minus) / (2 * step)

    out = {}
    for name, arr in param_items(model):
        g = np.zeros_like(arr)
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            original = arr[idx]
            arr[idx] = original + step
            f_plus = loss_now()
            arr[idx] = original - step
            f_minus = loss_now()
            arr[idx] = original
            g[idx] = (f_plus - f_minus) / (2 * step)
        out[name] = g
    return d_mu, out


def grad_close(analytic: np.ndarray, numeric: np.ndarray, rel: float = 1e-5, small: float = 1e-6, atol: float = 1e-8) -> bool:
    """Tolerance rule for gradient checks: relative above `small`, absolute below."""
    analytic = np.atleast_1d(np.asarray(analytic, dtype=float))
    numeric = np.atleast_1d(np.asarray(numeric, dtype=float))
    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    err = np.abs(analytic - numeric)
    big = scale > small
    ok_big = err[big] <= rel * scale[big]
    ok_small = err[~big] <= atol
    return bool(ok_big.all() and ok_small.all())


def grads_by_name(grads) -> dict[str, np.ndarray]:
    out = {"betas": grads.d_betas, "gammas": grads.d_gammas}
    for l in range(len(grads.d_weights)):
        out[f"weights[{l}]"] = grads.d_weights[l]
        out[f"biases[{l}]"] = grads.d_biases[l]
    return out


def prox_by_grid_search(value: float, threshold: float, half_width: float = 2.0, points: int = 400001) -> float:
    """Brute-force minimizer of 0.5*(u - value)^2 + threshold*|u| over a dense grid."""
    grid = np.linspace(value - half_width, value + half_width, points)
    objective = 0.5 * (grid - value) ** 2 + threshold * np.abs(grid)
    return float(grid[np.argmin(objective)])


def minimal_poly_degree(grid: np.ndarray, values: np.ndarray, max_degree: int = 3, rel_tol: float = 0.05) -> int:
    """Smallest polynomial degree whose least-squares fit leaves < rel_tol relative residual."""
    centered = values - values.mean()
    denom = float(np.linalg.norm(centered))
    if denom == 0.0:
        return 0
    x = (grid - grid.mean()) / (grid.max() - grid.min())
    for degree in range(1, max_degree + 1):
        coeffs = np.polynomial.polynomial.polyfit(x, values, degree)
        fitted = np.polynomial.polynomial.polyval(x, coeffs)
        if np.linalg.norm(values - fitted) / denom < rel_tol:
            return degree
    return max_degree + 1


def reference_adam_prox_step(params, grads, m, v, step, lr, b1, b2, eps, thresholds):
    """Scripted single update mirroring the documented rule, for oracle tests.

    params/grads/m/v are dicts name -> array (mu included as a 0-d array);
    thresholds maps names to soft-threshold amounts (missing = no shrinkage).
    Returns new dicts; does not mutate inputs.
    """
    new_params, new_m, new_v = {}, {}, {}
    c1 = 1.0 - b1**step
    c2 = 1.0 - b2**step
    for name in params:
        g = grads[name]
        m_new = b1 * m[name] + (1 - b1) * g
        v_new = b2 * v[name] + (1 - b2) * g * g
        p = params[name] - lr * (m_new / c1) / (np.sqrt(v_new / c2) + eps)
        thr = thresholds.get(name, 0.0)
        if thr > 0.0:
            p = np.sign(p) * np.maximum(np.abs(p) - thr, 0.0)
        new_params[name] = p
        new_m[name] = m_new
        new_v[name] = v_new
    return new_params, new_m, new_v
