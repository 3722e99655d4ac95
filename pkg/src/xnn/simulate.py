"""Seeded data generators for the three simulation studies.

Each generator is a pure function of (n, seed): features are i.i.d. uniform on
[-1, 1] and noise, where present, is Gaussian via the Box-Muller transform.
The noiseless signal functions are exposed separately so tests and teachers
can evaluate them directly.
"""
from __future__ import annotations

import numpy as np

from xnn.data import Dataset
from xnn.errors import ValidationError
from xnn.rng import SeededRng


def legendre(k: int, x):
    """The first three Legendre polynomials: orthogonal on [-1, 1] with range [-1, 1]."""
    x = np.asarray(x, dtype=np.float64)
    if k == 1:
        out = x
    elif k == 2:
        out = 0.5 * (3.0 * x**2 - 1.0)
    elif k == 3:
        out = 0.5 * (5.0 * x**3 - 3.0 * x)
    else:
        raise ValidationError(f"polynomial order must be 1, 2, or 3, got {k}")
    return float(out) if out.ndim == 0 else out


def legendre_signal(X: np.ndarray) -> np.ndarray:
    """y = P1(x1) + P2(x2) + P3(x3); remaining columns are ignored."""
    X = np.asarray(X, dtype=np.float64)
    return legendre(1, X[:, 0]) + legendre(2, X[:, 1]) + legendre(3, X[:, 2])


def interaction_signal(X: np.ndarray) -> np.ndarray:
    """y = 0.5*x1 + 0.5*x2^2 + 0.5*x3*x4 + 0.3*x5^2; x6 is ignored."""
    X = np.asarray(X, dtype=np.float64)
    return 0.5 * X[:, 0] + 0.5 * X[:, 1] ** 2 + 0.5 * X[:, 2] * X[:, 3] + 0.3 * X[:, 4] ** 2


def nonlinear_signal(X: np.ndarray) -> np.ndarray:
    """y = exp(x1) * sin(x2); x3, x4 are ignored."""
    X = np.asarray(X, dtype=np.float64)
    return np.exp(X[:, 0]) * np.sin(X[:, 1])


def _uniform_features(rng: SeededRng, n: int, p: int) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, (n, p))


def _check_n(n: int) -> int:
    n = int(n)
    if n < 1:
        raise ValidationError(f"sample count must be >= 1, got {n}")
    return n


def gen_legendre(n: int = 10000, seed: int = 0) -> Dataset:
    """Five uniform features; noiseless sum of the first three Legendre polynomials."""
    n = _check_n(n)
    rng = SeededRng(seed)
    X = _uniform_features(rng, n, 5)
    return Dataset(X, legendre_signal(X), [f"x{j}" for j in range(1, 6)], "legendre")


def gen_interaction(n: int = 10000, seed: int = 0) -> Dataset:
    """Six uniform features; linear + quadratic + multiplicative terms, noise sd 0.05."""
    n = _check_n(n)
    rng = SeededRng(seed)
    X = _uniform_features(rng, n, 6)
    y = interaction_signal(X) + rng.normal(scale=0.05, size=n)
    return Dataset(X, y, [f"x{j}" for j in range(1, 7)], "interaction")


def gen_nonlinear(n: int = 10000, seed: int = 0) -> Dataset:
    """Four uniform features; exp-times-sine surface, noise sd 0.1."""
    n = _check_n(n)
    rng = SeededRng(seed)
    X = _uniform_features(rng, n, 4)
    y = nonlinear_signal(X) + rng.normal(scale=0.1, size=n)
    return Dataset(X, y, [f"x{j}" for j in range(1, 5)], "nonlinear")


GENERATORS = {
    "legendre": gen_legendre,
    "interaction": gen_interaction,
    "nonlinear": gen_nonlinear,
}


def quad_identity(a: float, b: float, x: float, y: float) -> tuple[float, float]:
    """Both sides of the product-as-difference-of-squares identity.

    Returns (x*y, c*(a*x + b*y)**2 - c*(a*x - b*y)**2) with c = 1/(4ab); the two
    agree for any a, b with ab != 0.  This is the algebraic reason a
    multiplicative interaction is representable by two quadratic ridge
    functions with matching/opposing projection signs.
    """
    if a * b == 0:
        raise ValidationError("a*b must be nonzero")
    c = 1.0 / (4.0 * a * b)
    lhs = x * y
    rhs = c * (a * x + b * y) ** 2 - c * (a * x - b * y) ** 2
    return lhs, rhs
