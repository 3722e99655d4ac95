"""Explanation artifacts extracted from a trained model.

Everything here is read-only over the model and reports the *scaled* ridge
functions ``gammas[k] * h_k`` rather than ``h_k`` alone: the scale and the
shape are not separately identifiable, so only their product is honest to
plot.  All inputs are expected in standardized units (the model's native
space); the command-line layer converts from raw data first.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from xnn.errors import ValidationError
from xnn.model import XnnModel, eval_subnet

GRID_POINTS = 101
GRID_EXTENSION = 0.05  # fraction of the observed projection span added per side
DEFAULT_ACTIVE_THRESHOLD = 0.01
DEFAULT_ZERO_TOL = 1e-8


@dataclass
class RidgeProfile:
    """One subnetwork's scaled ridge curve with its projection vector."""

    subnet_index: int
    grid: np.ndarray  # projection values t
    values: np.ndarray  # gammas[k] * h_k(t)
    projection: np.ndarray  # betas[k], length p
    active: bool


@dataclass
class ConditionalEffectProfile:
    """Per-subnetwork response curves in one feature, others held at their mean."""

    feature_index: int
    grid: np.ndarray  # standardized feature values
    per_subnet: list[np.ndarray]  # gammas[k] * h_k(betas[k, j] * t)
    total: np.ndarray  # sum over subnetworks
    coefficients: np.ndarray  # betas[:, j]
    mu: float  # global shift, excluded from the curves


@dataclass
class SparsityReport:
    nonzero_betas: list[tuple[int, int]]
    nonzero_gammas: list[int]
    active_subnets: list[int]
    threshold_used: float


@dataclass
class InteractionSignature:
    """Projection-coefficient pattern of a represented multiplicative interaction."""

    subnet_pair: tuple[int, int]
    feature_pair: tuple[int, int]
    coefficients: np.ndarray  # (2, 2): rows = subnets, columns = features
    detected: bool


def _scaled_ridge_range(model: XnnModel, features: np.ndarray, index: int):
    """Grid over the observed projection range, extended a little past each end."""
    proj = features @ model.betas[index]
    lo, hi = float(proj.min()), float(proj.max())
    if hi == lo:
        return np.array([lo]), True
    pad = GRID_EXTENSION * (hi - lo)
    return np.linspace(lo - pad, hi + pad, GRID_POINTS), False


def ridge_profiles(
    model: XnnModel,
    features: np.ndarray,
    rel_threshold: float = DEFAULT_ACTIVE_THRESHOLD,
) -> list[RidgeProfile]:
    """Sample every scaled ridge function over its observed projection range.

    A subnetwork is flagged active when its scaled curve moves by more than
    ``rel_threshold`` times the response scale (unit, for standardized
    training data) over the grid.  Subnetworks whose projection collapses to
    a point get a single-sample profile flagged inactive.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.input_dim:
        raise ValidationError(
            f"expected features with {model.input_dim} columns, got shape {features.shape}"
        )
    profiles = []
    for k in range(model.num_subnets):
        grid, degenerate = _scaled_ridge_range(model, features, k)
        values = model.gammas[k] * eval_subnet(model, k, grid)
        active = (not degenerate) and float(values.max() - values.min()) > rel_threshold
        profiles.append(
            RidgeProfile(
                subnet_index=k,
                grid=grid,
                values=values,
                projection=model.betas[k].copy(),
                active=active,
            )
        )
    return profiles


def active_subnets(
    model: XnnModel,
    features: np.ndarray,
    rel_threshold: float = DEFAULT_ACTIVE_THRESHOLD,
    response: np.ndarray | None = None,
) -> list[int]:
    """Indices of subnetworks whose scaled ridge function is not flat.

    The activity cutoff is ``rel_threshold`` times the response standard
    deviation; pass ``response`` to measure that scale from data, otherwise it
    is taken as 1 (the standardized-response convention).
    """
    scale = 1.0 if response is None else float(np.std(response, ddof=1))
    profiles = ridge_profiles(model, features, rel_threshold * scale)
    return [p.subnet_index for p in profiles if p.active]


def conditional_effects(
    model: XnnModel,
    feature_index: int,
    grid_limit: float = 2.0,
    num_points: int = GRID_POINTS,
) -> ConditionalEffectProfile:
    """Response curves in one feature with every other feature held at 0.

    For standardized data, 0 is each feature's mean, so the total curve is the
    model's conditional effect of the feature.  The global shift is reported
    separately instead of being folded into the curves.
    """
    if not 0 <= feature_index < model.input_dim:
        raise ValidationError(
            f"feature index {feature_index} out of range [0, {model.input_dim})"
        )
    grid = np.linspace(-grid_limit, grid_limit, num_points)
    per_subnet = [
        model.gammas[k] * eval_subnet(model, k, model.betas[k, feature_index] * grid)
        for k in range(model.num_subnets)
    ]
    total = np.sum(per_subnet, axis=0)
    return ConditionalEffectProfile(
        feature_index=feature_index,
        grid=grid,
        per_subnet=per_subnet,
        total=total,
        coefficients=model.betas[:, feature_index].copy(),
        mu=model.mu,
    )


def interaction_signature(
    model: XnnModel,
    subnets: tuple[int, int],
    features: tuple[int, int],
) -> InteractionSignature:
    """Check two subnetworks for the paired-quadratic interaction pattern.

    The pattern: both subnetworks load on both features with comparable
    magnitudes (within a factor of 2), one with matching signs and the other
    with opposing signs.  That is exactly how a product term decomposes into a
    difference of squared projections.
    """
    s1, s2 = subnets
    f1, f2 = features
    for s in (s1, s2):
        if not 0 <= s < model.num_subnets:
            raise ValidationError(f"subnet index {s} out of range [0, {model.num_subnets})")
    for f in (f1, f2):
        if not 0 <= f < model.input_dim:
            raise ValidationError(f"feature index {f} out of range [0, {model.input_dim})")
    coefficients = model.betas[np.ix_([s1, s2], [f1, f2])].copy()

    detected = False
    if np.all(coefficients != 0.0):
        same_sign = [coefficients[r, 0] * coefficients[r, 1] > 0 for r in (0, 1)]
        ratios_ok = all(
            0.5 <= abs(coefficients[r, 0] / coefficients[r, 1]) <= 2.0 for r in (0, 1)
        )
        detected = (same_sign[0] != same_sign[1]) and ratios_ok
    return InteractionSignature(
        subnet_pair=(s1, s2),
        feature_pair=(f1, f2),
        coefficients=coefficients,
        detected=detected,
    )


def sparsity_report(
    model: XnnModel,
    features: np.ndarray | None = None,
    zero_tol: float = DEFAULT_ZERO_TOL,
) -> SparsityReport:
    """Count which projection and ridge weights survived the penalty.

    Proximal training produces exact zeros; ``zero_tol`` only guards values
    that passed through decimal serialization.  When ``features`` are given,
    activity is measured from ridge ranges over the data; otherwise a
    structural proxy is used (nonzero ridge weight and some nonzero
    projection entry).
    """
    nonzero_betas = [
        (int(i), int(j)) for i, j in np.argwhere(np.abs(model.betas) > zero_tol)
    ]
    nonzero_gammas = [int(i) for i in np.flatnonzero(np.abs(model.gammas) > zero_tol)]
    if features is not None:
        active = active_subnets(model, features)
    else:
        rows_with_beta = {i for i, _ in nonzero_betas}
        active = [i for i in nonzero_gammas if i in rows_with_beta]
    return SparsityReport(
        nonzero_betas=nonzero_betas,
        nonzero_gammas=nonzero_gammas,
        active_subnets=active,
        threshold_used=zero_tol,
    )


# ---------------------------------------------------------------------------
# file export
# ---------------------------------------------------------------------------

_CSV_FMT = "%.17e"


def write_profiles_csv(
    path,
    ridge: list[RidgeProfile],
    conditional: list[ConditionalEffectProfile],
) -> None:
    """Long-format CSV: profile_type, index, grid_value, series_id, value."""
    lines = ["profile_type,index,grid_value,series_id,value"]
    for prof in ridge:
        for t, v in zip(prof.grid, prof.values):
            lines.append(f"ridge,{prof.subnet_index},{_CSV_FMT % t},curve,{_CSV_FMT % v}")
    for prof in conditional:
        for k, series in enumerate(prof.per_subnet):
            for t, v in zip(prof.grid, series):
                lines.append(
                    f"conditional,{prof.feature_index},{_CSV_FMT % t},subnet_{k},{_CSV_FMT % v}"
                )
        for t, v in zip(prof.grid, prof.total):
            lines.append(
                f"conditional,{prof.feature_index},{_CSV_FMT % t},total,{_CSV_FMT % v}"
            )
    Path(path).write_text("\n".join(lines) + "\n")


def write_explain_metadata(
    path,
    model: XnnModel,
    active: list[int],
    rel_threshold: float,
    feature_names: list[str] | None = None,
) -> None:
    """JSON companion carrying the parameters needed to rebuild the curves."""
    std = model.standardization
    payload = {
        "schema": "xnn-explain/1",
        "mu": model.mu,
        "gammas": model.gammas.tolist(),
        "betas": model.betas.tolist(),
        "active_subnets": active,
        "rel_threshold": rel_threshold,
        "feature_names": feature_names,
        "standardization": None
        if std is None
        else {
            "means": std.means.tolist(),
            "stds": std.stds.tolist(),
            "response_mean": std.response_mean,
            "response_std": std.response_std,
        },
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_explain_metadata(path) -> dict:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("schema") != "xnn-explain/1":
        raise ValidationError(f"{path}: not an explain metadata file")
    return payload
