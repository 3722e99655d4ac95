"""Plain-text model persistence (schema ``xnn/1``).

The file is line oriented and self-describing: every array is introduced by a
header line carrying its name and shape, followed by one row of values per
leading index.  Values are written with 17 significant digits so a round trip
reproduces each float64 exactly.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from xnn.data import StandardizationParams
from xnn.errors import ModelParseError, ValidationError
from xnn.model import XnnConfig, XnnModel, validate_model

SCHEMA = "xnn/1"
_FMT = "%.17e"


def _format_row(values) -> str:
    return " ".join(_FMT % v for v in np.atleast_1d(values))


def _write_array(lines: list[str], name: str, arr: np.ndarray) -> None:
    arr = np.asarray(arr, dtype=np.float64)
    lines.append(f"{name} {' '.join(str(d) for d in arr.shape)}")
    rows = arr.reshape(-1, arr.shape[-1]) if arr.ndim > 1 else arr.reshape(1, -1)
    for row in rows:
        lines.append(_format_row(row))


def save_model(model: XnnModel, path) -> None:
    validate_model(model)
    cfg = model.config
    lines = [SCHEMA]
    lines.append(f"input_dim {cfg.input_dim}")
    lines.append(f"num_subnets {cfg.num_subnets}")
    lines.append(("subnet_hidden " + " ".join(str(w) for w in cfg.subnet_hidden)).rstrip())
    lines.append(f"activation {cfg.activation}")
    lines.append(f"seed {cfg.seed}")
    std = model.standardization
    lines.append(f"standardization {'present' if std is not None else 'absent'}")
    if std is not None:
        _write_array(lines, "means", std.means)
        _write_array(lines, "stds", std.stds)
        lines.append(f"response_mean {_FMT % std.response_mean}")
        lines.append(f"response_std {_FMT % std.response_std}")
    lines.append(f"mu {_FMT % model.mu}")
    _write_array(lines, "betas", model.betas)
    _write_array(lines, "gammas", model.gammas)
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        _write_array(lines, f"layer_weights_{l}", w)
        _write_array(lines, f"layer_biases_{l}", b)
    Path(path).write_text("\n".join(lines) + "\n")


class _Reader:
    def __init__(self, path):
        self.lines = Path(path).read_text().splitlines()
        self.pos = 0

    def next_line(self, field: str) -> str:
        if self.pos >= len(self.lines):
            raise ModelParseError(field, "unexpected end of file")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def tokens(self, field: str) -> list[str]:
        tok = self.next_line(field).split()
        if not tok or tok[0] != field:
            raise ModelParseError(field, f"expected field here, found {tok[:1] or 'blank line'}")
        return tok[1:]

    def scalar_int(self, field: str) -> int:
        values = self.tokens(field)
        if len(values) != 1:
            raise ModelParseError(field, f"expected one integer, got {len(values)} tokens")
        try:
            return int(values[0])
        except ValueError as exc:
            raise ModelParseError(field, f"not an integer: {values[0]}") from exc

    def scalar_float(self, field: str) -> float:
        values = self.tokens(field)
        if len(values) != 1:
            raise ModelParseError(field, f"expected one number, got {len(values)} tokens")
        try:
            return float(values[0])
        except ValueError as exc:
            raise ModelParseError(field, f"not a number: {values[0]}") from exc

    def array(self, field: str) -> np.ndarray:
        shape_tokens = self.tokens(field)
        try:
            shape = tuple(int(t) for t in shape_tokens)
        except ValueError as exc:
            raise ModelParseError(field, f"bad shape header: {shape_tokens}") from exc
        if not shape:
            raise ModelParseError(field, "missing shape header")
        num_rows = int(np.prod(shape[:-1])) if len(shape) > 1 else 1
        row_len = shape[-1]
        rows = []
        for _ in range(num_rows):
            tok = self.next_line(field).split()
            if len(tok) != row_len:
                raise ModelParseError(field, f"expected {row_len} values per row, got {len(tok)}")
            try:
                rows.append([float(t) for t in tok])
            except ValueError as exc:
                raise ModelParseError(field, f"bad number in row: {exc}") from exc
        return np.asarray(rows, dtype=np.float64).reshape(shape)


def load_model(path) -> XnnModel:
    """Parse and fully validate a model file; no partial model escapes on error."""
    reader = _Reader(path)
    schema = reader.next_line("schema").strip()
    if schema != SCHEMA:
        raise ModelParseError("schema", f"expected '{SCHEMA}', got '{schema}'")
    input_dim = reader.scalar_int("input_dim")
    num_subnets = reader.scalar_int("num_subnets")
    hidden_tokens = reader.tokens("subnet_hidden")
    try:
        hidden = tuple(int(t) for t in hidden_tokens)
    except ValueError as exc:
        raise ModelParseError("subnet_hidden", f"bad widths: {hidden_tokens}") from exc
    activation_tokens = reader.tokens("activation")
    if len(activation_tokens) != 1:
        raise ModelParseError("activation", "expected a single tag")
    seed = reader.scalar_int("seed")
    try:
        config = XnnConfig(input_dim, num_subnets, hidden, activation_tokens[0], seed)
    except ValidationError as exc:
        raise ModelParseError("config", str(exc)) from exc

    std_tokens = reader.tokens("standardization")
    if std_tokens not in (["present"], ["absent"]):
        raise ModelParseError("standardization", f"expected present/absent, got {std_tokens}")
    standardization = None
    if std_tokens == ["present"]:
        means = reader.array("means")
        stds = reader.array("stds")
        response_mean = reader.scalar_float("response_mean")
        response_std = reader.scalar_float("response_std")
        try:
            standardization = StandardizationParams(means, stds, response_mean, response_std)
        except ValidationError as exc:
            raise ModelParseError("standardization", str(exc)) from exc

    mu = reader.scalar_float("mu")
    betas = reader.array("betas")
    gammas = reader.array("gammas")
    weights, biases = [], []
    for l in range(len(config.layer_sizes)):
        weights.append(reader.array(f"layer_weights_{l}"))
        biases.append(reader.array(f"layer_biases_{l}"))

    model = XnnModel(
        config=config,
        mu=mu,
        betas=betas,
        weights=weights,
        biases=biases,
        gammas=gammas,
        standardization=standardization,
    )
    validate_model(model)  # shape mismatches surface here as ValidationError
    return model
