"""Text formats used by the command-line tools.

Matrices are whitespace-delimited rows (samples), ``#`` starts a comment
line, and missing entries are a configurable token (default ``NA``).
Numbers are written with 17 significant digits so values round-trip.
Fitted models are stored as JSON.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ParseError
from .pipeline import EblpModel
from .shrinkage import SpikeEstimate

__all__ = [
    "read_matrix",
    "write_matrix",
    "read_mask",
    "write_model",
    "read_model",
    "write_results",
    "read_results",
    "RESULT_COLUMNS",
]

_FMT = "%.17g"


def _data_lines(path) -> list[list[str]]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        rows.append(stripped.split())
    return rows


def read_matrix(path, na_token: str = "NA") -> tuple[np.ndarray, np.ndarray]:
    """Read a delimited matrix; returns (values, observed) where missing
    entries are 0 in ``values`` and 0 in the observed indicator."""
    rows = _data_lines(path)
    if not rows:
        return np.zeros((0, 0)), np.zeros((0, 0))
    width = len(rows[0])
    values = np.zeros((len(rows), width))
    observed = np.ones((len(rows), width))
    for i, tokens in enumerate(rows):
        if len(tokens) != width:
            raise ParseError(
                f"{path}: row {i + 1} has {len(tokens)} fields, expected {width}"
            )
        for j, tok in enumerate(tokens):
            if tok == na_token:
                observed[i, j] = 0.0
                continue
            try:
                values[i, j] = float(tok)
            except ValueError as exc:
                raise ParseError(
                    f"{path}: row {i + 1}, field {j + 1}: not a number: {tok!r}"
                ) from exc
    return values, observed


def write_matrix(path, matrix, observed=None, na_token: str = "NA") -> None:
    matrix = np.asarray(matrix, dtype=float)
    lines = []
    for i in range(matrix.shape[0]):
        fields = []
        for j in range(matrix.shape[1]):
            if observed is not None and not observed[i, j]:
                fields.append(na_token)
            else:
                fields.append(_FMT % matrix[i, j])
        lines.append(" ".join(fields))
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_mask(path) -> np.ndarray:
    values, observed = read_matrix(path)
    if not np.all(observed):
        raise ParseError(f"{path}: mask files cannot contain missing entries")
    if values.size and not np.all(np.isin(values, (0.0, 1.0))):
        raise ParseError(f"{path}: mask entries must be 0 or 1")
    return values


MODEL_FORMAT = "eblp-model"
MODEL_VERSION = 1


def write_model(path, model: EblpModel) -> None:
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "rank": model.rank,
        "whitened": model.whitened,
        "n": model.n,
        "m_hat_diag": model.m_hat_diag.tolist(),
        "w_diag": model.w_diag.tolist(),
        "mean": model.mean.tolist(),
        "u_hat": model.u_hat.T.tolist(),     # one list per component
        "estimates": [
            {
                "ell_hat": e.ell_hat,
                "c2_hat": e.c2_hat,
                "ct2_hat": e.ct2_hat,
                "lambda_star": e.lambda_star,
                "sigma_obs": e.sigma_obs,
                "supercritical": e.supercritical,
                "clamped": e.clamped,
            }
            for e in model.estimates
        ],
    }
    Path(path).write_text(json.dumps(payload))


def read_model(path) -> EblpModel:
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot parse model file {path}: {exc}") from exc
    try:
        if payload["format"] != MODEL_FORMAT:
            raise ParseError(f"{path}: not a model file")
        m_hat = np.asarray(payload["m_hat_diag"], dtype=float)
        p = m_hat.size
        u_hat = np.asarray(payload["u_hat"], dtype=float).reshape(-1, p).T
        estimates = [SpikeEstimate(**entry) for entry in payload["estimates"]]
        model = EblpModel(
            u_hat=u_hat,
            v_hat=np.zeros((0, u_hat.shape[1])),
            estimates=estimates,
            m_hat_diag=m_hat,
            w_diag=np.asarray(payload["w_diag"], dtype=float),
            rank=int(payload["rank"]),
            whitened=bool(payload["whitened"]),
            mean=np.asarray(payload["mean"], dtype=float),
            n=int(payload["n"]),
        )
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: malformed model file: {exc}") from exc
    if model.w_diag.size != p or model.mean.size != p:
        raise ParseError(f"{path}: inconsistent model dimensions")
    if len(model.estimates) != model.u_hat.shape[1]:
        raise ParseError(f"{path}: estimates do not match component count")
    return model


RESULT_COLUMNS = (
    "experiment",
    "method",
    "sigma",
    "delta",
    "kappa",
    "sparsity",
    "replicate",
    "rmse",
    "seconds",
    "amse_est",
)

_NUMERIC_COLUMNS = {"sigma", "delta", "kappa", "rmse", "seconds", "amse_est"}


def write_results(path, rows: list[dict]) -> None:
    lines = [" ".join(RESULT_COLUMNS)]
    for row in rows:
        fields = []
        for col in RESULT_COLUMNS:
            val = row[col]
            if col == "replicate":
                fields.append(str(int(val)))
            elif col in _NUMERIC_COLUMNS:
                fields.append(_FMT % float(val))
            else:
                fields.append(str(val))
        lines.append(" ".join(fields))
    Path(path).write_text("\n".join(lines) + "\n")


def read_results(path) -> list[dict]:
    rows = _data_lines(path)
    if not rows or tuple(rows[0]) != RESULT_COLUMNS:
        raise ParseError(f"{path}: missing or unexpected results header")
    out = []
    for tokens in rows[1:]:
        if len(tokens) != len(RESULT_COLUMNS):
            raise ParseError(f"{path}: malformed results row: {tokens}")
        row = dict(zip(RESULT_COLUMNS, tokens))
        row["replicate"] = int(row["replicate"])
        for col in _NUMERIC_COLUMNS:
            row[col] = float(row[col])
        out.append(row)
    return out
