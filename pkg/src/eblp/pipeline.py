"""End-to-end linear prediction on transformed observations.

An observation is a sample-space vector ``y`` laid out on the p-grid
together with the diagonal ``d`` of ``A' A`` for its (diagonal) transform
``A``.  Fitting normalizes the backprojected data by the mean transform
weight, optionally whitens, shrinks the singular values, and maps back.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateCoordinateError,
    NotFittedError,
    RankError,
    ShapeError,
)
from .shrinkage import SpikeEstimate, amse, shrink_triplets

__all__ = [
    "TransformedObservation",
    "EblpModel",
    "SignalModel",
    "backproject",
    "estimate_m",
    "available_case_mean",
    "estimated_amse",
    "fit_in_sample",
    "predict_out_of_sample",
    "blp_oracle",
    "simple_blp_uniform",
    "dataset_from_arrays",
]

DEFAULT_M_FLOOR = 1e-6


@dataclass(frozen=True)
class TransformedObservation:
    """One sample: observed vector on the p-grid plus diag(A'A).

    ``y[j]`` is the sample-space value recorded at coordinate j (0 where
    ``d[j] == 0``); ``d[j] >= 0`` is the squared transform weight there.
    Coordinate-selection masks use d in {0, 1}.
    """

    y: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        d = np.asarray(self.d, dtype=float)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "d", d)
        if y.ndim != 1 or d.ndim != 1 or y.size != d.size:
            raise ShapeError("y and d must be 1-d vectors of equal length")
        if np.any(d < 0):
            raise ShapeError("transform weights d must be nonnegative")


def dataset_from_arrays(y: np.ndarray, d: np.ndarray) -> list[TransformedObservation]:
    """Build an observation list from stacked n x p arrays."""
    y = np.asarray(y, dtype=float)
    d = np.asarray(d, dtype=float)
    if y.shape != d.shape or y.ndim != 2:
        raise ShapeError("y and d must be 2-d arrays of identical shape")
    return [TransformedObservation(y=yi, d=di) for yi, di in zip(y, d)]


def backproject(obs: TransformedObservation) -> np.ndarray:
    """A' y for the diagonal transform with diag(A'A) = d, i.e. sqrt(d) * y."""
    return np.sqrt(obs.d) * obs.y


def _stack(dataset: list[TransformedObservation]) -> tuple[np.ndarray, np.ndarray]:
    if not dataset:
        raise ShapeError("dataset must contain at least one observation")
    p = dataset[0].y.size
    for obs in dataset:
        if obs.y.size != p:
            raise ShapeError("observations have inconsistent dimension")
    y = np.stack([obs.y for obs in dataset])
    d = np.stack([obs.d for obs in dataset])
    return y, d


def estimate_m(
    dataset: list[TransformedObservation], floor: float = DEFAULT_M_FLOOR
) -> np.ndarray:
    """Entrywise mean of diag(A'A) over the dataset.

    Raises DegenerateCoordinateError naming every coordinate whose mean
    weight falls below ``floor``.
    """
    _, d = _stack(dataset)
    m_hat = d.mean(axis=0)
    bad = np.flatnonzero(m_hat < floor)
    if bad.size:
        raise DegenerateCoordinateError(bad.tolist(), floor)
    return m_hat


@dataclass(frozen=True)
class EblpModel:
    """Fitted state sufficient for out-of-sample prediction.

    ``u_hat`` lives in the fitting coordinates (whitened when
    ``whitened``); ``w_diag`` is all ones otherwise.  ``mean`` is the
    available-case column mean that was removed before fitting.
    """

    u_hat: np.ndarray            # (p, r)
    v_hat: np.ndarray            # (n, r)
    estimates: list[SpikeEstimate]
    m_hat_diag: np.ndarray       # (p,)
    w_diag: np.ndarray           # (p,)
    rank: int
    whitened: bool
    mean: np.ndarray             # (p,)
    n: int

    @property
    def p(self) -> int:
        return self.m_hat_diag.size

    @property
    def gamma(self) -> float:
        return self.p / self.n


def estimated_amse(model: EblpModel) -> float:
    """AMSE estimate in the fitting (possibly whitened) coordinates."""
    return amse(model.estimates)


def available_case_mean(dataset: list[TransformedObservation]) -> np.ndarray:
    """Column means from observed entries: sum(backprojected) / sum(d)."""
    y, d = _stack(dataset)
    b = np.sqrt(d) * y
    weight = d.sum(axis=0)
    out = np.zeros(y.shape[1])
    seen = weight > 0
    out[seen] = b.sum(axis=0)[seen] / weight[seen]
    return out


def fit_in_sample(
    dataset: list[TransformedObservation],
    r: int,
    whiten: bool = True,
    mode: str = "plugin",
    *,
    center: bool = True,
    m_floor: float = DEFAULT_M_FLOOR,
    m_diag: np.ndarray | None = None,
    noise_var_diag: np.ndarray | None = None,
    noise_var: float = 1.0,
) -> tuple[EblpModel, np.ndarray]:
    """Fit the in-sample predictor and denoise the whole dataset.

    Steps: backproject, normalize by the mean transform weight M-hat,
    optionally whiten by W = M-hat^(1/2), shrink singular values
    (``mode`` as in :func:`shrink_matrix`), unwhiten, restore the mean.

    ``m_diag`` overrides the estimated M-hat (for testing against known
    transforms).  ``noise_var_diag``, when the sample-space noise variances
    are known up to scale, folds them into the whitening so the effective
    noise is isotropic: W = sqrt(M-hat / v).  ``noise_var`` is the white
    -mode effective noise variance.

    Returns (model, X-hat) with X-hat of shape n x p.
    """
    y, d = _stack(dataset)
    n, p = y.shape
    if r < 0 or r > min(n, p):
        raise RankError(f"rank {r} out of range for {n} samples in dimension {p}")

    if m_diag is not None:
        m_hat = np.asarray(m_diag, dtype=float)
        if m_hat.shape != (p,):
            raise ShapeError("m_diag must have length p")
        if np.any(m_hat < m_floor):
            raise DegenerateCoordinateError(
                np.flatnonzero(m_hat < m_floor).tolist(), m_floor
            )
    else:
        m_hat = estimate_m(dataset, floor=m_floor)

    mean = available_case_mean(dataset) if center else np.zeros(p)
    b = np.sqrt(d) * y - d * mean[None, :]

    if whiten:
        if noise_var_diag is not None:
            v = np.asarray(noise_var_diag, dtype=float)
            if v.shape != (p,) or np.any(v <= 0):
                raise ShapeError("noise_var_diag must be p positive reals")
            w_diag = np.sqrt(m_hat / v)
        else:
            w_diag = np.sqrt(m_hat)
    else:
        w_diag = np.ones(p)

    # B~ = B M^-1, then B~ W; combined column scale.
    fit_scale = w_diag / m_hat
    b_fit = b * fit_scale[None, :]

    v_hat, u_hat, estimates = shrink_triplets(b_fit, r, mode=mode, noise_var=noise_var)
    lam = np.array([e.lambda_star for e in estimates])
    x_fit = np.sqrt(n) * (v_hat * lam) @ u_hat.T

    x_hat = x_fit / w_diag[None, :] + mean[None, :]

    model = EblpModel(
        u_hat=u_hat,
        v_hat=v_hat,
        estimates=estimates,
        m_hat_diag=m_hat,
        w_diag=w_diag,
        rank=r,
        whitened=whiten,
        mean=mean,
        n=n,
    )
    return model, x_hat


def predict_out_of_sample(model: EblpModel, obs: TransformedObservation) -> np.ndarray:
    """Predict a fresh observation from the fitted principal components.

    Projects the normalized (and, if the model was fitted whitened,
    whitened) backprojection onto the fitted PCs with per-component
    weights ell c^2 / (ell c^2 + d), where d = 1 in whitened coordinates
    and d = u' M-hat^-1 u otherwise (white original noise).
    """
    if model.u_hat.ndim != 2 or model.m_hat_diag.ndim != 1:
        raise NotFittedError("model is missing fitted arrays")
    p = model.p
    if obs.y.size != p:
        raise ShapeError(f"observation has dimension {obs.y.size}, model expects {p}")

    b = backproject(obs) - obs.d * model.mean
    b_fit = b * (model.w_diag / model.m_hat_diag)

    out = np.zeros(p)
    for col, est in enumerate(model.estimates):
        if not est.supercritical:
            continue
        u = model.u_hat[:, col]
        if model.whitened:
            d_k = 1.0
        else:
            d_k = float(u @ (u / model.m_hat_diag))
        signal = est.ell_hat * est.c2_hat
        eta = signal / (signal + d_k) if signal + d_k > 0 else 0.0
        out += eta * (u @ b_fit) * u
    return out / model.w_diag + model.mean


@dataclass(frozen=True)
class SignalModel:
    """Ground-truth low-rank signal law: strengths, directions, mean."""

    ell: np.ndarray              # (r,), strictly decreasing positive
    u: np.ndarray                # (p, r), orthonormal columns
    mean: np.ndarray | None = None

    def __post_init__(self):
        ell = np.asarray(self.ell, dtype=float)
        u = np.asarray(self.u, dtype=float)
        object.__setattr__(self, "ell", ell)
        object.__setattr__(self, "u", u)
        if ell.ndim != 1 or u.ndim != 2 or u.shape[1] != ell.size:
            raise ShapeError("need ell of length r and u of shape (p, r)")
        if np.any(ell <= 0) or np.any(np.diff(ell) >= 0):
            raise ShapeError("ell must be strictly decreasing and positive")
        if self.mean is not None:
            mean = np.asarray(self.mean, dtype=float)
            object.__setattr__(self, "mean", mean)
            if mean.shape != (u.shape[0],):
                raise ShapeError("mean must have length p")


def blp_oracle(
    obs: TransformedObservation,
    signal: SignalModel,
    noise_cov_diag: np.ndarray,
) -> np.ndarray:
    """Exact best linear predictor given the true signal law (test oracle).

    Evaluates Sigma_X A' (A Sigma_X A' + Sigma_eps)^-1 (y - A mean) + mean
    with a dense solve restricted to the observed coordinates.
    """
    p = obs.y.size
    noise_cov_diag = np.asarray(noise_cov_diag, dtype=float)
    if signal.u.shape[0] != p or noise_cov_diag.shape != (p,):
        raise ShapeError("signal/noise dimensions do not match the observation")
    mean = signal.mean if signal.mean is not None else np.zeros(p)

    observed = np.flatnonzero(obs.d > 0)
    if observed.size == 0:
        return mean.copy()
    a = np.sqrt(obs.d[observed])                       # diagonal of A on support
    u_s = signal.u[observed, :]                        # (q, r)
    y_c = obs.y[observed] - a * mean[observed]

    # K = A Sigma_X A' + Sigma_eps on the support
    k = (a[:, None] * u_s) * signal.ell[None, :] @ u_s.T * a[None, :]
    k[np.diag_indices_from(k)] += noise_cov_diag[observed]
    w = np.linalg.solve(k, y_c)

    coeff = signal.ell * (u_s.T @ (a * w))             # (r,)
    return signal.u @ coeff + mean


def simple_blp_uniform(
    obs: TransformedObservation,
    signal: SignalModel,
    m: float,
) -> np.ndarray:
    """Inverse-free reduction of the BLP valid in the uniform model
    (E A'A = m I, unit noise): sum_k ell_k/(1 + m ell_k) u_k u_k' A'y."""
    p = obs.y.size
    if signal.u.shape[0] != p:
        raise ShapeError("signal dimension does not match the observation")
    mean = signal.mean if signal.mean is not None else np.zeros(p)
    b = backproject(obs) - obs.d * mean
    coeff = (signal.ell / (1.0 + m * signal.ell)) * (signal.u.T @ b)
    return signal.u @ coeff + mean
