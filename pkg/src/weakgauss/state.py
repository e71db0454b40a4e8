"""Single-mode Gaussian states in phase space (hbar = 1).

States are displaced squeezed thermal states with a diagonal variance
matrix. They are built from a squeezing parameter ``u`` and a temperature
parameter ``kappa`` in (0, 1]: the Wigner matrix is ``G = S^T (kappa I) S``
with ``S = diag(e^-u, e^u)`` and the variance matrix is ``V = G^-1 / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from weakgauss.errors import InvalidParameterError

#: Slack allowed when checking the uncertainty bound, so that states which
#: saturate it (coherent states) are not rejected by round-off.
UNCERTAINTY_TOL = 1e-12


@dataclass(frozen=True)
class StateParams:
    u: float
    kappa: float
    q0: float = 0.0
    p0: float = 0.0

    def __post_init__(self):
        for name in ("u", "kappa", "q0", "p0"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameterError(f"{name} must be finite, got {getattr(self, name)!r}")
        if not 0.0 < self.kappa <= 1.0:
            raise InvalidParameterError(f"kappa must lie in (0, 1], got {self.kappa!r}")


@dataclass(frozen=True)
class GaussianState:
    """Gaussian Wigner function centred at ``(q0, p0)`` with spreads ``dq``, ``dp``."""

    q0: float
    p0: float
    dq: float
    dp: float

    def __post_init__(self):
        if not (self.dq > 0 and self.dp > 0):
            raise InvalidParameterError(f"spreads must be positive, got dq={self.dq!r}, dp={self.dp!r}")
        if not (math.isfinite(self.q0) and math.isfinite(self.p0)):
            raise InvalidParameterError("state centre must be finite")
        if self.dq * self.dp < 0.5 - UNCERTAINTY_TOL:
            raise InvalidParameterError(
                f"dq*dp = {self.dq * self.dp!r} violates the uncertainty bound 1/2"
            )

    @property
    def center(self) -> tuple[float, float]:
        return (self.q0, self.p0)


@dataclass(frozen=True)
class VarianceMatrix:
    vqq: float
    vpp: float
    vqp: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([[self.vqq, self.vqp], [self.vqp, self.vpp]])

    @property
    def det(self) -> float:
        return self.vqq * self.vpp - self.vqp * self.vqp


@dataclass(frozen=True)
class Gaussian1D:
    """Univariate normal density."""

    mean: float
    variance: float

    def __post_init__(self):
        if not self.variance > 0:
            raise InvalidParameterError(f"variance must be positive, got {self.variance!r}")

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-0.5 * (x - self.mean) ** 2 / self.variance) / math.sqrt(
            2.0 * math.pi * self.variance
        )


def squeezed_spreads(u, kappa):
    """Return ``(dq, dp)`` for squeezing ``u`` and temperature ``kappa``.

    Works elementwise on arrays; no validation is done here.
    """
    scale = 1.0 / np.sqrt(2.0 * np.asarray(kappa, dtype=float))
    return np.exp(u) * scale, np.exp(-np.asarray(u, dtype=float)) * scale


def make_state(params: StateParams) -> GaussianState:
    dq, dp = squeezed_spreads(params.u, params.kappa)
    return GaussianState(q0=float(params.q0), p0=float(params.p0), dq=float(dq), dp=float(dp))


def variance_matrix(state: GaussianState) -> VarianceMatrix:
    return VarianceMatrix(vqq=state.dq * state.dq, vpp=state.dp * state.dp, vqp=0.0)


def uncertainty_valid(vqq, vpp, vqp=0.0, tol=UNCERTAINTY_TOL):
    """Elementwise form of :func:`uncertainty_ok` for raw moments.

    For a real symmetric 2x2 matrix, ``V + (i/2) beta >= 0`` is equivalent
    to positive diagonal entries and ``det V >= 1/4``.
    """
    vqq = np.asarray(vqq, dtype=float)
    vpp = np.asarray(vpp, dtype=float)
    vqp = np.asarray(vqp, dtype=float)
    with np.errstate(invalid="ignore"):
        ok = (vqq > 0) & (vpp > 0) & (vqq * vpp - vqp * vqp >= 0.25 - tol)
    return ok if ok.ndim else bool(ok)


def uncertainty_ok(v: VarianceMatrix) -> bool:
    if not (math.isfinite(v.vqq) and math.isfinite(v.vpp) and math.isfinite(v.vqp)):
        return False
    return bool(uncertainty_valid(v.vqq, v.vpp, v.vqp))


def wigner_density(state: GaussianState, q, p):
    """Evaluate the Wigner function of ``state`` at ``(q, p)``; broadcasts over arrays."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    x = (q - state.q0) / state.dq
    y = (p - state.p0) / state.dp
    w = np.exp(-0.5 * (x * x + y * y)) / (2.0 * math.pi * state.dq * state.dp)
    return w if w.ndim else float(w)


def marginal_q(state: GaussianState) -> Gaussian1D:
    return Gaussian1D(state.q0, state.dq * state.dq)


def marginal_p(state: GaussianState) -> Gaussian1D:
    return Gaussian1D(state.p0, state.dp * state.dp)


def displace(state: GaussianState, dq0: float, dp0: float) -> GaussianState:
    if not (math.isfinite(dq0) and math.isfinite(dp0)):
        raise InvalidParameterError("displacement must be finite")
    return GaussianState(q0=state.q0 + dq0, p0=state.p0 + dp0, dq=state.dq, dp=state.dp)


def coherent_state(q0: float = 0.0, p0: float = 0.0) -> GaussianState:
    return make_state(StateParams(u=0.0, kappa=1.0, q0=q0, p0=p0))
