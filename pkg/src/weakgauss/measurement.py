"""Meter model, impulsive system-meter couplings and reading densities.

Phase-space vectors of the joint system are ordered ``(q, q_m, p, p_m)``.
A meter is a minimum-uncertainty squeezed vacuum with position spread
``dqm``; a large ``dqm`` means a weak measurement.

Both couplings are linear symplectic maps and the initial joint Wigner
function is a product of Gaussians, so every reading density and every
reduced post-measurement state is Gaussian and is propagated in closed
form: the meter pointer picks up the measured quadrature plus pointer noise
``dqm**2``, while the conjugate system quadrature picks up the meter
momentum noise ``dpm**2 = 1 / (4 dqm**2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from weakgauss.errors import InvalidParameterError
from weakgauss.state import Gaussian1D, GaussianState, marginal_p, marginal_q

#: Canonical form on (q, q_m, p, p_m).
BETA2 = np.array(
    [
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
    ]
)


@dataclass(frozen=True)
class Meter:
    dqm: float

    def __post_init__(self):
        if not (math.isfinite(self.dqm) and self.dqm > 0):
            raise InvalidParameterError(f"meter spread must be positive and finite, got {self.dqm!r}")

    @property
    def dpm(self) -> float:
        return 0.5 / self.dqm


def make_meter(dqm: float) -> Meter:
    return Meter(float(dqm))


@dataclass(frozen=True)
class InteractionSymplectic:
    m: np.ndarray

    def apply(self, xi) -> np.ndarray:
        return self.m @ np.asarray(xi, dtype=float)

    def symplectic_defect(self) -> float:
        """Largest entry of ``|m^T beta2 m - beta2|``."""
        return float(np.max(np.abs(self.m.T @ BETA2 @ self.m - BETA2)))

    def is_symplectic(self, tol: float = 1e-12) -> bool:
        return self.symplectic_defect() <= tol


@dataclass(frozen=True)
class MeasurementOutcome:
    reading: float
    post_state: GaussianState


def weak_q_interaction() -> InteractionSymplectic:
    """Coupling ``q p_m``: ``(q, q_m, p, p_m) -> (q, q_m + q, p - p_m, p_m)``."""
    m = np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [1.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, -1.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )
    return InteractionSymplectic(m)


def weak_p_interaction() -> InteractionSymplectic:
    """Coupling ``p p_m``: ``(q, q_m, p, p_m) -> (q + p_m, q_m + p, p, p_m)``."""
    m = np.array(
        [
            [1.0, 0.0, 0.0, 1.0],
            [0.0, 1.0, 1.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )
    return InteractionSymplectic(m)


def joint_moments(state: GaussianState, meter: Meter):
    """Mean vector and covariance of the product state on ``(q, q_m, p, p_m)``."""
    mean = np.array([state.q0, 0.0, state.p0, 0.0])
    cov = np.diag([state.dq**2, meter.dqm**2, state.dp**2, meter.dpm**2])
    return mean, cov


def propagate(interaction: InteractionSymplectic, state: GaussianState, meter: Meter):
    """Push the joint Gaussian through ``interaction``; returns ``(mean, cov)``.

    Generic matrix route, used to cross-check the closed forms below.
    """
    mean, cov = joint_moments(state, meter)
    m = interaction.m
    return m @ mean, m @ cov @ m.T


def weak_q_reading_density(state: GaussianState, meter: Meter) -> Gaussian1D:
    return Gaussian1D(state.q0, state.dq**2 + meter.dqm**2)


def post_weak_q_state(state: GaussianState, meter: Meter) -> GaussianState:
    return GaussianState(
        q0=state.q0, p0=state.p0, dq=state.dq, dp=math.sqrt(state.dp**2 + meter.dpm**2)
    )


def post_weak_q_projective_p_density(state: GaussianState, meter: Meter) -> Gaussian1D:
    return marginal_p(post_weak_q_state(state, meter))


def weak_p_reading_density(state: GaussianState, meter: Meter) -> Gaussian1D:
    return Gaussian1D(state.p0, state.dp**2 + meter.dqm**2)


def post_weak_p_state(state: GaussianState, meter: Meter) -> GaussianState:
    return GaussianState(
        q0=state.q0, p0=state.p0, dq=math.sqrt(state.dq**2 + meter.dpm**2), dp=state.dp
    )


def post_weak_p_projective_q_density(state: GaussianState, meter: Meter) -> Gaussian1D:
    return marginal_q(post_weak_p_state(state, meter))


def projective_q_density(state: GaussianState) -> Gaussian1D:
    return Gaussian1D(state.q0, state.dq**2)


def projective_p_density(state: GaussianState) -> Gaussian1D:
    return Gaussian1D(state.p0, state.dp**2)


def sample(density: Gaussian1D, rng, size=None):
    """Draw from ``density`` using ``rng`` (a numpy Generator or a CounterStream)."""
    return rng.normal(density.mean, density.std, size)


def measure_weak_q(state: GaussianState, meter: Meter, rng) -> MeasurementOutcome:
    reading = sample(weak_q_reading_density(state, meter), rng)
    return MeasurementOutcome(float(reading), post_weak_q_state(state, meter))


def measure_weak_p(state: GaussianState, meter: Meter, rng) -> MeasurementOutcome:
    reading = sample(weak_p_reading_density(state, meter), rng)
    return MeasurementOutcome(float(reading), post_weak_p_state(state, meter))
