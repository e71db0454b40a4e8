"""Fast analytic self-checks, exposed as ``weakgauss validate``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from weakgauss import kernels
from weakgauss.measurement import (
    make_meter,
    post_weak_p_projective_q_density,
    post_weak_p_state,
    post_weak_q_projective_p_density,
    post_weak_q_state,
    propagate,
    weak_p_interaction,
    weak_p_reading_density,
    weak_q_interaction,
    weak_q_reading_density,
)
from weakgauss.protocol import expected_d1_projective, expected_d1_weak
from weakgauss.rng import derive_key
from weakgauss.state import StateParams, make_state, squeezed_spreads, uncertainty_valid


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    deviation: float
    threshold: float
    detail: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name}: deviation={self.deviation:.3e} (threshold {self.threshold:.1e}) {self.detail}".rstrip()


def check_uncertainty(n: int = 100_000, seed: int = 1) -> Check:
    rng = np.random.default_rng(seed)
    u = rng.uniform(-3, 3, n)
    kappa = 1.0 - rng.random(n)  # (0, 1]
    dq, dp = squeezed_spreads(u, kappa)
    dev = float(np.max(np.abs(2.0 * kappa * dq * dp - 1.0)))
    ok = bool(np.all(uncertainty_valid(dq * dq, dp * dp)))
    coherent = make_state(StateParams(0.0, 1.0))
    dev = max(dev, abs(coherent.dq * coherent.dp - 0.5))
    return Check("uncertainty saturation", ok and dev <= 1e-12, dev, 1e-12, f"({n} states)")


def check_symplectic() -> Check:
    dev = max(weak_q_interaction().symplectic_defect(), weak_p_interaction().symplectic_defect())
    return Check("interaction maps symplectic", dev <= 1e-12, dev, 1e-12)


def check_variance_addition() -> Check:
    """Closed-form densities vs. covariance pushed through the 4x4 maps."""
    dev = 0.0
    for u, kappa, dqm in ((0.0, 1.0, 1.0), (0.7, 0.8, 0.3), (-0.9, 0.95, 4.0)):
        st = make_state(StateParams(u, kappa, 0.4, -1.1))
        m = make_meter(dqm)
        mean, cov = propagate(weak_q_interaction(), st, m)
        reading, strong = weak_q_reading_density(st, m), post_weak_q_projective_p_density(st, m)
        dev = max(dev, abs(mean[1] - reading.mean), abs(cov[1, 1] - reading.variance))
        dev = max(dev, abs(mean[2] - strong.mean), abs(cov[2, 2] - strong.variance))
        dev = max(dev, abs(post_weak_q_state(st, m).dq - st.dq))
        mean, cov = propagate(weak_p_interaction(), st, m)
        reading, strong = weak_p_reading_density(st, m), post_weak_p_projective_q_density(st, m)
        dev = max(dev, abs(mean[1] - reading.mean), abs(cov[1, 1] - reading.variance))
        dev = max(dev, abs(mean[0] - strong.mean), abs(cov[0, 0] - strong.variance))
        dev = max(dev, abs(post_weak_p_state(st, m).dp - st.dp))
    return Check("variance addition laws", dev <= 1e-12, dev, 1e-12)


def check_d1_law(trials: int = 10_000, seed: int = 7) -> Check:
    """Monte Carlo mean d1 for both schemes against the closed-form laws."""
    _, kernel = kernels.get_kernel()
    st = make_state(StateParams(0.5, 0.9, 1.0, -2.0))
    worst = 0.0
    for n, inv in ((6, math.sqrt(2.0)), (20, 0.5)):
        m = make_meter(1.0 / inv)
        est = kernel(derive_key(seed, n), 0, trials, st.q0, st.p0, st.dq, st.dp, n, m.dqm)
        d1w = np.mean((est[:, 0] - st.q0) ** 2 + (est[:, 1] - st.p0) ** 2)
        d1p = np.mean((est[:, 4] - st.q0) ** 2 + (est[:, 5] - st.p0) ** 2)
        worst = max(
            worst,
            abs(d1w / expected_d1_weak(st, m, n) - 1.0),
            abs(d1p / expected_d1_projective(st, n) - 1.0),
        )
    return Check("closed-form d1 law", worst < 0.05, worst, 0.05, f"({trials} trials)")


def run_selfcheck() -> list[Check]:
    return [check_uncertainty(), check_symplectic(), check_variance_addition(), check_d1_law()]
