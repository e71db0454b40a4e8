import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weakgauss.errors import InvalidParameterError
from weakgauss.measurement import (
    BETA2,
    make_meter,
    measure_weak_p,
    measure_weak_q,
    post_weak_p_projective_q_density,
    post_weak_p_state,
    post_weak_q_projective_p_density,
    post_weak_q_state,
    projective_p_density,
    projective_q_density,
    propagate,
    sample,
    weak_p_interaction,
    weak_p_reading_density,
    weak_q_interaction,
    weak_q_reading_density,
)
from weakgauss.rng import CounterStream
from weakgauss.state import (
    GaussianState,
    StateParams,
    coherent_state,
    make_state,
    marginal_p,
    marginal_q,
    uncertainty_ok,
    variance_matrix,
)

states = st.builds(
    lambda u, k, q0, p0: make_state(StateParams(u, k, q0, p0)),
    st.floats(-1.5, 1.5),
    st.floats(0.05, 1.0),
    st.floats(-3, 3),
    st.floats(-3, 3),
)
meter_spreads = st.floats(1e-2, 1e2)


# Printed reading densities, transcribed as-is; used as an oracle for the
# simplified closed forms.
def printed_probweak1(x, s, m):
    return math.exp(-0.5 * (x - s.q0) ** 2 / (m.dqm**2 + s.dq**2)) / (
        math.sqrt(2 * math.pi) * m.dqm * s.dq * math.sqrt(1 / m.dqm**2 + 1 / s.dq**2)
    )


def printed_probstrong1(x, s, m):
    # the printed prefactor carries 2*pi; the sqrt(2*pi) normalised form is used
    return math.exp(-0.5 * (x - s.p0) ** 2 / (m.dpm**2 + s.dp**2)) / (
        math.sqrt(2 * math.pi) * m.dpm * s.dp * math.sqrt(1 / m.dpm**2 + 1 / s.dp**2)
    )


def printed_probweak2(x, s, m):
    return math.exp(-((x - s.p0) ** 2) / (2 * (s.dp**2 + m.dqm**2))) / (
        math.sqrt(2 * math.pi) * s.dp * m.dqm * math.sqrt(1 / s.dp**2 + 1 / m.dqm**2)
    )


def printed_probstrong2(x, s, m):
    return math.exp(-0.5 * (x - s.q0) ** 2 / (m.dpm**2 + s.dq**2)) / (
        math.sqrt(2 * math.pi) * m.dpm * s.dq * math.sqrt(1 / m.dpm**2 + 1 / s.dq**2)
    )


@pytest.mark.parametrize("dqm, dpm", [(1.0, 0.5), (0.5, 1.0), (math.sqrt(0.5), math.sqrt(0.5))])
def test_make_meter(dqm, dpm):
    m = make_meter(dqm)
    assert m.dpm == pytest.approx(dpm, rel=1e-15)
    assert m.dqm * m.dpm == pytest.approx(0.5, rel=1e-15)


@pytest.mark.parametrize("dqm", [0.0, -1.0, float("inf"), float("nan")])
def test_make_meter_rejects(dqm):
    with pytest.raises(InvalidParameterError):
        make_meter(dqm)


@pytest.mark.parametrize("factory", [weak_q_interaction, weak_p_interaction])
def test_interactions_symplectic(factory):
    s = factory()
    np.testing.assert_array_equal(s.m.T @ BETA2 @ s.m, BETA2)
    assert s.is_symplectic()


def test_printed_matrix_is_not_symplectic():
    printed = np.array([[1, 0, 0, 0], [1, 1, 0, 0], [0, 0, -1, 1], [0, 0, 0, 1]], dtype=float)
    assert np.max(np.abs(printed.T @ BETA2 @ printed - BETA2)) > 0.5


@pytest.mark.parametrize(
    "factory, xi, expected",
    [
        (weak_q_interaction, (1, 0, 0, 0), (1, 1, 0, 0)),
        (weak_q_interaction, (0, 0, 0, 1), (0, 0, -1, 1)),
        (weak_p_interaction, (0, 0, 1, 0), (0, 1, 1, 0)),
        (weak_p_interaction, (0, 0, 0, 1), (1, 0, 0, 1)),
    ],
)
def test_interaction_action(factory, xi, expected):
    np.testing.assert_array_equal(factory().apply(xi), expected)


def test_interaction_is_heisenberg_flow():
    """The maps are exp(t A) at t=1 for the quadratic Hamiltonians q p_m and p p_m."""
    from scipy.linalg import expm

    # Hamiltonian H = x^T K x / 2 gives dx/dt = BETA2 K x
    kq = np.zeros((4, 4))
    kq[0, 3] = kq[3, 0] = 1.0  # q * p_m
    kp = np.zeros((4, 4))
    kp[2, 3] = kp[3, 2] = 1.0  # p * p_m
    np.testing.assert_allclose(expm(BETA2 @ kq), weak_q_interaction().m, atol=1e-14)
    np.testing.assert_allclose(expm(BETA2 @ kp), weak_p_interaction().m, atol=1e-14)


def test_weak_q_reading_density_examples():
    d = weak_q_reading_density(coherent_state(2.0, 0.0), make_meter(2.0))
    assert (d.mean, d.variance) == pytest.approx((2.0, 4.5))
    d = weak_q_reading_density(make_state(StateParams(0.5, 1.0)), make_meter(1.0))
    assert d.variance == pytest.approx(2.3591409, abs=1e-7)


def test_weak_p_reading_density_examples():
    d = weak_p_reading_density(coherent_state(0.0, -1.0), make_meter(2.0))
    assert (d.mean, d.variance) == pytest.approx((-1.0, 4.5))
    d = weak_p_reading_density(make_state(StateParams(0.5, 1.0)), make_meter(1.0))
    assert d.variance == pytest.approx(1.1839397, abs=1e-7)


def test_post_weak_q_state_examples():
    s = post_weak_q_state(coherent_state(), make_meter(10.0))
    assert s.dp**2 == pytest.approx(0.5025)
    assert s.dq**2 == pytest.approx(0.5)
    s = post_weak_q_state(coherent_state(), make_meter(0.1))
    assert s.dp**2 == pytest.approx(25.5)


def test_post_weak_p_examples():
    s = post_weak_p_state(coherent_state(), make_meter(10.0))
    assert s.dq**2 == pytest.approx(0.5025)
    d = post_weak_p_projective_q_density(coherent_state(3.0, 0.0), make_meter(1.0))
    assert (d.mean, d.variance) == pytest.approx((3.0, 0.75))


def test_post_weak_q_projective_p_example():
    d = post_weak_q_projective_p_density(coherent_state(0.0, 1.0), make_meter(1.0))
    assert (d.mean, d.variance) == pytest.approx((1.0, 0.75))


def test_projective_densities():
    s = coherent_state(1.0, 2.0)
    assert (projective_q_density(s).mean, projective_q_density(s).variance) == pytest.approx((1.0, 0.5))
    assert (projective_p_density(s).mean, projective_p_density(s).variance) == pytest.approx((2.0, 0.5))
    s = make_state(StateParams(-1.0, 0.9))
    assert projective_q_density(s).variance == pytest.approx(math.exp(-2) / 1.8, rel=1e-14)


@settings(max_examples=200)
@given(s=states, dqm=meter_spreads)
def test_densities_match_propagated_covariance(s, dqm):
    m = make_meter(dqm)
    mean, cov = propagate(weak_q_interaction(), s, m)
    d = weak_q_reading_density(s, m)
    assert d.mean == pytest.approx(mean[1]) and d.variance == pytest.approx(cov[1, 1], rel=1e-12)
    d = post_weak_q_projective_p_density(s, m)
    assert d.mean == pytest.approx(mean[2]) and d.variance == pytest.approx(cov[2, 2], rel=1e-12)
    # pointer and conjugate system quadrature are uncorrelated
    assert cov[1, 2] == 0.0
    mean, cov = propagate(weak_p_interaction(), s, m)
    d = weak_p_reading_density(s, m)
    assert d.mean == pytest.approx(mean[1]) and d.variance == pytest.approx(cov[1, 1], rel=1e-12)
    d = post_weak_p_projective_q_density(s, m)
    assert d.mean == pytest.approx(mean[0]) and d.variance == pytest.approx(cov[0, 0], rel=1e-12)
    assert cov[0, 1] == 0.0


@settings(max_examples=100)
@given(s=states, dqm=meter_spreads, x=st.floats(-5, 5))
def test_densities_match_printed_forms(s, dqm, x):
    m = make_meter(dqm)
    pairs = [
        (weak_q_reading_density, printed_probweak1, s.q0),
        (post_weak_q_projective_p_density, printed_probstrong1, s.p0),
        (weak_p_reading_density, printed_probweak2, s.p0),
        (post_weak_p_projective_q_density, printed_probstrong2, s.q0),
    ]
    for ours, printed, centre in pairs:
        at = centre + x
        assert float(ours(s, m).pdf(at)) == pytest.approx(printed(at, s, m), rel=1e-9, abs=1e-300)


@settings(max_examples=200)
@given(s=states, dqm=meter_spreads)
def test_back_action_laws(s, dqm):
    m = make_meter(dqm)
    after_q = post_weak_q_state(s, m)
    assert after_q.dq == s.dq and after_q.center == s.center
    assert after_q.dp**2 == pytest.approx(s.dp**2 + m.dpm**2, rel=1e-14)
    assert uncertainty_ok(variance_matrix(after_q))
    after_p = post_weak_p_state(s, m)
    assert after_p.dp == s.dp and after_p.center == s.center
    assert after_p.dq**2 == pytest.approx(s.dq**2 + m.dpm**2, rel=1e-14)
    assert uncertainty_ok(variance_matrix(after_p))
    assert post_weak_q_projective_p_density(s, m) == marginal_p(after_q)
    assert post_weak_p_projective_q_density(s, m) == marginal_q(after_p)
    assert weak_q_reading_density(s, m).variance == pytest.approx(s.dq**2 + dqm**2, rel=1e-14)


def test_reading_density_symmetry():
    s = make_state(StateParams(0.6, 0.9, 1.0, -2.0))
    swapped = GaussianState(s.p0, s.q0, s.dp, s.dq)
    m = make_meter(1.7)
    assert weak_q_reading_density(s, m) == weak_p_reading_density(swapped, m)


def test_weak_and_strong_limits():
    s = make_state(StateParams(0.4, 0.8, 0.5, 0.5))
    diffs = [abs(post_weak_q_state(s, make_meter(d)).dp - s.dp) for d in (1, 10, 100, 1000)]
    assert all(b < a for a, b in zip(diffs, diffs[1:])) and diffs[-1] < 1e-6
    near = weak_q_reading_density(s, make_meter(1e-6))
    assert near.variance == pytest.approx(projective_q_density(s).variance, rel=1e-10)
    far = post_weak_q_projective_p_density(s, make_meter(1e6))
    assert far.variance == pytest.approx(projective_p_density(s).variance, rel=1e-10)


def test_noise_disturbance_tradeoff():
    x = np.geomspace(0.05, 20, 2001)
    noise = x**2
    disturbance = 1 / (4 * x**2)
    assert np.all(np.diff(noise) > 0) and np.all(np.diff(disturbance) < 0)
    total = noise + disturbance
    j = np.argmin(total)
    assert x[j] == pytest.approx(1 / math.sqrt(2), rel=5e-3)
    assert total[j] == pytest.approx(1.0, abs=1e-5)


def test_sample_is_deterministic():
    from weakgauss.state import Gaussian1D

    d = Gaussian1D(0.0, 1.0)
    a = sample(d, CounterStream(12345))
    b = sample(d, CounterStream(12345))
    assert a == b
    g1, g2 = np.random.default_rng(5), np.random.default_rng(5)
    assert sample(d, g1) == sample(d, g2)


@pytest.mark.parametrize("make_rng", [lambda: CounterStream(99), lambda: np.random.default_rng(99)])
def test_sample_moments(make_rng):
    from weakgauss.state import Gaussian1D

    x = sample(Gaussian1D(2.0, 4.5), make_rng(), size=100_000)
    assert abs(x.mean() - 2.0) < 3 * math.sqrt(4.5 / 1e5)
    assert x.var(ddof=1) == pytest.approx(4.5, rel=0.05)


def test_measure_outcomes():
    s = make_state(StateParams(0.2, 0.9, 1.0, 1.0))
    m = make_meter(0.8)
    out = measure_weak_q(s, m, CounterStream(1))
    assert out.post_state == post_weak_q_state(s, m)
    assert math.isfinite(out.reading)
    out = measure_weak_p(s, m, CounterStream(1))
    assert out.post_state == post_weak_p_state(s, m)
