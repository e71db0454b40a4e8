import math

import numpy as np
import pytest

from weakgauss import kernels
from weakgauss.measurement import make_meter
from weakgauss.protocol import (
    distances,
    estimate_from_readings,
    expected_d1_projective,
    expected_d1_weak,
    run_projective_baseline,
    run_weak_protocol,
)
from weakgauss.rng import PROJECTIVE_TAG, WEAK_TAG, CounterStream, derive_key, extend_key
from weakgauss.state import StateParams, coherent_state, make_state

STATE = make_state(StateParams(0.45, 0.85, -1.2, 0.7))
PREFIX = derive_key(2024, 0, 1, 2, 3)


def run(kernel, n=6, dqm=0.8, runs=64, start=0, deconvolve=True, weighted=False, state=STATE):
    s = state
    return kernel(PREFIX, start, runs, s.q0, s.p0, s.dq, s.dp, n, dqm, deconvolve, weighted)


@pytest.mark.parametrize("deconvolve", [True, False])
@pytest.mark.parametrize("weighted", [False, True])
@pytest.mark.parametrize("n", [4, 6, 20])
def test_kernel_matches_protocol_route(kernel, deconvolve, weighted, n):
    m = make_meter(0.8)
    out = run(kernel, n=n, runs=10, deconvolve=deconvolve, weighted=weighted)
    for r in range(10):
        run_key = extend_key(PREFIX, 4, r)
        rs = run_weak_protocol(STATE, n, m, CounterStream(extend_key(run_key, 5, WEAK_TAG)))
        w = estimate_from_readings(rs, m, deconvolve, weighted)
        p = run_projective_baseline(STATE, n, CounterStream(extend_key(run_key, 5, PROJECTIVE_TAG)))
        ref = [w.q0_est, w.p0_est, w.dq_est, w.dp_est, p.q0_est, p.p0_est, p.dq_est, p.dp_est]
        np.testing.assert_allclose(out[r], ref, rtol=1e-12, atol=1e-12)


@pytest.mark.skipif(kernels.compiled_simulate_block is None, reason="compiled kernel not built")
def test_backends_agree():
    a = run(kernels.get_kernel("cython")[1], runs=5000, n=8, dqm=1.3)
    b = run(kernels.get_kernel("python")[1], runs=5000, n=8, dqm=1.3)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-13)


def test_blocks_compose(kernel):
    whole = run(kernel, runs=40)
    parts = np.vstack([run(kernel, runs=15), run(kernel, runs=25, start=15)])
    np.testing.assert_array_equal(whole, parts)


def test_kernel_rejects_bad_size(kernel):
    with pytest.raises(ValueError):
        run(kernel, n=5)
    with pytest.raises(ValueError):
        run(kernel, n=2)


def test_kernel_center_unbiased(kernel):
    out = run(kernel, runs=100_000, n=6, dqm=0.6)
    m = make_meter(0.6)
    var_q = (2 * STATE.dq**2 + m.dqm**2 + m.dpm**2) / (2 * 6)
    assert abs(out[:, 0].mean() - STATE.q0) < 3 * math.sqrt(var_q / 1e5)
    assert abs(out[:, 4].mean() - STATE.q0) < 3 * math.sqrt(STATE.dq**2 / 3 / 1e5)


@pytest.mark.parametrize("n, inv", [(6, math.sqrt(2)), (20, 0.5), (20, 3.0)])
def test_kernel_d1_law(kernel, n, inv):
    m = make_meter(1 / inv)
    out = run(kernel, runs=100_000, n=n, dqm=m.dqm)
    d1w = np.mean((out[:, 0] - STATE.q0) ** 2 + (out[:, 1] - STATE.p0) ** 2)
    d1p = np.mean((out[:, 4] - STATE.q0) ** 2 + (out[:, 5] - STATE.p0) ** 2)
    assert d1w == pytest.approx(expected_d1_weak(STATE, m, n), rel=0.02)
    assert d1p == pytest.approx(expected_d1_projective(STATE, n), rel=0.02)


def test_kernel_spread_estimates_consistent(kernel):
    """Deconvolved pooled variance is unbiased for the intrinsic variance."""
    m = make_meter(0.9)
    out = run(kernel, runs=100_000, n=20, dqm=m.dqm, deconvolve=False)
    noise = 0.5 * (m.dqm**2 + m.dpm**2)
    assert np.mean(out[:, 2] ** 2) - noise == pytest.approx(STATE.dq**2, rel=0.02)
    assert np.mean(out[:, 3] ** 2) - noise == pytest.approx(STATE.dp**2, rel=0.03)
    assert np.mean(out[:, 6] ** 2) == pytest.approx(STATE.dq**2, rel=0.02)


def test_coherent_equality_point(kernel):
    c = coherent_state()
    out = run(kernel, runs=100_000, n=20, dqm=1 / math.sqrt(2), state=c)
    d1w = (out[:, 0] ** 2 + out[:, 1] ** 2)
    d1p = (out[:, 4] ** 2 + out[:, 5] ** 2)
    assert d1w.mean() == pytest.approx(0.1, rel=0.02)
    assert d1p.mean() == pytest.approx(0.1, rel=0.02)
    se = math.sqrt(d1w.var() / 1e5 + d1p.var() / 1e5)
    assert abs(d1w.mean() - d1p.mean()) < 3 * se


def test_squeezed_state_ordering(kernel):
    s = make_state(StateParams(1.0, 1.0))
    out = run(kernel, runs=100_000, n=20, dqm=1 / math.sqrt(2), state=s)
    d1w = np.mean(out[:, 0] ** 2 + out[:, 1] ** 2)
    d1p = np.mean(out[:, 4] ** 2 + out[:, 5] ** 2)
    assert d1w == pytest.approx((math.cosh(2) + 1) / 20, rel=0.02)
    assert d1p == pytest.approx(2 * math.cosh(2) / 20, rel=0.02)
    assert d1w < d1p


def test_python_fallback_selected_by_env(monkeypatch):
    import importlib

    monkeypatch.setenv("WEAKGAUSS_BACKEND", "python")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.delenv("WEAKGAUSS_BACKEND")
        importlib.reload(kernels)
