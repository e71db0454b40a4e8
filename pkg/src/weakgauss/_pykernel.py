"""Numpy implementation of the trial kernel (fallback for ``_ckernel``).

``simulate_block`` runs ``n_runs`` consecutive trials for one
(state, ensemble size, meter) cell and returns an ``(n_runs, 8)`` array of
estimates ``[q0, p0, dq, dp]`` for the weak scheme followed by the same
four for the projective baseline. Trial ``r`` draws from the streams
``extend_key(prefix_key, 4, run_start + r, tag)``, consuming counters in
the order documented in :mod:`weakgauss.protocol`.
"""

import numpy as np

from weakgauss.rng import PROJECTIVE_TAG, WEAK_TAG, extend_key_array, normal_array

BACKEND = "python"


def _pooled_var(a, b):
    # a, b: (R, h) channels of equal length; n-1 denominator per channel
    h = a.shape[1]
    va = ((a - a.mean(axis=1, keepdims=True)) ** 2).sum(axis=1)
    vb = ((b - b.mean(axis=1, keepdims=True)) ** 2).sum(axis=1)
    return (va + vb) / (2 * (h - 1))


def simulate_block(
    prefix_key, run_start, n_runs, q0, p0, dq, dp, n, dqm, deconvolve=True, weighted=False
):
    if n < 4 or n % 2:
        raise ValueError("kernel needs an even ensemble size >= 4")
    h = n // 2
    dpm = 0.5 / dqm
    a, b = dqm * dqm, dpm * dpm
    runs = np.arange(run_start, run_start + n_runs, dtype=np.uint64)
    out = np.empty((n_runs, 8))

    kw = extend_key_array(prefix_key, 4, runs, WEAK_TAG)
    z = normal_array(kw[:, None], np.arange(2 * n, dtype=np.uint64)[None, :])
    arm1 = z[:, :n].reshape(n_runs, h, 2)
    arm2 = z[:, n:].reshape(n_runs, h, 2)
    weak_q = q0 + np.sqrt(dq * dq + a) * arm1[:, :, 0]
    strong_p = p0 + np.sqrt(dp * dp + b) * arm1[:, :, 1]
    weak_p = p0 + np.sqrt(dp * dp + a) * arm2[:, :, 0]
    strong_q = q0 + np.sqrt(dq * dq + b) * arm2[:, :, 1]

    noise = 0.5 * (a + b)
    for col, weak, strong in ((0, weak_q, strong_q), (1, weak_p, strong_p)):
        var = _pooled_var(weak, strong)
        if deconvolve:
            var = np.maximum(var - noise, 0.0)
        if weighted:
            ww, ws = 1.0 / (var + a), 1.0 / (var + b)
            centre = (ww * weak.sum(axis=1) + ws * strong.sum(axis=1)) / (ww * h + ws * h)
        else:
            centre = (weak.sum(axis=1) + strong.sum(axis=1)) / n
        out[:, col] = centre
        out[:, col + 2] = np.sqrt(var)

    kp = extend_key_array(prefix_key, 4, runs, PROJECTIVE_TAG)
    z = normal_array(kp[:, None], np.arange(n, dtype=np.uint64)[None, :])
    q = q0 + dq * z[:, :h]
    p = p0 + dp * z[:, h:]
    out[:, 4] = q.sum(axis=1) / h
    out[:, 5] = p.sum(axis=1) / h
    out[:, 6] = np.sqrt(((q - q.mean(axis=1, keepdims=True)) ** 2).sum(axis=1) / (h - 1))
    out[:, 7] = np.sqrt(((p - p.mean(axis=1, keepdims=True)) ** 2).sum(axis=1) / (h - 1))
    return out
