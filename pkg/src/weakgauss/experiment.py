"""Monte Carlo harness: random states, repeated trials, weakness sweeps.

Randomness is keyed by position, never by execution order:

* state ``s`` of a sweep uses ``derive_key(seed, kappa_index, STATE_TAG, s)``
  (uniform draws 0, 1, 2 give ``u``, ``q0``, ``p0``), so the same states are
  reused at every grid point and ensemble size;
* trial ``r`` uses ``derive_key(seed, kappa_index, size_index, grid_index,
  s, r, scheme_tag)``.

Work is split per (size, grid point, state) cell and may run on a thread
pool (``WEAKGAUSS_THREADS``); the reduction is done in index order, so the
output is identical for any worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from weakgauss import kernels
from weakgauss.errors import ConfigError, InvalidParameterError
from weakgauss.measurement import make_meter
from weakgauss.protocol import (
    DistanceMeasures,
    distances,
    estimate_from_readings,
    run_projective_baseline,
    run_weak_protocol,
)
from weakgauss.rng import PROJECTIVE_TAG, STATE_TAG, WEAK_TAG, CounterStream, derive_key, extend_key
from weakgauss.state import GaussianState, StateParams, make_state

DEFAULT_GRID = tuple(float(x) for x in np.geomspace(0.1, 3.0, 24))
DEFAULT_SIZES = (20, 10, 8, 6)
DEFAULT_SEED = 20240601
# the harness refuses meters outside this range of dqm (library accepts any)
DQM_BOUNDS = (1e-3, 1e3)

AVERAGE_DISTANCES = "distances"
AVERAGE_ESTIMATES = "estimates"


@dataclass(frozen=True)
class ExperimentConfig:
    kappa: float
    n_states: int = 100
    n_runs: int = 1000
    ensemble_sizes: tuple = DEFAULT_SIZES
    inv_dqm_grid: tuple = DEFAULT_GRID
    u_range: tuple = (-1.0, 1.0)
    center_range: tuple = (-3.0, 3.0)
    master_seed: int = DEFAULT_SEED
    deconvolve: bool = True
    weighting: bool = False
    average_mode: str = AVERAGE_DISTANCES
    printed_d2: bool = False
    kappa_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "ensemble_sizes", tuple(int(n) for n in self.ensemble_sizes))
        object.__setattr__(self, "inv_dqm_grid", tuple(float(x) for x in self.inv_dqm_grid))
        object.__setattr__(self, "u_range", tuple(float(x) for x in self.u_range))
        object.__setattr__(self, "center_range", tuple(float(x) for x in self.center_range))
        self.validate()

    def validate(self):
        def bad(name, why):
            raise ConfigError(f"{name}: {why}", field=name)

        if not (isinstance(self.kappa, (int, float)) and 0.0 < self.kappa <= 1.0):
            bad("kappa", f"must lie in (0, 1], got {self.kappa!r}")
        for name in ("n_states", "n_runs"):
            if getattr(self, name) < 1:
                bad(name, "must be >= 1")
        if not self.ensemble_sizes:
            bad("ensemble_sizes", "must not be empty")
        for n in self.ensemble_sizes:
            if n < 4 or n % 2:
                bad("ensemble_sizes", f"sizes must be even and >= 4, got {n}")
        grid = self.inv_dqm_grid
        if not grid:
            bad("inv_dqm_grid", "must not be empty")
        if any(not (math.isfinite(x) and x > 0) for x in grid):
            bad("inv_dqm_grid", "values must be positive and finite")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            bad("inv_dqm_grid", "values must be strictly increasing")
        lo, hi = DQM_BOUNDS
        if any(not (lo <= 1.0 / x <= hi) for x in grid):
            bad("inv_dqm_grid", f"meter spreads must lie in [{lo}, {hi}]")
        for name in ("u_range", "center_range"):
            r = getattr(self, name)
            if len(r) != 2 or not (r[0] < r[1]) or not all(map(math.isfinite, r)):
                bad(name, f"must be a nonempty finite interval, got {r!r}")
        if self.average_mode not in (AVERAGE_DISTANCES, AVERAGE_ESTIMATES):
            bad("average_mode", f"must be {AVERAGE_DISTANCES!r} or {AVERAGE_ESTIMATES!r}")
        if not 0 <= self.master_seed < 2**64:
            bad("master_seed", "must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("ensemble_sizes", "inv_dqm_grid", "u_range", "center_range"):
            d[k] = list(d[k])
        return d


@dataclass(frozen=True)
class SweepPoint:
    inv_dqm: float
    d1_weak_mean: float
    d2_weak_mean: float
    d1_proj_mean: float
    d2_proj_mean: float
    d1_weak_se: float
    d2_weak_se: float
    d1_proj_se: float
    d2_proj_se: float


@dataclass
class SweepResult:
    config: ExperimentConfig
    points: dict  # ensemble size -> list[SweepPoint], one per grid value
    backend: str = ""
    # per-state averages, shape (n_sizes, n_grid, n_states, 4): d1w, d2w, d1p, d2p
    per_state: np.ndarray | None = field(default=None, repr=False)

    def curve(self, n: int, attr: str) -> np.ndarray:
        return np.array([getattr(pt, attr) for pt in self.points[n]])


def random_state(kappa: float, rng, u_range=(-1.0, 1.0), center_range=(-3.0, 3.0)) -> GaussianState:
    """Draw ``u`` and the centre uniformly and build the state at temperature ``kappa``."""
    if not (isinstance(kappa, (int, float)) and 0.0 < kappa <= 1.0):
        raise InvalidParameterError(f"kappa must lie in (0, 1], got {kappa!r}")
    u = rng.uniform(*u_range)
    q0 = rng.uniform(*center_range)
    p0 = rng.uniform(*center_range)
    return make_state(StateParams(u=float(u), kappa=float(kappa), q0=float(q0), p0=float(p0)))


def sweep_states(config: ExperimentConfig) -> list[GaussianState]:
    return [
        random_state(
            config.kappa,
            CounterStream.from_indices(config.master_seed, config.kappa_index, STATE_TAG, s),
            config.u_range,
            config.center_range,
        )
        for s in range(config.n_states)
    ]


def run_trial(
    state: GaussianState,
    n: int,
    inv_dqm: float,
    rng,
    deconvolve: bool = True,
    weighted: bool = False,
    printed_d2: bool = False,
) -> tuple[DistanceMeasures, DistanceMeasures]:
    """One weak-scheme and one baseline estimate of ``state``.

    ``rng`` is either an integer trial key, from which the two schemes get
    independent substreams, or a generator shared by both schemes.
    """
    if not inv_dqm > 0:
        raise InvalidParameterError(f"inv_dqm must be positive, got {inv_dqm!r}")
    meter = make_meter(1.0 / inv_dqm)
    if isinstance(rng, (int, np.integer)):
        rw = CounterStream(extend_key(int(rng), 5, WEAK_TAG))
        rp = CounterStream(extend_key(int(rng), 5, PROJECTIVE_TAG))
    else:
        rw = rp = rng
    est_w = estimate_from_readings(run_weak_protocol(state, n, meter, rw), meter, deconvolve, weighted)
    est_p = run_projective_baseline(state, n, rp)
    return distances(state, est_w, printed_d2), distances(state, est_p, printed_d2)


def trial_key(config: ExperimentConfig, size_index, grid_index, state_index, run_index) -> int:
    """Key that :func:`run_trial` expects for one cell of a sweep."""
    return derive_key(
        config.master_seed, config.kappa_index, size_index, grid_index, state_index, run_index
    )


def _cell_distances(est: np.ndarray, state: GaussianState, mode: str, printed_d2: bool) -> np.ndarray:
    """Average d1/d2 of weak and projective estimates over the runs of one cell."""
    ref_p = state.dq if printed_d2 else state.dp
    out = np.empty(4)
    for k, off in enumerate((0, 4)):
        block = est[:, off : off + 4]
        if mode == AVERAGE_ESTIMATES:
            block = block.mean(axis=0, keepdims=True)
        d1 = (state.q0 - block[:, 0]) ** 2 + (state.p0 - block[:, 1]) ** 2
        d2 = (state.dq - block[:, 2]) ** 2 + (ref_p - block[:, 3]) ** 2
        out[2 * k] = d1.mean()
        out[2 * k + 1] = d2.mean()
    return out


def _resolve_threads(threads):
    if threads is None:
        threads = int(os.environ.get("WEAKGAUSS_THREADS", "1") or 1)
    return max(1, int(threads))


def run_sweep(config: ExperimentConfig, threads: int | None = None, backend: str | None = None) -> SweepResult:
    """Run every (ensemble size, grid point, state) cell of ``config``.

    Per cell the d-measures are averaged over ``n_runs`` trials; the
    per-state averages are then averaged over states, with standard errors
    taken across states.
    """
    backend_name, kernel = kernels.get_kernel(backend)
    threads = _resolve_threads(threads)
    states = sweep_states(config)
    sizes, grid = config.ensemble_sizes, config.inv_dqm_grid
    n_states = len(states)
    per_state = np.empty((len(sizes), len(grid), n_states, 4))

    def work(size_index, grid_index):
        n, inv = sizes[size_index], grid[grid_index]
        dqm = 1.0 / inv
        rows = np.empty((n_states, 4))
        for s, st in enumerate(states):
            prefix = derive_key(config.master_seed, config.kappa_index, size_index, grid_index, s)
            est = kernel(
                prefix, 0, config.n_runs, st.q0, st.p0, st.dq, st.dp, n, dqm,
                config.deconvolve, config.weighting,
            )
            rows[s] = _cell_distances(est, st, config.average_mode, config.printed_d2)
        return size_index, grid_index, rows

    cells = [(i, j) for i in range(len(sizes)) for j in range(len(grid))]
    if threads == 1:
        results = [work(*c) for c in cells]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda c: work(*c), cells))
    for i, j, rows in results:
        per_state[i, j] = rows

    means = per_state.mean(axis=2)
    if n_states > 1:
        ses = per_state.std(axis=2, ddof=1) / math.sqrt(n_states)
    else:
        ses = np.zeros_like(means)
    points = {}
    for i, n in enumerate(sizes):
        points[n] = [
            SweepPoint(
                inv_dqm=grid[j],
                d1_weak_mean=float(means[i, j, 0]),
                d2_weak_mean=float(means[i, j, 1]),
                d1_proj_mean=float(means[i, j, 2]),
                d2_proj_mean=float(means[i, j, 3]),
                d1_weak_se=float(ses[i, j, 0]),
                d2_weak_se=float(ses[i, j, 1]),
                d1_proj_se=float(ses[i, j, 2]),
                d2_proj_se=float(ses[i, j, 3]),
            )
            for j in range(len(grid))
        ]
    return SweepResult(config=config, points=points, backend=backend_name, per_state=per_state)


@dataclass(frozen=True)
class CurveSummary:
    measure: str
    argmin_inv_dqm: float
    min_weak: float
    min_weak_se: float
    proj_at_min: float
    proj_at_min_se: float
    crossover: tuple | None  # (lowest, highest) grid value where weak < projective
    relative_advantage: float  # (proj - min weak) / proj at the weak optimum


@dataclass(frozen=True)
class SizeSummary:
    kappa: float
    ensemble_size: int
    d1: CurveSummary
    d2: CurveSummary


def _summarize_curve(points, measure: str) -> CurveSummary:
    w = np.array([getattr(p, f"{measure}_weak_mean") for p in points])
    pr = np.array([getattr(p, f"{measure}_proj_mean") for p in points])
    j = int(np.argmin(w))
    better = [p.inv_dqm for p, a, b in zip(points, w, pr) if a < b]
    return CurveSummary(
        measure=measure,
        argmin_inv_dqm=points[j].inv_dqm,
        min_weak=float(w[j]),
        min_weak_se=getattr(points[j], f"{measure}_weak_se"),
        proj_at_min=float(pr[j]),
        proj_at_min_se=getattr(points[j], f"{measure}_proj_se"),
        crossover=(min(better), max(better)) if better else None,
        relative_advantage=float((pr[j] - w[j]) / pr[j]) if pr[j] > 0 else float("nan"),
    )


def summarize(result: SweepResult) -> list[SizeSummary]:
    if not result.points or any(len(v) == 0 for v in result.points.values()):
        raise ValueError("cannot summarize an empty sweep")
    return [
        SizeSummary(
            kappa=result.config.kappa,
            ensemble_size=n,
            d1=_summarize_curve(pts, "d1"),
            d2=_summarize_curve(pts, "d2"),
        )
        for n, pts in sorted(result.points.items())
    ]
