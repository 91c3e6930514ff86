"""Brute-force oracles and statistical validators for small instances.

Gap oracles enumerate ``{0,1}^n`` (point index ``i`` has bit ``j`` equal to
``(i >> j) & 1``). They share nothing with the closed-form gap claims in
:mod:`sdfea.fitness`, which they are used to check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.stats import chi2

from .algorithms import AlgorithmSpec, run_optimizer
from .core import RandomSource, derive_seed
from .fitness import FitnessFunction, Jump, LeadingOnes, NoImprovementError, OneMax
from .sampling import (NORMALIZATION_TOL, power_law_cumulative, sample_strength_batch,
                       strength_dist, strength_distribution)

SIGNIFICANCE = 1e-3
MAX_IND_GAP_N = 20
MAX_LEVEL_GAP_N = 16


@dataclass(frozen=True)
class GapReport:
    x: tuple[int, ...]
    ind_gap: int
    level_gap: int


def _all_points(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n)) & 1).astype(np.uint8)


def _index_of(x) -> int:
    return int(sum(int(b) << j for j, b in enumerate(np.asarray(x))))


def _fitness_key(f: FitnessFunction):
    return (type(f).__name__, f.n, tuple(sorted(f.params.items())))


_fitness_tables: dict = {}


def _fitness_table(f: FitnessFunction) -> np.ndarray:
    key = _fitness_key(f)
    table = _fitness_tables.get(key)
    if table is None:
        table = np.array([f.evaluate(p) for p in _all_points(f.n)], dtype=np.float64)
        _fitness_tables[key] = table
    return table


def _check_point(f: FitnessFunction, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint8)
    if x.shape != (f.n,):
        raise ValueError(f"point has shape {x.shape}, expected ({f.n},)")
    return x


def brute_ind_gap(f: FitnessFunction, x) -> int:
    """Minimum Hamming distance from ``x`` to a strictly fitter point, by enumeration."""
    if f.n > MAX_IND_GAP_N:
        raise ValueError(f"exhaustive gap needs n <= {MAX_IND_GAP_N}, got {f.n}")
    x = _check_point(f, x)
    values = _fitness_table(f)
    i = _index_of(x)
    better = np.flatnonzero(values > values[i])
    if better.size == 0:
        raise NoImprovementError("no strictly better point exists")
    return int(np.bitwise_count(better ^ i).min())


def _distance_to_set(mask: np.ndarray, n: int) -> np.ndarray:
    """Hamming distance from every point to the nearest point in ``mask``.

    One relaxation sweep per coordinate is exact because Hamming distance
    is a sum of independent per-coordinate terms.
    """
    big = n + 1
    d = np.where(mask, 0, big).astype(np.int64)
    idx = np.arange(1 << n)
    for j in range(n):
        d = np.minimum(d, d[idx ^ (1 << j)] + 1)
    return d


@lru_cache(maxsize=64)
def _gap_tables_cached(key, n, values_bytes) -> tuple[np.ndarray, np.ndarray]:
    values = np.frombuffer(values_bytes, dtype=np.float64)
    ind = np.full(1 << n, -1, dtype=np.int64)
    for v in np.unique(values):
        members = values == v
        above = values > v
        if not above.any():
            continue
        ind[members] = _distance_to_set(above, n)[members]
    level = np.full(1 << n, -1, dtype=np.int64)
    for v in np.unique(values):
        members = values == v
        level[members] = ind[members].max()
    ind.flags.writeable = False
    level.flags.writeable = False
    return ind, level


def gap_tables(f: FitnessFunction) -> tuple[np.ndarray, np.ndarray]:
    """Individual and level gaps of every point (``-1`` on the optimal level)."""
    if f.n > MAX_LEVEL_GAP_N:
        raise ValueError(f"exhaustive level gap needs n <= {MAX_LEVEL_GAP_N}, got {f.n}")
    values = _fitness_table(f)
    return _gap_tables_cached(_fitness_key(f), f.n, values.tobytes())


def brute_level_gap(f: FitnessFunction, x) -> int:
    """Largest individual gap on the fitness level of ``x``, by enumeration."""
    x = _check_point(f, x)
    _, level = gap_tables(f)
    g = int(level[_index_of(x)])
    if g < 0:
        raise NoImprovementError("the level of a global optimum has no gap")
    return g


def gap_report(f: FitnessFunction, x) -> GapReport:
    return GapReport(tuple(int(b) for b in x), brute_ind_gap(f, x), brute_level_gap(f, x))


def benchmark_grid(max_n: int = 12) -> list[FitnessFunction]:
    """Every OneMax, LeadingOnes and Jump_{k,delta} instance with ``n <= max_n``."""
    grid: list[FitnessFunction] = []
    for n in range(1, max_n + 1):
        grid.append(OneMax(n))
        grid.append(LeadingOnes(n))
        for k in range(1, n + 1):
            for delta in range(1, k + 1):
                grid.append(Jump(n, k, delta))
    return grid


@dataclass
class OracleMismatch:
    function: str
    point: tuple[int, ...]
    kind: str
    claimed: int
    exact: int


def check_gap_claims(f: FitnessFunction) -> list[OracleMismatch]:
    """Compare ``f.ind_gap`` / ``f.level_gap`` with the oracles on every point."""
    ind, level = gap_tables(f)
    points = _all_points(f.n)
    mismatches = []
    for i, x in enumerate(points):
        optimal = ind[i] < 0
        for kind, table in (("ind_gap", ind), ("level_gap", level)):
            claim = getattr(f, kind)
            try:
                claimed = claim(x)
            except NoImprovementError:
                claimed = -1
            exact = int(table[i])
            if optimal:
                exact = -1
            if claimed != exact:
                mismatches.append(OracleMismatch(repr(f), tuple(int(b) for b in x), kind, claimed, exact))
    return mismatches


# ---------------------------------------------------------------- statistics

@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    p_value: float
    dof: int
    bins: int


def pool_bins(observed, expected_counts, min_expected: float = 5.0):
    """Merge adjacent bins left to right until each has expected count >= ``min_expected``.

    A short tail is merged into the last complete bin.
    """
    obs_pooled, exp_pooled = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(observed, expected_counts):
        o_acc += o
        e_acc += e
        if e_acc >= min_expected:
            obs_pooled.append(o_acc)
            exp_pooled.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0 or o_acc > 0:
        if exp_pooled:
            obs_pooled[-1] += o_acc
            exp_pooled[-1] += e_acc
        else:
            obs_pooled.append(o_acc)
            exp_pooled.append(e_acc)
    return np.array(obs_pooled), np.array(exp_pooled)


def chi_square_gof(observed, expected, samples: int) -> ChiSquareResult:
    """Pearson goodness of fit of counts ``observed`` against probabilities ``expected``."""
    observed = np.asarray(observed, dtype=np.float64)
    expected = np.asarray(expected, dtype=np.float64)
    if observed.shape != expected.shape:
        raise ValueError(f"shape mismatch: {observed.shape} vs {expected.shape}")
    if abs(expected.sum() - 1.0) > 1e-9:
        raise ValueError(f"expected probabilities sum to {expected.sum()!r}, not 1")
    if np.any(expected < 0):
        raise ValueError("expected probabilities must be non-negative")
    if observed.sum() != samples:
        raise ValueError(f"observed counts sum to {observed.sum():.0f}, not {samples}")
    impossible = (expected == 0) & (observed > 0)
    if impossible.any():
        # pooling would hide outcomes the model rules out entirely
        return ChiSquareResult(math.inf, 0.0, int(np.count_nonzero(expected)) - 1, int(impossible.sum()))
    obs, exp = pool_bins(observed, expected * samples)
    if obs.size < 2:
        raise ValueError("goodness of fit needs at least two bins after pooling")
    stat = float(np.sum((obs - exp) ** 2 / exp))
    dof = obs.size - 1
    return ChiSquareResult(stat, float(chi2.sf(stat, dof)), dof, int(obs.size))


# ---------------------------------------------------------------- checks

@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    retried: bool = False


def strength_gof(r: int, n: int, gamma: float, beta: float, samples: int, seed: int) -> ChiSquareResult:
    d = strength_dist(r, n, gamma, beta)
    s = sample_strength_batch(d, RandomSource(seed), samples)
    counts = np.bincount(s, minlength=n + 1)
    return chi_square_gof(counts, strength_distribution(r, n, gamma, beta), samples)


def distribution_checks(samples: int = 10**6, n: int = 50, seed: int = 1,
                        rs=(1, 3, 10), gammas=(0.1, 0.25, 0.5),
                        betas=(1.25, 1.5, 2.0)) -> list[CheckResult]:
    """Strength sampler against its closed form on a grid, each retried once on a fresh seed."""
    results = []
    for r in rs:
        for gamma in gammas:
            for beta in betas:
                name = f"strength r={r} gamma={gamma} beta={beta}"
                res = strength_gof(r, n, gamma, beta, samples, derive_seed(seed, "gof", r, gamma, beta))
                retried = False
                if res.p_value <= SIGNIFICANCE:
                    retried = True
                    res = strength_gof(r, n, gamma, beta, samples,
                                       derive_seed(seed, "gof-retry", r, gamma, beta))
                results.append(CheckResult(name, res.p_value > SIGNIFICANCE,
                                           f"chi2={res.statistic:.2f} dof={res.dof} p={res.p_value:.3g}",
                                           retried))
    return results


def normalization_errors(beta: float, max_u: int) -> np.ndarray:
    """``|C * sum_{i<=u} i**-beta - 1|`` for ``u = 1..max_u``.

    ``C`` is the sampler's normalizer (the reciprocal of its cumulative
    table entry); the sum is exactly rounded, independent of that table.
    """
    cum = power_law_cumulative(beta, max_u)
    weights = [i ** -beta for i in range(1, max_u + 1)]
    errs = np.empty(max_u)
    for u in range(1, max_u + 1):
        errs[u - 1] = abs(math.fsum(weights[:u]) / cum[u - 1] - 1.0)
    return errs


def normalization_checks(betas=(1.25, 1.5, 2.0), max_u: int = 10**4) -> list[CheckResult]:
    out = []
    for beta in betas:
        errs = normalization_errors(beta, max_u)
        worst = int(np.argmax(errs)) + 1
        out.append(CheckResult(f"power-law normalization beta={beta} u<= {max_u}",
                               bool(errs.max() <= NORMALIZATION_TOL),
                               f"max error {errs.max():.3g} at u={worst}"))
    return out


def partial_sum_holds(n: int, m: int) -> bool:
    """``sum_{i=1..m} C(n,i) <= (n-m+1)/(n-2m+1) * C(n,m)`` in exact arithmetic."""
    lhs = sum(math.comb(n, i) for i in range(1, m + 1))
    rhs = Fraction(n - m + 1, n - 2 * m + 1) * math.comb(n, m)
    return lhs <= rhs


def partial_sum_checks(max_n: int = 60) -> list[CheckResult]:
    failures = [(n, m) for n in range(1, max_n + 1) for m in range(1, n // 2 + 1)
                if not partial_sum_holds(n, m)]
    total = sum(n // 2 for n in range(1, max_n + 1))
    return [CheckResult(f"binomial partial-sum bound n<={max_n}", not failures,
                        f"{total} (n, m) pairs, {len(failures)} violations"
                        + (f", first {failures[0]}" if failures else ""))]


def oracle_checks(max_n: int = 12) -> list[CheckResult]:
    out = []
    for f in benchmark_grid(max_n):
        mism = check_gap_claims(f)
        if mism:
            m = mism[0]
            out.append(CheckResult(f"gaps {f!r}", False,
                                   f"{len(mism)} mismatches, e.g. {m.kind} at {m.point}: "
                                   f"claimed {m.claimed}, exact {m.exact}"))
    grid = benchmark_grid(max_n)
    if not out:
        out.append(CheckResult(f"gap claims on {len(grid)} instances n<={max_n}", True,
                               "all points agree"))
    return out


# ---------------------------------------------------------------- escape time

@dataclass
class EscapeReport:
    reps: int
    censored: int
    mean_iterations: float
    radius_histogram: dict[int, int]
    phase_occupancy: np.ndarray = field(repr=False)
    iterations: np.ndarray = field(repr=False)

    def mean_iterations_above(self, radius: int) -> float:
        return float(self.phase_occupancy[radius + 1:].sum())


def is_local_optimum(f: FitnessFunction, x) -> bool:
    """No Hamming-1 neighbor is strictly fitter."""
    x = _check_point(f, x)
    fx = f.evaluate(x)
    for j in range(f.n):
        y = x.copy()
        y[j] ^= 1
        if f.evaluate(y) > fx:
            return False
    return True


def escape_time_trial(f: FitnessFunction, algorithm: AlgorithmSpec, start, reps: int,
                      seed: int = 0, budget: int = 10**9) -> EscapeReport:
    """Run from ``start`` until the first strict improvement, ``reps`` times.

    Iterations exclude the evaluation of the start point; the mean covers
    uncensored runs only. ``phase_occupancy``
    is the mean number of iterations per radius; ``radius_histogram`` counts
    the radius at which the improvement happened.
    """
    start = _check_point(f, start)
    if f.n <= MAX_IND_GAP_N:
        try:
            local = brute_ind_gap(f, start) > 1
        except NoImprovementError:
            local = False
    else:
        local = is_local_optimum(f, start)
    if not local:
        raise ValueError("start point is not a local optimum")
    alg = algorithm.build(f.n)
    iters = np.zeros(reps, dtype=np.int64)
    occupancy = np.zeros(f.n + 1)
    hist: dict[int, int] = {}
    censored = 0
    for rep in range(reps):
        out = run_optimizer(alg, f, budget, derive_seed(seed, "escape", rep), x0=start,
                            stop_on_improvement=True)
        iters[rep] = out.evaluations - 1
        occupancy += out.trace.phase_iterations
        if out.success:
            hist[out.trace.improvement_radius] = hist.get(out.trace.improvement_radius, 0) + 1
        else:
            censored += 1
    finished = iters[iters < budget - 1] if censored else iters
    mean = float(finished.mean()) if finished.size else math.nan
    return EscapeReport(reps, censored, mean, dict(sorted(hist.items())), occupancy / reps, iters)


def escape_checks(seed: int = 1) -> list[CheckResult]:
    n, delta = 30, 2
    f = Jump(n, delta)
    start = np.ones(n, dtype=np.uint8)
    start[:delta] = 0
    rep = escape_time_trial(f, AlgorithmSpec("sd-fea", {"gamma": 0.25, "R": 25}), start, 1000, seed)
    target = math.comb(n, delta) / 0.75
    ratio = rep.mean_iterations / target
    return [CheckResult(f"escape Jump_{delta} n={n}", 0.5 <= ratio <= 2.0 and rep.censored == 0,
                        f"mean {rep.mean_iterations:.1f} vs {target:.1f} (ratio {ratio:.3f})")]


def leadingones_level_estimate(n: int, gamma: float = 0.25, beta: float = 1.5) -> float:
    """Expected SD-FEA evaluations on LeadingOnes if the strength stayed at 1.

    Bits behind the first zero stay uniform, so each level is visited with
    probability 1/2 and is left when the flip set contains the first zero
    and none of the prefix. Stagnation phases are ignored, so real runs
    land slightly above this value.
    """
    probs = strength_distribution(1, n, gamma, beta)
    total = 0.0
    for i in range(n):
        q = sum(probs[s] * math.comb(n - i - 1, s - 1) / math.comb(n, s)
                for s in range(1, n - i + 1) if probs[s] > 0)
        total += 0.5 / q
    return total


SUITES = {
    "distribution": lambda: distribution_checks() + normalization_checks(),
    "bounds": lambda: partial_sum_checks() + escape_checks(),
    "oracles": lambda: oracle_checks(),
}


def run_suite(name: str) -> list[CheckResult]:
    try:
        suite = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}") from None
    return suite()
