"""SD-FEA and the comparator hillclimbers behind one run interface.

Each algorithm has a single-iteration function (``sd_fea_step``, ``rls_step``,
...) operating on an :class:`OptimizerState`; :func:`run_optimizer` drives
those steps, or hands the whole run to the compiled kernel when it is
available and the fitness function is one of the built-in benchmarks. Both
paths consume the random stream identically, so a given seed yields the same
:class:`RunOutcome` either way.
"""
from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable

import numpy as np

from .core import (RandomSource, binomial_cdf, flip_positions, sample_from_cdf)
from .fitness import BENCHMARKS, CountingFitness, FitnessFunction
from .sampling import (phase_length, power_law, power_law_cumulative, sample_power_law,
                       sample_strength, strength_dist)

try:
    from . import _kernels
except ImportError:  # extension not built
    _kernels = None

if os.environ.get("SDFEA_PURE_PYTHON"):
    _kernels = None

DEFAULT_BUDGET = 10**9

SD_FEA, RLS, OEA, FEA, SD_OEA, SD_RLS_R = range(6)


def compiled_available() -> bool:
    return _kernels is not None


def sd_fea_cap(n: int) -> int:
    """Largest strength SD-FEA and SD-RLS^r use: ``floor(n / 2.1)``, at least 1."""
    return max(1, math.floor(n / 2.1))


def resolve_R(value: Any, n: int) -> float:
    """``R`` as a number, or as a power of ``n`` written ``"n^2"`` / ``"n**2"``."""
    if isinstance(value, str):
        m = re.fullmatch(r"\s*n\s*(?:\^|\*\*)\s*([0-9]+(?:\.[0-9]*)?)\s*", value)
        if not m:
            raise ValueError(f"cannot interpret R={value!r}; use a number or 'n^e'")
        return float(n) ** float(m.group(1))
    return float(value)


@dataclass(frozen=True)
class SdFeaParams:
    beta: float = 1.5
    gamma: float = 0.25
    R: float = 25.0

    def __post_init__(self):
        if not self.beta > 1:
            raise ValueError(f"beta must exceed 1, got {self.beta}")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")
        if not self.R > 1:
            raise ValueError(f"R must exceed 1, got {self.R}")


@dataclass(frozen=True)
class FeaParams:
    beta: float = 1.5
    cap: int | None = None  # power-law bound for the rate numerator; None means n // 2

    def __post_init__(self):
        if not self.beta > 1:
            raise ValueError(f"beta must exceed 1, got {self.beta}")


@dataclass(frozen=True)
class SdOeaParams:
    R: float

    def __post_init__(self):
        if not self.R > 1:
            raise ValueError(f"R must exceed 1, got {self.R}")


@dataclass(frozen=True)
class SdRlsParams:
    R: float

    def __post_init__(self):
        if not self.R > 1:
            raise ValueError(f"R must exceed 1, got {self.R}")


@dataclass
class RunTrace:
    """Per-run instrumentation.

    ``phase_iterations[r]`` counts iterations spent with radius ``r`` (the
    strength for SD-FEA and SD-(1+1) EA, the outer radius for SD-RLS^r, 1 for
    the others). ``improvement_radius`` is the radius at the most recent
    strict improvement (0 if none). ``last_improvement_at`` and
    ``previous_improvement_at`` are the evaluation counts of the two most
    recent strict improvements (0 if absent).
    """

    phase_iterations: np.ndarray
    flips_above_radius: int = 0
    improvement_radius: int = 0
    improvements: int = 0
    last_improvement_at: int = 0
    previous_improvement_at: int = 0


@dataclass
class OptimizerState:
    x: np.ndarray
    fx: float
    r: int = 1
    s: int = 1
    u: int = 0
    perm: np.ndarray = None
    trace: RunTrace = None

    def __post_init__(self):
        n = self.x.shape[0]
        if self.perm is None:
            self.perm = np.arange(n, dtype=np.int64)
        if self.trace is None:
            self.trace = RunTrace(np.zeros(n + 1, dtype=np.int64))


@dataclass
class RunOutcome:
    evaluations: int
    success: bool
    final_fitness: float
    final_point: np.ndarray = field(repr=False)
    trace: RunTrace | None = field(default=None, repr=False)


def _mutate(state: OptimizerState, s: int, rng: RandomSource) -> np.ndarray:
    y = state.x.copy()
    flip_positions(y, s, rng, state.perm)
    state.trace.phase_iterations[state.r] += 1
    if s > state.r:
        state.trace.flips_above_radius += 1
    return y


def _improve(state: OptimizerState, y, fy, f) -> None:
    state.x, state.fx = y, fy
    trace = state.trace
    trace.improvement_radius = state.r
    trace.improvements += 1
    trace.previous_improvement_at = trace.last_improvement_at
    trace.last_improvement_at = f.count


@lru_cache(maxsize=256)
def sd_fea_thresholds(n: int, gamma: float, R: float) -> np.ndarray:
    ell = np.full(n + 1, np.inf)
    for r in range(1, min(sd_fea_cap(n), n) + 1):
        ell[r] = phase_length(n, r, gamma, R)
    ell.flags.writeable = False
    return ell


def sd_oea_phase_length(n: int, r: int, R: float) -> float:
    """``2 (e n / r)^r ln(n R)``, the SD-(1+1) EA stagnation threshold."""
    log_len = math.log(2.0) + r * (1.0 + math.log(n / r)) + math.log(math.log(n * R))
    return math.exp(log_len) if log_len < 709.0 else math.inf


@lru_cache(maxsize=256)
def sd_oea_thresholds(n: int, R: float) -> np.ndarray:
    ell = np.full(n + 1, np.inf)
    for r in range(1, max(1, n // 2) + 1):
        ell[r] = sd_oea_phase_length(n, r, R)
    ell.flags.writeable = False
    return ell


@lru_cache(maxsize=256)
def sd_rls_thresholds(n: int, R: float) -> np.ndarray:
    ell = np.full(n + 1, np.inf)
    for s in range(1, min(sd_fea_cap(n), n) + 1):
        c = math.comb(n, s)
        ell[s] = c * math.log(R) if c < 1 << 1000 else math.inf
    ell.flags.writeable = False
    return ell


def sd_fea_step(state: OptimizerState, f: CountingFitness, params: SdFeaParams,
                rng: RandomSource) -> OptimizerState:
    """One SD-FEA iteration; exactly one evaluation."""
    n = state.x.shape[0]
    s = sample_strength(strength_dist(state.r, n, params.gamma, params.beta), rng)
    y = _mutate(state, s, rng)
    state.u += 1
    fy = f.evaluate(y)
    if fy > state.fx:
        _improve(state, y, fy, f)
        state.r = 1
        state.u = 0
        return state
    if fy == state.fx and state.r == 1:
        state.x = y
    if state.u >= sd_fea_thresholds(n, params.gamma, params.R)[state.r]:
        state.r = min(state.r + 1, sd_fea_cap(n))
        state.u = 0
    return state


def rls_step(state, f, params, rng):
    """Flip one uniform bit; keep the offspring unless it is worse."""
    y = _mutate(state, 1, rng)
    fy = f.evaluate(y)
    if fy > state.fx:
        _improve(state, y, fy, f)
    elif fy == state.fx:
        state.x = y
    return state


def _elitist_sbm_step(state, f, rate_numerator, rng):
    n = state.x.shape[0]
    k = sample_from_cdf(binomial_cdf(n, rate_numerator / n), rng.random())
    y = _mutate(state, k, rng)
    fy = f.evaluate(y)
    if fy > state.fx:
        _improve(state, y, fy, f)
    elif fy == state.fx:
        state.x = y
    return state


def oea_step(state, f, params, rng):
    """(1+1) EA with standard bit mutation at rate 1/n."""
    return _elitist_sbm_step(state, f, 1, rng)


def fea_step(state, f, params: FeaParams, rng):
    """Fast (1+1) EA: rate alpha/n with alpha drawn from a power law on 1..n//2."""
    n = state.x.shape[0]
    cap = params.cap if params.cap is not None else max(1, n // 2)
    alpha = sample_power_law(power_law(params.beta, cap), rng)
    return _elitist_sbm_step(state, f, alpha, rng)


def sd_oea_step(state, f, params: SdOeaParams, rng):
    """SD-(1+1) EA: rate r/n, raised once the counter exceeds its threshold."""
    n = state.x.shape[0]
    k = sample_from_cdf(binomial_cdf(n, state.r / n), rng.random())
    y = _mutate(state, k, rng)
    state.u += 1
    fy = f.evaluate(y)
    if fy > state.fx:
        _improve(state, y, fy, f)
        state.r = 1
        state.u = 0
        return state
    if fy == state.fx and state.r == 1:
        state.x = y
    if state.u > sd_oea_thresholds(n, params.R)[state.r]:
        state.r = min(state.r + 1, max(1, n // 2))
        state.u = 0
    return state


def sd_rls_r_step(state, f, params: SdRlsParams, rng):
    """Robust SD-RLS: radius r, strength swept r, r-1, ..., 1 before r grows.

    Each strength s gets ``C(n, s) ln R`` unsuccessful steps.
    """
    n = state.x.shape[0]
    y = _mutate(state, state.s, rng)
    state.u += 1
    fy = f.evaluate(y)
    if fy > state.fx:
        _improve(state, y, fy, f)
        state.r = state.s = 1
        state.u = 0
        return state
    if fy == state.fx and state.s == 1:
        state.x = y
    if state.u > sd_rls_thresholds(n, params.R)[state.s]:
        if state.s == 1:
            state.r = min(state.r + 1, sd_fea_cap(n))
            state.s = state.r
        else:
            state.s -= 1
        state.u = 0
    return state


@dataclass(frozen=True)
class Algorithm:
    """An algorithm bound to a problem size, with its tables precomputed."""

    name: str
    code: int
    n: int
    params: Any
    step: Callable

    def kernel_tables(self):
        n = self.n
        empty2 = np.zeros((1, 1))
        empty1 = np.zeros(1)
        ell, cum, table, gamma, cap = empty1, empty1, empty2, 0.0, 1
        if self.code == SD_FEA:
            p = self.params
            ell = sd_fea_thresholds(n, p.gamma, p.R)
            cum = power_law_cumulative(p.beta, max(1, n))
            gamma, cap = p.gamma, sd_fea_cap(n)
        elif self.code == OEA:
            table = _rate_tables(n, 1)
        elif self.code == FEA:
            cap = self.params.cap if self.params.cap is not None else max(1, n // 2)
            cum = power_law_cumulative(self.params.beta, cap)
            table = _rate_tables(n, cap)
        elif self.code == SD_OEA:
            cap = max(1, n // 2)
            ell = sd_oea_thresholds(n, self.params.R)
            table = _rate_tables(n, cap)
        elif self.code == SD_RLS_R:
            cap = sd_fea_cap(n)
            ell = sd_rls_thresholds(n, self.params.R)
        return ell, cum, table, gamma, cap


@lru_cache(maxsize=64)
def _rate_tables(n: int, max_numerator: int) -> np.ndarray:
    """Row ``j`` is the CDF of Bin(n, j/n)."""
    table = np.zeros((max_numerator + 1, n + 1))
    table[0, :] = 1.0
    for j in range(1, max_numerator + 1):
        table[j] = binomial_cdf(n, j / n)
    table.flags.writeable = False
    return table


ALGORITHM_NAMES = ("sd-fea", "rls", "oea", "fea", "sd-oea", "sd-rls-r")

_PARAM_KEYS = {
    "sd-fea": {"beta", "gamma", "R"},
    "rls": set(),
    "oea": set(),
    "fea": {"beta", "cap"},
    "sd-oea": {"R"},
    "sd-rls-r": {"R"},
}

DEFAULT_PARAMS = {
    "sd-fea": {"beta": 1.5, "gamma": 0.25, "R": 25.0},
    "rls": {},
    "oea": {},
    "fea": {"beta": 1.5},
    "sd-oea": {"R": "n^2"},
    "sd-rls-r": {"R": "n^2"},
}


@dataclass(frozen=True)
class AlgorithmSpec:
    """Algorithm name plus parameter table, as written in experiment configs."""

    name: str
    params: dict = field(default_factory=dict)
    label: str | None = None

    def __post_init__(self):
        if self.name not in _PARAM_KEYS:
            raise ValueError(f"unknown algorithm {self.name!r}; choose from {list(ALGORITHM_NAMES)}")
        unknown = set(self.params) - _PARAM_KEYS[self.name]
        if unknown:
            raise ValueError(f"unknown parameter(s) {sorted(unknown)} for algorithm {self.name!r}")

    @property
    def display_label(self) -> str:
        if self.label:
            return self.label
        merged = {**DEFAULT_PARAMS[self.name], **self.params}
        if not merged:
            return self.name
        return self.name + "(" + ",".join(f"{k}={v}" for k, v in sorted(merged.items())) + ")"

    def build(self, n: int) -> Algorithm:
        p = {**DEFAULT_PARAMS[self.name], **self.params}
        if self.name == "sd-fea":
            return Algorithm("sd-fea", SD_FEA, n,
                             SdFeaParams(float(p["beta"]), float(p["gamma"]), resolve_R(p["R"], n)),
                             sd_fea_step)
        if self.name == "rls":
            return Algorithm("rls", RLS, n, None, rls_step)
        if self.name == "oea":
            return Algorithm("oea", OEA, n, None, oea_step)
        if self.name == "fea":
            cap = p.get("cap")
            return Algorithm("fea", FEA, n,
                             FeaParams(float(p["beta"]), None if cap is None else int(cap)), fea_step)
        if self.name == "sd-oea":
            return Algorithm("sd-oea", SD_OEA, n, SdOeaParams(resolve_R(p["R"], n)), sd_oea_step)
        return Algorithm("sd-rls-r", SD_RLS_R, n, SdRlsParams(resolve_R(p["R"], n)), sd_rls_r_step)


_KERNEL_TYPES = frozenset(BENCHMARKS.values())


def _as_rng(seed) -> RandomSource:
    return seed if isinstance(seed, RandomSource) else RandomSource(int(seed))


def run_optimizer(algorithm: AlgorithmSpec | Algorithm, f: FitnessFunction, budget: int = DEFAULT_BUDGET,
                  seed: int | RandomSource = 0, *, x0: np.ndarray | None = None,
                  stop_on_improvement: bool = False, backend: str = "auto") -> RunOutcome:
    """Run until the optimum is evaluated or ``budget`` evaluations are spent.

    The random initial point (or ``x0``) is evaluation 1. With
    ``stop_on_improvement`` the run also ends at the first strict improvement
    and ``success`` reports whether one happened.
    """
    if budget < 1:
        raise ValueError(f"budget must be at least 1, got {budget}")
    if backend not in ("auto", "compiled", "python"):
        raise ValueError(f"unknown backend {backend!r}")
    n = f.n
    alg = algorithm.build(n) if isinstance(algorithm, AlgorithmSpec) else algorithm
    if alg.n != n:
        raise ValueError(f"algorithm built for n={alg.n} but function has n={n}")
    rng = _as_rng(seed)
    if x0 is None:
        x = rng.bits(n)
    else:
        x = np.array(x0, dtype=np.uint8)
        if x.shape != (n,):
            raise ValueError(f"start point has shape {x.shape}, expected ({n},)")

    # subclasses may override evaluate, so only the exact built-in classes qualify
    use_kernel = (backend != "python" and _kernels is not None
                  and type(f) in _KERNEL_TYPES)
    if backend == "compiled" and not use_kernel:
        raise RuntimeError("compiled kernel unavailable for this run")
    if use_kernel:
        return _run_compiled(alg, f, budget, rng, x, stop_on_improvement)
    return _run_python(alg, f, budget, rng, x, stop_on_improvement)


def _run_python(alg: Algorithm, f, budget, rng, x, stop_on_improvement) -> RunOutcome:
    counted = CountingFitness(f)
    fx = counted.evaluate(x)
    state = OptimizerState(x, fx)
    success = counted.is_optimum_value(fx)
    while not success and counted.count < budget:
        before = state.trace.improvements
        alg.step(state, counted, alg.params, rng)
        if counted.is_optimum_value(state.fx):
            success = True
        elif stop_on_improvement and state.trace.improvements > before:
            success = True
    return RunOutcome(counted.count, bool(success), float(state.fx), state.x, state.trace)


def _run_compiled(alg: Algorithm, f, budget, rng, x, stop_on_improvement) -> RunOutcome:
    ell, cum, table, gamma, cap = alg.kernel_tables()
    n = f.n
    k = getattr(f, "k", 0)
    delta = getattr(f, "delta", 0)
    trace = RunTrace(np.zeros(n + 1, dtype=np.int64))
    x = np.ascontiguousarray(x, dtype=np.uint8)
    res = _kernels.run(alg.code, f.kernel_code, k, delta, x, rng.bit_generator, int(budget),
                       np.ascontiguousarray(ell, dtype=np.float64),
                       np.ascontiguousarray(cum, dtype=np.float64),
                       np.ascontiguousarray(table, dtype=np.float64),
                       float(gamma), int(cap), bool(stop_on_improvement), trace.phase_iterations)
    evals, success, fx, flips_above, imp_radius, improvements, last_at, prev_at = res
    trace.flips_above_radius = flips_above
    trace.improvement_radius = imp_radius
    trace.improvements = improvements
    trace.last_improvement_at = last_at
    trace.previous_improvement_at = prev_at
    return RunOutcome(int(evals), bool(success), float(fx), x, trace)
