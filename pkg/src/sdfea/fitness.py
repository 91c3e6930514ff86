"""Benchmark pseudo-Boolean functions and evaluation counting."""
from __future__ import annotations

from typing import Any

import numpy as np

from .core import BitString

# codes understood by the compiled kernel
KERNEL_ONEMAX = 0
KERNEL_LEADINGONES = 1
KERNEL_JUMP = 2


class NoImprovementError(ValueError):
    """Raised when a gap is requested for a point that has no strictly better point."""


class FitnessFunction:
    """Maximization problem on ``{0,1}^n``.

    Subclasses implement :meth:`evaluate`. ``evaluate_batch`` takes a 2-D array
    with one point per row; the default just loops.
    """

    name = "fitness"
    kernel_code: int | None = None

    def __init__(self, n: int):
        if n < 1:
            raise ValueError(f"problem size must be positive, got {n}")
        self.n = int(n)

    @property
    def params(self) -> dict[str, Any]:
        return {}

    @property
    def optimum_value(self) -> float:
        raise NotImplementedError

    def evaluate(self, x: BitString) -> float:
        raise NotImplementedError

    def evaluate_batch(self, xs: np.ndarray) -> np.ndarray:
        return np.array([self.evaluate(row) for row in xs], dtype=np.float64)

    def is_optimum(self, x: BitString) -> bool:
        return self.evaluate(x) == self.optimum_value

    def __call__(self, x: BitString) -> float:
        return self.evaluate(x)

    def __repr__(self):
        args = ", ".join(f"{k}={v}" for k, v in {"n": self.n, **self.params}.items())
        return f"{type(self).__name__}({args})"


class OneMax(FitnessFunction):
    name = "onemax"
    kernel_code = KERNEL_ONEMAX

    @property
    def optimum_value(self) -> float:
        return float(self.n)

    def evaluate(self, x):
        return float(np.count_nonzero(x))

    def evaluate_batch(self, xs):
        return np.count_nonzero(xs, axis=1).astype(np.float64)

    def ind_gap(self, x: BitString) -> int:
        if np.all(x == 1):
            raise NoImprovementError("the all-ones string is optimal")
        return 1

    level_gap = ind_gap


class LeadingOnes(FitnessFunction):
    name = "leadingones"
    kernel_code = KERNEL_LEADINGONES

    @property
    def optimum_value(self) -> float:
        return float(self.n)

    def evaluate(self, x):
        zeros = np.flatnonzero(x == 0)
        return float(zeros[0]) if zeros.size else float(self.n)

    def evaluate_batch(self, xs):
        return np.cumprod(xs, axis=1, dtype=np.int64).sum(axis=1).astype(np.float64)

    def ind_gap(self, x: BitString) -> int:
        if np.all(x == 1):
            raise NoImprovementError("the all-ones string is optimal")
        return 1

    level_gap = ind_gap


class Jump(FitnessFunction):
    """Generalized jump: OneMax with a valley of width ``delta - 1``.

    ``f(x) = |x|`` if ``|x|`` lies in ``[0, n-k]`` or ``[n-k+delta, n]`` and
    ``-|x|`` otherwise. ``k == delta`` gives the classic jump function.
    """

    name = "jump"
    kernel_code = KERNEL_JUMP

    def __init__(self, n: int, k: int, delta: int | None = None):
        super().__init__(n)
        delta = k if delta is None else delta
        if not 1 <= delta <= k <= n:
            raise ValueError(f"need 1 <= delta <= k <= n, got n={n}, k={k}, delta={delta}")
        self.k = int(k)
        self.delta = int(delta)

    @property
    def params(self):
        return {"k": self.k, "delta": self.delta}

    @property
    def optimum_value(self) -> float:
        return float(self.n)

    def value_of_ones(self, ones):
        ones = np.asarray(ones)
        valley = (ones > self.n - self.k) & (ones < self.n - self.k + self.delta)
        return np.where(valley, -ones, ones).astype(np.float64)

    def evaluate(self, x):
        return float(self.value_of_ones(np.count_nonzero(x)))

    def evaluate_batch(self, xs):
        return self.value_of_ones(np.count_nonzero(xs, axis=1))

    def ind_gap(self, x: BitString) -> int:
        ones = int(np.count_nonzero(x))
        if ones == self.n:
            raise NoImprovementError("the all-ones string is optimal")
        if ones == self.n - self.k:
            return self.delta
        return 1

    level_gap = ind_gap


BENCHMARKS = {"onemax": OneMax, "leadingones": LeadingOnes, "jump": Jump}


def make_function(name: str, n: int, **params) -> FitnessFunction:
    try:
        cls = BENCHMARKS[name]
    except KeyError:
        raise ValueError(f"unknown function {name!r}; choose from {sorted(BENCHMARKS)}") from None
    return cls(n, **params)


class CountingFitness:
    """Wraps a fitness function and counts every evaluation."""

    def __init__(self, f: FitnessFunction):
        self.f = f
        self.n = f.n
        self.count = 0

    def evaluate(self, x: BitString) -> float:
        self.count += 1
        return self.f.evaluate(x)

    __call__ = evaluate

    def is_optimum_value(self, value: float) -> bool:
        return value == self.f.optimum_value
