"""Power-law sampler, the SD-FEA strength distribution, and phase lengths."""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .core import RandomSource, log_binomial

NORMALIZATION_TOL = 1e-12

_cum_lock = threading.Lock()
_cum_tables: dict[float, np.ndarray] = {}


def power_law_cumulative(beta: float, u: int) -> np.ndarray:
    """Ascending partial sums ``sum_{i<=j} i**-beta`` for ``j = 1..u``.

    All supports share one master table per ``beta``, so the table for ``u`` is
    always a prefix of the table for any larger bound.
    """
    if u < 1:
        raise ValueError(f"power-law support bound must be >= 1, got {u}")
    with _cum_lock:
        table = _cum_tables.get(beta)
        if table is None or table.shape[0] < u:
            size = max(u, 2 * table.shape[0] if table is not None else 256)
            weights = np.array([i ** -beta for i in range(1, size + 1)], dtype=np.float64)
            table = np.cumsum(weights)
            table.flags.writeable = False
            _cum_tables[beta] = table
    return table[:u]


@dataclass(frozen=True)
class PowerLawDist:
    """``Pr[X = i] = C * i**-beta`` on ``1..u``, ``C`` the normalizing constant."""

    beta: float
    u: int
    cum: np.ndarray = field(init=False, repr=False, compare=False)
    cdf: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.beta > 1:
            raise ValueError(f"power-law exponent must exceed 1, got {self.beta}")
        cum = power_law_cumulative(self.beta, int(self.u))
        cdf = cum / cum[-1]
        if abs(cdf[-1] - 1.0) > NORMALIZATION_TOL:
            raise ArithmeticError(f"power-law table for beta={self.beta}, u={self.u} not normalized")
        object.__setattr__(self, "cum", cum)
        object.__setattr__(self, "cdf", cdf)

    @property
    def normalization(self) -> float:
        return 1.0 / float(self.cum[-1])

    def pmf(self) -> np.ndarray:
        """Probabilities for ``1..u``."""
        i = np.arange(1, self.u + 1, dtype=np.float64)
        return self.normalization * i ** -self.beta

    def sample_from_uniform(self, v):
        """Inverse-CDF lookup: smallest ``i`` with ``cum[i-1] > v * cum[-1]``."""
        idx = np.searchsorted(self.cum, v * self.cum[-1], side="right")
        return np.minimum(idx, self.u - 1) + 1


@lru_cache(maxsize=512)
def power_law(beta: float, u: int) -> PowerLawDist:
    return PowerLawDist(float(beta), int(u))


def sample_power_law(d: PowerLawDist, rng: RandomSource) -> int:
    return int(d.sample_from_uniform(rng.random()))


@dataclass(frozen=True)
class StrengthDist:
    """Number of bits SD-FEA flips in phase ``r``.

    With probability ``1 - gamma`` it is ``r``; otherwise ``r + D`` or ``r - D``
    (probability ``gamma / 2`` each) with ``D`` power-law distributed on
    ``1..n-r`` upwards and ``1..max(1, r-1)`` downwards.
    """

    r: int
    n: int
    gamma: float
    beta: float
    down: PowerLawDist = field(init=False, repr=False, compare=False)
    up: PowerLawDist = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 1 <= self.r <= self.n:
            raise ValueError(f"strength r={self.r} outside 1..{self.n}")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")
        object.__setattr__(self, "down", power_law(self.beta, max(1, self.r - 1)))
        object.__setattr__(self, "up", power_law(self.beta, max(1, self.n - self.r)))

    def from_uniform(self, v: np.ndarray) -> np.ndarray:
        """Map uniforms in [0, 1) to strengths; one uniform per sample.

        ``v < 1 - gamma`` keeps ``r``. Otherwise ``w = (v - (1 - gamma)) / gamma``
        is uniform on [0, 1): ``w < 1/2`` deviates upwards using ``2w``, else
        downwards using ``2w - 1``.
        """
        v = np.asarray(v, dtype=np.float64)
        keep = 1.0 - self.gamma
        out = np.full(v.shape, self.r, dtype=np.int64)
        dev = v >= keep
        if np.any(dev):
            w = (v[dev] - keep) / self.gamma
            upward = w < 0.5
            s = np.empty(w.shape, dtype=np.int64)
            s[upward] = self.r + self.up.sample_from_uniform(2.0 * w[upward])
            s[~upward] = self.r - self.down.sample_from_uniform(2.0 * w[~upward] - 1.0)
            out[dev] = np.minimum(s, self.n)
        return out


@lru_cache(maxsize=4096)
def strength_dist(r: int, n: int, gamma: float, beta: float) -> StrengthDist:
    return StrengthDist(int(r), int(n), float(gamma), float(beta))


def sample_strength(d: StrengthDist, rng: RandomSource) -> int:
    v = rng.random()
    if v < 1.0 - d.gamma:
        return d.r
    return int(d.from_uniform(np.array([v]))[0])


def sample_strength_batch(d: StrengthDist, rng: RandomSource, size: int) -> np.ndarray:
    """``size`` draws; identical to ``size`` successive :func:`sample_strength` calls."""
    return d.from_uniform(rng.random_array(size))


def strength_distribution(r: int, n: int, gamma: float, beta: float) -> np.ndarray:
    """Closed-form probabilities of flipping ``0..n`` bits in phase ``r``.

    Evaluated term by term from the power-law normalizers, independent of
    the cumulative tables the sampler searches.
    """
    if not 1 <= r <= n:
        raise ValueError(f"strength r={r} outside 1..{n}")
    probs = np.zeros(n + 1, dtype=np.float64)
    probs[r] = 1.0 - gamma
    down = max(1, r - 1)
    c_down = 1.0 / math.fsum(j ** -beta for j in range(1, down + 1))
    if r == 1:
        probs[0] += gamma / 2
    else:
        for a in range(1, r):
            probs[a] = gamma / 2 * c_down * (r - a) ** -beta
    if n > r:
        c_up = 1.0 / math.fsum(j ** -beta for j in range(1, n - r + 1))
        for a in range(r + 1, n + 1):
            probs[a] = gamma / 2 * c_up * (a - r) ** -beta
    else:
        probs[n] += gamma / 2
    return probs


def phase_length(n: int, r: int, gamma: float, R: float) -> float:
    """Unsuccessful-step budget of phase ``r``: ``C(n, r) * ln(R) / (1 - gamma)``.

    Returns ``inf`` once the value leaves double range; such a threshold is
    unreachable by any step counter anyway.
    """
    if not 1 <= r <= n:
        raise ValueError(f"strength r={r} outside 1..{n}")
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must lie in [0, 1), got {gamma}")
    if not R > 1:
        raise ValueError(f"R must exceed 1, got {R}")
    coeff = math.comb(n, r)
    if coeff < 1 << 53:
        return coeff * math.log(R) / (1.0 - gamma)
    log_len = log_binomial(n, r) + math.log(math.log(R)) - math.log1p(-gamma)
    return math.exp(log_len) if log_len < 709.0 else math.inf
