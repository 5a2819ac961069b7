"""Closed-form laws used as references by the simulation checks.

Catalan numbers and the Catalan triangle feed the run-length
distributions; the Poisson competition probabilities give the race
interpretation of the same sums; the atom-plus-exponential increment law
and the multiplicative marked point process describe how the stationary
horizontal increment varies with its mean parameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .rng import RngSpec, exp_from_uniform

__all__ = [
    "catalan_number",
    "catalan_triangle",
    "initial_run_pmf",
    "initial_run_pmf2",
    "poisson_competition_A",
    "poisson_competition_B",
    "AtomTailLaw",
    "increment_law",
    "MarkedPointProcess",
    "sample_X_process",
    "X_value",
    "rho_star_cdf",
]

# rows beyond this use the log-gamma closed form instead of exact integers
_EXACT_ROW_LIMIT = 300


def catalan_number(n: int) -> int:
    """The n-th Catalan number, exact."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return math.comb(2 * n, n) // (n + 1)


@lru_cache(maxsize=None)
def _triangle_row(n: int) -> tuple[int, ...]:
    if n == 0:
        return (1,)
    prev = _triangle_row(n - 1)
    row = [1]
    for k in range(1, n + 1):
        above = prev[k] if k < n else 0
        row.append(row[k - 1] + above)
    return tuple(row)


def catalan_triangle(n: int, k: int) -> int:
    """Catalan triangle entry: paths with n rises and k falls, never
    more falls than rises.  Zero when k exceeds n."""
    if n < 0 or k < 0:
        raise ValueError("indices must be nonnegative")
    if k > n:
        return 0
    return _triangle_row(n)[k]


def _log_triangle(n: int, k: int) -> float:
    # (n+k)! (n-k+1) / (k! (n+1)!)
    return (gammaln(n + k + 1) + math.log(n - k + 1)
            - gammaln(k + 1) - gammaln(n + 2))


def _triangle_weighted_sum(n: int, log_hi: float, log_lo: float) -> float:
    """sum_{k<=n} C(n,k) * exp(k*log_hi - (n+k)*log_lo), stably."""
    if n <= _EXACT_ROW_LIMIT:
        row = _triangle_row(n)
        logs = [math.log(row[k]) + k * log_hi - (n + k) * log_lo
                for k in range(n + 1)]
    else:
        logs = [_log_triangle(n, k) + k * log_hi - (n + k) * log_lo
                for k in range(n + 1)]
    peak = max(logs)
    return math.exp(peak) * math.fsum(math.exp(v - peak) for v in logs)


def initial_run_pmf(rho: float, n: int) -> float:
    """Length law of the initial straight run of the stationary geodesic
    at mean parameter rho: atom 1 - 1/rho at zero, Catalan-weighted tail."""
    return initial_run_pmf2(1.0, rho, n)


def initial_run_pmf2(lam: float, rho: float, n: int) -> float:
    """Two-parameter run-length law for service mean lam against arrival
    mean rho, lam < rho (lam = 1 recovers initial_run_pmf)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if not 0 < lam < rho:
        raise ValueError("need 0 < lam < rho")
    head = (rho - lam) / rho
    if n == 0:
        return head
    # sum_{k=0}^{n-1} C(n-1,k) rho^k lam^n / (lam+rho)^{n+k}
    total = _triangle_weighted_sum(n - 1, math.log(rho), math.log(lam + rho))
    return head * total * math.exp(n * math.log(lam) - math.log(lam + rho))


def poisson_competition_A(n: int, alpha: float, beta: float) -> float:
    """Probability that each of the first n points of the rate-alpha
    Poisson stream arrives before the matching point of the rate-beta
    stream."""
    if alpha <= 0 or beta <= 0:
        raise ValueError("rates must be positive")
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return 1.0
    total = _triangle_weighted_sum(n - 1, math.log(beta), math.log(alpha + beta))
    return total * math.exp(n * math.log(alpha) - math.log(alpha + beta))


def poisson_competition_B(n: int, alpha: float, beta: float) -> float:
    """Probability that the rate-alpha stream leads the first n-1 paired
    comparisons and loses the n-th, its first dropped point."""
    if alpha <= 0 or beta <= 0:
        raise ValueError("rates must be positive")
    if n < 1:
        raise ValueError("n must be at least 1")
    log_c = math.log(catalan_number(n - 1)) if n - 1 <= _EXACT_ROW_LIMIT \
        else _log_triangle(n - 1, n - 1)
    return math.exp(log_c + (n - 1) * math.log(alpha) + n * math.log(beta)
                    - (2 * n - 1) * math.log(alpha + beta))


@dataclass(frozen=True)
class AtomTailLaw:
    """Mixture of an atom at zero and an exponential tail."""

    atom: float
    tail_mean: float

    def __post_init__(self):
        if not 0.0 <= self.atom <= 1.0:
            raise ValueError("atom mass must lie in [0, 1]")
        if self.tail_mean <= 0:
            raise ValueError("tail mean must be positive")

    def cdf(self, s):
        s = np.asarray(s, dtype=np.float64)
        out = np.where(s < 0, 0.0,
                       self.atom + (1.0 - self.atom) * -np.expm1(-s / self.tail_mean))
        return out if out.ndim else float(out)

    def sf(self, s):
        s = np.asarray(s, dtype=np.float64)
        out = np.where(s < 0, 1.0,
                       (1.0 - self.atom) * np.exp(-s / self.tail_mean))
        return out if out.ndim else float(out)

    def laplace(self, t):
        t = np.asarray(t, dtype=np.float64)
        out = self.atom + (1.0 - self.atom) / (1.0 + self.tail_mean * t)
        return out if out.ndim else float(out)

    def sample(self, count: int, spec: RngSpec) -> np.ndarray:
        """Inverse-cdf draw; pure function of the RngSpec."""
        u = spec.generator().random(count)
        with np.errstate(divide="ignore"):
            tail = -self.tail_mean * np.log((1.0 - u) / (1.0 - self.atom)) \
                if self.atom < 1.0 else np.zeros(count)
        return np.where(u < self.atom, 0.0, tail)


def increment_law(lam: float, rho: float) -> AtomTailLaw:
    """Law of the increment between the marked-process values at means
    lam <= rho: atom lam/rho at zero, exponential tail of mean rho."""
    if not 0 < lam <= rho:
        raise ValueError("need 0 < lam <= rho")
    return AtomTailLaw(lam / rho, rho)


@dataclass(frozen=True)
class MarkedPointProcess:
    """Atoms of the mean-parameter process on [1, rho_max].

    points[0] is always 1; later points follow the scale-invariant ds/s
    intensity.  Each point carries an independent exponential mark with
    mean equal to its location.
    """

    points: np.ndarray
    marks: np.ndarray
    rho_max: float

    def count_in(self, lo: float, hi: float) -> int:
        """Number of points in the half-open interval (lo, hi]."""
        return int(np.sum((self.points > lo) & (self.points <= hi)))


def sample_X_process(rho_max: float, spec: RngSpec) -> MarkedPointProcess:
    """Draw the marked point process up to rho_max.

    Locations are exp of a unit-rate arrival sequence started at 0, so
    log-locations are a Poisson process; marks are exponential with mean
    equal to the location.  Deterministic in the RngSpec.
    """
    if rho_max < 1.0:
        raise ValueError("rho_max must be at least 1")
    gap_gen = spec.sub("gaps").generator()
    limit = math.log(rho_max)
    logs = [0.0]
    total = 0.0
    while True:
        chunk = exp_from_uniform(gap_gen.random(64), 1.0)
        for g in chunk:
            total += g
            if total > limit:
                break
            logs.append(total)
        if total > limit:
            break
    points = np.exp(np.asarray(logs))
    points[0] = 1.0
    u = spec.sub("marks").generator().random(len(points))
    marks = exp_from_uniform(u, 1.0) * points
    return MarkedPointProcess(points, marks, rho_max)


def X_value(process: MarkedPointProcess, rho: float) -> float:
    """Sum of marks at points not exceeding rho."""
    if rho < 1.0 or rho > process.rho_max:
        raise ValueError("rho outside the sampled range")
    return float(np.sum(process.marks[process.points <= rho]))


def rho_star_cdf(lam):
    """Distribution function of the threshold parameter: 1 - 1/lam on
    [1, infinity), zero below 1."""
    lam = np.asarray(lam, dtype=np.float64)
    out = np.where(lam < 1.0, 0.0, 1.0 - 1.0 / np.maximum(lam, 1.0))
    return out if out.ndim else float(out)
