"""Fixed-policy statistical tests for the verification harness.

Every test uses the same per-test significance level and emits a
TestReport whose json form has a fixed seven-key schema, so reports from
different criteria can be concatenated and audited uniformly.  KS tests
refuse small samples rather than silently losing power; the chi-square
helper merges sparse tail bins; atom masses are checked by a normal
approximation to the binomial and independence claims by a hard
correlation bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2

__all__ = [
    "DEFAULT_ALPHA",
    "KS_MIN_N",
    "TestReport",
    "ks_distance",
    "ks_one_sample",
    "ks_two_sample",
    "chi_square_pmf",
    "binomial_atom_test",
    "correlation_test",
]

DEFAULT_ALPHA = 0.001
# below this a KS test at our alpha cannot resolve the deviations we care about
KS_MIN_N = 2000


@dataclass(eq=False)
class TestReport:
    """Outcome of one statistical test.

    statistic is compared against threshold (reject when it exceeds);
    claim names the verified statement; metadata carries diagnostics that
    are not part of the serialized record.
    """

    __test__ = False  # bare name looks like a pytest class

    name: str
    statistic: float
    threshold: float
    n: int
    seed: int
    passed: bool
    claim: str = ""
    metadata: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "statistic": float(self.statistic),
            "threshold": float(self.threshold),
            "n": int(self.n),
            "seed": int(self.seed),
            "pass": bool(self.passed),
            "paper_ref": self.claim,
        }

    def __str__(self):
        tag = "PASS" if self.passed else "FAIL"
        return (f"{tag} {self.name}: statistic={self.statistic:.5g} "
                f"threshold={self.threshold:.5g} n={self.n}")


def _ks_critical(alpha: float) -> float:
    return math.sqrt(-math.log(alpha / 2.0) / 2.0)


def ks_distance(sample, cdf) -> float:
    """Sup distance between the empirical cdf of sample and a cdf."""
    x = np.sort(np.asarray(sample, dtype=np.float64))
    n = len(x)
    if n == 0:
        raise ValueError("empty sample")
    f = np.asarray(cdf(x), dtype=np.float64)
    grid = np.arange(1, n + 1) / n
    return float(max(np.max(grid - f), np.max(f - (grid - 1.0 / n))))


def ks_one_sample(sample, cdf, name: str, seed: int, claim: str = "",
                  alpha: float = DEFAULT_ALPHA) -> TestReport:
    """Kolmogorov-Smirnov test of sample against a continuous cdf."""
    n = len(np.asarray(sample))
    if n < KS_MIN_N:
        raise ValueError(f"KS test needs at least {KS_MIN_N} points, got {n}")
    d = ks_distance(sample, cdf)
    threshold = _ks_critical(alpha) / math.sqrt(n)
    return TestReport(name, d, threshold, n, seed, d < threshold, claim,
                      {"alpha": alpha})


def ks_two_sample(a, b, name: str, seed: int, claim: str = "",
                  alpha: float = DEFAULT_ALPHA) -> TestReport:
    """Two-sample Kolmogorov-Smirnov test for equality of continuous laws."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    n, m = len(a), len(b)
    if min(n, m) < KS_MIN_N:
        raise ValueError(f"KS test needs at least {KS_MIN_N} points per sample")
    allv = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, allv, side="right") / n
    cdf_b = np.searchsorted(b, allv, side="right") / m
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    threshold = _ks_critical(alpha) * math.sqrt((n + m) / (n * m))
    return TestReport(name, d, threshold, n + m, seed, d < threshold, claim,
                      {"alpha": alpha, "n_a": n, "n_b": m})


def chi_square_pmf(counts, probs, name: str, seed: int, claim: str = "",
                   alpha: float = DEFAULT_ALPHA,
                   min_expected: float = 5.0) -> TestReport:
    """Chi-square goodness of fit of observed bin counts to a pmf.

    probs must cover all mass of the binning (include the tail as its own
    bin); bins are merged from the right until every expected count
    reaches min_expected.
    """
    counts = np.asarray(counts, dtype=np.float64)
    probs = np.asarray(probs, dtype=np.float64)
    if counts.shape != probs.shape:
        raise ValueError("counts and probs must have matching shapes")
    total_p = float(np.sum(probs))
    if not math.isclose(total_p, 1.0, abs_tol=1e-9):
        raise ValueError("bin probabilities must sum to one")
    total = float(np.sum(counts))
    expected = total * probs
    obs = list(counts)
    exp = list(expected)
    while len(exp) > 1 and exp[-1] < min_expected:
        exp[-2] = exp[-2] + exp[-1]
        exp.pop()
        obs[-2] = obs[-2] + obs[-1]
        obs.pop()
    if exp[0] < min_expected:
        raise ValueError("sample too small for the requested binning")
    obs_a = np.asarray(obs)
    exp_a = np.asarray(exp)
    stat = float(np.sum((obs_a - exp_a) ** 2 / exp_a))
    df = len(exp) - 1
    threshold = float(chi2.ppf(1.0 - alpha, df))
    return TestReport(name, stat, threshold, int(total), seed, stat < threshold,
                      claim, {"alpha": alpha, "df": df,
                              "p_value": float(chi2.sf(stat, df)),
                              "bins": len(exp)})


def binomial_atom_test(hits: int, n: int, p0: float, name: str, seed: int,
                       claim: str = "", z_max: float = 3.0) -> TestReport:
    """Normal-approximation test that an event frequency matches p0.

    The z-score of the observed count is judged against a fixed sigma
    bound (default three) rather than an alpha level.
    """
    if n <= 0:
        raise ValueError("need a positive sample size")
    if not 0.0 < p0 < 1.0:
        raise ValueError("p0 must lie strictly inside (0, 1)")
    z = (hits - n * p0) / math.sqrt(n * p0 * (1.0 - p0))
    return TestReport(name, abs(z), z_max, n, seed, abs(z) < z_max,
                      claim, {"hits": int(hits), "p0": p0})


def correlation_test(x, y, name: str, seed: int, claim: str = "") -> TestReport:
    """Sample correlation of two supposedly independent sequences, judged
    against the hard bound 4/sqrt(n)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("need two equal-length vectors")
    n = len(x)
    if n < 16:
        raise ValueError("too few replicas for a correlation check")
    sx = float(np.std(x))
    sy = float(np.std(y))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("degenerate sample in correlation test")
    r = float(np.corrcoef(x, y)[0, 1])
    threshold = 4.0 / math.sqrt(n)
    return TestReport(name, abs(r), threshold, n, seed, abs(r) < threshold, claim)
