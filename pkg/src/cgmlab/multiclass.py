"""Multiclass configurations driven by queueing maps.

A MultiConfig is a stack of aligned increment windows, one per class line,
optionally tagged with the mean of each line.  Two Markov dynamics act on
it.  The multiline step feeds the shared service window through the lines
in order, each line seeing the unused input of the one before.  The
coupled step applies the departure map with the same service window to
every line.  The iterated departure map (line i folded through lines
i-1, ..., 1) intertwines the two dynamics and pushes independent
exponential lines forward to the coupled stationary law, which is how
sample_mu_rho draws it.  The triangular arrays expose every intermediate
departure/unused pair of that fold; their diagonal reproduces the fold,
and selected entries satisfy exact independence properties that
check_independence_structure estimates by correlation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .rng import RngSpec, SeqWindow, sample_exp_window, same_window
from .queueing import BoundaryPolicy, DEFAULT_POLICY, IdentityReport, lindley_iterate, _check

__all__ = [
    "MultiConfig",
    "TriArray",
    "IndependenceReport",
    "multiline_step",
    "coupled_step",
    "dmap",
    "sample_mu_rho",
    "build_triangular_arrays",
    "check_intertwining_dynamics",
    "check_independence_structure",
]


@dataclass(eq=False)
class MultiConfig:
    """Aligned increment windows for n class lines.

    values has shape (n_lines, length); line i covers the same index
    window offset .. offset + length - 1.  rates, when present, records
    the nominal mean of each line.
    """

    offset: int
    values: np.ndarray
    rates: tuple[float, ...] | None = None

    def __post_init__(self):
        self.offset = int(self.offset)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("MultiConfig values must be 2-dimensional")
        if self.values.shape[1] == 0:
            raise ValueError("empty window")
        if self.rates is not None:
            self.rates = tuple(float(r) for r in self.rates)
            if len(self.rates) != self.values.shape[0]:
                raise ValueError("rates length must match the number of lines")
            if any(r <= 0 for r in self.rates):
                raise ValueError("rates must be positive")

    @property
    def n_lines(self) -> int:
        return self.values.shape[0]

    @property
    def length(self) -> int:
        return self.values.shape[1]

    @property
    def end(self) -> int:
        return self.offset + self.length

    def line(self, i: int) -> SeqWindow:
        return SeqWindow(self.offset, self.values[i])

    @staticmethod
    def from_lines(lines: list[SeqWindow], rates=None) -> "MultiConfig":
        same_window(*lines)
        return MultiConfig(lines[0].offset, np.vstack([w.values for w in lines]), rates)

    def suffix(self, start: int) -> "MultiConfig":
        if start < self.offset or start >= self.end:
            raise ValueError("suffix start outside window")
        return MultiConfig(start, self.values[:, start - self.offset :], self.rates)


def _trim_config(config: MultiConfig, count: int) -> MultiConfig:
    if count == 0:
        return config
    return MultiConfig(config.offset + count, config.values[:, count:], config.rates)


def _stage_j_left(policy: BoundaryPolicy, arrivals: SeqWindow, services: SeqWindow,
                  tag: str) -> float:
    if policy.kind == "given":
        return float(policy.j_left)
    if policy.kind == "burn_in":
        return 0.0
    return policy.resolve_j_left(arrivals, services, tag)


def multiline_step(config: MultiConfig, services: SeqWindow,
                   policy: BoundaryPolicy = DEFAULT_POLICY) -> MultiConfig:
    """One multiline update: line i departs against the unused input of line i-1.

    The bottom line sees the given service window; each following line sees
    what the previous line left unused.  Burn-in trimming happens once at
    the end so the chained stages stay aligned.
    """
    same_window(config.line(0), services)
    w = services
    out_lines = []
    for i in range(config.n_lines):
        arr = config.line(i)
        j0 = _stage_j_left(policy, arr, w, f"multiline{i}")
        out = lindley_iterate(j0, arr, w)
        out_lines.append(out.departures.values)
        w = out.unused
    fresh = MultiConfig(config.offset, np.vstack(out_lines), config.rates)
    return _trim_config(fresh, policy.trim_count(config.length))


def coupled_step(config: MultiConfig, services: SeqWindow,
                 policy: BoundaryPolicy = DEFAULT_POLICY) -> MultiConfig:
    """One coupled update: every line departs against the same service window."""
    same_window(config.line(0), services)
    out_lines = []
    for i in range(config.n_lines):
        arr = config.line(i)
        j0 = _stage_j_left(policy, arr, services, f"coupled{i}")
        out_lines.append(lindley_iterate(j0, arr, services).departures.values)
    fresh = MultiConfig(config.offset, np.vstack(out_lines), config.rates)
    return _trim_config(fresh, policy.trim_count(config.length))


def _fold_line(line_windows: list[SeqWindow], policy: BoundaryPolicy, tag: str) -> SeqWindow:
    """Iterated departures of line_windows[0] through the rest as services."""
    acc = line_windows[0]
    for j, svc in enumerate(line_windows[1:], start=1):
        j0 = _stage_j_left(policy, acc, svc, f"{tag}/stage{j}")
        acc = lindley_iterate(j0, acc, svc).departures
    return acc


def dmap(config: MultiConfig, policy: BoundaryPolicy = DEFAULT_POLICY) -> MultiConfig:
    """The iterated departure map across lines.

    Output line i is line i folded through lines i-1, ..., 0 as services;
    line 0 passes through unchanged.  Means should increase with the line
    index for the queues to be stable.
    """
    means = config.values.mean(axis=1)
    if np.any(np.diff(means) <= 0):
        warnings.warn("line means should be strictly increasing for a stable fold")
    out_lines = [config.values[0]]
    for i in range(1, config.n_lines):
        chain = [config.line(j) for j in range(i, -1, -1)]
        out_lines.append(_fold_line(chain, policy, f"dmap{i}").values)
    fresh = MultiConfig(config.offset, np.vstack(out_lines), config.rates)
    return _trim_config(fresh, policy.trim_count(config.length))


def sample_mu_rho(rates, offset: int, length: int, spec: RngSpec,
                  policy: BoundaryPolicy = DEFAULT_POLICY) -> MultiConfig:
    """Draw the coupled stationary configuration for the given line means.

    Independent exponential lines at the sorted distinct means are pushed
    through the iterated departure map; tied means (exact float equality)
    share one computed line, and unsorted inputs are sorted for the
    computation and unsorted on output.  Different draws must use different
    RngSpec labels or replicas, the sampler is a pure function of its spec.
    """
    rates = tuple(float(r) for r in rates)
    if not rates:
        raise ValueError("need at least one rate")
    if any(r <= 0 for r in rates):
        raise ValueError("rates must be positive")
    if length <= 0:
        raise ValueError("window length must be positive")
    distinct = sorted(set(rates))
    group = {r: g for g, r in enumerate(distinct)}
    lines = [sample_exp_window(offset, length, r, spec.sub(f"line{g}"))
             for g, r in enumerate(distinct)]
    folded = [lines[0]]
    for g in range(1, len(distinct)):
        chain = [lines[j] for j in range(g, -1, -1)]
        folded.append(_fold_line(chain, policy, f"mu{g}"))
    values = np.vstack([folded[group[r]].values for r in rates])
    fresh = MultiConfig(offset, values, rates)
    return _trim_config(fresh, policy.trim_count(length))


@dataclass(eq=False)
class TriArray:
    """Departure/unused triangular arrays of the iterated departure fold.

    eta[i][j] (0-indexed, j <= i) is the j-th departure stage of line i;
    xi[i][j] is the unused input handed to stage j+1.  The diagonal
    eta[i][i] is the iterated departure map of the input lines.
    """

    offset: int
    eta: list[list[SeqWindow]]
    xi: list[list[SeqWindow]]
    rates: tuple[float, ...] | None = None

    @property
    def n_lines(self) -> int:
        return len(self.eta)

    def diagonal(self) -> MultiConfig:
        return MultiConfig.from_lines([self.eta[i][i] for i in range(self.n_lines)],
                                      self.rates)


def build_triangular_arrays(config: MultiConfig,
                            policy: BoundaryPolicy = DEFAULT_POLICY,
                            validate: bool = True,
                            tolerance: float = 1e-9) -> TriArray:
    """All intermediate departure/unused stages of the iterated departure map.

    Row i starts from line i and is driven stage by stage through the
    unused outputs of row i-1.  With validate set, the diagonal is checked
    against the direct fold on the post-burn-in interior.
    """
    n = config.n_lines
    eta: list[list[SeqWindow]] = [[None] * (i + 1) for i in range(n)]
    xi: list[list[SeqWindow]] = [[None] * (i + 1) for i in range(n)]
    eta[0][0] = config.line(0)
    xi[0][0] = config.line(0)
    for i in range(1, n):
        eta[i][0] = config.line(i)
        for j in range(1, i + 1):
            svc = xi[i - 1][j - 1]
            j0 = _stage_j_left(policy, eta[i][j - 1], svc, f"array{i}.{j}")
            out = lindley_iterate(j0, eta[i][j - 1], svc)
            eta[i][j] = out.departures
            xi[i][j - 1] = out.unused
        xi[i][i] = eta[i][i]
    arr = TriArray(config.offset, eta, xi, config.rates)
    if validate and n > 1:
        direct = dmap(config, BoundaryPolicy.given(0.0))
        cut = int(0.2 * config.length)
        err = np.max(np.abs(arr.diagonal().values[:, cut:] - direct.values[:, cut:]))
        if err > tolerance:
            raise AssertionError(
                f"triangular array diagonal deviates from the departure fold by {err:.3e}")
    return arr


def check_intertwining_dynamics(config: MultiConfig, services: SeqWindow,
                                fraction: float = 0.2,
                                tolerance: float = 1e-9) -> IdentityReport:
    """Coupled step after the departure fold equals the fold after the
    multiline step, on the post-burn-in interior."""
    empty = BoundaryPolicy.given(0.0)
    lhs = coupled_step(dmap(config, empty), services, empty)
    rhs = dmap(multiline_step(config, services, empty), empty)
    cut = int(fraction * lhs.length)
    errors = lhs.values[:, cut:] - rhs.values[:, cut:]
    return _check("intertwining-dynamics", errors, tolerance,
                  lines=config.n_lines, interior=lhs.length - cut)


@dataclass(eq=False)
class IndependenceReport:
    """Cross-group correlation summary for the triangular-array variables."""

    labels: list[str]
    groups: list[int]
    matrix: np.ndarray
    bound: float
    max_cross_corr: float
    passed: bool

    def __str__(self):
        tag = "ok" if self.passed else "FAIL"
        return (f"independence: max cross-group |r| = {self.max_cross_corr:.4f} "
                f"(bound {self.bound:.4f}) {tag}")


def check_independence_structure(arrays: list[TriArray], k: int) -> IndependenceReport:
    """Estimate correlations among variables that are exactly independent.

    For each replica array the extracted variables are: two entries (at k-1
    and k) of every unused-input row of the last line, the last line's
    fold output at k-1, the successive fold differences at k, and the first
    line at k.  Variables from different groups are independent, so their
    sample correlations over replicas must stay within 4/sqrt(replicas).
    """
    if not arrays:
        raise ValueError("need at least one replica array")
    n = arrays[0].n_lines
    if n < 2:
        raise ValueError("independence structure needs at least two lines")
    offset = arrays[0].offset
    pos = offset + k
    labels: list[str] = []
    groups: list[int] = []
    gid = 0
    for j in range(n - 1):
        labels += [f"xi[{n},{j + 1}]_{{k-1}}", f"xi[{n},{j + 1}]_k"]
        groups += [gid, gid]
        gid += 1
    labels.append("eta[n]_{k-1}")
    groups.append(gid)
    gid += 1
    for i in range(n - 1):
        labels.append(f"diff eta[{i + 2}]-eta[{i + 1}] at k")
        groups.append(gid)
        gid += 1
    labels.append("eta[1]_k")
    groups.append(gid)

    rows = []
    for arr in arrays:
        if arr.n_lines != n or arr.offset != offset:
            raise ValueError("replica arrays are not aligned")
        a = pos - offset
        if a < 1 or a >= len(arr.eta[0][0]):
            raise ValueError("index k outside the replica window")
        diag = [arr.eta[i][i].values for i in range(n)]
        row = []
        for j in range(n - 1):
            vals = arr.xi[n - 1][j].values
            row += [vals[a - 1], vals[a]]
        row.append(diag[n - 1][a - 1])
        for i in range(n - 1):
            row.append(diag[i + 1][a] - diag[i][a])
        row.append(diag[0][a])
        rows.append(row)
    data = np.asarray(rows)
    matrix = np.corrcoef(data, rowvar=False)
    bound = 4.0 / np.sqrt(len(arrays))
    worst = 0.0
    g = np.asarray(groups)
    for p in range(len(labels)):
        for q in range(p + 1, len(labels)):
            if g[p] != g[q]:
                worst = max(worst, abs(float(matrix[p, q])))
    return IndependenceReport(labels, groups, matrix, bound, worst, worst < bound)
