"""Nonparametric comparison of optimizer results.

Wilcoxon signed-rank marks per problem against a baseline, Friedman average
ranks across problems, and the plain-text/CSV tables that summarise them.

Marks follow the comparison tables: ``‡`` means the baseline is worse than
the algorithm in that column, ``†`` means it is better, ``≈`` means no
significant difference at the 5% level. They are rendered in ASCII as
``-``, ``+`` and ``=`` respectively.
"""

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.stats import chi2, rankdata

__all__ = [
    "ResultMatrix",
    "Mark",
    "ComparisonVerdict",
    "WilcoxonResult",
    "FriedmanResult",
    "MarkTable",
    "DegenerateMatrixError",
    "wilcoxon_signed_rank",
    "wilcoxon_exact_cdf",
    "friedman",
    "mark_table",
    "comparison_report",
    "parse_report_csv",
]

EXACT_MAX_N = 12


class DegenerateMatrixError(ValueError):
    pass


@dataclass
class ResultMatrix:
    """Final best values per (algorithm, problem), one entry per run."""

    algorithms: list
    problems: list
    cells: dict = field(default_factory=dict)

    def __post_init__(self):
        self.algorithms = list(self.algorithms)
        self.problems = list(self.problems)
        for a in self.algorithms:
            for p in self.problems:
                vals = np.asarray(self.cells.get((a, p), ()), dtype=float).ravel()
                if vals.size == 0:
                    raise ValueError(f"cell ({a}, {p}) has no runs")
                self.cells[(a, p)] = vals

    def __getitem__(self, key):
        return self.cells[key]

    def aggregate(self, how="mean"):
        """(n_problems, n_algorithms) array of per-cell means (or medians)."""
        fn = {"mean": np.mean, "median": np.median}[how]
        return np.array([[fn(self.cells[(a, p)]) for a in self.algorithms] for p in self.problems])

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["algorithm", "problem", "run", "value"])
        for a in self.algorithms:
            for p in self.problems:
                for r, v in enumerate(self.cells[(a, p)]):
                    w.writerow([a, p, r, f"{v:.17g}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        rows = list(csv.DictReader(io.StringIO(text)))
        algs, probs, cells = [], [], {}
        for row in rows:
            a, p = row["algorithm"], row["problem"]
            if a not in algs:
                algs.append(a)
            if p not in probs:
                probs.append(p)
            cells.setdefault((a, p), []).append((int(row["run"]), float(row["value"])))
        cells = {k: [v for _, v in sorted(vs)] for k, vs in cells.items()}
        return cls(algs, probs, cells)


class Mark(enum.Enum):
    WORSE = ("-", "‡")    # baseline worse than the algorithm
    SIMILAR = ("=", "≈")
    BETTER = ("+", "†")   # baseline better than the algorithm

    @property
    def ascii(self):
        return self.value[0]

    @property
    def symbol(self):
        return self.value[1]


class ComparisonVerdict(NamedTuple):
    mark: Mark
    p_value: float


class WilcoxonResult(NamedTuple):
    statistic: float
    p_value: float
    w_plus: float
    w_minus: float
    n: int
    exact: bool


class FriedmanResult(NamedTuple):
    avg_ranks: dict
    chi_square: float
    p_value: float


def _norm_sf(z):
    return 0.5 * math.erfc(z / math.sqrt(2))


def wilcoxon_exact_cdf(ranks):
    """Null distribution of W+ for the given (possibly mid-) ranks.

    Returns ``(support, pmf)`` where support holds the attainable values of
    W+. Ranks are doubled to integers so ties stay exact.
    """
    twice = np.rint(2 * np.asarray(ranks, dtype=float)).astype(np.int64)
    total = int(twice.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in twice:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts = counts + shifted
    pmf = counts / 2.0 ** len(twice)
    support = np.arange(total + 1) / 2.0
    keep = pmf > 0
    return support[keep], pmf[keep]


def wilcoxon_signed_rank(x, y, alternative="two-sided", exact_max_n=EXACT_MAX_N):
    """Paired Wilcoxon signed-rank test on ``d = x - y``.

    Zero differences are dropped and tied ``|d|`` get midranks. For up to
    ``exact_max_n`` nonzero pairs the p-value is exact (enumerating the sign
    patterns over the actual ranks); above that it uses the normal
    approximation with tie and continuity corrections. ``alternative`` is
    ``"two-sided"``, ``"less"`` (x tends to be smaller) or ``"greater"``.

    When every difference is zero the statistic is ``nan`` and ``p = 1``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size == 0:
        raise ValueError("x and y must be non-empty 1-D sequences of equal length")
    if alternative not in ("two-sided", "less", "greater"):
        raise ValueError(f"unknown alternative {alternative!r}")
    d = x - y
    d = d[d != 0]
    n = d.size
    if n == 0:
        return WilcoxonResult(math.nan, 1.0, 0.0, 0.0, 0, True)
    ranks = rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    stat = min(w_plus, w_minus)

    if n <= exact_max_n:
        support, pmf = wilcoxon_exact_cdf(ranks)
        p_le = float(pmf[support <= w_plus + 1e-9].sum())
        p_ge = float(pmf[support >= w_plus - 1e-9].sum())
        p = {"less": p_le, "greater": p_ge, "two-sided": 2 * min(p_le, p_ge)}[alternative]
        return WilcoxonResult(stat, min(1.0, p), w_plus, w_minus, n, True)

    mean = n * (n + 1) / 4.0
    _, t = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(t ** 3 - t)) / 48.0
    sd = math.sqrt(var)
    if alternative == "two-sided":
        dev = abs(w_plus - mean) - 0.5
        p = 1.0 if dev <= 0 else 2 * _norm_sf(dev / sd)
    elif alternative == "less":
        p = 1 - _norm_sf((w_plus - mean + 0.5) / sd)
    else:
        p = _norm_sf((w_plus - mean - 0.5) / sd)
    return WilcoxonResult(stat, min(1.0, p), w_plus, w_minus, n, False)


def friedman(matrix, aggregate="mean"):
    """Friedman average ranks (1 = lowest value) and tie-corrected chi-square."""
    k, N = len(matrix.algorithms), len(matrix.problems)
    if k < 2 or N < 2:
        raise DegenerateMatrixError("need at least two algorithms and two problems")
    table = matrix.aggregate(aggregate)
    ranks = np.vstack([rankdata(row) for row in table])
    avg = ranks.mean(axis=0)
    rank_sums = ranks.sum(axis=0)
    stat = 12.0 / (N * k * (k + 1)) * float(np.sum(rank_sums ** 2)) - 3.0 * N * (k + 1)
    ties = sum(float(np.sum(c ** 3 - c)) for c in (np.unique(row, return_counts=True)[1] for row in table))
    correction = 1.0 - ties / (N * (k ** 3 - k))
    if correction <= 0:
        chi, p = 0.0, 1.0
    else:
        chi = max(stat / correction, 0.0)
        p = float(chi2.sf(chi, k - 1))
    return FriedmanResult(dict(zip(matrix.algorithms, avg.tolist())), chi, p)


@dataclass
class MarkTable:
    baseline: str
    verdicts: dict
    totals: dict

    def totals_row(self, algorithm):
        w, s, b = self.totals[algorithm]
        return f"{w}/{s}/{b}"


def mark_table(baseline, matrix, level=0.05):
    """Wilcoxon verdict of ``baseline`` against every other algorithm, per problem.

    Totals per algorithm are ``(‡, ≈, †)`` counts: problems where the
    baseline is worse, similar, better.
    """
    if baseline not in matrix.algorithms:
        raise KeyError(f"baseline {baseline!r} not in matrix")
    verdicts, totals = {}, {}
    for a in matrix.algorithms:
        if a == baseline:
            continue
        counts = {Mark.WORSE: 0, Mark.SIMILAR: 0, Mark.BETTER: 0}
        for p in matrix.problems:
            xb, xa = matrix[(baseline, p)], matrix[(a, p)]
            if xb.size != xa.size:
                raise ValueError(f"run counts differ on {p}: {xb.size} vs {xa.size}")
            res = wilcoxon_signed_rank(xb, xa)
            if res.p_value >= level:
                mark = Mark.SIMILAR
            else:
                # Minimisation: larger baseline values mean a worse baseline.
                mark = Mark.WORSE if res.w_plus > res.w_minus else Mark.BETTER
            verdicts[(a, p)] = ComparisonVerdict(mark, res.p_value)
            counts[mark] += 1
        totals[a] = (counts[Mark.WORSE], counts[Mark.SIMILAR], counts[Mark.BETTER])
    return MarkTable(baseline, verdicts, totals)


@dataclass
class ComparisonReport:
    matrix: ResultMatrix
    baseline: str
    marks: MarkTable
    p_values: dict
    ranking: FriedmanResult
    aggregate: str = "mean"

    def to_text(self):
        algs = self.matrix.algorithms
        table = self.matrix.aggregate(self.aggregate)
        head = ["Fun"] + algs
        rows = []
        for pi, p in enumerate(self.matrix.problems):
            row = [p]
            for ai, a in enumerate(algs):
                cell = f"{table[pi, ai]:.2E}"
                if a != self.baseline:
                    cell += self.marks.verdicts[(a, p)].mark.ascii
                row.append(cell)
            rows.append(row)
        rows.append(["-/=/+"] + ["-" if a == self.baseline else self.marks.totals_row(a) for a in algs])
        rows.append(["p-value"] + ["-" if a == self.baseline else f"{self.p_values[a]:.2E}" for a in algs])
        rows.append(["Avg. rank"] + [f"{self.ranking.avg_ranks[a]:.2f}" for a in algs])
        widths = [max(len(r[i]) for r in [head] + rows) for i in range(len(head))]
        fmt = lambda r: "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()
        legend = "marks vs baseline " + self.baseline + ": - = ‡ (baseline worse), = = ≈ (similar), + = † (baseline better)"
        return "\n".join([fmt(head)] + [fmt(r) for r in rows] + [legend]) + "\n"

    def to_csv(self):
        algs = self.matrix.algorithms
        table = self.matrix.aggregate(self.aggregate)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["problem"] + [c for a in algs for c in (a, f"{a}_mark")])
        for pi, p in enumerate(self.matrix.problems):
            row = [p]
            for ai, a in enumerate(algs):
                mark = "" if a == self.baseline else self.marks.verdicts[(a, p)].mark.ascii
                row += [f"{table[pi, ai]:.17g}", mark]
            w.writerow(row)
        w.writerow(["-/=/+"] + [c for a in algs for c in ("" if a == self.baseline else self.marks.totals_row(a), "")])
        w.writerow(["p-value"] + [c for a in algs for c in ("" if a == self.baseline else f"{self.p_values[a]:.17g}", "")])
        w.writerow(["avg_rank"] + [c for a in algs for c in (f"{self.ranking.avg_ranks[a]:.17g}", "")])
        return buf.getvalue()


def comparison_report(matrix, baseline, aggregate="mean"):
    """Mark table, per-algorithm Wilcoxon p over per-problem aggregates, Friedman ranks."""
    marks = mark_table(baseline, matrix)
    table = matrix.aggregate(aggregate)
    b = matrix.algorithms.index(baseline)
    p_values = {a: wilcoxon_signed_rank(table[:, b], table[:, i]).p_value
                for i, a in enumerate(matrix.algorithms) if a != baseline}
    return ComparisonReport(matrix, baseline, marks, p_values, friedman(matrix, aggregate), aggregate)


def parse_report_csv(text):
    """Read the per-problem aggregate values of a report CSV back into a matrix."""
    rows = list(csv.reader(io.StringIO(text)))
    header = rows[0]
    algs = header[1::2]
    cells, probs = {}, []
    for row in rows[1:]:
        if row[0] in ("-/=/+", "p-value", "avg_rank"):
            continue
        probs.append(row[0])
        for i, a in enumerate(algs):
            cells[(a, row[0])] = [float(row[1 + 2 * i])]
    return ResultMatrix(algs, probs, cells)
