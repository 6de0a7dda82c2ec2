"""Cuckoo search with a pluggable global-walk distribution.

One generation is two phases over the population:

* global walk: ``U = X + alpha * d * (X - X_best)`` with ``d`` a vector of
  independent draws from the configured step distribution (Levy for standard
  CS; Mittag-Leffler, Pareto, Cauchy or Weibull for the variants);
* local walk: ``U = X + r * H(pa - eps) * (X_j - X_k)`` with two random
  partners ``j != k != i``.

Each candidate is clamped to the box, evaluated once, and kept only if it is
strictly better than its nest. The budget is counted in evaluations and the
run stops at exactly ``max_fes``, mid-phase if need be.

The global phase evaluates all candidates in one batch; this is equivalent
to the sequential loop because a candidate depends only on its own nest and
on ``X_best``, which is fixed for the phase. The local phase is order
dependent, since a partner may have moved earlier in the same phase. It is
evaluated speculatively from the phase's starting population and a candidate
is rebuilt and re-evaluated only when one of its partners moved before it, so
the result is identical to the plain sequential loop.
"""

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from . import htdist
from ._validation import (
    check_bounds,
    check_int,
    check_interval,
    check_positive,
    check_seed,
    check_vector,
)
from .htdist import DistributionSpec, Kind, RandomStream

__all__ = [
    "VARIANTS",
    "Nest",
    "CSConfig",
    "RunRecord",
    "FunctionProblem",
    "make_variant",
    "initialize",
    "global_walk",
    "local_walk",
    "greedy_select",
    "run",
    "CuckooSearch",
]

VARIANTS = ("cs", "csml", "csp", "csc", "csw")

_VARIANT_SPECS = {
    "cs": (Kind.LEVY, 1.5, 0.0),
    "csml": (Kind.MITTAG_LEFFLER, 0.8, 4.5),
    "csp": (Kind.PARETO, 1.5, 4.5),
    "csc": (Kind.CAUCHY, 0.8, 4.5),
    "csw": (Kind.WEIBULL, 0.3, 4.0),
}


_ONE_SIDED = (Kind.MITTAG_LEFFLER, Kind.PARETO, Kind.WEIBULL)


def make_variant(name, symmetrize=None):
    """Step distribution of a named variant with its tuned parameters.

    ``symmetrize=None`` gives the variant's usual steps: random signs for the
    one-sided laws (Mittag-Leffler, Pareto, Weibull), raw draws for Levy and
    Cauchy.
    """
    try:
        kind, p1, p2 = _VARIANT_SPECS[name.lower()]
    except (KeyError, AttributeError):
        raise ValueError(f"unknown variant {name!r}; expected one of {VARIANTS}") from None
    if symmetrize is None:
        symmetrize = kind in _ONE_SIDED
    return DistributionSpec(kind, p1, p2, bool(symmetrize))


@dataclass
class Nest:
    position: np.ndarray
    fitness: float


@dataclass(frozen=True)
class CSConfig:
    np: int
    max_fes: int
    dist: DistributionSpec = field(default_factory=lambda: make_variant("cs"))
    pa: float = 0.25
    alpha: float = 0.01
    seed: int = 0
    checkpoint_stride: int | None = None
    local_per_dimension: bool = True

    def __post_init__(self):
        check_int(self.np, "np", minimum=3)
        check_int(self.max_fes, "max_fes")
        check_interval(self.pa, "pa", 0.0, 1.0, closed_low=True)
        check_positive(self.alpha, "alpha", strict=False)
        check_seed(self.seed)
        if self.checkpoint_stride is not None:
            check_int(self.checkpoint_stride, "checkpoint_stride")
        if not isinstance(self.dist, DistributionSpec):
            raise TypeError("dist must be a DistributionSpec")

    @property
    def stride(self):
        return self.checkpoint_stride or self.np

    def to_dict(self):
        return {
            "np": self.np, "max_fes": self.max_fes, "dist": self.dist.to_dict(), "pa": self.pa,
            "alpha": self.alpha, "seed": self.seed, "checkpoint_stride": self.stride,
            "local_per_dimension": self.local_per_dimension,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["dist"] = DistributionSpec.from_dict(d["dist"])
        return cls(**d)


@dataclass
class RunRecord:
    config_fingerprint: str
    seed: int
    trajectory: list
    final_best: Nest
    fes_used: int
    problem: str = ""
    optimum_value: float = 0.0

    @property
    def final_error(self):
        return self.final_best.fitness - self.optimum_value

    def to_dict(self):
        return {
            "config_fingerprint": self.config_fingerprint,
            "seed": self.seed,
            "problem": self.problem,
            "optimum_value": self.optimum_value,
            "fes_used": self.fes_used,
            "final_fitness": self.final_best.fitness,
            "final_position": [float(v) for v in self.final_best.position],
        }


class FunctionProblem:
    """Adapts a plain callable and a box to what :func:`run` expects.

    With ``vectorized=True`` the callable takes an ``(n, D)`` array and
    returns ``n`` values; otherwise it is called once per row.
    """

    def __init__(self, func, lower, upper, name="objective", vectorized=False):
        self.lower, self.upper = check_bounds(lower, upper)
        self.dim = self.lower.size
        self.func = func
        self.name = name
        self.vectorized = vectorized
        self.optimum_value = 0.0

    def evaluate_batch(self, X):
        X = np.atleast_2d(X)
        if self.vectorized:
            return np.asarray(self.func(X), dtype=float)
        return np.array([float(self.func(x)) for x in X])

    def evaluate(self, x):
        return float(self.evaluate_batch(np.asarray(x, dtype=float)[None, :])[0])


def fingerprint(problem, config):
    payload = {"problem": getattr(problem, "name", "objective"), "dim": int(problem.dim),
               **{k: v for k, v in config.to_dict().items() if k != "seed"}}
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


# -- walks ----------------------------------------------------------------------

def _clamp(U, lower, upper):
    return np.minimum(np.maximum(U, lower), upper)


def _global_candidates(P, best, config, stream, lower, upper):
    d = htdist.sample(config.dist, stream, size=P.shape)
    return _clamp(P + config.alpha * d * (P - best), lower, upper)


def global_walk(nest, best, config, stream, bounds=None):
    """Candidate from the heavy-tailed walk around ``nest`` (one draw per dimension)."""
    x = check_vector(nest.position)
    b = check_vector(best.position, x.size, "best")
    lower, upper = bounds if bounds is not None else (-np.inf, np.inf)
    return _global_candidates(x[None, :], b, config, stream, lower, upper)[0]


def _local_draws(config, stream, n, dim):
    shape = (n, dim) if config.local_per_dimension else n
    r = stream.uniform(shape)
    eps = stream.uniform(shape)
    gate = np.where(config.pa - eps >= 0, 1.0, 0.0)  # H(0) = 1
    return r, gate


def _partners(stream, n):
    """Random (j, k) per index i with i, j, k pairwise distinct."""
    i = np.arange(n)
    j = stream.integers(n - 1, n)
    j = j + (j >= i)
    k = stream.integers(n - 2, n)
    lo, hi = np.minimum(i, j), np.maximum(i, j)
    k = k + (k >= lo)
    k = k + (k >= hi)
    return j, k


def local_walk(nest, partner_j, partner_k, config, stream, bounds=None):
    """Candidate from the local walk; ``r`` and ``eps`` are drawn per dimension unless configured scalar."""
    x = check_vector(nest.position)
    xj = check_vector(partner_j.position, x.size, "partner_j")
    xk = check_vector(partner_k.position, x.size, "partner_k")
    r, gate = _local_draws(config, stream, 1, x.size)
    lower, upper = bounds if bounds is not None else (-np.inf, np.inf)
    return _clamp(x + (r * gate)[0] * (xj - xk), lower, upper)


def greedy_select(current, candidate_position, problem):
    """Evaluate the candidate; keep it only on strict improvement. Returns (nest, 1)."""
    f = problem.evaluate(candidate_position)
    if f < current.fitness:
        return Nest(np.array(candidate_position, dtype=float), f), 1
    return current, 1


# -- driver -----------------------------------------------------------------------

def initialize(problem, config, stream):
    """NP nests drawn uniformly in the box and evaluated (uses NP evaluations)."""
    P = _init_positions(problem, config, stream)
    f = problem.evaluate_batch(P)
    return [Nest(p.copy(), float(v)) for p, v in zip(P, f)]


def _init_positions(problem, config, stream):
    u = stream.uniform((config.np, problem.dim))
    return problem.lower + u * (problem.upper - problem.lower)


class _Tracker:
    """Best-so-far bookkeeping and trajectory checkpoints."""

    def __init__(self, stride, max_fes):
        self.stride = stride
        self.max_fes = max_fes
        self.fes = 0
        self.best = np.inf
        self.trajectory = []

    def record(self, values):
        """Account for evaluations yielding ``values``, in order."""
        values = np.asarray(values, dtype=float)
        n = values.size
        if n == 0:
            return
        run_min = np.minimum.accumulate(np.concatenate(([self.best], np.where(np.isnan(values), np.inf, values))))[1:]
        fes = self.fes + np.arange(1, n + 1)
        for idx in np.nonzero(fes % self.stride == 0)[0]:
            self.trajectory.append((int(fes[idx]), float(run_min[idx])))
        self.fes += n
        self.best = float(run_min[-1])

    def close(self):
        if not self.trajectory or self.trajectory[-1][0] != self.fes:
            self.trajectory.append((self.fes, self.best))


def run(problem, config, init=None, callback=None):
    """Run cuckoo search on ``problem`` until ``config.max_fes`` evaluations.

    ``init`` optionally overrides the first rows of the random initial
    population (the random draws are still consumed). ``callback`` is called
    with every batch of evaluated positions; it is meant for instrumentation.
    """
    stream = RandomStream(config.seed)
    lower, upper = problem.lower, problem.upper
    n, dim = config.np, problem.dim
    tracker = _Tracker(config.stride, config.max_fes)

    P = _init_positions(problem, config, stream)
    if init is not None:
        rows = np.atleast_2d(np.asarray(init, dtype=float))
        P[: rows.shape[0]] = _clamp(rows, lower, upper)
    m = min(n, config.max_fes)
    f = np.full(n, np.inf)
    f[:m] = problem.evaluate_batch(P[:m])
    if callback is not None:
        callback(P[:m])
    tracker.record(f[:m])
    P, f = P[:m], f[:m]  # a budget below NP truncates the population
    ib = int(np.argmin(f))
    best_x, best_f = P[ib].copy(), float(f[ib])

    while tracker.fes < config.max_fes and P.shape[0] >= 3:
        # global walk, batched
        U = _global_candidates(P, best_x, config, stream, lower, upper)
        m = min(n, config.max_fes - tracker.fes)
        fu = problem.evaluate_batch(U[:m])
        if callback is not None:
            callback(U[:m])
        better = fu < f[:m]
        P[:m][better] = U[:m][better]
        f[:m][better] = fu[better]
        tracker.record(fu)
        if tracker.fes >= config.max_fes:
            break

        # local walk: speculative batch, then sequential repair
        r, gate = _local_draws(config, stream, n, dim)
        step = r * gate if config.local_per_dimension else (r * gate)[:, None]
        j, k = _partners(stream, n)
        m = min(n, config.max_fes - tracker.fes)
        moving = np.any(step[:m] != 0, axis=1)
        U = _clamp(P[:m] + step[:m] * (P[j[:m]] - P[k[:m]]), lower, upper)
        fu = np.array(f[:m])  # a zero step reproduces the nest, so its value is known
        if moving.any():
            fu[moving] = problem.evaluate_batch(U[moving])
        moved = np.zeros(n, dtype=bool)
        for i in np.nonzero(moving)[0]:
            if moved[j[i]] or moved[k[i]]:
                U[i] = _clamp(P[i] + step[i] * (P[j[i]] - P[k[i]]), lower, upper)
                fu[i] = problem.evaluate_batch(U[i][None, :])[0]
            if fu[i] < f[i]:
                P[i] = U[i]
                f[i] = fu[i]
                moved[i] = True
        if callback is not None:
            callback(U[moving])
        tracker.record(fu)

        ib = int(np.argmin(f))
        if f[ib] < best_f:
            best_x, best_f = P[ib].copy(), float(f[ib])

    ib = int(np.argmin(f))
    if f[ib] < best_f:
        best_x, best_f = P[ib].copy(), float(f[ib])
    tracker.close()
    return RunRecord(
        config_fingerprint=fingerprint(problem, config),
        seed=config.seed,
        trajectory=tracker.trajectory,
        final_best=Nest(best_x, best_f),
        fes_used=tracker.fes,
        problem=getattr(problem, "name", "objective"),
        optimum_value=float(getattr(problem, "optimum_value", 0.0)),
    )


class CuckooSearch(BaseEstimator):
    """Estimator-style front end to :func:`run`.

    ``fit`` takes a benchmark problem, or a callable together with
    ``bounds=(lower, upper)``. ``n_nests=None`` picks NP = D (30 when D = 10);
    ``max_fes=None`` picks 10000 * D.

    Attributes set by ``fit``: ``best_position_``, ``best_fitness_``,
    ``n_fes_``, ``record_``.
    """

    def __init__(self, variant="cs", n_nests=None, pa=0.25, alpha=0.01, max_fes=None,
                 symmetrize=None, checkpoint_stride=None, random_state=0):
        self.variant = variant
        self.n_nests = n_nests
        self.pa = pa
        self.alpha = alpha
        self.max_fes = max_fes
        self.symmetrize = symmetrize
        self.checkpoint_stride = checkpoint_stride
        self.random_state = random_state

    def _config(self, dim):
        np_ = self.n_nests if self.n_nests is not None else default_np(dim)
        return CSConfig(
            np=np_,
            max_fes=self.max_fes if self.max_fes is not None else 10_000 * dim,
            dist=make_variant(self.variant, self.symmetrize),
            pa=self.pa, alpha=self.alpha, seed=self.random_state,
            checkpoint_stride=self.checkpoint_stride,
        )

    def fit(self, problem, bounds=None, vectorized=False):
        if callable(problem) and not hasattr(problem, "evaluate_batch"):
            if bounds is None:
                raise ValueError("bounds=(lower, upper) is required for a plain callable")
            problem = FunctionProblem(problem, *bounds, vectorized=vectorized)
        record = run(problem, self._config(problem.dim))
        self.record_ = record
        self.best_position_ = record.final_best.position
        self.best_fitness_ = record.final_best.fitness
        self.n_fes_ = record.fes_used
        return self

    def convergence_curve(self):
        """(fes, best_fitness) checkpoints of the last fit, as an array."""
        return np.array(self.record_.trajectory, dtype=float)


def default_np(dim):
    """Population rule of the experiments: NP = D, except NP = 30 at D = 10."""
    return 30 if dim == 10 else max(dim, 3)
