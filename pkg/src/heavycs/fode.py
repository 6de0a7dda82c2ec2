"""Fractional-order financial system and its parameter identification.

The system, with Caputo derivatives of orders ``q1, q2, q3``::

    D^q1 x = z + x (y - a)
    D^q2 y = 1 - b y - x^2
    D^q3 z = -x - c z

is integrated with an explicit Grunwald-Letnikov scheme with full memory,
the right-hand side being evaluated at the previous step::

    s_k = f(s_{k-1}) h^q - sum_{j=1}^{k} c_j s_{k-j}

With every order equal to 1 the coefficients are ``(1, -1, 0, ...)`` and the
scheme is forward Euler.

Identification recovers ``(a, b, c)`` from an observed trajectory by
minimising the summed squared state error with cuckoo search. Observations
come from the same scheme, so discretisation error cancels at the truth.
"""

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np
from sklearn.base import BaseEstimator

from . import cuckoo
from ._validation import check_int, check_interval, check_positive

__all__ = [
    "DIVERGENCE_SENTINEL",
    "FinancialSystem",
    "Trajectory",
    "IdentificationTask",
    "IdentificationResult",
    "SimulationDivergedError",
    "gl_coefficients",
    "simulate",
    "simulate_batch",
    "identification_objective",
    "reference_task",
    "identify",
    "FractionalSystemIdentifier",
]

DIVERGENCE_SENTINEL = 1e12
REFERENCE_BOUNDS = ((0.0, 0.0, 0.0), (2.0, 1.0, 2.0))


class SimulationDivergedError(ArithmeticError):
    def __init__(self, step):
        super().__init__(f"state became non-finite at step {step}")
        self.step = step


def gl_coefficients(q, count):
    """First ``count`` Grunwald-Letnikov weights: ``c_0 = 1``, ``c_j = (1 - (1+q)/j) c_{j-1}``."""
    check_interval(q, "q", 0.0, 1.0)
    count = check_int(count, "count")
    c = np.empty(count)
    c[0] = 1.0
    for j in range(1, count):
        c[j] = (1.0 - (1.0 + q) / j) * c[j - 1]
    return c


@dataclass(frozen=True)
class FinancialSystem:
    q1: float = 1.0
    q2: float = 0.95
    q3: float = 0.99
    a: float = 1.0
    b: float = 0.1
    c: float = 1.0
    x0: float = 2.0
    y0: float = -1.0
    z0: float = 1.0
    h: float = 0.005
    n: int = 200

    def __post_init__(self):
        for name in ("q1", "q2", "q3"):
            check_interval(getattr(self, name), name, 0.0, 1.0)
        check_positive(self.h, "h")
        check_int(self.n, "n", minimum=0)

    @property
    def orders(self):
        return (self.q1, self.q2, self.q3)

    @property
    def params(self):
        return (self.a, self.b, self.c)

    @property
    def initial_state(self):
        return (self.x0, self.y0, self.z0)


@dataclass(frozen=True)
class Trajectory:
    """States ``(n + 1, 3)`` sampled every ``h``, starting with the initial state."""

    states: np.ndarray
    h: float

    @property
    def times(self):
        return self.h * np.arange(len(self.states))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "y", "z"])
        for t, row in zip(self.times, self.states):
            w.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        rows = list(csv.DictReader(io.StringIO(text)))
        states = np.array([[float(r["x"]), float(r["y"]), float(r["z"])] for r in rows])
        h = float(rows[1]["t"]) - float(rows[0]["t"]) if len(rows) > 1 else 0.0
        return cls(states, h)


def simulate_batch(params, orders, x0, h, n):
    """Integrate many parameter sets at once.

    ``params`` is ``(m, 3)`` rows of ``(a, b, c)``. Returns ``(states, diverged_at)``
    where ``states`` is ``(m, n + 1, 3)`` and ``diverged_at[i]`` is the first step
    with a non-finite state, or -1.
    """
    P = np.atleast_2d(np.asarray(params, dtype=float))
    m = P.shape[0]
    a, b, c = P[:, 0], P[:, 1], P[:, 2]
    q = np.asarray(orders, dtype=float)
    coef = np.stack([gl_coefficients(qi, n + 1) for qi in q])  # (3, n+1)
    hq = h ** q
    # rev[:, j] holds c_{n-j} so that a window of it lines up with the history.
    rev = coef[:, ::-1]
    S = np.empty((m, n + 1, 3))
    S[:, 0] = np.asarray(x0, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, n + 1):
            x, y, z = S[:, k - 1, 0], S[:, k - 1, 1], S[:, k - 1, 2]
            f = np.stack([z + x * (y - a), 1.0 - b * y - x * x, -x - c * z], axis=1)
            # sum_{j=1}^{k} c_j s_{k-j}: history s_0..s_{k-1} against c_k..c_1
            w = rev[:, n - k:n]  # (3, k)
            memory = np.einsum("mks,sk->ms", S[:, :k], w)
            S[:, k] = f * hq - memory
    finite = np.isfinite(S).all(axis=2)
    diverged_at = np.where(finite.all(axis=1), -1, np.argmin(finite, axis=1))
    return S, diverged_at


def simulate(system):
    """Trajectory of ``system``; raises :class:`SimulationDivergedError` on a non-finite state."""
    S, bad = simulate_batch([system.params], system.orders, system.initial_state, system.h, system.n)
    if bad[0] >= 0:
        raise SimulationDivergedError(int(bad[0]))
    return Trajectory(S[0], system.h)


@dataclass(frozen=True)
class IdentificationTask:
    """Recover ``(a, b, c)`` of the financial system from ``observed``.

    Orders, initial state, ``h`` and ``n`` are taken from ``system``; its
    ``(a, b, c)`` are the truth used for relative errors (``truth=None`` skips
    them). One iteration is one generation, ``2 * n_nests`` evaluations.
    """

    observed: Trajectory
    system: FinancialSystem
    lower: tuple = REFERENCE_BOUNDS[0]
    upper: tuple = REFERENCE_BOUNDS[1]
    n_nests: int = 40
    iterations: int = 200
    truth: tuple | None = None

    @property
    def max_fes(self):
        return self.n_nests + 2 * self.n_nests * self.iterations


def reference_task(**overrides):
    """The reference identification problem: default system, observed with the true parameters."""
    system = FinancialSystem()
    task = IdentificationTask(observed=simulate(system), system=system, truth=system.params)
    return replace(task, **overrides) if overrides else task


def _objective_batch(task, thetas):
    s = task.system
    S, bad = simulate_batch(thetas, s.orders, s.initial_state, s.h, s.n)
    diff = S[:, 1:] - task.observed.states[None, 1:]
    with np.errstate(over="ignore", invalid="ignore"):
        F = np.sum(diff * diff, axis=(1, 2))
    return np.where((bad >= 0) | ~np.isfinite(F), DIVERGENCE_SENTINEL, F)


def identification_objective(candidate, task):
    """Summed squared error over samples ``1..n`` and all three states; 1e12 if the simulation diverges."""
    return float(_objective_batch(task, np.asarray(candidate, dtype=float)[None, :])[0])


class _ObjectiveProblem:
    def __init__(self, task):
        self.task = task
        self.lower = np.asarray(task.lower, dtype=float)
        self.upper = np.asarray(task.upper, dtype=float)
        self.dim = 3
        self.name = "fode_financial"
        self.optimum_value = 0.0

    def evaluate_batch(self, X):
        return _objective_batch(self.task, X)

    def evaluate(self, x):
        return float(self.evaluate_batch(np.asarray(x, dtype=float)[None, :])[0])


@dataclass
class IdentificationResult:
    estimate: np.ndarray
    objective: float
    relative_errors: np.ndarray | None
    initial_best: float
    record: object = field(repr=False, default=None)


def identify(task, variant="cs", seed=0, init=None, max_fes=None):
    """Run cuckoo search on the identification objective.

    ``init`` seeds the first rows of the initial population (used to check
    elitism); ``max_fes`` overrides the budget implied by ``task.iterations``.
    """
    problem = _ObjectiveProblem(task)
    config = cuckoo.CSConfig(np=task.n_nests, max_fes=max_fes or task.max_fes,
                             dist=cuckoo.make_variant(variant), seed=seed)
    first = []

    def grab_initial(X):
        if not first:
            first.append(problem.evaluate_batch(X).min())

    record = cuckoo.run(problem, config, init=init, callback=grab_initial)
    est = record.final_best.position.copy()
    rel = None
    if task.truth is not None:
        truth = np.asarray(task.truth, dtype=float)
        rel = np.abs(est - truth) / np.abs(truth)
    return IdentificationResult(est, record.final_best.fitness, rel, float(first[0]), record)


class FractionalSystemIdentifier(BaseEstimator):
    """Estimate ``(a, b, c)`` of the fractional financial system from a trajectory.

    ``fit(X)`` takes the observed states ``(n + 1, 3)``; the first row is the
    initial state. ``predict(n_steps)`` simulates with the fitted parameters.
    """

    def __init__(self, variant="cs", orders=(1.0, 0.95, 0.99), h=0.005, lower=REFERENCE_BOUNDS[0],
                 upper=REFERENCE_BOUNDS[1], n_nests=40, n_iter=200, random_state=0):
        self.variant = variant
        self.orders = orders
        self.h = h
        self.lower = lower
        self.upper = upper
        self.n_nests = n_nests
        self.n_iter = n_iter
        self.random_state = random_state

    def _system(self, theta, x0, n):
        q1, q2, q3 = self.orders
        return FinancialSystem(q1, q2, q3, *theta, *x0, h=self.h, n=n)

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != 3 or X.shape[0] < 2:
            raise ValueError("X must have shape (n + 1, 3) with n >= 1")
        system = self._system((1.0, 1.0, 1.0), X[0], X.shape[0] - 1)
        task = IdentificationTask(Trajectory(X, self.h), system, tuple(self.lower), tuple(self.upper),
                                  self.n_nests, self.n_iter)
        res = identify(task, self.variant, self.random_state)
        self.params_ = res.estimate
        self.objective_ = res.objective
        self.initial_state_ = X[0].copy()
        self.n_fes_ = res.record.fes_used
        return self

    def predict(self, n_steps):
        return simulate(self._system(self.params_, self.initial_state_, n_steps)).states
