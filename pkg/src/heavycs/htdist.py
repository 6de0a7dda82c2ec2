"""Heavy-tailed step-length samplers.

Five laws drive the global walk of the cuckoo engine: Levy (via Mantegna's
algorithm), Mittag-Leffler (Kozubowski-Rachev representation), Pareto,
Cauchy and Weibull (inverse transform). Every sampler draws from an explicit
:class:`RandomStream`, so a seed fully determines the output.

Each law also has a pure ``*_from_*`` transform that maps already-drawn
variates to a step length; the stream samplers are thin wrappers around them
that add the resampling rules.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as gamma_fn

from ._validation import check_interval, check_positive, check_seed

__all__ = [
    "Kind",
    "DistributionSpec",
    "RandomStream",
    "UnsupportedDistributionError",
    "mantegna_phi",
    "levy_from_normals",
    "mittag_leffler_from_uniforms",
    "pareto_from_uniform",
    "cauchy_from_uniform",
    "weibull_from_uniform",
    "sample_levy",
    "sample_mittag_leffler",
    "sample_pareto",
    "sample_cauchy",
    "sample_weibull",
    "sample",
    "cdf",
    "log_survival",
    "mittag_leffler_cdf",
    "tail_dominates_exponential",
]


class UnsupportedDistributionError(ValueError):
    """The requested operation has no closed form for this law."""


class Kind(str, enum.Enum):
    LEVY = "levy"
    MITTAG_LEFFLER = "ml"
    PARETO = "pareto"
    CAUCHY = "cauchy"
    WEIBULL = "weibull"


@dataclass(frozen=True)
class DistributionSpec:
    """Which law drives the global walk, and its two parameters.

    ``p1``/``p2`` are, per law: Levy (lambda, unused), Mittag-Leffler
    (beta, gamma), Pareto (a, b), Cauchy (mu, sigma), Weibull (xi, kappa).
    With ``symmetrize`` on, every draw gets an independent fair random sign.
    """

    kind: Kind
    p1: float
    p2: float = 0.0
    symmetrize: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        k = self.kind
        if k is Kind.LEVY:
            check_interval(self.p1, "lambda", 0.0, 2.0)
        elif k is Kind.MITTAG_LEFFLER:
            check_interval(self.p1, "beta", 0.0, 1.0)
            check_positive(self.p2, "gamma")
        elif k is Kind.PARETO:
            check_positive(self.p1, "a")
            check_positive(self.p2, "b")
        elif k is Kind.CAUCHY:
            check_interval(self.p1, "mu", -math.inf, math.inf, closed_high=False)
            check_positive(self.p2, "sigma")
        elif k is Kind.WEIBULL:
            check_positive(self.p1, "xi")
            check_positive(self.p2, "kappa")

    @property
    def heavy_tailed(self):
        if self.kind is Kind.WEIBULL:
            return self.p1 < 1
        if self.kind is Kind.MITTAG_LEFFLER:
            return self.p1 < 1
        return True

    def to_dict(self):
        return {"kind": self.kind.value, "p1": self.p1, "p2": self.p2,
                "symmetrize": self.symmetrize}

    @classmethod
    def from_dict(cls, d):
        return cls(Kind(d["kind"]), float(d["p1"]), float(d.get("p2", 0.0)),
                   bool(d.get("symmetrize", False)))


class RandomStream:
    """Seeded source of the uniform and normal variates used by the samplers.

    Identical seeds give bit-identical sequences. Uniform draws are in the
    open interval (0, 1): a zero from the generator is rejected and redrawn
    (the generator never returns 1). Streams are single-owner; use
    :meth:`spawn` to derive independent streams for parallel consumers
    (child seed = base seed + index, modulo 2**64).
    """

    def __init__(self, seed=0):
        self.seed = check_seed(seed)
        self._rng = np.random.Generator(np.random.PCG64(self.seed))

    def spawn(self, index):
        return RandomStream((self.seed + int(index)) % 2**64)

    def uniform(self, size=None):
        u = self._rng.random(size)
        if size is None:
            while u == 0.0:
                u = self._rng.random()
            return u
        bad = u == 0.0
        while bad.any():
            u[bad] = self._rng.random(int(bad.sum()))
            bad = u == 0.0
        return u

    def normal(self, size=None):
        return self._rng.standard_normal(size)

    def sign(self, size=None):
        """Independent fair +/-1 signs."""
        u = self._rng.random(size)
        return np.where(u < 0.5, -1.0, 1.0) if size is not None else (-1.0 if u < 0.5 else 1.0)

    def integers(self, high, size=None):
        """Uniform integers in [0, high)."""
        return self._rng.integers(0, high, size=size)

    def permutation(self, n):
        return self._rng.permutation(n)


def mantegna_phi(lam):
    """Scale factor of Mantegna's algorithm for stability index ``lam``.

    At ``lam == 2`` the sine factor vanishes and phi is exactly 0; the
    sampler rejects that value since every step would be zero.
    """
    lam = check_interval(lam, "lambda", 0.0, 2.0)
    if lam == 2.0:
        return 0.0
    num = gamma_fn(1 + lam) * math.sin(math.pi * lam / 2)
    den = gamma_fn((1 + lam) / 2) * lam * 2 ** ((lam - 1) / 2)
    return (num / den) ** (1 / lam)


# -- pure transforms ---------------------------------------------------------

def levy_from_normals(mu_n, v_n, lam):
    return mantegna_phi(lam) * np.asarray(mu_n) / np.abs(v_n) ** (1 / lam)


def _ml_bracket(v, beta):
    if beta == 1.0:
        # sin(pi) is not exactly zero in floating point; the bracket is 1.
        return np.ones_like(np.asarray(v, dtype=float))
    bp = beta * math.pi
    return math.sin(bp) / np.tan(bp * np.asarray(v, dtype=float)) - math.cos(bp)


def mittag_leffler_from_uniforms(u, v, beta, gamma):
    bracket = _ml_bracket(v, beta)
    return -gamma * np.log(u) * bracket ** (1 / beta)


def pareto_from_uniform(u, a, b):
    return b * (1 - np.asarray(u)) ** (-1 / a)


def cauchy_from_uniform(u, mu, sigma):
    # Inverse of F(x) = arctan(2(x - mu)/sigma)/pi + 1/2.
    return mu + sigma / 2 * np.tan(math.pi * (np.asarray(u) - 0.5))


def weibull_from_uniform(u, xi, kappa):
    return kappa * (-np.log(u)) ** (1 / xi)


# -- stream samplers ---------------------------------------------------------

def _scalar(x, size):
    return float(x) if size is None else x


def _redraw(values, bad, draw):
    """Redraw entries of ``values`` flagged by ``bad(values)`` until clean."""
    if np.ndim(values) == 0:
        while bad(np.asarray(values)):
            values = draw(None)
        return values
    mask = bad(values)
    while mask.any():
        values[mask] = draw(int(mask.sum()))
        mask = bad(values)
    return values


def sample_levy(lam, stream, size=None):
    """Mantegna draw: phi * mu / |v|**(1/lam) with standard-normal mu, v."""
    lam = check_interval(lam, "lambda", 0.0, 2.0, closed_high=False)
    mu_n = stream.normal(size)
    v_n = _redraw(stream.normal(size), lambda v: np.abs(v) ** (1 / lam) == 0.0, stream.normal)
    return _scalar(levy_from_normals(mu_n, v_n, lam), size)


def sample_mittag_leffler(beta, gamma, stream, size=None):
    beta = check_interval(beta, "beta", 0.0, 1.0)
    gamma = check_positive(gamma, "gamma")
    u = stream.uniform(size)

    def bad(v):
        t = np.tan(beta * math.pi * v)
        return ~np.isfinite(t) | (t == 0.0) | ~(_ml_bracket(v, beta) > 0)

    v = _redraw(stream.uniform(size), bad, stream.uniform)
    return _scalar(mittag_leffler_from_uniforms(u, v, beta, gamma), size)


def sample_pareto(a, b, stream, size=None):
    a = check_positive(a, "a")
    b = check_positive(b, "b")
    return _scalar(pareto_from_uniform(stream.uniform(size), a, b), size)


def sample_cauchy(mu, sigma, stream, size=None):
    sigma = check_positive(sigma, "sigma")
    u = _redraw(stream.uniform(size),
                lambda u: ~np.isfinite(np.tan(math.pi * (u - 0.5))), stream.uniform)
    return _scalar(cauchy_from_uniform(u, mu, sigma), size)


def sample_weibull(xi, kappa, stream, size=None):
    xi = check_positive(xi, "xi")
    kappa = check_positive(kappa, "kappa")
    return _scalar(weibull_from_uniform(stream.uniform(size), xi, kappa), size)


_SAMPLERS = {
    Kind.LEVY: lambda s, st, n: sample_levy(s.p1, st, n),
    Kind.MITTAG_LEFFLER: lambda s, st, n: sample_mittag_leffler(s.p1, s.p2, st, n),
    Kind.PARETO: lambda s, st, n: sample_pareto(s.p1, s.p2, st, n),
    Kind.CAUCHY: lambda s, st, n: sample_cauchy(s.p1, s.p2, st, n),
    Kind.WEIBULL: lambda s, st, n: sample_weibull(s.p1, s.p2, st, n),
}


def sample(spec, stream, size=None):
    """Draw from ``spec``; magnitudes are drawn first, then signs if symmetrized."""
    x = _SAMPLERS[spec.kind](spec, stream, size)
    if spec.symmetrize:
        x = x * stream.sign(size)
    return x


# -- distribution functions --------------------------------------------------

def mittag_leffler_cdf(x, beta, gamma=1.0, *, max_terms=2000):
    """CDF of the Mittag-Leffler law by its alternating power series.

    Partial sums use compensated summation and stop once a term drops below
    1e-16 past the peak term. Where the peak term exceeds 1e12 the series has
    lost all precision and ``nan`` is returned.
    """
    x = float(x)
    if x <= 0:
        return 0.0
    if beta == 1.0:
        return -math.expm1(-x / gamma)
    log_z = beta * math.log(x / gamma)
    terms = []
    peak = 0.0
    for k in range(1, max_terms + 1):
        log_mag = k * log_z - math.lgamma(1 + k * beta)
        mag = math.exp(log_mag) if log_mag < 700 else math.inf
        peak = max(peak, mag)
        if peak > 1e12:
            return math.nan
        terms.append(mag if k % 2 == 1 else -mag)
        if mag < 1e-16 and mag < peak:
            break
    return math.fsum(terms)


def cdf(spec, x):
    """Analytic CDF of the one-sided law (before symmetrization)."""
    x = np.asarray(x, dtype=float)
    k, p1, p2 = spec.kind, spec.p1, spec.p2
    if k is Kind.PARETO:
        return np.where(x >= p2, 1 - (p2 / np.maximum(x, p2)) ** p1, 0.0)
    if k is Kind.CAUCHY:
        return np.arctan(2 * (x - p1) / p2) / math.pi + 0.5
    if k is Kind.WEIBULL:
        return np.where(x > 0, -np.expm1(-(np.maximum(x, 0) / p2) ** p1), 0.0)
    if k is Kind.MITTAG_LEFFLER:
        return np.vectorize(lambda t: mittag_leffler_cdf(t, p1, p2))(x)
    raise UnsupportedDistributionError(f"no closed-form CDF for {k.value}")


def log_survival(spec, x):
    """log P(X > x) in closed form, accurate far into the tail."""
    x = np.asarray(x, dtype=float)
    k, p1, p2 = spec.kind, spec.p1, spec.p2
    if k is Kind.PARETO:
        return np.where(x >= p2, p1 * (np.log(p2) - np.log(np.maximum(x, p2))), 0.0)
    if k is Kind.CAUCHY:
        # 1/2 - arctan(z)/pi == arctan2(1, z)/pi without cancellation.
        return np.log(np.arctan2(1.0, 2 * (x - p1) / p2) / math.pi)
    if k is Kind.WEIBULL:
        return -(np.maximum(x, 0) / p2) ** p1
    if k is Kind.MITTAG_LEFFLER and p1 == 1.0:
        return -np.maximum(x, 0) / p2
    raise UnsupportedDistributionError(
        f"no closed-form tail for {k.value}" + (f"(beta={p1})" if k is Kind.MITTAG_LEFFLER else ""))


def tail_dominates_exponential(spec, lambda_exp, x_grid):
    """Whether the survival function outlasts ``exp(-lambda_exp * x)`` on the grid.

    True iff ``log T(x) + lambda_exp * x`` is strictly increasing along the
    (increasing, positive) grid, i.e. the ratio T(x) / exp(-lambda_exp x)
    keeps growing.
    """
    grid = np.asarray(x_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("x_grid must be an increasing sequence of positive reals")
    check_positive(lambda_exp, "lambda_exp")
    g = log_survival(spec, grid) + lambda_exp * grid
    return bool(np.all(np.diff(g) > 0))
