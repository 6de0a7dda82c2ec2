"""The 20-function benchmark suite.

Ten classical functions (``F_sph`` ... ``F_pn2``) and the first ten CEC2005
functions (``F1`` ... ``F10``). CEC shift vectors and matrices are read from
plain-text data files when a manifest supplies them; otherwise they are
generated from a fixed seed so the suite runs standalone.

Every kernel works on a batch ``Z`` of shape ``(n, D)`` and returns ``n``
values, which lets the optimizer evaluate a whole phase in one call.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import DimensionMismatchError, check_batch, check_bounds, check_int, check_vector

__all__ = [
    "BenchmarkProblem",
    "SuiteManifest",
    "ManifestEntry",
    "UnknownProblemError",
    "MalformedDataError",
    "CLASSICAL",
    "CEC2005",
    "NAMES",
    "evaluate",
    "get_problem",
    "suite",
    "synthetic_seed",
    "load_matrix",
]

SCHWEFEL_CONST = 418.9828872724339
SCHWEFEL_ARGMIN = 420.96874635998203


class UnknownProblemError(KeyError):
    pass


class MalformedDataError(ValueError):
    pass


# -- kernels (rows of Z are points) ------------------------------------------

def sphere(Z):
    return np.sum(Z * Z, axis=1)


def rosenbrock(Z):
    a, b = Z[:, :-1], Z[:, 1:]
    return np.sum(100.0 * (b - a * a) ** 2 + (a - 1.0) ** 2, axis=1)


def ackley(Z):
    d = Z.shape[1]
    r = np.sqrt(np.sum(Z * Z, axis=1) / d)
    c = np.sum(np.cos(2 * math.pi * Z), axis=1) / d
    # Grouped so the origin gives exactly 0.
    return (20.0 - 20.0 * np.exp(-0.2 * r)) + (math.e - np.exp(c))


def griewank(Z):
    i = np.sqrt(np.arange(1, Z.shape[1] + 1))
    return 1.0 + np.sum(Z * Z, axis=1) / 4000.0 - np.prod(np.cos(Z / i), axis=1)


def rastrigin(Z):
    return np.sum(Z * Z - 10.0 * np.cos(2 * math.pi * Z) + 10.0, axis=1)


def schwefel_226(Z):
    return SCHWEFEL_CONST * Z.shape[1] - np.sum(Z * np.sin(np.sqrt(np.abs(Z))), axis=1)


def salomon(Z):
    r = np.sqrt(np.sum(Z * Z, axis=1))
    return 1.0 - np.cos(2 * math.pi * r) + 0.1 * r


def whitley(Z):
    xi = Z[:, :, None]
    xj = Z[:, None, :]
    y = 100.0 * (xi * xi - xj) ** 2 + (1.0 - xj) ** 2
    return np.sum(y * y / 4000.0 - np.cos(y) + 1.0, axis=(1, 2))


def _penalty(Z, a, k, m):
    return np.sum(k * np.where(Z > a, Z - a, 0.0) ** m + k * np.where(Z < -a, -Z - a, 0.0) ** m, axis=1)


def penalized_1(Z):
    d = Z.shape[1]
    y = 1.0 + (Z + 1.0) / 4.0
    s = np.sin(math.pi * y)
    core = (10.0 * s[:, 0] ** 2
            + np.sum((y[:, :-1] - 1.0) ** 2 * (1.0 + 10.0 * s[:, 1:] ** 2), axis=1)
            + (y[:, -1] - 1.0) ** 2)
    return math.pi / d * core + _penalty(Z, 10.0, 100.0, 4)


def penalized_2(Z):
    s3 = np.sin(3 * math.pi * Z)
    core = (s3[:, 0] ** 2
            + np.sum((Z[:, :-1] - 1.0) ** 2 * (1.0 + s3[:, 1:] ** 2), axis=1)
            + (Z[:, -1] - 1.0) ** 2 * (1.0 + np.sin(2 * math.pi * Z[:, -1]) ** 2))
    return 0.1 * core + _penalty(Z, 5.0, 100.0, 4)


def schwefel_12(Z):
    return np.sum(np.cumsum(Z, axis=1) ** 2, axis=1)


def elliptic(Z):
    d = Z.shape[1]
    w = 1e6 ** (np.arange(d) / (d - 1)) if d > 1 else np.ones(1)
    return np.sum(w * Z * Z, axis=1)


def rosenbrock_shifted(Z):
    return rosenbrock(Z + 1.0)


# -- registry -----------------------------------------------------------------

@dataclass(frozen=True)
class _Def:
    kernel: object
    low: float
    high: float
    optimizer: float = 0.0
    bias: float = 0.0
    shifted: bool = False
    rotated: bool = False


CLASSICAL = {
    "F_sph": _Def(sphere, -100, 100),
    "F_ros": _Def(rosenbrock, -30, 30, optimizer=1.0),
    "F_ack": _Def(ackley, -32, 32),
    "F_grw": _Def(griewank, -600, 600),
    "F_ras": _Def(rastrigin, -5.12, 5.12),
    "F_sch": _Def(schwefel_226, -500, 500, optimizer=SCHWEFEL_ARGMIN),
    "F_sal": _Def(salomon, -100, 100),
    "F_wht": _Def(whitley, -10.24, 10.24, optimizer=1.0),
    "F_pn1": _Def(penalized_1, -50, 50, optimizer=-1.0),
    "F_pn2": _Def(penalized_2, -50, 50, optimizer=1.0),
}

CEC2005 = {
    "F1": _Def(sphere, -100, 100, bias=-450, shifted=True),
    "F2": _Def(schwefel_12, -100, 100, bias=-450, shifted=True),
    "F3": _Def(elliptic, -100, 100, bias=-450, shifted=True, rotated=True),
    "F4": _Def(schwefel_12, -100, 100, bias=-450, shifted=True),
    "F5": _Def(None, -100, 100, bias=-310, shifted=True),
    "F6": _Def(rosenbrock_shifted, -100, 100, bias=390, shifted=True),
    "F7": _Def(griewank, -600, 600, bias=-180, shifted=True, rotated=True),
    "F8": _Def(ackley, -32, 32, bias=-140, shifted=True, rotated=True),
    "F9": _Def(rastrigin, -5, 5, bias=-330, shifted=True),
    "F10": _Def(rastrigin, -5, 5, bias=-330, shifted=True, rotated=True),
}

NAMES = tuple(CLASSICAL) + tuple(CEC2005)


@dataclass(eq=False)
class BenchmarkProblem:
    """A named objective over a box, with its known optimum.

    ``evaluate`` maps ``x`` to ``kernel((x - shift) @ rotation) + f_bias``.
    ``matrix`` is the linear map of CEC F5 (``max |A x - A o|``); it is unused
    by every other problem.
    """

    name: str
    dim: int
    kernel: object
    lower: np.ndarray
    upper: np.ndarray
    f_bias: float = 0.0
    shift: np.ndarray | None = None
    rotation: np.ndarray | None = None
    matrix: np.ndarray | None = None
    optimizer: np.ndarray | None = None
    optimum_value: float = field(default=None)

    def __post_init__(self):
        self.dim = check_int(self.dim, "dim")
        self.lower, self.upper = check_bounds(self.lower, self.upper, self.dim)
        if self.shift is not None:
            self.shift = check_vector(self.shift, self.dim, "shift")
        if self.rotation is not None:
            self.rotation = np.asarray(self.rotation, dtype=float)
            if self.rotation.shape != (self.dim, self.dim):
                raise DimensionMismatchError(f"rotation must be {self.dim}x{self.dim}")
        if self.optimum_value is None:
            self.optimum_value = float(self.f_bias)
        for arr in (self.lower, self.upper, self.shift, self.rotation, self.matrix, self.optimizer):
            if arr is not None:
                arr.setflags(write=False)

    def evaluate_batch(self, X):
        Z = check_batch(X, self.dim)
        if self.matrix is not None:
            return np.max(np.abs((Z - self.shift) @ self.matrix.T), axis=1) + self.f_bias
        if self.shift is not None:
            Z = Z - self.shift
        if self.rotation is not None:
            Z = Z @ self.rotation
        return self.kernel(Z) + self.f_bias

    def evaluate(self, x):
        x = check_vector(x, self.dim)
        return float(self.evaluate_batch(x[None, :])[0])

    __call__ = evaluate

    def error(self, value):
        return value - self.optimum_value

    @property
    def is_orthogonal(self):
        if self.rotation is None:
            return True
        R = self.rotation
        return float(np.max(np.abs(R.T @ R - np.eye(self.dim)))) < 1e-10


def evaluate(problem, x):
    return problem.evaluate(x)


# -- data ---------------------------------------------------------------------

def load_matrix(path):
    """Whitespace-separated decimal text, one row per line."""
    try:
        rows = [line.split() for line in Path(path).read_text().splitlines() if line.strip()]
        data = np.array([[float(v) for v in row] for row in rows])
    except (OSError, ValueError) as exc:
        raise MalformedDataError(f"cannot read {path}: {exc}") from exc
    if data.ndim != 2:
        raise MalformedDataError(f"{path}: rows have unequal lengths")
    return data


def _load_shift(path, dim):
    data = load_matrix(path).ravel()
    if data.size < dim:
        raise MalformedDataError(f"{path} holds {data.size} values, need {dim}")
    return data[:dim].copy()


def _load_square(path, dim):
    data = load_matrix(path)
    if data.shape[0] < dim or data.shape[1] < dim:
        raise MalformedDataError(f"{path} is {data.shape[0]}x{data.shape[1]}, need {dim}x{dim}")
    return data[:dim, :dim].copy()


@dataclass(frozen=True)
class ManifestEntry:
    shift: str | None = None
    rotation: str | None = None
    matrix: str | None = None
    bias: float | None = None


@dataclass
class SuiteManifest:
    """Where CEC data lives; names absent from ``entries`` fall back to synthetic data."""

    entries: dict = field(default_factory=dict)
    root: Path = field(default_factory=Path)

    @classmethod
    def load(cls, path):
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
        except (OSError, ValueError) as exc:
            raise MalformedDataError(f"cannot read manifest {path}: {exc}") from exc
        entries = {}
        for name, spec in raw.items():
            if name not in CEC2005:
                raise UnknownProblemError(name)
            entries[name] = ManifestEntry(spec.get("shift"), spec.get("rotation"),
                                          spec.get("matrix"), spec.get("bias"))
        return cls(entries, path.parent)

    def describe(self, dim):
        """(name, dim, source) rows; source is a data path or the synthetic seed."""
        out = []
        for name in NAMES:
            e = self.entries.get(name)
            if name in CLASSICAL:
                out.append((name, dim, None))
            elif e is not None and e.shift:
                out.append((name, dim, str(self.root / e.shift)))
            else:
                out.append((name, dim, synthetic_seed(name, dim)))
        return out


def synthetic_seed(name, dim):
    """Seed for the stand-in CEC data of ``name`` at ``dim``: 2005 * 10**6 + 1000 * k + dim."""
    k = int(name[1:])
    return 2005 * 10**6 + 1000 * k + dim


def _random_rotation(rng, dim):
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.where(np.diag(r) < 0, -1.0, 1.0)


def _synthetic(name, dim, d):
    rng = np.random.default_rng(synthetic_seed(name, dim))
    width = d.high - d.low
    shift = d.low + (0.1 + 0.8 * rng.random(dim)) * width
    rotation = _random_rotation(rng, dim) if d.rotated else None
    matrix = None
    if name == "F5":
        while True:
            matrix = rng.integers(-500, 501, size=(dim, dim)).astype(float)
            if abs(np.linalg.det(matrix)) > 1e-6:
                break
    return shift, rotation, matrix


def _cec_optimizer(name, shift, d):
    o = shift.copy()
    dim = o.size
    if name == "F5":
        o[: math.ceil(dim / 4)] = d.low
        o[int(3 * dim / 4) - 1:] = d.high
    elif name == "F8":
        o[0::2] = d.low
    return o


def get_problem(name, dim, manifest=None):
    """Build ``name`` at dimension ``dim``.

    CEC problems take shift/rotation/matrix from ``manifest`` when listed,
    else from the seeded generator (see :func:`synthetic_seed`).
    """
    dim = check_int(dim, "dim")
    if name in CLASSICAL:
        d = CLASSICAL[name]
        return BenchmarkProblem(name, dim, d.kernel, np.full(dim, float(d.low)), np.full(dim, float(d.high)),
                                optimizer=np.full(dim, d.optimizer), optimum_value=0.0)
    if name not in CEC2005:
        raise UnknownProblemError(name)
    d = CEC2005[name]
    entry = (manifest.entries.get(name) if manifest is not None else None) or ManifestEntry()
    shift, rotation, matrix = _synthetic(name, dim, d)
    bias = d.bias if entry.bias is None else float(entry.bias)
    root = manifest.root if manifest is not None else Path()
    if entry.shift:
        shift = _load_shift(root / entry.shift, dim)
    if entry.rotation:
        rotation = _load_square(root / entry.rotation, dim)
    if entry.matrix:
        matrix = _load_square(root / entry.matrix, dim)
    optimizer = _cec_optimizer(name, shift, d)
    if name in ("F5", "F8"):
        # These place the optimum on the boundary: the shift vector is moved there.
        shift = optimizer
    return BenchmarkProblem(name, dim, d.kernel, np.full(dim, float(d.low)), np.full(dim, float(d.high)),
                            f_bias=bias, shift=shift,
                            rotation=rotation if d.rotated else None,
                            matrix=matrix if name == "F5" else None,
                            optimizer=optimizer, optimum_value=bias)


def suite(dim, manifest=None):
    """All 20 problems in table order: F_sph ... F_pn2, F1 ... F10."""
    return [get_problem(name, dim, manifest) for name in NAMES]
