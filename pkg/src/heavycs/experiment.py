"""Experiment harness: benchmark runs, comparisons, sweeps, identification.

Everything written is plain text (JSON manifests, CSV data) with 17
significant digits and no timestamps, so running the same configuration
twice leaves byte-identical files.

Seeds: run ``r`` of every cell has run seed ``base_seed + r``. Each variant
draws from its own stream, seeded with the run seed plus a fixed offset taken
from a hash of the variant name, so paired runs of two variants share the
run index but not their random numbers.
"""

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import bench, cuckoo, fode, stats
from ._validation import check_int, check_seed
from .htdist import DistributionSpec

__all__ = [
    "ExperimentConfig",
    "IncompleteStoreError",
    "stream_seed",
    "bench_run",
    "load_matrices",
    "compare",
    "sweep",
    "parse_grid",
    "ident_run",
    "ident_landscape",
    "summary_rows",
]

U64 = 2**64


class IncompleteStoreError(RuntimeError):
    pass


def _variant_offset(variant):
    return int.from_bytes(hashlib.sha256(variant.encode()).digest()[:8], "big")


def stream_seed(base_seed, variant, run_index):
    """Seed of the engine stream for run ``run_index`` of ``variant``."""
    return (_variant_offset(variant) + base_seed + run_index) % U64


def _fmt(v):
    return f"{v:.17g}"


def _write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    Path(path).write_text(buf.getvalue())


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


@dataclass
class ExperimentConfig:
    """What to run. ``max_fes`` and ``np`` accept a number or ``"rule"``.

    The rules are the experimental defaults: ``10000 * D`` evaluations and
    ``NP = D`` (30 when ``D = 10``).
    """

    problems: list = field(default_factory=lambda: list(bench.NAMES))
    dims: list = field(default_factory=lambda: [30])
    variants: list = field(default_factory=lambda: list(cuckoo.VARIANTS))
    runs: int = 50
    max_fes: object = "rule"
    np: object = "rule"
    base_seed: int = 0
    aggregate: str = "mean"
    manifest: str | None = None

    def __post_init__(self):
        check_int(self.runs, "runs")
        check_seed(self.base_seed)
        for name in self.problems:
            if name not in bench.NAMES:
                raise bench.UnknownProblemError(name)
        for v in self.variants:
            cuckoo.make_variant(v)
        for d in self.dims:
            check_int(d, "dim")
        if self.aggregate not in ("mean", "median"):
            raise ValueError("aggregate must be 'mean' or 'median'")
        for key in ("max_fes", "np"):
            value = getattr(self, key)
            if value != "rule":
                check_int(value, key)

    def budget(self, dim):
        return 10_000 * dim if self.max_fes == "rule" else int(self.max_fes)

    def population(self, dim):
        return cuckoo.default_np(dim) if self.np == "rule" else int(self.np)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def _one_run(job):
    name, dim, variant, r, cfg_dict, manifest_path = job
    manifest = bench.SuiteManifest.load(manifest_path) if manifest_path else None
    problem = bench.get_problem(name, dim, manifest)
    config = cuckoo.CSConfig.from_dict(cfg_dict)
    return cuckoo.run(problem, config)


def _jobs(config):
    for dim in config.dims:
        for name in config.problems:
            for variant in config.variants:
                for r in range(config.runs):
                    cs = cuckoo.CSConfig(np=config.population(dim), max_fes=config.budget(dim),
                                         dist=cuckoo.make_variant(variant),
                                         seed=stream_seed(config.base_seed, variant, r))
                    yield (name, dim, variant, r, cs.to_dict(), config.manifest)


def _map(fn, jobs, n_jobs):
    if n_jobs and n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(fn, jobs, chunksize=1))
    return [fn(j) for j in jobs]


def _traj_name(name, dim, variant, r):
    return f"{name}_D{dim}_{variant}_r{r:03d}.csv"


def summary_rows(records, aggregate="mean"):
    """(problem, dim, variant, runs, mean, std[, median]) per cell, std with ddof=0."""
    cells = {}
    for job, rec in records:
        name, dim, variant = job[:3]
        cells.setdefault((name, dim, variant), []).append(rec.final_error)
    rows = []
    for (name, dim, variant), errs in cells.items():
        e = np.array(errs)
        row = [name, dim, variant, e.size, _fmt(float(np.mean(e))), _fmt(float(np.std(e)))]
        if aggregate == "median":
            row.append(_fmt(float(np.median(e))))
        rows.append(row)
    return rows


def bench_run(config, out, n_jobs=1):
    """Run every (problem, dim, variant, run) and persist the store under ``out``."""
    out = Path(out)
    (out / "trajectories").mkdir(parents=True, exist_ok=True)
    jobs = list(_jobs(config))
    records = list(zip(jobs, _map(_one_run, jobs, n_jobs)))

    entries = []
    for job, rec in records:
        name, dim, variant, r, cfg = job[:5]
        fname = _traj_name(name, dim, variant, r)
        _write_csv(out / "trajectories" / fname, ["fes", "best_fitness"],
                   [[f, _fmt(v)] for f, v in rec.trajectory])
        entries.append({
            "problem": name, "dim": dim, "variant": variant, "run": r,
            "run_seed": config.base_seed + r, "seed": rec.seed, "config": cfg,
            "config_fingerprint": rec.config_fingerprint, "fes_used": rec.fes_used,
            "final_fitness": _fmt(rec.final_best.fitness), "final_error": _fmt(rec.final_error),
            "final_position": [_fmt(v) for v in rec.final_best.position],
            "trajectory": f"trajectories/{fname}",
        })
    _write_json(out / "manifest.json", {"experiment": config.to_dict(), "runs": entries})

    header = ["problem", "dim", "variant", "runs", "mean", "std"]
    if config.aggregate == "median":
        header.append("median")
    _write_csv(out / "summary.csv", header, summary_rows(records, config.aggregate))
    return out


def load_matrices(out):
    """Per-dimension :class:`ResultMatrix` of final errors from a store."""
    out = Path(out)
    try:
        data = json.loads((out / "manifest.json").read_text())
    except (OSError, ValueError) as exc:
        raise IncompleteStoreError(f"no readable manifest in {out}: {exc}") from exc
    by_dim = {}
    for e in data["runs"]:
        cell = by_dim.setdefault(e["dim"], {}).setdefault((e["variant"], e["problem"]), {})
        cell[e["run"]] = float(e["final_error"])
    exp = data["experiment"]
    matrices = {}
    for dim, cells in sorted(by_dim.items()):
        algs, probs = list(exp["variants"]), list(exp["problems"])
        missing = [(a, p) for a in algs for p in probs if (a, p) not in cells]
        if missing:
            raise IncompleteStoreError(f"D={dim}: no runs for {missing[:3]}")
        counts = {len(v) for v in cells.values()}
        if len(counts) != 1:
            raise IncompleteStoreError(f"D={dim}: unequal run counts {sorted(counts)}")
        matrices[dim] = stats.ResultMatrix(
            algs, probs, {k: [v[r] for r in sorted(v)] for k, v in cells.items()})
    return matrices, exp.get("aggregate", "mean")


def compare(out, baseline="cs", aggregate=None):
    """Write ``comparison_D{dim}.txt`` / ``.csv`` for every dimension in the store."""
    out = Path(out)
    matrices, default_agg = load_matrices(out)
    reports = {}
    for dim, m in matrices.items():
        if len(m.algorithms) < 2:
            raise IncompleteStoreError("comparison needs at least two variants")
        rep = stats.comparison_report(m, baseline, aggregate or default_agg)
        (out / f"comparison_D{dim}.txt").write_text(rep.to_text())
        (out / f"comparison_D{dim}.csv").write_text(rep.to_csv())
        reports[dim] = rep
    return reports


def parse_grid(text):
    """``"0.1:0.9:0.1"`` (inclusive) or ``"1,2,3"`` to a list of floats."""
    if ":" in text:
        start, stop, step = (float(v) for v in text.split(":"))
        if step <= 0:
            raise ValueError("grid step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(count)]
    return [float(v) for v in text.split(",") if v.strip()]


def _sweep_run(job):
    spec_dict, name, dim, np_, max_fes, seed = job
    config = cuckoo.CSConfig(np=np_, max_fes=max_fes, dist=DistributionSpec.from_dict(spec_dict), seed=seed)
    return cuckoo.run(bench.get_problem(name, dim), config).final_error


def sweep(variant, p1_grid, p2_grid, problems=("F_sph", "F_ack"), dim=30, repeats=15,
          max_fes=None, base_seed=0, out=None, n_jobs=1):
    """Mean final error of ``variant`` over a (p1, p2) grid; rows ``p1, p2, problem, mean_error``."""
    base = cuckoo.make_variant(variant)
    max_fes = max_fes or 10_000 * dim
    np_ = cuckoo.default_np(dim)
    jobs, keys = [], []
    for p1 in p1_grid:
        for p2 in p2_grid:
            spec = DistributionSpec(base.kind, p1, p2, base.symmetrize)
            for name in problems:
                for r in range(repeats):
                    jobs.append((spec.to_dict(), name, dim, np_, max_fes, stream_seed(base_seed, variant, r)))
                    keys.append((p1, p2, name))
    errors = _map(_sweep_run, jobs, n_jobs)
    acc = {}
    for key, err in zip(keys, errors):
        acc.setdefault(key, []).append(err)
    rows = [[_fmt(p1), _fmt(p2), name, _fmt(float(np.mean(v)))] for (p1, p2, name), v in acc.items()]
    if out is not None:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        _write_csv(out, ["p1", "p2", "problem", "mean_error"], rows)
    return rows


def _ident_one(job):
    variant, seed, iterations, n_nests, seed_truth = job
    task = fode.reference_task(iterations=iterations, n_nests=n_nests)
    init = [task.truth] if seed_truth else None
    return fode.identify(task, variant, seed, init=init)


def ident_run(variant, seeds, out=None, iterations=200, n_nests=40, seed_truth=False, n_jobs=1):
    """Identify the reference system once per seed.

    Writes ``ident_{variant}.csv`` (one row per seed), ``observed.csv`` (the
    t,x,y,z trajectory being fitted) and returns the rows plus the objective
    ``mean±std`` line.
    """
    seeds = [int(s) for s in seeds]
    results = _map(_ident_one, [(variant, s, iterations, n_nests, seed_truth) for s in seeds], n_jobs)
    rows = [[s, *(_fmt(v) for v in r.estimate), *(_fmt(v) for v in r.relative_errors), _fmt(r.objective)]
            for s, r in zip(seeds, results)]
    objs = np.array([r.objective for r in results])
    line = f"F_Avg±Std {np.mean(objs):.2E}±{np.std(objs):.2E}"
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / f"ident_{variant}.csv",
                   ["seed", "a", "b", "c", "rel_a", "rel_b", "rel_c", "objective"], rows)
        (out / "observed.csv").write_text(fode.reference_task(iterations=1).observed.to_csv())
    return rows, line, results


def ident_landscape(steps=21, out=None):
    """Objective over an (a, b) grid spanning the search box, ``c`` held at its true value.

    Rows ``a, b, c, objective``; written to ``landscape.csv`` under ``out``.
    """
    steps = check_int(steps, "steps", minimum=2)
    task = fode.reference_task(iterations=1)
    a_grid = np.linspace(task.lower[0], task.upper[0], steps)
    b_grid = np.linspace(task.lower[1], task.upper[1], steps)
    c = task.truth[2]
    thetas = np.array([[a, b, c] for a in a_grid for b in b_grid])
    values = fode._objective_batch(task, thetas)
    rows = [[_fmt(a), _fmt(b), _fmt(c), _fmt(v)] for (a, b, c), v in zip(thetas, values)]
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "landscape.csv", ["a", "b", "c", "objective"], rows)
    return rows
