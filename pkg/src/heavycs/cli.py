"""Command line entry point: ``heavycs <command> ...``.

Commands::

    heavycs bench run        run variants over benchmark problems into --out
    heavycs bench compare    Wilcoxon marks and Friedman ranks from a store
    heavycs sweep            mean error over a (p1, p2) parameter grid
    heavycs dist sample      print draws from a step distribution
    heavycs ident run        identify the fractional financial system
    heavycs ident landscape  objective values over a parameter grid

Global flags (before the command): ``--seed``, ``--jobs``, ``--out``,
``--config``. A ``--config`` JSON file supplies ExperimentConfig fields for
``bench run``; flags given on the command line take precedence.
"""

import argparse
import json
import sys
from pathlib import Path

from . import experiment
from .htdist import DistributionSpec, Kind, RandomStream, sample

DIST_CHOICES = [k.value for k in Kind]


def _csv_list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _int_list(text):
    return [int(t) for t in _csv_list(text)]


def _rule_or_int(text):
    return text if text == "rule" else int(text)


def build_parser():
    p = argparse.ArgumentParser(prog="heavycs", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=None, help="base seed (default 0)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for independent runs")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--config", default=None, help="JSON file with experiment settings")
    sub = p.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="benchmark experiments").add_subparsers(dest="action", required=True)
    run = bench.add_parser("run", help="run variants over problems")
    run.add_argument("--problems", type=_csv_list, default=None, help="comma list (default: all 20)")
    run.add_argument("--dims", type=_int_list, default=None, help="comma list (default: 30)")
    run.add_argument("--variants", type=_csv_list, default=None, help="comma list (default: all five)")
    run.add_argument("--runs", type=int, default=None)
    run.add_argument("--max-fes", type=_rule_or_int, default=None, help="number or 'rule' (10000*D)")
    run.add_argument("--np", type=_rule_or_int, default=None, help="number or 'rule' (D, 30 at D=10)")
    run.add_argument("--median", action="store_true", default=None, help="also report medians")
    run.add_argument("--manifest", default=None, help="CEC data manifest (JSON)")
    cmp_ = bench.add_parser("compare", help="comparison tables from a store")
    cmp_.add_argument("--baseline", default="cs")
    cmp_.add_argument("--median", action="store_true", help="rank medians instead of means")

    sw = sub.add_parser("sweep", help="parameter grid study")
    sw.add_argument("--variant", required=True)
    sw.add_argument("--p1", required=True, help="'start:stop:step' or comma list")
    sw.add_argument("--p2", required=True, help="'start:stop:step' or comma list")
    sw.add_argument("--problems", type=_csv_list, default=["F_sph", "F_ack"])
    sw.add_argument("--dim", type=int, default=30)
    sw.add_argument("--repeats", type=int, default=15)
    sw.add_argument("--max-fes", type=int, default=None)

    dist = sub.add_parser("dist", help="step distributions").add_subparsers(dest="action", required=True)
    ds = dist.add_parser("sample", help="print draws, one per line")
    ds.add_argument("--dist", required=True, choices=DIST_CHOICES)
    ds.add_argument("--p1", type=float, required=True)
    ds.add_argument("--p2", type=float, default=0.0)
    ds.add_argument("--symmetrize", action="store_true")
    ds.add_argument("-n", type=int, required=True)

    ident = sub.add_parser("ident", help="parameter identification").add_subparsers(dest="action", required=True)
    ir = ident.add_parser("run", help="identify (a, b, c) of the financial system")
    ir.add_argument("--variant", default="cs")
    ir.add_argument("--seeds", type=_int_list, default=None, help="comma list (default: --seed)")
    ir.add_argument("--iterations", type=int, default=200)
    ir.add_argument("--np", type=int, default=40)
    ir.add_argument("--seed-truth", action="store_true", help="put the true parameters in the first population")
    il = ident.add_parser("landscape", help="objective over an (a, b) grid, c at its true value")
    il.add_argument("--steps", type=int, default=21, help="grid points per axis")
    return p


def _bench_config(args):
    settings = {}
    if args.config:
        settings.update(json.loads(Path(args.config).read_text()))
    flags = {"problems": args.problems, "dims": args.dims, "variants": args.variants, "runs": args.runs,
             "max_fes": args.max_fes, "np": args.np, "manifest": args.manifest,
             "aggregate": "median" if args.median else None, "base_seed": args.seed}
    settings.update({k: v for k, v in flags.items() if v is not None})
    return experiment.ExperimentConfig(**settings)


def main(argv=None):
    args = build_parser().parse_args(argv)
    seed = args.seed if args.seed is not None else 0
    out = Path(args.out) if args.out else Path("results")
    try:
        if args.command == "bench" and args.action == "run":
            experiment.bench_run(_bench_config(args), out, args.jobs)
            print(f"wrote {out / 'manifest.json'}")
        elif args.command == "bench":
            reports = experiment.compare(out, args.baseline, "median" if args.median else None)
            for dim, rep in reports.items():
                print(f"D={dim}")
                print(rep.to_text(), end="")
        elif args.command == "sweep":
            p1, p2 = experiment.parse_grid(args.p1), experiment.parse_grid(args.p2)
            path = out / f"sweep_{args.variant}.csv"
            experiment.sweep(args.variant, p1, p2, args.problems, args.dim, args.repeats, args.max_fes,
                             seed, path, args.jobs)
            print(f"wrote {path}")
        elif args.command == "dist":
            spec = DistributionSpec(Kind(args.dist), args.p1, args.p2, args.symmetrize)
            draws = sample(spec, RandomStream(seed), size=args.n)
            sys.stdout.write("".join(f"{v:.17g}\n" for v in draws))
        elif args.action == "landscape":
            experiment.ident_landscape(args.steps, out)
            print(f"wrote {out / 'landscape.csv'}")
        else:
            seeds = args.seeds if args.seeds is not None else [seed]
            rows, line, _ = experiment.ident_run(args.variant, seeds, out, args.iterations, args.np,
                                                 args.seed_truth, args.jobs)
            print("seed,a,b,c,rel_a,rel_b,rel_c,objective")
            for row in rows:
                print(",".join(str(v) for v in row))
            print(line)
    except (ValueError, KeyError, OSError, experiment.IncompleteStoreError) as exc:
        print(f"heavycs: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
