"""Command line interface.

Three subcommands cover the benchmark workflow:

    distgeom generate --pdb 1xyz.pdb --atoms backbone --seed 7 --out 1xyz.dgp
    distgeom solve --instance 1xyz.dgp --algorithm gremutrrr --generations 2000 \
        --seed 1 --out results/
    distgeom compare --instance 1xyz.dgp --seeds 1,2,3,4,5 --generations 2000 \
        --out results/

``solve`` writes ``trace.csv`` (and ``trace.png``), ``compare`` writes
``compare.csv`` (and ``compare.png``).  Diagnostics go to stderr; exit
status is nonzero on any validation failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import bench
from .ingest import GenConfig, build_instance, parse_pdb, write_instance

CONFIG_FLAGS = {
    "pop": "population_size",
    "greedy_rate": "greedy_mutation_rate",
    "mutation_rate": "random_mutation_rate",
    "trials": "greedy_trials",
    "tournament": "tournament_size",
    "uniform_rate": "uniform_rate",
    "sigma": "sigma",
    "similarity_threshold": "similarity_threshold",
    "twin_interval": "twin_removal_interval",
    "restart_window": "restart_window",
    "restart_threshold": "restart_threshold",
    "restart_fraction": "restart_fraction",
    "greedy_scope": "greedy_scope",
    "stagnation": "stagnation_limit",
}


def _add_config_flags(parser):
    g = parser.add_argument_group("solver settings")
    g.add_argument("--pop", type=int, default=50, help="population size (default 50)")
    g.add_argument("--greedy-rate", type=float, help="probability of the greedy sweep per child")
    g.add_argument("--mutation-rate", type=float, help="per-gene random mutation probability")
    g.add_argument("--trials", type=int, help="candidate values per gene in the greedy sweep")
    g.add_argument("--tournament", type=int, help="tournament size")
    g.add_argument("--uniform-rate", type=float, help="crossover gene take-rate from parent 1")
    g.add_argument("--sigma", type=float, help="similarity kernel bandwidth")
    g.add_argument("--similarity-threshold", type=float, help="twin similarity threshold")
    g.add_argument("--twin-interval", type=int, help="generations between twin-removal passes")
    g.add_argument("--restart-window", type=int, help="stagnation window in generations")
    g.add_argument("--restart-threshold", type=float, help="minimum improvement per window")
    g.add_argument("--restart-fraction", type=float, help="fraction of population redrawn on restart")
    g.add_argument("--greedy-scope", choices=("all_genes", "single_gene"),
                   help="probe every gene or a single random gene per sweep")
    g.add_argument("--stagnation", type=int,
                   help="stop after this many generations without improvement")


def _collect_overrides(args):
    overrides = {}
    for flag, name in CONFIG_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[name] = value
    return overrides


def build_parser():
    parser = argparse.ArgumentParser(
        prog="distgeom",
        description="Genetic-algorithm solver for sparse interval distance geometry instances.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="build a .dgp instance from a PDB file")
    gen.add_argument("--pdb", required=True, type=Path, help="input PDB coordinate file")
    gen.add_argument("--atoms", choices=("backbone", "all"), default="backbone",
                     help="keep CA atoms only, or every ATOM record (default backbone)")
    gen.add_argument("--epsilon", type=float, default=0.8,
                     help="relative interval half-width around true distances (default 0.8)")
    gen.add_argument("--cutoff", type=float, default=6.0,
                     help="only pairs closer than this are eligible, in Angstroms (default 6.0)")
    gen.add_argument("--keep", type=float, default=0.3,
                     help="fraction of eligible pairs retained (default 0.3)")
    gen.add_argument("--seed", type=int, default=0, help="seed for the pair subsample")
    gen.add_argument("--out", required=True, type=Path, help="output .dgp path")
    gen.add_argument("--name", help="instance label (default: PDB stem plus atom mode)")

    solve = sub.add_parser("solve", help="run one solver on an instance")
    solve.add_argument("--instance", required=True, type=Path, help="input .dgp file")
    solve.add_argument("--algorithm", choices=bench.ALGORITHMS, default="gremutrrr")
    solve.add_argument("--generations", required=True, type=int, help="generation budget")
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--out", required=True, type=Path, help="output directory")
    solve.add_argument("--save-best", type=Path,
                       help="also write the best conformation as V lines of 'x y z'")
    solve.add_argument("--no-plot", action="store_true", help="skip the PNG figure")
    _add_config_flags(solve)

    comp = sub.add_parser("compare", help="run both algorithms across seeds on one instance")
    comp.add_argument("--instance", required=True, type=Path, help="input .dgp file")
    comp.add_argument("--seeds", required=True,
                      help="comma-separated seed list, e.g. 1,2,3,4,5")
    comp.add_argument("--generations", required=True, type=int, help="generation budget")
    comp.add_argument("--out", required=True, type=Path, help="output directory")
    comp.add_argument("--traces", action="store_true",
                      help="also write one trace CSV per (algorithm, seed) cell")
    comp.add_argument("--no-plot", action="store_true", help="skip the PNG figure")
    _add_config_flags(comp)

    return parser


def cmd_generate(args):
    if not args.pdb.exists():
        print(f"error: PDB file not found: {args.pdb}", file=sys.stderr)
        return 1
    positions = parse_pdb(args.pdb, atom_mode=args.atoms)
    cfg = GenConfig(epsilon=args.epsilon, cutoff=args.cutoff,
                    keep_fraction=args.keep, atom_mode=args.atoms, seed=args.seed)
    name = args.name or f"{args.pdb.stem}_{args.atoms}"
    inst = build_instance(positions, cfg, name=name)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_instance(inst, args.out)
    print(f"V={inst.num_atoms} E={len(inst.constraints)}")
    return 0


def cmd_solve(args):
    overrides = _collect_overrides(args)
    row, trace, best = bench.run_experiment(
        args.instance, args.algorithm, args.generations, args.seed, overrides)
    args.out.mkdir(parents=True, exist_ok=True)
    bench.write_trace_csv(trace, args.out / "trace.csv")
    if not args.no_plot:
        from .plots import save_trace_figure

        save_trace_figure(trace, args.out / "trace.png",
                          title=f"{row.protein} ({args.algorithm}, seed {args.seed})")
    if args.save_best is not None:
        with open(args.save_best, "w") as fh:
            for x, y, z in best.reshape(-1, 3):
                fh.write(f"{x:.17g} {y:.17g} {z:.17g}\n")
    writer = csv.writer(sys.stdout)
    writer.writerow(bench.RESULT_FIELDS)
    writer.writerow(bench.result_to_record(row))
    return 0


def cmd_compare(args):
    try:
        seeds = tuple(int(s) for s in args.seeds.split(",") if s.strip())
    except ValueError:
        print(f"error: bad seed list {args.seeds!r}", file=sys.stderr)
        return 1
    if not seeds:
        print("error: need at least one seed", file=sys.stderr)
        return 1
    overrides = _collect_overrides(args)
    rows, _ = bench.compare_experiments(
        args.instance, seeds, args.generations, overrides,
        out_dir=args.out, keep_traces=args.traces)
    if not args.no_plot:
        from .plots import save_compare_figure

        save_compare_figure(rows, args.out / "compare.png",
                            title=rows[0].protein if rows else None)
    for alg, med in bench.median_by_algorithm(rows).items():
        print(f"{alg} median final LDE over {sum(r.algorithm == alg for r in rows)} "
              f"seed(s): {med:.6g}")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    handlers = {"generate": cmd_generate, "solve": cmd_solve, "compare": cmd_compare}
    try:
        return handlers[args.command](args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
