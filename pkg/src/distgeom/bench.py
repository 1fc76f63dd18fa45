"""Experiment harness: run solvers on instance files and report CSV results.

The harness never trusts the engine's cached fitness: every reported
final LDE is recomputed from scratch on the returned conformation.
"""

from __future__ import annotations

import csv
import hashlib
import statistics
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

from .evolve import GaConfig, RunTrace, run
from .ingest import read_instance
from .instance import lde

__all__ = [
    "ALGORITHMS",
    "ExperimentSpec",
    "ResultRow",
    "make_config",
    "run_experiment",
    "compare_experiments",
    "write_trace_csv",
    "read_trace_csv",
    "write_compare_csv",
    "read_compare_csv",
    "median_by_algorithm",
    "result_to_record",
    "instance_sha256",
]

ALGORITHMS = ("gremutrrr", "basic")

TRACE_FIELDS = ("generation", "best_lde", "global_best_lde", "event")
RESULT_FIELDS = ("protein", "num_atoms", "algorithm", "seed", "final_lde",
                 "generations", "wall_time_s", "instance_sha256")


@dataclass(frozen=True)
class ResultRow:
    """One solver run: identity, outcome, and the instance file it saw."""

    protein: str
    num_atoms: int
    algorithm: str
    seed: int
    final_lde: float
    generations: int
    wall_time_s: float
    instance_sha256: str


@dataclass(frozen=True)
class ExperimentSpec:
    """A batch of runs on one instance file."""

    instance_path: Path
    algorithm: str
    max_generations: int
    seeds: tuple = (0,)
    overrides: dict = field(default_factory=dict)
    out_dir: Path | None = None

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("need at least one seed")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}, expected one of {ALGORITHMS}")


def make_config(algorithm, max_generations, seed, overrides=None):
    """Preset for the named algorithm, then caller overrides on top."""
    if algorithm == "gremutrrr":
        cfg = GaConfig(max_generations=max_generations, seed=seed)
    elif algorithm == "basic":
        cfg = GaConfig.basic(max_generations=max_generations, seed=seed)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}, expected one of {ALGORITHMS}")
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg


def instance_sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def run_experiment(instance_path, algorithm, max_generations, seed, overrides=None):
    """One solver run on one instance file.

    Returns ``(ResultRow, RunTrace, best_genes)``.  The row's final LDE is
    an independent from-scratch evaluation of the best conformation and is
    checked against the trace's last global-best entry.
    """
    instance_path = Path(instance_path)
    inst = read_instance(instance_path)
    cfg = make_config(algorithm, max_generations, seed, overrides)
    started = time.perf_counter()
    best, trace = run(inst, cfg)
    elapsed = time.perf_counter() - started
    final = lde(best, inst)
    if abs(final - trace.global_best_lde[-1]) > 1e-9:
        raise RuntimeError(
            f"engine-reported best LDE {trace.global_best_lde[-1]} disagrees with "
            f"recomputation {final}"
        )
    row = ResultRow(
        protein=inst.name,
        num_atoms=inst.num_atoms,
        algorithm=algorithm,
        seed=seed,
        final_lde=final,
        generations=trace.generations[-1],
        wall_time_s=elapsed,
        instance_sha256=instance_sha256(instance_path),
    )
    return row, trace, best


def compare_experiments(instance_path, seeds, max_generations, overrides=None,
                        out_dir=None, algorithms=ALGORITHMS, keep_traces=False):
    """Run every (algorithm, seed) cell on the same instance.

    Returns ``(rows, traces)`` where ``traces`` maps (algorithm, seed) to
    the RunTrace (empty unless ``keep_traces``).  Cell failures are
    reported on stderr and skipped; if every cell fails the error is
    re-raised.  When ``out_dir`` is given, ``compare.csv`` is written
    there (one row per cell plus a median summary row per algorithm) and,
    with ``keep_traces``, one ``trace_<algorithm>_seed<k>.csv`` per cell.
    """
    cells = [(alg, seed) for alg in algorithms for seed in seeds]
    rows, traces = [], {}
    last_error = None
    for alg, seed in cells:
        try:
            row, trace, _ = run_experiment(instance_path, alg, max_generations, seed, overrides)
        except Exception as exc:  # keep going, report at the end
            last_error = exc
            print(f"error: {alg} seed {seed} failed: {exc}", file=sys.stderr)
            continue
        rows.append(row)
        if keep_traces:
            traces[(alg, seed)] = trace
    if not rows:
        raise last_error if last_error else RuntimeError("no cells to run")
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_compare_csv(rows, out_dir / "compare.csv")
        for (alg, seed), trace in traces.items():
            write_trace_csv(trace, out_dir / f"trace_{alg}_seed{seed}.csv")
    return rows, traces


def median_by_algorithm(rows):
    out = {}
    for alg in dict.fromkeys(r.algorithm for r in rows):
        out[alg] = statistics.median(r.final_lde for r in rows if r.algorithm == alg)
    return out


def write_trace_csv(trace, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_FIELDS)
        for gen, best, global_best, event in trace.rows():
            w.writerow([gen, repr(best), repr(global_best), event])


def read_trace_csv(path):
    trace = RunTrace()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(TRACE_FIELDS):
            raise ValueError(f"{path}: expected trace header {','.join(TRACE_FIELDS)}")
        for rec in reader:
            trace.append(int(rec[0]), float(rec[1]), float(rec[2]), rec[3])
    return trace


def result_to_record(row):
    """CSV field list for one ResultRow (floats via repr for round-trips)."""
    return [row.protein, row.num_atoms, row.algorithm, row.seed,
            repr(row.final_lde), row.generations, f"{row.wall_time_s:.3f}",
            row.instance_sha256]


def write_compare_csv(rows, path):
    """Per-cell rows followed by one ``seed=median`` summary row per algorithm."""
    medians = median_by_algorithm(rows)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RESULT_FIELDS)
        for row in rows:
            w.writerow(result_to_record(row))
        for alg, med in medians.items():
            template = next(r for r in rows if r.algorithm == alg)
            w.writerow([template.protein, template.num_atoms, alg, "median",
                        repr(med), template.generations, "",
                        template.instance_sha256])


def read_compare_csv(path):
    """Returns ``(rows, medians)`` parsed back from write_compare_csv output."""
    rows, medians = [], {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(RESULT_FIELDS):
            raise ValueError(f"{path}: expected header {','.join(RESULT_FIELDS)}")
        for rec in reader:
            if rec[3] == "median":
                medians[rec[2]] = float(rec[4])
                continue
            rows.append(ResultRow(
                protein=rec[0], num_atoms=int(rec[1]), algorithm=rec[2],
                seed=int(rec[3]), final_lde=float(rec[4]), generations=int(rec[5]),
                wall_time_s=float(rec[6]), instance_sha256=rec[7],
            ))
    return rows, medians
