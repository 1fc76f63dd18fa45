"""Acceptance suite: every criterion prints one [PASS]/[FAIL] line.

The benchmark criteria run the full solver budgets (population 50, 2000
generations backbone / 1500 full-atomic) on the bundled synthetic
structures, so this module dominates the suite's runtime; run
``pytest -m "not acceptance"`` for the quick checks only.
"""

import itertools
import math
import os
import subprocess
import sys
import warnings
from pathlib import Path

import numpy as np
import pytest

from distgeom import (
    GaConfig,
    GenConfig,
    build_cache,
    build_instance,
    gene_upper_bound,
    greedy_mutate,
    init_population,
    lde,
    parse_pdb,
    random_conformation,
    random_mutate,
    similarity,
    tournament_select,
    twin_removal,
    uniform_crossover,
    update_cache_for_atom,
    write_instance,
)
from distgeom.bench import compare_experiments, median_by_algorithm, read_trace_csv
from distgeom.evolve import make_rng

from conftest import DATA_DIR, make_point_instance

pytestmark = pytest.mark.acceptance

BACKBONE_CASES = [
    ("chain050", 50),
    ("chain077", 77),
    ("chain101", 101),
    ("chain130", 130),
]
BACKBONE_SEEDS = (1, 2, 3, 4, 5)
BACKBONE_GENERATIONS = 2000
FULL_ATOMIC_SEEDS = (1, 2, 3)
FULL_ATOMIC_GENERATIONS = 1500


def report(capsys, label, ok, detail=""):
    with capsys.disabled():
        print(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
    assert ok, f"{label}: {detail}"


def _instance_file(stem, atom_mode, out_dir):
    positions = parse_pdb(DATA_DIR / f"{stem}.pdb", atom_mode=atom_mode)
    cfg = GenConfig(epsilon=0.8, cutoff=6.0, keep_fraction=0.3,
                    atom_mode=atom_mode, seed=len(positions))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        inst = build_instance(positions, cfg, name=stem)
    path = out_dir / f"{stem}_{atom_mode}.dgp"
    write_instance(inst, path)
    return path


@pytest.fixture(scope="module")
def work_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance")


@pytest.fixture(scope="module")
def backbone_results(work_dir):
    """population 50, 2000 generations, 5 seeds, both algorithms, 4 sizes."""
    results = {}
    for stem, v in BACKBONE_CASES:
        path = _instance_file(stem, "backbone", work_dir)
        out = work_dir / f"cmp_{stem}"
        rows, _ = compare_experiments(
            path, seeds=BACKBONE_SEEDS, max_generations=BACKBONE_GENERATIONS,
            out_dir=out, keep_traces=True)
        results[stem] = (v, rows, out)
    return results


@pytest.fixture(scope="module")
def full_atomic_results(work_dir):
    """population 50, 1500 generations, 3 seeds on the 402-atom structure."""
    path = _instance_file("chain050_full", "all", work_dir)
    rows, _ = compare_experiments(
        path, seeds=FULL_ATOMIC_SEEDS, max_generations=FULL_ATOMIC_GENERATIONS,
        out_dir=work_dir / "cmp_full")
    return rows


def test_criterion_1_incremental_matches_full_recompute(capsys):
    rng = np.random.default_rng(101)
    sizes = np.linspace(5, 50, 20).astype(int)
    moves_per_instance = 5000
    worst = 0.0
    for k, v in enumerate(sizes):
        inst = make_point_instance(num_atoms=int(v), seed=200 + k,
                                   cutoff=9.0, keep_fraction=0.6,
                                   spread=4.0 * v ** (1 / 3))
        conf = random_conformation(int(v), rng)
        cache = build_cache(conf, inst)
        hi = gene_upper_bound(int(v))
        for _ in range(moves_per_instance):
            atom = int(rng.integers(0, v))
            got = update_cache_for_atom(cache, conf, inst, atom, rng.uniform(0, hi, 3))
            diff = abs(got - lde(conf, inst))
            if diff > worst:
                worst = diff
    report(capsys, "criterion 1 (incremental oracle)", worst < 1e-9,
           f"max |incremental - full| = {worst:.3g} over {20 * moves_per_instance} moves")


def test_criterion_2_reference_scores_exactly_zero(capsys):
    rng = np.random.default_rng(202)
    checked = 0
    ok = True
    for eps in (0.0, 0.1, 0.4, 0.8):
        for seed in range(5):
            points = rng.uniform(0, 15, (25, 3))
            inst = build_instance(points, GenConfig(epsilon=eps, cutoff=9.0,
                                                    keep_fraction=0.5, seed=seed))
            ok = ok and lde(inst.reference.ravel(), inst) == 0.0
            checked += 1
    for stem, _ in BACKBONE_CASES:
        positions = parse_pdb(DATA_DIR / f"{stem}.pdb", atom_mode="backbone")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            inst = build_instance(positions, GenConfig(seed=1), name=stem)
        ok = ok and lde(inst.reference.ravel(), inst) == 0.0
        checked += 1
    report(capsys, "criterion 2 (zero-fitness ground truth)", ok,
           f"{checked} generated instances, reference LDE == 0.0 exactly")


def test_criterion_3_operator_statistics(capsys):
    inst = make_point_instance(num_atoms=100, seed=33, spread=25.0)
    cfg = GaConfig(max_generations=1, population_size=50)

    # random mutation hit rate, binomial 99% CI around 0.015
    gen = make_rng(301)
    x = np.full(300, -1.0)
    hits = 0
    draws = 0
    while draws < 1_000_000:
        out = random_mutate(x, inst, cfg, gen)
        hits += int((out != x).sum())
        draws += x.size
    rate = hits / draws
    z99 = 2.5758293035489004
    half_width = z99 * math.sqrt(0.015 * 0.985 / draws)
    mutation_ok = abs(rate - 0.015) <= half_width

    # crossover inheritance share over 1e5 genes
    gen = make_rng(302)
    p1 = np.zeros(100_000)
    p2 = np.ones(100_000)
    child = uniform_crossover(p1, p2, cfg, gen)
    share = float((child == 0.0).mean())
    crossover_ok = 0.48 <= share <= 0.52

    # tournament win frequency vs exact enumeration of all 5^5 draws
    pop = init_population(make_point_instance(num_atoms=10, seed=34),
                          GaConfig(max_generations=1, population_size=5, seed=35))
    best_idx = int(np.argmin(pop.fitness))
    wins = sum(
        min(picks, key=lambda k: pop.fitness[k]) == best_idx
        for picks in itertools.product(range(5), repeat=5)
    )
    exact = wins / 5**5
    gen = make_rng(303)
    tcfg = GaConfig(max_generations=1, population_size=5, tournament_size=5)
    n = 10_000
    observed = sum(
        np.array_equal(tournament_select(pop, tcfg, gen)[0], pop.members[best_idx])
        for _ in range(n)
    ) / n
    tournament_ok = abs(observed - exact) <= 0.02 * exact

    ok = mutation_ok and crossover_ok and tournament_ok
    report(capsys, "criterion 3 (operator statistics)", ok,
           f"mutation {rate:.5f} (CI +/-{half_width:.5f}), "
           f"crossover share {share:.4f}, "
           f"tournament {observed:.4f} vs exact {exact:.4f}")


def test_criterion_4_greedy_sweep_never_worsens(capsys):
    rng = np.random.default_rng(404)
    cfg = GaConfig(max_generations=1, population_size=2)
    worsened = 0
    unchanged_with_moved_genes = 0
    improved = 0
    for k in range(1000):
        v = int(rng.integers(6, 26))
        inst = make_point_instance(num_atoms=v, seed=4000 + k,
                                   spread=4.0 * v ** (1 / 3))
        if k % 10 == 0:
            x = inst.reference.ravel().copy()  # already satisfied: equality branch
        else:
            x = random_conformation(v, rng)
        before = lde(x, inst)
        snapshot = x.copy()
        cache = build_cache(x, inst)
        greedy_mutate(x, inst, cfg, make_rng(5000 + k), cache)
        after = lde(x, inst)
        if after > before:
            worsened += 1
        elif after == before:
            if not np.array_equal(x, snapshot):
                unchanged_with_moved_genes += 1
        else:
            improved += 1
    ok = worsened == 0 and unchanged_with_moved_genes == 0
    report(capsys, "criterion 4 (greedy monotonicity)", ok,
           f"1000 sweeps: {improved} improved, {1000 - improved} unchanged, "
           f"{worsened} worsened, {unchanged_with_moved_genes} lateral moves")


def test_criterion_5_twin_removal_collapses_clone_groups(capsys):
    inst = make_point_instance(num_atoms=12, seed=55)
    cfg = GaConfig(max_generations=1, population_size=12)
    ok = True
    details = []
    for k in (2, 5, 10):
        pop = init_population(inst, cfg, make_rng(500 + k))
        clone = pop.members[0].copy()
        for idx in range(1, k):
            pop.members[idx] = clone
            pop.fitness[idx] = pop.fitness[0]
        twin_removal(pop, inst, cfg, make_rng(600 + k))
        survivors = sum(np.array_equal(m, clone) for m in pop.members)
        worst_sim = max(
            similarity(pop.members[i], pop.members[j], cfg.sigma)
            for i in range(len(pop) - 1) for j in range(i + 1, len(pop))
        )
        ok = ok and survivors == 1 and worst_sim < cfg.similarity_threshold
        details.append(f"k={k}: {survivors} survivor, max sim {worst_sim:.3f}")
    report(capsys, "criterion 5 (twin removal)", ok, "; ".join(details))


def test_criterion_6_backbone_benchmark_medians(capsys, backbone_results):
    ok = True
    details = []
    for stem, (v, rows, _) in backbone_results.items():
        medians = median_by_algorithm(rows)
        gre, basic = medians["gremutrrr"], medians["basic"]
        better = gre < basic
        ok = ok and better
        details.append(f"V={v}: gremutrrr {gre:.4g} vs basic {basic:.4g}")
        if stem in ("chain101", "chain130"):
            ok = ok and gre < 0.05
    report(capsys, "criterion 6 (backbone benchmark)", ok, "; ".join(details))


def test_criterion_7_convergence_profile(capsys, backbone_results):
    _, _, out_dir = backbone_results["chain130"]
    gre = read_trace_csv(out_dir / "trace_gremutrrr_seed1.csv")
    basic = read_trace_csv(out_dir / "trace_basic_seed1.csv")

    def within_10pct_of_final(trace):
        at_200 = trace.global_best_lde[200]
        final = trace.global_best_lde[-1]
        return abs(at_200 - final) <= 0.1 * final if final > 0 else at_200 == final

    gre_converged = within_10pct_of_final(gre)
    basic_converged = within_10pct_of_final(basic)
    ok = gre_converged and not basic_converged
    report(capsys, "criterion 7 (convergence profile)", ok,
           f"gremutrrr gen200 {gre.global_best_lde[200]:.4g} -> final "
           f"{gre.global_best_lde[-1]:.4g} (early convergence {gre_converged}); "
           f"basic gen200 {basic.global_best_lde[200]:.4g} -> final "
           f"{basic.global_best_lde[-1]:.4g} (early convergence {basic_converged})")


def test_criterion_8_full_atomic_smoke(capsys, full_atomic_results):
    rows = full_atomic_results
    medians = median_by_algorithm(rows)
    slowest = max(r.wall_time_s for r in rows)
    num_atoms = rows[0].num_atoms
    ok = (num_atoms == 402
          and slowest < 1800.0
          and medians["gremutrrr"] < medians["basic"])
    report(capsys, "criterion 8 (full-atomic smoke)", ok,
           f"V={num_atoms}, slowest run {slowest:.0f}s, medians: "
           f"gremutrrr {medians['gremutrrr']:.4g} vs basic {medians['basic']:.4g}")


def test_criterion_9_byte_identical_traces(capsys, work_dir):
    instance = _instance_file("chain050", "backbone", work_dir)
    digests = []
    src = str(Path(__file__).resolve().parent.parent / "src")
    for k in (1, 2):
        out = work_dir / f"det{k}"
        env = dict(os.environ)
        env["PYTHONPATH"] = src + os.pathsep + env.get("PYTHONPATH", "")
        proc = subprocess.run(
            [sys.executable, "-m", "distgeom.cli", "solve",
             "--instance", str(instance), "--algorithm", "gremutrrr",
             "--generations", "150", "--seed", "7", "--out", str(out), "--no-plot"],
            capture_output=True, text=True, env=env)
        assert proc.returncode == 0, proc.stderr
        digests.append((out / "trace.csv").read_bytes())
    ok = digests[0] == digests[1]
    report(capsys, "criterion 9 (determinism)", ok,
           f"two solver processes, trace.csv identical: {ok}")
