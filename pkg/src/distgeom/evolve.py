"""Genetic algorithm engine: operators, diversity control and the main loop.

The same engine runs both solver variants.  The full variant combines a
greedy per-gene sweep with uniform random mutation, periodic twin removal
and a stagnation-triggered random restart; the plain variant (preset
:meth:`GaConfig.basic`) sets the greedy rate to zero and disables both
diversity mechanisms.

All randomness flows through one seeded numpy ``Generator`` (PCG64) in a
fixed draw order, so a run is fully reproducible from its config.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._kernels import greedy_sweep
from .instance import (
    CACHE_RESUM_INTERVAL,
    build_cache,
    gene_upper_bound,
    lde,
)

__all__ = [
    "GaConfig",
    "Population",
    "RunTrace",
    "init_population",
    "tournament_select",
    "uniform_crossover",
    "random_mutate",
    "greedy_mutate",
    "similarity",
    "twin_removal",
    "random_restart",
    "run",
]

GREEDY_SCOPES = ("all_genes", "single_gene")


@dataclass(frozen=True)
class GaConfig:
    """Every knob of the engine, with the benchmark defaults baked in."""

    max_generations: int
    population_size: int = 50
    greedy_mutation_rate: float = 0.8
    random_mutation_rate: float = 0.015
    greedy_trials: int = 20
    tournament_size: int = 5
    uniform_rate: float = 0.5
    sigma: float = 75.0
    similarity_threshold: float = 0.8
    twin_removal_interval: int = 100
    restart_window: int = 50
    restart_threshold: float = 0.001
    restart_fraction: float = 0.5
    greedy_scope: str = "all_genes"
    enable_twin_removal: bool = True
    enable_random_restart: bool = True
    stagnation_limit: int | None = None
    verify_cache: bool = False
    seed: int = 0

    @classmethod
    def basic(cls, **kwargs):
        """Plain-GA preset: no greedy sweep, no twin removal, no restart."""
        kwargs.setdefault("greedy_mutation_rate", 0.0)
        kwargs.setdefault("enable_twin_removal", False)
        kwargs.setdefault("enable_random_restart", False)
        return cls(**kwargs)

    def with_overrides(self, **kwargs):
        return replace(self, **kwargs)

    def validate(self):
        if self.max_generations < 0:
            raise ValueError("max_generations must be >= 0")
        for name in ("population_size", "greedy_trials", "tournament_size",
                     "twin_removal_interval", "restart_window"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("greedy_mutation_rate", "random_mutation_rate",
                     "uniform_rate", "restart_fraction"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be a probability, got {p}")
        if self.sigma <= 0.0:
            raise ValueError("sigma must be positive")
        if not 0.0 < self.similarity_threshold <= 1.0:
            raise ValueError("similarity_threshold must be in (0, 1]")
        if self.restart_threshold < 0.0:
            raise ValueError("restart_threshold must be >= 0")
        if self.tournament_size > self.population_size:
            raise ValueError("tournament_size cannot exceed population_size")
        if self.greedy_scope not in GREEDY_SCOPES:
            raise ValueError(f"greedy_scope must be one of {GREEDY_SCOPES}")
        if self.stagnation_limit is not None and self.stagnation_limit < 1:
            raise ValueError("stagnation_limit must be >= 1 when set")


@dataclass
class Population:
    """Members as rows of a (population_size, 3V) array, plus the best ever."""

    members: np.ndarray
    fitness: np.ndarray
    best_genes: np.ndarray
    best_lde: float

    def __len__(self):
        return self.members.shape[0]


@dataclass
class RunTrace:
    """Per-generation record: population best, global best and fired events."""

    generations: list = field(default_factory=list)
    best_lde: list = field(default_factory=list)
    global_best_lde: list = field(default_factory=list)
    events: list = field(default_factory=list)

    def append(self, generation, best, global_best, event=""):
        self.generations.append(int(generation))
        self.best_lde.append(float(best))
        self.global_best_lde.append(float(global_best))
        self.events.append(event)

    def rows(self):
        return zip(self.generations, self.best_lde, self.global_best_lde, self.events)

    def __len__(self):
        return len(self.generations)

    def __eq__(self, other):
        if not isinstance(other, RunTrace):
            return NotImplemented
        return (self.generations == other.generations
                and self.best_lde == other.best_lde
                and self.global_best_lde == other.global_best_lde
                and self.events == other.events)


def make_rng(seed):
    """The engine's generator: PCG64 behind the numpy Generator API."""
    return np.random.Generator(np.random.PCG64(seed))


def init_population(inst, cfg, rng=None):
    """Population of uniform random conformations, fitness evaluated."""
    if rng is None:
        rng = make_rng(cfg.seed)
    hi = gene_upper_bound(inst.num_atoms)
    members = rng.uniform(0.0, hi, size=(cfg.population_size, 3 * inst.num_atoms))
    fitness = np.array([lde(m, inst) for m in members])
    best = int(np.argmin(fitness))
    return Population(members=members, fitness=fitness,
                      best_genes=members[best].copy(), best_lde=float(fitness[best]))


def tournament_select(pop, cfg, rng):
    """Two independent size-k tournaments, drawn with replacement.

    Each winner is the lowest-fitness member among the drawn candidates;
    on ties the first-drawn candidate wins.
    """
    picks = rng.integers(0, len(pop), size=(2, cfg.tournament_size))
    w1 = picks[0][int(np.argmin(pop.fitness[picks[0]]))]
    w2 = picks[1][int(np.argmin(pop.fitness[picks[1]]))]
    return pop.members[w1], pop.members[w2]


def uniform_crossover(p1, p2, cfg, rng):
    """Child takes each gene from p1 with probability ``uniform_rate``."""
    if p1.shape != p2.shape:
        raise ValueError(f"parent gene counts differ: {p1.shape} vs {p2.shape}")
    from_p1 = rng.random(p1.size) < cfg.uniform_rate
    return np.where(from_p1, p1, p2)


def random_mutate(x, inst, cfg, rng):
    """Resample each gene with probability ``random_mutation_rate``.

    Replacement values are uniform over the search box [0, 3.8 * V].
    """
    hit = rng.random(x.size) < cfg.random_mutation_rate
    fresh = rng.uniform(0.0, gene_upper_bound(inst.num_atoms), size=x.size)
    return np.where(hit, fresh, x)


def greedy_mutate(x, inst, cfg, rng, cache):
    """Greedy sweep: per gene, keep the best of ``greedy_trials`` random
    values and the incumbent, scored through the incremental cache.

    Mutates ``x`` and ``cache`` in place and returns ``x``.  The incumbent
    is always a candidate, so the fitness never increases.  With
    ``greedy_scope="single_gene"`` only one uniformly chosen gene is probed.
    """
    hi = gene_upper_bound(inst.num_atoms)
    geo = inst.geometry
    pos = x.reshape(inst.num_atoms, 3)
    if cfg.greedy_scope == "single_gene":
        gene = int(rng.integers(0, x.size))
        draws = rng.uniform(0.0, hi, size=cfg.greedy_trials)
        _probe_single_gene(pos, gene, draws, geo, cache)
        return x
    draws = rng.uniform(0.0, hi, size=(x.size, cfg.greedy_trials))
    total, updates = greedy_sweep(
        pos, geo.ent_start, geo.ent_other, geo.ent_cons,
        geo.ent_lower, geo.ent_upper,
        cache.err_sq, cache.total, cache.updates, draws, CACHE_RESUM_INTERVAL,
    )
    cache.total = float(total)
    cache.updates = int(updates)
    return x


def _probe_single_gene(pos, gene, draws, geo, cache):
    atom, coord = divmod(gene, 3)
    s, e = geo.ent_start[atom], geo.ent_start[atom + 1]
    if e == s:
        return
    if cache.updates >= CACHE_RESUM_INTERVAL:
        cache.resum()
    cons = geo.ent_cons[s:e]
    opos = pos[geo.ent_other[s:e]]
    lo, up = geo.ent_lower[s:e], geo.ent_upper[s:e]
    old_sum = float(cache.err_sq[cons].sum())
    c1, c2 = (coord + 1) % 3, (coord + 2) % 3
    d1 = pos[atom, c1] - opos[:, c1]
    d2 = pos[atom, c2] - opos[:, c2]
    base = d1 * d1 + d2 * d2
    cands = np.concatenate(([pos[atom, coord]], draws))
    diff = cands[:, None] - opos[:, coord]
    dist = np.sqrt(diff * diff + base)
    viol = np.maximum(np.maximum(lo - dist, dist - up), 0.0)
    vsq = viol * viol
    sums = vsq.sum(axis=1)
    sums[0] = old_sum
    k = int(np.argmin(sums))
    if k:
        pos[atom, coord] = cands[k]
        cache.err_sq[cons] = vsq[k]
        cache.total = (cache.total - old_sum) + float(sums[k])
        cache.updates += 1
        if cache.total < 1e-6:
            cache.resum()


def similarity(x1, x2, sigma):
    """Gaussian kernel on gene distance: exp(-|x1 - x2|^2 / (2 sigma^2)).

    1.0 for identical conformations, approaching 0 as they diverge;
    underflows cleanly to 0.0 for very distant pairs.
    """
    if x1.shape != x2.shape:
        raise ValueError(f"gene counts differ: {x1.shape} vs {x2.shape}")
    diff = x1 - x2
    dist_sq = float(diff @ diff)
    return math.exp(-dist_sq / (2.0 * sigma * sigma))


def twin_removal(pop, inst, cfg, rng):
    """Reinitialise near-duplicates in place and return the population.

    Pairs are scanned in index order; when similarity reaches the
    threshold the higher-index member is redrawn uniformly and re-scored.
    The best member is kept by construction since only the higher index of
    a pair is ever replaced.
    """
    hi = gene_upper_bound(inst.num_atoms)
    n = len(pop)
    for i in range(n - 1):
        for j in range(i + 1, n):
            if similarity(pop.members[i], pop.members[j], cfg.sigma) >= cfg.similarity_threshold:
                pop.members[j] = rng.uniform(0.0, hi, size=pop.members.shape[1])
                pop.fitness[j] = lde(pop.members[j], inst)
    return pop


def _tolerant_int(x, op):
    # floor/ceil with a small relative nudge so counts like 0.3 * 100 do
    # not fall on the wrong side of an integer through float rounding
    eps = 1e-9 * (abs(x) + 1.0)
    return int(op(x - eps)) if op is math.ceil else int(op(x + eps))


def random_restart(pop, inst, cfg, rng):
    """Redraw the worst ``restart_fraction`` of members, keeping the best.

    The single best member is always preserved; the floor(fraction * size)
    worst of the rest are reinitialised uniformly and re-scored.
    """
    n_replace = _tolerant_int(cfg.restart_fraction * len(pop), math.floor)
    if n_replace == 0:
        return pop
    hi = gene_upper_bound(inst.num_atoms)
    protected = int(np.argmin(pop.fitness))
    order = sorted((k for k in range(len(pop)) if k != protected),
                   key=lambda k: (-pop.fitness[k], k))
    for k in order[:n_replace]:
        pop.members[k] = rng.uniform(0.0, hi, size=pop.members.shape[1])
        pop.fitness[k] = lde(pop.members[k], inst)
    return pop


def run(inst, cfg):
    """Evolve until the generation budget (or stagnation limit) is hit.

    Returns ``(best_genes, trace)``.  Per generation: the previous best is
    carried over unchanged, the rest of the population is bred by
    tournament selection plus uniform crossover, every child is mutated
    (greedy sweep with probability ``greedy_mutation_rate``, otherwise
    random mutation), and the global best is updated on strict
    improvement.  Twin removal fires every ``twin_removal_interval``
    generations; a restart fires when the global best improved by at most
    ``restart_threshold`` over the last ``restart_window`` generations.
    """
    cfg.validate()
    rng = make_rng(cfg.seed)
    pop = init_population(inst, cfg, rng)

    trace = RunTrace()
    trace.append(0, float(pop.fitness.min()), pop.best_lde)
    best_history = [pop.best_lde]
    twin_counter = 0
    restart_anchor = 0
    stagnant = 0

    for gen in range(1, cfg.max_generations + 1):
        children = np.empty_like(pop.members)
        children[0] = pop.best_genes
        for k in range(1, cfg.population_size):
            p1, p2 = tournament_select(pop, cfg, rng)
            children[k] = uniform_crossover(p1, p2, cfg, rng)

        cache_ldes = {}
        for k in range(1, cfg.population_size):
            if rng.random() < cfg.greedy_mutation_rate:
                cache = build_cache(children[k], inst)
                greedy_mutate(children[k], inst, cfg, rng, cache)
                cache_ldes[k] = cache.lde()
            else:
                children[k] = random_mutate(children[k], inst, cfg, rng)

        fitness = np.array([lde(m, inst) for m in children])
        if cfg.verify_cache:
            for k, cached in cache_ldes.items():
                if abs(cached - fitness[k]) > 1e-9:
                    raise RuntimeError(
                        f"cache drifted from full fitness at generation {gen}: "
                        f"|{cached} - {fitness[k]}| > 1e-9"
                    )

        pop = Population(members=children, fitness=fitness,
                         best_genes=pop.best_genes, best_lde=pop.best_lde)
        gen_best = int(np.argmin(fitness))
        gen_best_lde = float(fitness[gen_best])
        if gen_best_lde < pop.best_lde:
            pop.best_genes = children[gen_best].copy()
            pop.best_lde = gen_best_lde
            stagnant = 0
        else:
            stagnant += 1

        events = []
        twin_counter += 1
        if cfg.enable_twin_removal and twin_counter >= cfg.twin_removal_interval:
            twin_removal(pop, inst, cfg, rng)
            twin_counter = 0
            events.append("twin_removal")
        if (cfg.enable_random_restart
                and gen - restart_anchor >= cfg.restart_window
                and best_history[gen - cfg.restart_window] - pop.best_lde <= cfg.restart_threshold):
            random_restart(pop, inst, cfg, rng)
            restart_anchor = gen
            events.append("restart")

        best_history.append(pop.best_lde)
        trace.append(gen, gen_best_lde, pop.best_lde, "+".join(events))

        if cfg.stagnation_limit is not None and stagnant >= cfg.stagnation_limit:
            break

    return pop.best_genes.copy(), trace
