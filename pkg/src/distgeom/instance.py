"""Constraint graph, conformation encoding and the interval-violation fitness.

An instance is a sparse set of distance intervals between atom pairs.  A
candidate solution (conformation) is a flat vector of ``3 * num_atoms``
genes laid out ``x0, y0, z0, x1, y1, z1, ...`` in Angstroms.  The fitness
is the root mean square of per-constraint interval violations; a value of
zero means every constraint is satisfied.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DistanceConstraint",
    "DistanceInstance",
    "FitnessCache",
    "CACHE_RESUM_INTERVAL",
    "gene_upper_bound",
    "random_conformation",
    "constraint_error",
    "lde",
    "build_cache",
    "update_cache_for_atom",
]

# Full exact re-summation of the squared-error accumulator after this many
# incremental updates, to bound floating-point drift over long runs.
CACHE_RESUM_INTERVAL = 10_000


@dataclass(frozen=True)
class DistanceConstraint:
    """One interval constraint: lower <= |c_i - c_j| <= upper, in Angstroms."""

    i: int
    j: int
    lower: float
    upper: float

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError(f"constraint endpoints must differ, got ({self.i}, {self.j})")
        if not self.i < self.j:
            raise ValueError(f"constraints are stored with i < j, got ({self.i}, {self.j})")
        if self.i < 0:
            raise ValueError(f"negative atom index {self.i}")
        if not 0.0 <= self.lower <= self.upper:
            raise ValueError(f"need 0 <= lower <= upper, got [{self.lower}, {self.upper}]")


class DistanceInstance:
    """A sparse interval constraint graph over ``num_atoms`` atoms.

    Parameters
    ----------
    num_atoms : int
        Number of atoms V (>= 2).
    constraints : sequence of DistanceConstraint
        The edge set; exactly one constraint per unordered pair.
    reference : (V, 3) array, optional
        Ground-truth coordinates when the instance was generated from a
        known structure.
    name : str
        Instance label.
    """

    def __init__(self, num_atoms, constraints, reference=None, name="instance"):
        if num_atoms < 2:
            raise ValueError(f"need at least 2 atoms, got {num_atoms}")
        constraints = tuple(constraints)
        if not constraints:
            raise ValueError("constraint list is empty")
        seen = set()
        for c in constraints:
            if c.j >= num_atoms:
                raise ValueError(f"constraint ({c.i}, {c.j}) exceeds num_atoms={num_atoms}")
            if (c.i, c.j) in seen:
                raise ValueError(f"duplicate constraint for pair ({c.i}, {c.j})")
            seen.add((c.i, c.j))
        if reference is not None:
            reference = np.asarray(reference, dtype=np.float64)
            if reference.shape != (num_atoms, 3):
                raise ValueError(
                    f"reference shape {reference.shape} does not match ({num_atoms}, 3)"
                )
        self.num_atoms = int(num_atoms)
        self.constraints = constraints
        self.reference = reference
        self.name = str(name)
        self._geometry = None

    def __len__(self):
        return len(self.constraints)

    def __eq__(self, other):
        if not isinstance(other, DistanceInstance):
            return NotImplemented
        if (self.num_atoms, self.name) != (other.num_atoms, other.name):
            return False
        if self.constraints != other.constraints:
            return False
        if (self.reference is None) != (other.reference is None):
            return False
        if self.reference is not None and not np.array_equal(self.reference, other.reference):
            return False
        return True

    def __repr__(self):
        return (
            f"DistanceInstance(name={self.name!r}, num_atoms={self.num_atoms}, "
            f"num_constraints={len(self.constraints)}, "
            f"reference={'yes' if self.reference is not None else 'no'})"
        )

    @property
    def geometry(self):
        """Array form of the constraint graph, built once on demand."""
        if self._geometry is None:
            self._geometry = _InstanceGeometry(self)
        return self._geometry


class _InstanceGeometry:
    """Flat arrays plus a CSR-style per-atom incidence index.

    Greedy gene probing touches only the constraints incident to one atom,
    so incidence entries carry duplicated bounds to avoid indirection in
    the hot loop: entry t belongs to atom a for ent_start[a] <= t <
    ent_start[a+1], references original constraint ent_cons[t] and the
    opposite endpoint ent_other[t].
    """

    def __init__(self, inst: DistanceInstance):
        cons = inst.constraints
        n = len(cons)
        self.i_idx = np.fromiter((c.i for c in cons), dtype=np.int64, count=n)
        self.j_idx = np.fromiter((c.j for c in cons), dtype=np.int64, count=n)
        self.lower = np.fromiter((c.lower for c in cons), dtype=np.float64, count=n)
        self.upper = np.fromiter((c.upper for c in cons), dtype=np.float64, count=n)

        V = inst.num_atoms
        deg = np.zeros(V, dtype=np.int64)
        np.add.at(deg, self.i_idx, 1)
        np.add.at(deg, self.j_idx, 1)
        self.ent_start = np.zeros(V + 1, dtype=np.int64)
        np.cumsum(deg, out=self.ent_start[1:])
        self.ent_cons = np.empty(2 * n, dtype=np.int64)
        self.ent_other = np.empty(2 * n, dtype=np.int64)
        fill = self.ent_start[:-1].copy()
        for t in range(n):
            a, b = self.i_idx[t], self.j_idx[t]
            self.ent_cons[fill[a]] = t
            self.ent_other[fill[a]] = b
            fill[a] += 1
            self.ent_cons[fill[b]] = t
            self.ent_other[fill[b]] = a
            fill[b] += 1
        self.ent_lower = self.lower[self.ent_cons]
        self.ent_upper = self.upper[self.ent_cons]

    def incident(self, atom):
        """(constraint indices, opposite endpoints) touching ``atom``."""
        s, e = self.ent_start[atom], self.ent_start[atom + 1]
        return self.ent_cons[s:e], self.ent_other[s:e]


def gene_upper_bound(num_atoms):
    """Search-box edge length: 3.8 A per atom of fully extended chain."""
    return 3.8 * num_atoms


def random_conformation(num_atoms, rng):
    """Genes drawn uniformly from [0, 3.8 * V], the canonical search box."""
    return rng.uniform(0.0, gene_upper_bound(num_atoms), size=3 * num_atoms)


def _check_dimensions(conf, inst):
    conf = np.asarray(conf, dtype=np.float64)
    if conf.ndim != 1 or conf.size != 3 * inst.num_atoms:
        raise ValueError(
            f"conformation has {conf.size} genes, instance needs {3 * inst.num_atoms}"
        )
    return conf


def _pair_distances(positions, i_idx, j_idx):
    # Shared by fitness evaluation and instance generation so that a
    # reference conformation reproduces the generator's distances bit for bit.
    diff = positions[i_idx] - positions[j_idx]
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def constraint_error(lower, upper, d):
    """Violation of one interval: max(lower - d, d - upper, 0).

    Accepts scalars or broadcastable arrays; zero exactly when
    lower <= d <= upper.
    """
    return np.maximum(np.maximum(lower - d, d - upper), 0.0)


def lde(conf, inst):
    """Root mean square interval violation of ``conf`` on ``inst``.

    Returns sqrt(sum(e_ij^2) / |E|); zero iff every constraint holds.
    """
    conf = _check_dimensions(conf, inst)
    geo = inst.geometry
    positions = conf.reshape(inst.num_atoms, 3)
    d = _pair_distances(positions, geo.i_idx, geo.j_idx)
    e = constraint_error(geo.lower, geo.upper, d)
    return float(np.sqrt((e * e).sum() / len(inst)))


@dataclass
class FitnessCache:
    """Per-constraint squared violations plus their running sum.

    Lets a single-atom move be re-scored in O(deg(atom)) instead of O(|E|).
    ``updates`` counts incremental writes since the last exact re-summation;
    the sum is refreshed every CACHE_RESUM_INTERVAL updates to stop drift.
    """

    err_sq: np.ndarray
    total: float
    updates: int = 0

    def lde(self):
        total = self.total if self.total > 0.0 else 0.0
        return float(np.sqrt(total / self.err_sq.size))

    def resum(self):
        self.total = float(self.err_sq.sum())
        self.updates = 0


def build_cache(conf, inst):
    """Evaluate every constraint once and return the incremental cache."""
    conf = _check_dimensions(conf, inst)
    geo = inst.geometry
    positions = conf.reshape(inst.num_atoms, 3)
    d = _pair_distances(positions, geo.i_idx, geo.j_idx)
    e = constraint_error(geo.lower, geo.upper, d)
    err_sq = e * e
    return FitnessCache(err_sq=err_sq, total=float(err_sq.sum()))


def update_cache_for_atom(cache, conf, inst, atom, new_position):
    """Move one atom, refresh only its incident constraints, return the LDE.

    ``conf`` is updated in place; re-applying the previous position reverts
    the move exactly, so callers can probe cheaply.
    """
    if not 0 <= atom < inst.num_atoms:
        raise ValueError(f"atom index {atom} out of range for V={inst.num_atoms}")
    if not isinstance(conf, np.ndarray) or conf.dtype != np.float64:
        raise TypeError("conformation must be a float64 numpy array for in-place updates")
    _check_dimensions(conf, inst)
    if cache.updates >= CACHE_RESUM_INTERVAL:
        cache.resum()

    positions = conf.reshape(inst.num_atoms, 3)
    positions[atom] = new_position

    geo = inst.geometry
    s, e = geo.ent_start[atom], geo.ent_start[atom + 1]
    if e > s:
        cons = geo.ent_cons[s:e]
        old_sum = cache.err_sq[cons].sum()
        diff = positions[atom] - positions[geo.ent_other[s:e]]
        d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        viol = constraint_error(geo.ent_lower[s:e], geo.ent_upper[s:e], d)
        new_terms = viol * viol
        cache.err_sq[cons] = new_terms
        cache.total = (cache.total - old_sum) + new_terms.sum()
        cache.updates += 1
        if cache.total < 1e-6:
            # near zero the tracked sum is dominated by cancellation
            # residue from earlier, larger sums; re-add the exact terms
            cache.resum()
    return cache.lde()
