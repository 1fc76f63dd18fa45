"""Structure input and benchmark instance generation.

Reads fixed-column PDB coordinate files, manufactures sparse interval
instances from known coordinates (inflate each true distance d into
[(1-eps)*d, (1+eps)*d], keep a random fraction of the pairs under a
cutoff), and serialises instances to a line-oriented ``.dgp`` text format.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .instance import DistanceConstraint, DistanceInstance, _pair_distances

__all__ = [
    "AtomRecord",
    "GenConfig",
    "PdbFormatError",
    "DgpFormatError",
    "parse_pdb",
    "read_atom_records",
    "build_instance",
    "write_instance",
    "read_instance",
]

ATOM_MODES = ("backbone", "all")


class PdbFormatError(ValueError):
    """Raised for unusable PDB content (bad fields, no qualifying atoms)."""


class DgpFormatError(ValueError):
    """Raised for malformed .dgp instance files."""


@dataclass(frozen=True)
class AtomRecord:
    """The fields we keep from one PDB ATOM line."""

    serial: int
    name: str
    residue_seq: int
    position: tuple
    alt_loc: str


@dataclass(frozen=True)
class GenConfig:
    """Instance generation settings.

    epsilon widens each true distance into an interval, cutoff limits
    which pairs are eligible, keep_fraction subsamples them, and seed
    fixes the subsample.
    """

    epsilon: float = 0.8
    cutoff: float = 6.0
    keep_fraction: float = 0.3
    atom_mode: str = "backbone"
    seed: int = 0

    def validate(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in [0, 1), got {self.epsilon}")
        if self.cutoff <= 0.0:
            raise ValueError(f"cutoff must be positive, got {self.cutoff}")
        if not 0.0 < self.keep_fraction <= 1.0:
            raise ValueError(f"keep_fraction must be in (0, 1], got {self.keep_fraction}")
        if self.atom_mode not in ATOM_MODES:
            raise ValueError(f"atom_mode must be one of {ATOM_MODES}")


def _read_text(source):
    if hasattr(source, "read"):
        return source.read()
    if isinstance(source, Path):
        return source.read_text()
    text = str(source)
    if "\n" not in text and Path(text).exists():
        return Path(text).read_text()
    return text


def read_atom_records(source, atom_mode="all"):
    """ATOM records from the first model, in file order.

    Fixed-column parse (name 13-16, altLoc 17, residue 23-26, x/y/z
    31-38/39-46/47-54).  HETATM records and alternate locations other
    than blank or 'A' are skipped; ``backbone`` mode keeps only atoms
    named CA.
    """
    if atom_mode not in ATOM_MODES:
        raise ValueError(f"atom_mode must be one of {ATOM_MODES}")
    records = []
    in_model = False
    for lineno, line in enumerate(_read_text(source).splitlines(), start=1):
        tag = line[:6]
        if tag.startswith("ENDMDL"):
            break
        if tag.startswith("MODEL"):
            if in_model:
                break
            in_model = True
            continue
        if tag != "ATOM  ":
            continue
        if len(line) < 54:
            raise PdbFormatError(f"line {lineno}: truncated ATOM record")
        alt_loc = line[16]
        if alt_loc not in (" ", "A"):
            continue
        name = line[12:16].strip()
        if atom_mode == "backbone" and name != "CA":
            continue
        try:
            serial = int(line[6:11])
        except ValueError:
            serial = len(records) + 1
        try:
            residue_seq = int(line[22:26])
        except ValueError:
            residue_seq = 0
        try:
            x = float(line[30:38])
            y = float(line[38:46])
            z = float(line[46:54])
        except ValueError as exc:
            raise PdbFormatError(f"line {lineno}: malformed coordinate field") from exc
        if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
            raise PdbFormatError(f"line {lineno}: non-finite coordinate")
        records.append(AtomRecord(serial=serial, name=name, residue_seq=residue_seq,
                                  position=(x, y, z), alt_loc=alt_loc))
    if not records:
        raise PdbFormatError("empty structure: no qualifying ATOM records")
    return records


def parse_pdb(source, atom_mode="all"):
    """Positions of the filtered ATOM records as a float64 (V, 3) array."""
    records = read_atom_records(source, atom_mode)
    return np.array([r.position for r in records], dtype=np.float64)


def build_instance(positions, cfg, name="instance"):
    """Sparse interval instance from known coordinates.

    Enumerates unordered pairs with true distance <= cutoff, keeps a
    seeded uniform sample of ceil(keep_fraction * count) of them, and
    bounds each kept pair by (1 -/+ epsilon) times its true distance.
    The input coordinates are stored as the instance reference, so they
    score an LDE of zero by construction.
    """
    cfg.validate()
    positions = np.asarray(positions, dtype=np.float64)
    if positions.ndim != 2 or positions.shape[1] != 3:
        raise ValueError(f"positions must be (V, 3), got {positions.shape}")
    V = positions.shape[0]
    if V < 2:
        raise ValueError(f"need at least 2 positions, got {V}")

    iu, ju = np.triu_indices(V, k=1)
    diff = positions[iu] - positions[ju]
    within = np.einsum("ij,ij->i", diff, diff) <= cfg.cutoff * cfg.cutoff * (1 + 1e-12)
    iu, ju = iu[within], ju[within]
    dhat = _pair_distances(positions, iu, ju)
    keep = dhat <= cfg.cutoff
    iu, ju, dhat = iu[keep], ju[keep], dhat[keep]
    n_eligible = iu.size
    if n_eligible == 0:
        raise ValueError(f"no eligible constraints: no pair within cutoff {cfg.cutoff}")

    n_keep = _ceil_count(cfg.keep_fraction, n_eligible)
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    chosen = np.sort(rng.permutation(n_eligible)[:n_keep])

    lower = (1.0 - cfg.epsilon) * dhat[chosen]
    upper = (1.0 + cfg.epsilon) * dhat[chosen]
    constraints = [
        DistanceConstraint(int(i), int(j), float(lo), float(up))
        for i, j, lo, up in zip(iu[chosen], ju[chosen], lower, upper)
    ]
    inst = DistanceInstance(V, constraints, reference=positions.copy(), name=name)
    if not _is_connected(inst):
        warnings.warn(
            f"instance {name!r}: constraint graph is disconnected, "
            "the embedding is underdetermined",
            stacklevel=2,
        )
    return inst


def _ceil_count(fraction, count):
    # tolerant ceiling: 0.3 * 100 must give exactly 30, not 31
    x = fraction * count
    return max(1, math.ceil(x - 1e-9 * (x + 1.0)))


def _is_connected(inst):
    parent = list(range(inst.num_atoms))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for c in inst.constraints:
        ra, rb = find(c.i), find(c.j)
        if ra != rb:
            parent[ra] = rb
    return len({find(a) for a in range(inst.num_atoms)}) == 1


def write_instance(inst, sink):
    """Serialise to the .dgp text format.

    Line 1: ``DGP <name> <V> <|E|>``; then one ``i j lower upper`` line
    per constraint (0-based, i < j); then an optional ``REF`` line
    followed by V ``x y z`` lines.  Reals carry 17 significant digits so
    a round trip is bit-exact.
    """
    own = False
    if isinstance(sink, (str, Path)):
        sink = open(sink, "w")
        own = True
    try:
        name = "_".join(str(inst.name).split()) or "instance"
        sink.write(f"DGP {name} {inst.num_atoms} {len(inst.constraints)}\n")
        for c in inst.constraints:
            sink.write(f"{c.i} {c.j} {c.lower:.17g} {c.upper:.17g}\n")
        if inst.reference is not None:
            sink.write("REF\n")
            for x, y, z in inst.reference:
                sink.write(f"{x:.17g} {y:.17g} {z:.17g}\n")
    finally:
        if own:
            sink.close()


def read_instance(source):
    """Parse a .dgp file back into a DistanceInstance (inverse of write)."""
    lines = _read_text(source).splitlines()
    if not lines:
        raise DgpFormatError("line 1: empty file")
    header = lines[0].split()
    if len(header) != 4 or header[0] != "DGP":
        raise DgpFormatError("line 1: expected header 'DGP <name> <V> <|E|>'")
    try:
        num_atoms, n_cons = int(header[2]), int(header[3])
    except ValueError as exc:
        raise DgpFormatError("line 1: V and |E| must be integers") from exc
    if num_atoms < 2 or n_cons < 1:
        raise DgpFormatError("line 1: need V >= 2 and |E| >= 1")
    if len(lines) < 1 + n_cons:
        raise DgpFormatError(f"line {len(lines)}: expected {n_cons} constraint lines")

    constraints = []
    for k in range(n_cons):
        lineno = 2 + k
        parts = lines[1 + k].split()
        if len(parts) != 4:
            raise DgpFormatError(f"line {lineno}: expected 'i j lower upper'")
        try:
            i, j = int(parts[0]), int(parts[1])
            lower, upper = float(parts[2]), float(parts[3])
        except ValueError as exc:
            raise DgpFormatError(f"line {lineno}: bad constraint fields") from exc
        if not 0 <= i < j < num_atoms:
            raise DgpFormatError(f"line {lineno}: atom pair ({i}, {j}) out of range for V={num_atoms}")
        if not 0.0 <= lower <= upper:
            raise DgpFormatError(f"line {lineno}: need 0 <= lower <= upper, got [{lower}, {upper}]")
        constraints.append(DistanceConstraint(i, j, lower, upper))

    reference = None
    pos = 1 + n_cons
    rest = [l for l in lines[pos:] if l.strip()]
    if rest:
        if rest[0].strip() != "REF":
            raise DgpFormatError(f"line {pos + 1}: expected 'REF' or end of file")
        coords = rest[1:]
        if len(coords) != num_atoms:
            raise DgpFormatError(f"line {pos + 1}: REF section needs exactly {num_atoms} lines")
        reference = np.empty((num_atoms, 3))
        for k, line in enumerate(coords):
            parts = line.split()
            if len(parts) != 3:
                raise DgpFormatError(f"line {pos + 2 + k}: expected 'x y z'")
            try:
                reference[k] = [float(p) for p in parts]
            except ValueError as exc:
                raise DgpFormatError(f"line {pos + 2 + k}: bad coordinate") from exc

    return DistanceInstance(num_atoms, constraints, reference=reference, name=header[1])
