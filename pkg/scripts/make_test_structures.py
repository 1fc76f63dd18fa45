#!/usr/bin/env python3
"""Generate the synthetic protein-like PDB fixtures under tests/data/.

Each backbone fixture is a compact self-avoiding CA chain: 3.8 A steps,
no two non-bonded atoms closer than 3.7 A, confined to a sphere sized for
globular packing (~120 A^3 per residue).  The full-atomic fixture
decorates the 50-residue chain with N/C/O backbone atoms and side chains
sized like the real amino acids, 402 atoms total.

Deterministic: fixed seeds, stable output bytes.  Rerun after any change
here and commit the regenerated files.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

OUT_DIR = Path(__file__).resolve().parent.parent / "tests" / "data"

STEP = 3.8          # consecutive CA spacing
MIN_SEP = 3.7       # steric floor between non-bonded CA pairs
VOL_PER_RESIDUE = 120.0

# (filename stem, residue count, seed)
BACKBONE_CHAINS = [
    ("chain050", 50, 11),
    ("chain077", 77, 12),
    ("chain101", 101, 13),
    ("chain130", 130, 14),
]

# residue name -> heavy side-chain atom names (real amino-acid sizes)
SIDE_CHAINS = {
    "GLY": [],
    "ALA": ["CB"],
    "SER": ["CB", "OG"],
    "CYS": ["CB", "SG"],
    "VAL": ["CB", "CG1", "CG2"],
    "THR": ["CB", "OG1", "CG2"],
    "PRO": ["CB", "CG", "CD"],
    "LEU": ["CB", "CG", "CD1", "CD2"],
    "ILE": ["CB", "CG1", "CG2", "CD1"],
    "ASP": ["CB", "CG", "OD1", "OD2"],
    "ASN": ["CB", "CG", "OD1", "ND2"],
    "MET": ["CB", "CG", "SD", "CE"],
    "GLU": ["CB", "CG", "CD", "OE1", "OE2"],
    "GLN": ["CB", "CG", "CD", "OE1", "NE2"],
    "LYS": ["CB", "CG", "CD", "CE", "NZ"],
    "HIS": ["CB", "CG", "ND1", "CD2", "CE1", "NE2"],
    "ARG": ["CB", "CG", "CD", "NE", "CZ", "NH1", "NH2"],
    "PHE": ["CB", "CG", "CD1", "CD2", "CE1", "CE2", "CZ"],
    "TYR": ["CB", "CG", "CD1", "CD2", "CE1", "CE2", "CZ", "OH"],
    "TRP": ["CB", "CG", "CD1", "CD2", "NE1", "CE2", "CE3", "CZ2", "CZ3", "CH2"],
}

# 50-residue sequence whose side chains total 202 atoms, so with the
# 4-atom backbones the file carries exactly 402 ATOM records
_BLOCK = ["ALA", "LEU", "SER", "GLU", "VAL", "PHE", "GLY", "LYS", "ILE", "TYR"]
FULL_ATOM_SEQUENCE = _BLOCK * 4 + [
    "TRP", "LEU", "SER", "GLU", "ALA", "PHE", "GLY", "LYS", "ILE", "TYR",
]


def _unit(v):
    return v / np.linalg.norm(v)


def _random_unit(rng):
    while True:
        v = rng.normal(size=3)
        n = np.linalg.norm(v)
        if n > 1e-9:
            return v / n


def compact_chain(n, seed):
    """Self-avoiding 3.8 A walk inside a globular sphere."""
    radius = (3.0 * n * VOL_PER_RESIDUE / (4.0 * math.pi)) ** (1.0 / 3.0)
    rng = np.random.default_rng(seed)
    while True:
        points = [rng.uniform(-radius / 3, radius / 3, 3)]
        stuck = 0
        while len(points) < n:
            placed = False
            for _ in range(120):
                cand = points[-1] + STEP * _random_unit(rng)
                if np.linalg.norm(cand) > radius:
                    continue
                if len(points) > 1:
                    d = np.linalg.norm(np.array(points[:-1]) - cand, axis=1)
                    if d.min() < MIN_SEP:
                        continue
                points.append(cand)
                placed = True
                break
            if not placed:
                points.pop()
                stuck += 1
                if len(points) == 0 or stuck > 400:
                    break
        if len(points) == n:
            return np.array(points)


def neighbor_stats(points, cutoff=6.0):
    d = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=-1)
    within = (d <= cutoff) & (d > 0)
    return within.sum() / len(points)


def pdb_line(serial, name, res_name, res_seq, xyz, element):
    name_field = name if len(name) == 4 else f" {name:<3s}"
    return (
        f"ATOM  {serial:5d} {name_field}"
        f" {res_name:>3s} A{res_seq:4d}    "
        f"{xyz[0]:8.3f}{xyz[1]:8.3f}{xyz[2]:8.3f}"
        f"  1.00  0.00          {element:>2s}"
    )


def write_backbone(path, ca, label):
    lines = [
        f"REMARK   1 SYNTHETIC COMPACT CHAIN FIXTURE {label}",
        "REMARK   1 GENERATED BY scripts/make_test_structures.py",
    ]
    for k, xyz in enumerate(ca, start=1):
        lines.append(pdb_line(k, "CA", "GLY", k, xyz, "C"))
    lines += ["TER", "END", ""]
    path.write_text("\n".join(lines))


def decorate_full_atom(ca, seed):
    """Backbone N/CA/C/O plus side chains around each CA."""
    rng = np.random.default_rng(seed)
    atoms = []  # (name, res_name, res_seq, xyz)
    placed = []

    def place(anchor, length, min_clash=1.2, tries=60):
        for _ in range(tries):
            cand = anchor + length * _random_unit(rng)
            if placed:
                d = np.linalg.norm(np.array(placed) - cand, axis=1)
                if d.min() < min_clash:
                    continue
            return cand
        return anchor + length * _random_unit(rng)  # crowded: accept last draw

    n_res = len(ca)
    for k in range(n_res):
        res_name = FULL_ATOM_SEQUENCE[k % len(FULL_ATOM_SEQUENCE)]
        chain_dir = _unit(ca[min(k + 1, n_res - 1)] - ca[max(k - 1, 0)])
        n_pos = ca[k] - 1.46 * chain_dir
        c_pos = ca[k] + 1.52 * chain_dir
        o_pos = place(c_pos, 1.23)
        for name, xyz in (("N", n_pos), ("CA", ca[k]), ("C", c_pos)):
            atoms.append((name, res_name, k + 1, xyz))
            placed.append(xyz)
        atoms.append(("O", res_name, k + 1, o_pos))
        placed.append(o_pos)
        anchor = ca[k]
        for name in SIDE_CHAINS[res_name]:
            xyz = place(anchor, 1.52)
            atoms.append((name, res_name, k + 1, xyz))
            placed.append(xyz)
            anchor = xyz
    return atoms


def write_full_atom(path, atoms, label):
    lines = [
        f"REMARK   1 SYNTHETIC FULL-ATOMIC FIXTURE {label}",
        "REMARK   1 GENERATED BY scripts/make_test_structures.py",
    ]
    for serial, (name, res_name, res_seq, xyz) in enumerate(atoms, start=1):
        lines.append(pdb_line(serial, name, res_name, res_seq, xyz, name[0]))
    lines += ["TER", "END", ""]
    path.write_text("\n".join(lines))


def main():
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    chains = {}
    for stem, n, seed in BACKBONE_CHAINS:
        ca = compact_chain(n, seed)
        chains[stem] = ca
        write_backbone(OUT_DIR / f"{stem}.pdb", ca, stem.upper())
        print(f"{stem}: {n} CA atoms, {neighbor_stats(ca):.2f} neighbors within 6 A")

    atoms = decorate_full_atom(chains["chain050"], seed=21)
    assert len(atoms) == 402, len(atoms)
    write_full_atom(OUT_DIR / "chain050_full.pdb", atoms, "CHAIN050-FULL")
    pts = np.array([a[3] for a in atoms])
    print(f"chain050_full: {len(atoms)} atoms, {neighbor_stats(pts):.2f} neighbors within 6 A")


if __name__ == "__main__":
    main()
