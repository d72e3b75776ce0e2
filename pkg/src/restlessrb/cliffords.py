"""Exact algebra of the 24 single-qubit Cliffords and their gate decompositions.

Each Clifford is stored by its action on the Bloch axes: a signed 3x3
permutation matrix with determinant +1.  All entries are integers, so group
composition, inversion and equality checks are exact.  The physical gate
alphabet is the idle pulse plus the pi and +-pi/2 rotations about x and y;
every Clifford carries a fixed decomposition over that alphabet, computed once
by breadth-first search over generator words (shortest word wins, ties broken
by generator order).  The table totals 45 gates over the 24 elements, an
average of 1.875 physical gates per Clifford, with the identity element
decomposing to the lone idle gate.

Benchmarking sequences are uniform draws from the group followed by a recovery
element chosen so that the ideal net operation is either the identity
(conventional sequences) or a bit flip (restless sequences).  Generation is a
pure function of (seed, length, net operation) using the PCG64 generator, so
sequences are reproducible across runs and platforms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from pathlib import Path

import numpy as np

GATE_LABELS = ("I", "X90", "mX90", "Y90", "mY90", "X180", "Y180")

# Bloch-axis rotation of each physical gate (acts on column vectors).
_GATE_ROTATIONS: dict[str, tuple] = {
    "I": ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
    "X90": ((1, 0, 0), (0, 0, -1), (0, 1, 0)),
    "mX90": ((1, 0, 0), (0, 0, 1), (0, -1, 0)),
    "Y90": ((0, 0, 1), (0, 1, 0), (-1, 0, 0)),
    "mY90": ((0, 0, -1), (0, 1, 0), (1, 0, 0)),
    "X180": ((1, 0, 0), (0, -1, 0), (0, 0, -1)),
    "Y180": ((-1, 0, 0), (0, 1, 0), (0, 0, -1)),
}

# Word search alphabet; "I" is reserved for the identity element.
_GENERATORS = ("X90", "mX90", "Y90", "mY90", "X180", "Y180")


class NetOp(str, Enum):
    """Ideal net operation of a benchmarking sequence."""

    IDENTITY = "identity"
    BITFLIP = "bitflip"


def gate_rotation(label: str) -> np.ndarray:
    """Integer Bloch rotation matrix of a physical gate label."""
    return np.array(_GATE_ROTATIONS[label], dtype=int)


@dataclass(frozen=True)
class CliffordElement:
    """One of the 24 single-qubit Cliffords.

    ``rotation`` is stored as a nested tuple of ints so elements are hashable;
    use :attr:`matrix` for numpy work.
    """

    index: int
    rotation: tuple

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.rotation, dtype=int)

    def __repr__(self) -> str:
        return f"CliffordElement({self.index})"


def _key(matrix: np.ndarray) -> tuple:
    return tuple(map(tuple, np.asarray(matrix, dtype=int)))


@lru_cache(maxsize=1)
def _tables() -> tuple:
    """Build the group, its index lookup and the decomposition table."""
    identity = _key(np.eye(3, dtype=int))
    words: dict[tuple, tuple[str, ...]] = {identity: ("I",)}
    order: list[tuple] = [identity]
    frontier = [identity]
    while frontier:
        new: list[tuple] = []
        for key in frontier:
            prefix = () if key == identity else words[key]
            for label in _GENERATORS:
                prod = _key(gate_rotation(label) @ np.array(key, dtype=int))
                if prod not in words:
                    words[prod] = prefix + (label,)
                    order.append(prod)
                    new.append(prod)
        frontier = new
    if len(order) != 24:
        raise RuntimeError(f"Clifford search produced {len(order)} elements")
    elements = tuple(CliffordElement(i, key) for i, key in enumerate(order))
    index_of = {key: i for i, key in enumerate(order)}
    decompositions = tuple(words[key] for key in order)
    return elements, index_of, decompositions


def build_group() -> list[CliffordElement]:
    """Return the 24 Cliffords; element 0 is the identity."""
    return list(_tables()[0])


def decompose(element: CliffordElement) -> list[str]:
    """Fixed decomposition of ``element`` into physical gate labels.

    Gates are listed in the order they are applied.  The product of their
    rotations reproduces the element's rotation exactly.
    """
    return list(_tables()[2][element.index])


def compose(a: CliffordElement, b: CliffordElement) -> CliffordElement:
    """Element equal to applying ``b`` first and ``a`` second."""
    elements, index_of, _ = _tables()
    return elements[index_of[_key(a.matrix @ b.matrix)]]


def inverse(element: CliffordElement) -> CliffordElement:
    """Group inverse (the transpose of an orthogonal rotation)."""
    elements, index_of, _ = _tables()
    return elements[index_of[_key(element.matrix.T)]]


def element_for_gate(label: str) -> CliffordElement:
    """The Clifford whose rotation equals the given physical gate."""
    elements, index_of, _ = _tables()
    return elements[index_of[_key(gate_rotation(label))]]


def recovery(net_so_far: CliffordElement, net_op: NetOp) -> CliffordElement:
    """Element ``r`` with ``compose(r, net_so_far)`` equal to the net operation."""
    if net_op is NetOp.IDENTITY:
        target = np.eye(3, dtype=int)
    else:
        target = gate_rotation("X180")
    elements, index_of, _ = _tables()
    return elements[index_of[_key(target @ net_so_far.matrix.T)]]


@dataclass(frozen=True)
class CliffordSequence:
    """A seeded random Clifford string plus its recovery element.

    ``elements`` has length ``n_cliffords + 1`` (recovery last) and composes
    exactly to the declared net operation.  ``gate_program`` is the
    concatenation of the per-element decompositions.
    """

    seed: int
    n_cliffords: int
    elements: tuple[CliffordElement, ...]
    net_op: NetOp
    gate_program: tuple[str, ...]

    def net_element(self) -> CliffordElement:
        net = build_group()[0]
        for element in self.elements:
            net = compose(element, net)
        return net

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "n_cliffords": self.n_cliffords,
            "net_op": self.net_op.value,
            "element_indices": [e.index for e in self.elements],
            "gate_labels": list(self.gate_program),
        }


def generate_sequence(seed: int, n_cliffords: int, net_op: NetOp) -> CliffordSequence:
    """Draw ``n_cliffords`` uniform elements and append the recovery.

    Deterministic in (seed, n_cliffords, net_op).
    """
    if n_cliffords < 1:
        raise ValueError("n_cliffords must be at least 1")
    net_op = NetOp(net_op)
    rng = np.random.Generator(np.random.PCG64(seed))
    group = build_group()
    draws = rng.integers(0, len(group), size=n_cliffords)
    elements = [group[int(i)] for i in draws]
    net = group[0]
    for element in elements:
        net = compose(element, net)
    elements.append(recovery(net, net_op))
    program: list[str] = []
    for element in elements:
        program.extend(decompose(element))
    return CliffordSequence(
        seed=int(seed),
        n_cliffords=int(n_cliffords),
        elements=tuple(elements),
        net_op=net_op,
        gate_program=tuple(program),
    )


def sequences_to_json(sequences: list[CliffordSequence], path: str | Path) -> None:
    """Write sequences as a JSON list for audit."""
    payload = [s.to_dict() for s in sequences]
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True))


def sequences_from_json(path: str | Path) -> list[CliffordSequence]:
    """Rebuild sequences from :func:`sequences_to_json` output."""
    group = build_group()
    out = []
    for entry in json.loads(Path(path).read_text()):
        elements = tuple(group[i] for i in entry["element_indices"])
        out.append(
            CliffordSequence(
                seed=int(entry["seed"]),
                n_cliffords=int(entry["n_cliffords"]),
                elements=elements,
                net_op=NetOp(entry["net_op"]),
                gate_program=tuple(entry["gate_labels"]),
            )
        )
    return out
