"""Average Clifford fidelity from a tomographic five-gate process-matrix set.

Gates are 4x4 Pauli transfer matrices in the normalized basis {I, X, Y, Z}/sqrt(2),
so a unitary with Bloch rotation R has the block form [[1, 0], [0, R]] and pure
states satisfy <<rho|rho>> = 1.  The 24 Cliffords are assembled as ordered
products of the measured gate matrices following the fixed decomposition
table; the tomographed set carries only positive rotations, so negative
rotations substitute their positive counterparts (mX90 -> X90, mY90 -> Y90).
The per-element depolarization is the geometric mean over the six Bloch poles
of the overlap between the propagated pole and the ideal image of the same
substituted gate word, and the set-level depolarization is the geometric mean
over the 24 elements; fidelity is (1 + p) / 2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .cliffords import CliffordElement, build_group, decompose, gate_rotation

GATESET_LABELS = ("I", "X90", "Y90", "X180", "Y180")

_SUBSTITUTIONS = {"mX90": "X90", "mY90": "Y90"}

# Bloch-pole density vectors, stored unnormalized (integer entries) with the
# 1/2 normalization folded into the overlap so ideal overlaps are exactly 1.
_POLES = tuple(
    np.concatenate(([1.0], sign * axis))
    for axis in np.eye(3)
    for sign in (1.0, -1.0)
)


@dataclass(frozen=True)
class ProcessMatrix:
    """A gate's Pauli transfer matrix with its label."""

    label: str
    ptm: np.ndarray

    def __post_init__(self):
        ptm = np.asarray(self.ptm, dtype=float)
        if ptm.shape != (4, 4):
            raise ValueError("ptm must be 4x4")
        if not np.all(np.isfinite(ptm)):
            raise ValueError("ptm entries must be finite")
        if not np.allclose(ptm[0], [1.0, 0.0, 0.0, 0.0], atol=1e-6):
            raise ValueError("first row must be (1, 0, 0, 0) for a trace-preserving map")
        object.__setattr__(self, "ptm", ptm)


@dataclass(frozen=True)
class GateSet:
    """The five tomographed gates, keyed by label."""

    gates: dict[str, ProcessMatrix]

    def __post_init__(self):
        if set(self.gates) != set(GATESET_LABELS):
            raise ValueError(f"gate set must contain exactly {GATESET_LABELS}")

    def matrix(self, label: str) -> np.ndarray:
        return self.gates[label].ptm


@dataclass(frozen=True)
class GstFidelity:
    """Per-element depolarizations and the group-averaged fidelity."""

    p_n: tuple[float, ...]
    p_cl: float
    f_cl: float
    warnings: tuple[str, ...] = field(default=())


def ideal_ptm(gate) -> np.ndarray:
    """Exact transfer matrix of a physical gate label or Clifford element."""
    rotation = gate.matrix if isinstance(gate, CliffordElement) else gate_rotation(gate)
    ptm = np.zeros((4, 4))
    ptm[0, 0] = 1.0
    ptm[1:, 1:] = rotation
    return ptm


def ideal_gateset() -> GateSet:
    return GateSet({lab: ProcessMatrix(lab, ideal_ptm(lab)) for lab in GATESET_LABELS})


@lru_cache(maxsize=1)
def _substituted_words() -> tuple[tuple[str, ...], ...]:
    words = []
    for element in build_group():
        words.append(tuple(_SUBSTITUTIONS.get(g, g) for g in decompose(element)))
    return tuple(words)


def _word_product(word: tuple[str, ...], matrix_of) -> np.ndarray:
    out = np.eye(4)
    for label in word:
        out = matrix_of(label) @ out
    return out


def clifford_ptms(gs: GateSet) -> list[np.ndarray]:
    """Transfer matrix of each Clifford as the ordered product of gate PTMs."""
    return [_word_product(word, gs.matrix) for word in _substituted_words()]


@lru_cache(maxsize=1)
def _target_ptms() -> tuple[np.ndarray, ...]:
    """Ideal products of the same substituted gate words."""
    return tuple(
        _word_product(word, lambda lab: ideal_ptm(lab)) for word in _substituted_words()
    )


def clifford_fidelity(gs: GateSet) -> GstFidelity:
    """Group-averaged depolarization of a measured gate set.

    Per element, the six pole overlaps are combined by geometric mean;
    non-positive overlaps are excluded with a warning (the root is taken over
    the remaining count), and elements with no usable overlap are dropped
    from the group mean.
    """
    measured = clifford_ptms(gs)
    targets = _target_ptms()
    warnings: list[str] = []
    p_n: list[float] = []
    for idx, (g, t) in enumerate(zip(measured, targets)):
        overlaps = []
        for pole in _POLES:
            value = 0.5 * float((t @ pole) @ (g @ pole))
            if value <= 0.0:
                warnings.append(f"element {idx}: non-positive pole overlap {value:.3e} excluded")
            else:
                overlaps.append(value)
        if not overlaps:
            warnings.append(f"element {idx}: no positive overlaps, excluded from the group mean")
            p_n.append(float("nan"))
            continue
        p_n.append(float(np.prod(overlaps) ** (1.0 / len(overlaps))))
    usable = [p for p in p_n if not np.isnan(p)]
    if not usable:
        raise ValueError("no element produced positive overlaps")
    p_cl = float(np.prod(usable) ** (1.0 / len(usable)))
    return GstFidelity(tuple(p_n), p_cl, 0.5 + 0.5 * p_cl, tuple(warnings))


def load_gateset(path: str | Path) -> GateSet:
    """Read a gate set from JSON: {label: 16 row-major floats}."""
    data = json.loads(Path(path).read_text())
    gates = {}
    for label, flat in data.items():
        values = np.asarray(flat, dtype=float)
        if values.size != 16:
            raise ValueError(f"gate {label}: expected 16 floats, got {values.size}")
        gates[label] = ProcessMatrix(label, values.reshape(4, 4))
    return GateSet(gates)


def save_gateset(gs: GateSet, path: str | Path) -> None:
    payload = {label: [float(v) for v in gs.matrix(label).reshape(-1)] for label in GATESET_LABELS}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True))
