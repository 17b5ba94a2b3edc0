"""The 24-element single-qubit Clifford group over {+-x90, +-y90} words.

Elements are generated by closure from the four quarter-turn generators and
identified up to global phase.  Each element keeps the shortest generator
word found during the breadth-first closure, which is also its physical
compilation: the pulse engine plays one resonant burst per letter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .pulses import LEFT, MicrowaveBurst

# generator letters -> (rotation angle, burst axis phase)
# axis phases follow the x-for-(-pi/2), y-for-0 drive convention; negative
# rotations are played as positive rotations about the opposite axis.
GENERATOR_PULSES = {
    "x90": (math.pi / 2, -math.pi / 2),
    "x-90": (math.pi / 2, math.pi / 2),
    "y90": (math.pi / 2, 0.0),
    "y-90": (math.pi / 2, math.pi),
}

_SIGMA = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
}


def generator_unitary(letter: str) -> np.ndarray:
    axis = _SIGMA[letter[0]]
    angle = math.pi / 2 if "-" not in letter else -math.pi / 2
    return math.cos(angle / 2) * np.eye(2) - 1j * math.sin(angle / 2) * axis


def _canonical_key(u: np.ndarray) -> bytes:
    """Phase-fixed rounded bytes identifying a unitary up to global phase."""
    u = np.asarray(u, dtype=complex)
    flat = u.ravel()
    pivot = flat[np.argmax(np.abs(flat) > 0.1)]  # Clifford entries are 0 or >= 1/2
    fixed = u * (abs(pivot) / pivot)
    return (np.round(fixed, 6) + 0.0).tobytes()  # +0.0 folds -0.0 into +0.0


@dataclass(frozen=True)
class CliffordGroup:
    """Closure table of the 24 single-qubit Cliffords.

    ``unitaries[i]`` is a representative 2x2 matrix, ``words[i]`` its
    generator decomposition, ``product[i, j]`` the index of element i
    composed after element j (i.e. U_i @ U_j), and ``inverse[i]`` the index
    of the group inverse.
    """

    unitaries: tuple[np.ndarray, ...]
    words: tuple[tuple[str, ...], ...]
    product: np.ndarray
    inverse: np.ndarray

    def __len__(self) -> int:
        return len(self.unitaries)

    def index_of(self, u: np.ndarray) -> int:
        key = _canonical_key(u)
        for i, v in enumerate(self.unitaries):
            if _canonical_key(v) == key:
                return i
        raise KeyError("unitary is not a Clifford element")

    def compose_word(self, indices: list[int] | np.ndarray) -> int:
        """Index of the product C_{i_n} ... C_{i_1} for indices in play order."""
        acc = self.index_of(np.eye(2))
        for i in indices:
            acc = int(self.product[int(i), acc])
        return acc

    def bursts(self, index: int, frequency: float, rabi: float) -> tuple[MicrowaveBurst, ...]:
        """Physical compilation of one Clifford as resonant bursts."""
        out = []
        for letter in self.words[index]:
            angle, axis_phase = GENERATOR_PULSES[letter]
            out.append(MicrowaveBurst(
                target=LEFT,  # caller retargets; see compile_clifford_bursts
                frequency=frequency, rabi=rabi, phase=axis_phase,
                duration=angle / (2.0 * math.pi * rabi),
            ))
        return tuple(out)


@lru_cache(maxsize=1)
def clifford_group() -> CliffordGroup:
    """Generate the group by breadth-first closure from the quarter turns."""
    unitaries: list[np.ndarray] = [np.eye(2, dtype=complex)]
    words: list[tuple[str, ...]] = [()]
    seen = {_canonical_key(unitaries[0]): 0}
    frontier = [0]
    while frontier:
        new_frontier = []
        for idx in frontier:
            for letter in GENERATOR_PULSES:
                u = generator_unitary(letter) @ unitaries[idx]
                key = _canonical_key(u)
                if key not in seen:
                    seen[key] = len(unitaries)
                    new_frontier.append(len(unitaries))
                    unitaries.append(u)
                    words.append(words[idx] + (letter,))
        frontier = new_frontier
    n = len(unitaries)
    if n != 24:
        raise RuntimeError(f"closure produced {n} elements instead of 24")

    product = np.empty((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            product[i, j] = seen[_canonical_key(unitaries[i] @ unitaries[j])]
    inverse = np.empty(n, dtype=np.int64)
    for i in range(n):
        inverse[i] = seen[_canonical_key(unitaries[i].conj().T)]
    return CliffordGroup(tuple(unitaries), tuple(words), product, inverse)


def x180_index(group: CliffordGroup) -> int:
    return group.index_of(_SIGMA["x"])
