"""Exact Pauli-group arithmetic in the symplectic representation.

A Pauli is stored as ``i**phase * X**x Z**z`` with ``x, z`` bit vectors, one
bit per qubit, qubit 0 leftmost (most significant in the matrix index).
Phases are integers mod 4, so products and commutators are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from itertools import combinations, product

import numpy as np

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)

PAULI_MATRICES = {"I": _I2, "X": _X, "Y": _Y, "Z": _Z}
_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}
# lexicographic tie-breaking order for labels
LETTER_ORDER = "IXYZ"


@dataclass(frozen=True)
class Pauli:
    """An n-qubit Pauli operator ``i**phase * X**x Z**z``."""

    x: tuple
    z: tuple
    phase: int = 0

    @classmethod
    def from_label(cls, label: str) -> "Pauli":
        """Parse ``"XZZXI"``; an optional leading ``+``, ``-``, ``i`` or ``-i`` sets the sign."""
        sign = 0
        for prefix, ph in (("-i", 3), ("+i", 1), ("i", 1), ("-", 2), ("+", 0)):
            if label.startswith(prefix):
                sign = ph
                label = label[len(prefix):]
                break
        try:
            bits = [_LETTER_BITS[c] for c in label.upper()]
        except KeyError as exc:
            raise ValueError(f"invalid Pauli label {label!r}") from exc
        x = tuple(b[0] for b in bits)
        z = tuple(b[1] for b in bits)
        # each Y = i X Z contributes one quarter phase
        return cls(x, z, (sign + sum(b[0] & b[1] for b in bits)) % 4)

    @classmethod
    def identity(cls, n: int) -> "Pauli":
        return cls((0,) * n, (0,) * n, 0)

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def weight(self) -> int:
        return sum(a | b for a, b in zip(self.x, self.z))

    @property
    def label(self) -> str:
        """Letters only; the sign is dropped."""
        return "".join(_BITS_LETTER[(a, b)] for a, b in zip(self.x, self.z))

    @property
    def sign(self) -> int:
        """Quarter phase relative to the Hermitian tensor product of letters."""
        return (self.phase - sum(a & b for a, b in zip(self.x, self.z))) % 4

    def __mul__(self, other: "Pauli") -> "Pauli":
        if self.n != other.n:
            raise ValueError("qubit count mismatch")
        # X^x1 Z^z1 X^x2 Z^z2 = (-1)^(z1.x2) X^(x1+x2) Z^(z1+z2)
        swap = sum(a & b for a, b in zip(self.z, other.x))
        x = tuple(a ^ b for a, b in zip(self.x, other.x))
        z = tuple(a ^ b for a, b in zip(self.z, other.z))
        return Pauli(x, z, (self.phase + other.phase + 2 * swap) % 4)

    def symplectic(self, other: "Pauli") -> int:
        """0 if the two commute, 1 if they anticommute."""
        return (sum(a & b for a, b in zip(self.x, other.z))
                + sum(a & b for a, b in zip(self.z, other.x))) % 2

    def commutes(self, other: "Pauli") -> bool:
        return self.symplectic(other) == 0

    def adjoint(self) -> "Pauli":
        # (X^x Z^z)^dagger = Z^z X^x = (-1)^(x.z) X^x Z^z
        xz = sum(a & b for a, b in zip(self.x, self.z))
        return Pauli(self.x, self.z, (-self.phase + 2 * xz) % 4)

    def matrix(self) -> np.ndarray:
        mats = [PAULI_MATRICES[c] for c in self.label]
        M = reduce(np.kron, mats, np.eye(1, dtype=complex))
        return (1j ** self.sign) * M

    def bits(self) -> np.ndarray:
        return np.array(self.x + self.z, dtype=np.uint8)


def pauli_matrix(label: str) -> np.ndarray:
    return Pauli.from_label(label).matrix()


def sort_key(label: str):
    """Weight first, then lexicographic in the I < X < Y < Z order."""
    return (sum(c != "I" for c in label), [LETTER_ORDER.index(c) for c in label])


def paulis_up_to_weight(n: int, max_weight: int):
    """Yield labels in :func:`sort_key` order, up to ``max_weight``."""
    for w in range(max_weight + 1):
        labels = []
        for support in combinations(range(n), w):
            for letters in product("XYZ", repeat=w):
                chars = ["I"] * n
                for pos, c in zip(support, letters):
                    chars[pos] = c
                labels.append("".join(chars))
        labels.sort(key=sort_key)
        yield from labels


def gf2_solve(A: np.ndarray, b: np.ndarray):
    """One solution of ``A x = b`` over GF(2), or ``None`` if inconsistent."""
    A = np.array(A, dtype=np.uint8) % 2
    b = np.array(b, dtype=np.uint8) % 2
    rows, cols = A.shape
    aug = np.concatenate([A, b.reshape(-1, 1)], axis=1)
    pivots = []
    r = 0
    for c in range(cols):
        hit = np.nonzero(aug[r:, c])[0]
        if hit.size == 0:
            continue
        p = r + hit[0]
        aug[[r, p]] = aug[[p, r]]
        for rr in range(rows):
            if rr != r and aug[rr, c]:
                aug[rr] ^= aug[r]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    if np.any(aug[r:, -1]):
        return None
    x = np.zeros(cols, dtype=np.uint8)
    for i, c in enumerate(pivots):
        x[c] = aug[i, -1]
    return x


def gf2_rank(A: np.ndarray) -> int:
    A = np.array(A, dtype=np.uint8) % 2
    rank = 0
    rows, cols = A.shape
    for c in range(cols):
        hit = np.nonzero(A[rank:, c])[0]
        if hit.size == 0:
            continue
        p = rank + hit[0]
        A[[rank, p]] = A[[p, rank]]
        for rr in range(rows):
            if rr != rank and A[rr, c]:
                A[rr] ^= A[rank]
        rank += 1
        if rank == rows:
            break
    return rank
