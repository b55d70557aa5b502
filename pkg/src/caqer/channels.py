"""Qubit channel models as Kraus-operator sets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .opalg import is_isometry
from .pauli import Pauli

__all__ = [
    "KrausChannel",
    "TensorPowerChannel",
    "PauliChannelSpec",
    "amplitude_damping",
    "pure_state_rotation",
    "pauli_channel",
    "depolarizing",
    "depolarizing_spec",
    "bit_flip",
    "identity_channel",
    "tensor_pow",
    "compose_encoding",
    "apply_channel",
]

CPTP_TOL = 1e-10


def _closure_error(elements, dim_in):
    S = np.zeros((dim_in, dim_in), dtype=complex)
    for E in elements:
        S += E.conj().T @ E
    return float(np.max(np.abs(S - np.eye(dim_in))))


@dataclass(frozen=True)
class KrausChannel:
    """A CPTP map ``rho -> sum_k E_k rho E_k^dagger``.

    ``elements`` keep their declaration order; the data matrix built from
    the channel inherits it.
    """

    elements: tuple
    name: str = ""
    # index of the element regarded as the "error event" by OrderQER
    error_index: int | None = None
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        elems = tuple(np.asarray(E, dtype=complex) for E in self.elements)
        if not elems:
            raise ValueError("a channel needs at least one Kraus element")
        shape = elems[0].shape
        if any(E.shape != shape or E.ndim != 2 for E in elems):
            raise ValueError("Kraus elements must share one 2-D shape")
        for E in elems:
            E.setflags(write=False)
        object.__setattr__(self, "elements", elems)
        if self.check:
            err = _closure_error(elems, shape[1])
            if err > CPTP_TOL:
                raise ValueError(f"Kraus set is not trace preserving (error {err:.3e})")

    @property
    def dim_in(self) -> int:
        return self.elements[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self):
        return len(self.elements)

    def closure_error(self) -> float:
        return _closure_error(self.elements, self.dim_in)

    def encoded_elements(self, U):
        return [E @ U for E in self.elements]


@dataclass(frozen=True)
class TensorPowerChannel:
    """``base`` applied independently to each of ``n`` qubits.

    Elements are produced lazily in lexicographic index order
    ``(k_1, ..., k_n)`` with qubit 1 the most significant tensor factor.
    """

    base: KrausChannel
    n: int
    max_elements: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        count = len(self.base) ** self.n
        if self.max_elements is not None and count > self.max_elements:
            raise ValueError(
                f"{count} Kraus elements exceed the cap of {self.max_elements}"
            )

    @property
    def dim_in(self) -> int:
        return self.base.dim_in ** self.n

    @property
    def dim_out(self) -> int:
        return self.base.dim_out ** self.n

    @property
    def name(self) -> str:
        return f"{self.base.name}^{self.n}"

    @property
    def error_index(self):
        return self.base.error_index

    def __len__(self):
        return len(self.base) ** self.n

    def indices(self):
        return product(range(len(self.base)), repeat=self.n)

    def element(self, idx) -> np.ndarray:
        out = np.eye(1, dtype=complex)
        for k in idx:
            out = np.kron(out, self.base.elements[k])
        return out

    @property
    def elements(self) -> tuple:
        return tuple(self.element(idx) for idx in self.indices())

    def materialize(self) -> KrausChannel:
        return KrausChannel(self.elements, name=self.name, error_index=self.error_index)

    def apply_local(self, idx, U) -> np.ndarray:
        """``(E_{k_1} (x) ... (x) E_{k_n}) @ U`` without forming the Kronecker product."""
        U = np.asarray(U, dtype=complex)
        d = self.base.dim_in
        cols = U.shape[1]
        T = U.reshape((d,) * self.n + (cols,))
        for q, k in enumerate(idx):
            T = np.moveaxis(np.tensordot(self.base.elements[k], T, axes=([1], [q])), 0, q)
        return T.reshape(self.base.dim_out ** self.n, cols)

    def encoded_elements(self, U):
        return [self.apply_local(idx, U) for idx in self.indices()]

    def closure_error(self) -> float:
        # closure of a tensor power is exact given closure of the factor
        return self.base.closure_error() * self.n


@dataclass(frozen=True)
class PauliChannelSpec:
    """Scaled Pauli-string Kraus elements ``a * P`` with ``sum |a|^2 = 1``."""

    n: int
    terms: tuple  # of (label, amplitude)

    def __post_init__(self):
        terms = tuple((str(lbl).upper(), complex(a)) for lbl, a in self.terms)
        labels = [t[0] for t in terms]
        if len(set(labels)) != len(labels):
            raise ValueError("Pauli strings must be unique")
        if any(len(lbl) != self.n for lbl in labels):
            raise ValueError(f"every Pauli string needs {self.n} letters")
        total = sum(abs(a) ** 2 for _, a in terms)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"amplitudes are not normalized (sum |a|^2 = {total!r})")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_probabilities(cls, n: int, probs: dict) -> "PauliChannelSpec":
        return cls(n, tuple((lbl, math.sqrt(p)) for lbl, p in probs.items() if p > 0))

    @classmethod
    def iid(cls, single: "PauliChannelSpec", n: int) -> "PauliChannelSpec":
        """Independent copies of a one-qubit Pauli channel on ``n`` qubits."""
        if single.n != 1:
            raise ValueError("expected a single-qubit spec")
        terms = []
        for combo in product(single.terms, repeat=n):
            label = "".join(t[0] for t in combo)
            amp = np.prod([t[1] for t in combo])
            terms.append((label, amp))
        total = sum(abs(a) ** 2 for _, a in terms)
        # renormalize away roundoff in the products
        terms = [(lbl, a / math.sqrt(total)) for lbl, a in terms]
        return cls(n, tuple(terms))


def identity_channel(dim: int = 2) -> KrausChannel:
    return KrausChannel((np.eye(dim),), name="identity")


def amplitude_damping(gamma: float) -> KrausChannel:
    """Single-qubit amplitude damping with decay probability ``gamma``."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    E0 = np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - gamma)]])
    E1 = np.array([[0.0, math.sqrt(gamma)], [0.0, 0.0]])
    return KrausChannel((E0, E1), name=f"ampdamp({gamma:g})", error_index=1)


def pure_state_rotation(theta: float, phi: float) -> KrausChannel:
    """Channel rotating ``|+-theta/2>`` toward each other by ``phi``.

    Here ``|t> = cos t |0> + sin t |1>``.  The two target states leave as the
    pure states ``|+-(theta - phi)/2>``; everything else emerges mixed.  The
    three elements are the ``+-`` pair scaled by ``alpha`` and a diagonal
    element scaled by ``beta``; ``alpha**2, beta**2`` solve the diagonal of
    the completeness relation (the pair cancels the off-diagonal terms).
    """
    if not 0.0 < theta < math.pi:
        raise ValueError(f"theta must lie in (0, pi), got {theta}")
    if not 0.0 <= phi <= theta:
        raise ValueError(f"phi must lie in [0, theta], got {phi}")
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    c2, s2 = math.cos((theta - phi) / 2), math.sin((theta - phi) / 2)
    # [2 s^2, c2^2/c^2; 2 c^2, s2^2/s^2] [alpha^2, beta^2]^T = [1, 1]^T
    A = np.array([[2 * s * s, c2 * c2 / (c * c)], [2 * c * c, s2 * s2 / (s * s)]])
    if abs(np.linalg.det(A)) < 1e-12:
        raise ValueError(f"normalization is singular at theta={theta}, phi={phi}")
    a2, b2 = np.linalg.solve(A, np.ones(2))
    if a2 < -1e-12 or b2 < -1e-12:
        raise ValueError(f"no CPTP normalization for theta={theta}, phi={phi}")
    alpha, beta = math.sqrt(max(a2, 0.0)), math.sqrt(max(b2, 0.0))
    plus = alpha * np.array([[c2 * s, c2 * c], [s2 * s, s2 * c]])
    minus = alpha * np.array([[c2 * s, -c2 * c], [-s2 * s, s2 * c]])
    diag = beta * np.diag([c2 / c, s2 / s])
    ch = KrausChannel((plus, minus, diag), name=f"purestates({theta:g},{phi:g})", check=False)
    err = ch.closure_error()
    if err > 1e-12:
        raise ValueError(f"normalization failed (closure error {err:.3e})")
    return ch


def pauli_channel(spec: PauliChannelSpec) -> KrausChannel:
    """Kraus elements ``a * P`` for every term of ``spec``."""
    elems = tuple(a * Pauli.from_label(lbl).matrix() for lbl, a in spec.terms)
    return KrausChannel(elems, name="pauli")


def depolarizing_spec(p: float, n: int = 1) -> PauliChannelSpec:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    single = PauliChannelSpec.from_probabilities(
        1, {"I": 1 - p, "X": p / 3, "Y": p / 3, "Z": p / 3}
    )
    return single if n == 1 else PauliChannelSpec.iid(single, n)


def depolarizing(p: float, n: int = 1):
    """``{sqrt(1-p) I, sqrt(p/3) X, sqrt(p/3) Y, sqrt(p/3) Z}``, optionally on ``n`` qubits."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    q = math.sqrt(p / 3)
    base = KrausChannel(
        (math.sqrt(1 - p) * np.eye(2), q * Pauli.from_label("X").matrix(),
         q * Pauli.from_label("Y").matrix(), q * Pauli.from_label("Z").matrix()),
        name=f"depolarizing({p:g})",
    )
    return base if n == 1 else TensorPowerChannel(base, n)


def bit_flip(p: float) -> KrausChannel:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return KrausChannel(
        (math.sqrt(1 - p) * np.eye(2), math.sqrt(p) * Pauli.from_label("X").matrix()),
        name=f"bitflip({p:g})", error_index=1,
    )


def tensor_pow(ch: KrausChannel, n: int, max_elements: int | None = None) -> TensorPowerChannel:
    """The ``n``-fold tensor power of ``ch`` (lazy)."""
    return TensorPowerChannel(ch, n, max_elements)


def compose_encoding(ch, U_C) -> KrausChannel:
    """The channel ``E' o U_C`` with elements ``E_k U_C`` (source -> code space)."""
    U_C = np.asarray(U_C, dtype=complex)
    if U_C.shape[0] != ch.dim_in:
        raise ValueError(f"encoding maps into dim {U_C.shape[0]}, channel expects {ch.dim_in}")
    if not is_isometry(U_C):
        raise ValueError("encoding is not an isometry")
    elems = ch.encoded_elements(U_C)
    # drop exact zeros (e.g. gamma = 0 damping terms)
    kept = [E for E in elems if np.any(E)]
    return KrausChannel(tuple(kept) or (elems[0],), name=getattr(ch, "name", ""))


def apply_channel(ch, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return sum(E @ rho @ E.conj().T for E in ch.elements)
