"""Stabilizer codes and syndrome-subspace bookkeeping.

Syndrome index convention: bit ``j`` of ``q`` (counting from the most
significant of ``n - k`` bits) is the outcome of generator ``j`` in
declaration order, ``1`` meaning eigenvalue ``-1``.  ``q = 0`` is the code
space.  Normalizer index ``p`` reads ``i_1 .. i_k j_1 .. j_k`` in binary for
``A_p = Xbar_1^i_1 .. Xbar_k^i_k Zbar_1^j_1 .. Zbar_k^j_k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .channels import PauliChannelSpec
from .opalg import haar_isometry
from .pauli import Pauli, gf2_rank, gf2_solve, paulis_up_to_weight

__all__ = [
    "StabilizerCode",
    "IsometricCode",
    "SyndromeDecomposition",
    "PauliErrorTable",
    "five_qubit_code",
    "steane_code",
    "shor_code",
    "random_code",
    "syndrome_decomposition",
    "pauli_error_coefficients",
    "code_by_name",
    "min_weight_corrections",
]


@dataclass(frozen=True)
class IsometricCode:
    """An encoding given only by its isometry ``U_C`` (no stabilizer structure)."""

    U_C: np.ndarray
    name: str = "isometry"

    @property
    def n(self) -> int:
        return int(round(np.log2(self.U_C.shape[0])))

    @property
    def k(self) -> int:
        return int(round(np.log2(self.U_C.shape[1])))

    @property
    def d_C(self) -> int:
        return self.U_C.shape[0]

    @property
    def d_S(self) -> int:
        return self.U_C.shape[1]

    def logical_basis(self) -> np.ndarray:
        return self.U_C


@dataclass(frozen=True)
class StabilizerCode:
    """An ``[n, k]`` stabilizer code with explicit logical operators."""

    n: int
    k: int
    generators: tuple
    logical_x: tuple
    logical_z: tuple
    name: str = "stabilizer"
    U_C: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        gens = tuple(g if isinstance(g, Pauli) else Pauli.from_label(g) for g in self.generators)
        lx = tuple(g if isinstance(g, Pauli) else Pauli.from_label(g) for g in self.logical_x)
        lz = tuple(g if isinstance(g, Pauli) else Pauli.from_label(g) for g in self.logical_z)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "logical_x", lx)
        object.__setattr__(self, "logical_z", lz)
        self._validate()
        object.__setattr__(self, "U_C", self._encoding())

    def _validate(self):
        n, k = self.n, self.k
        gens, lx, lz = self.generators, self.logical_x, self.logical_z
        if len(gens) != n - k or len(lx) != k or len(lz) != k:
            raise ValueError("need n-k generators and k logical X / Z operators")
        for P in gens + lx + lz:
            if P.n != n:
                raise ValueError("operator length does not match n")
            if P.sign % 2:
                raise ValueError(f"{P.label} is not Hermitian")
        if gf2_rank(np.array([g.bits() for g in gens])) != n - k:
            raise ValueError("generators are not independent")
        for a in gens:
            for b in gens + lx + lz:
                if not a.commutes(b):
                    raise ValueError(f"{a.label} does not commute with {b.label}")
        for i in range(k):
            for j in range(k):
                if not lx[i].commutes(lx[j]) or not lz[i].commutes(lz[j]):
                    raise ValueError("logical operators of one type must commute")
                if lx[i].commutes(lz[j]) != (i != j):
                    raise ValueError("logical X_i and Z_j must anticommute iff i == j")

    @property
    def d_C(self) -> int:
        return 2 ** self.n

    @property
    def d_S(self) -> int:
        return 2 ** self.k

    @cached_property
    def code_projector(self) -> np.ndarray:
        return _sign_projector(self.generators, (0,) * len(self.generators), self.d_C)

    def _encoding(self) -> np.ndarray:
        P0 = self.code_projector
        Pz = _sign_projector(self.logical_z, (0,) * self.k, self.d_C)
        P = Pz @ P0
        # first computational basis state with a nonzero projection
        col = int(np.argmax(np.linalg.norm(P, axis=0) > 1e-8))
        zero = P[:, col]
        zero = zero / np.linalg.norm(zero)
        lead = zero[np.argmax(np.abs(zero) > 1e-12)]
        zero = zero * (abs(lead) / lead)
        xs = [L.matrix() for L in self.logical_x]
        cols = []
        for m in range(self.d_S):
            v = zero
            for i in range(self.k):
                if (m >> (self.k - 1 - i)) & 1:
                    v = xs[i] @ v
            cols.append(v)
        return np.stack(cols, axis=1)

    def logical_basis(self) -> np.ndarray:
        return self.U_C

    def syndrome(self, P: Pauli) -> int:
        q = 0
        for g in self.generators:
            q = (q << 1) | g.symplectic(P)
        return q


def _sign_projector(ops, signs, dim):
    P = np.eye(dim, dtype=complex)
    for op, s in zip(ops, signs):
        P = P @ (np.eye(dim) + (-1) ** s * op.matrix()) / 2
    return P


def five_qubit_code() -> StabilizerCode:
    """The [5,1,3] perfect code (cyclic ``XZZXI`` generators)."""
    return StabilizerCode(
        5, 1, ("XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"), ("XXXXX",), ("ZZZZZ",), name="five_qubit"
    )


def steane_code() -> StabilizerCode:
    """The [7,1,3] Steane code from the Hamming(7,4) parity checks."""
    return StabilizerCode(
        7, 1,
        ("IIIXXXX", "IXXIIXX", "XIXIXIX", "IIIZZZZ", "IZZIIZZ", "ZIZIZIZ"),
        ("XXXXXXX",), ("ZZZZZZZ",), name="steane",
    )


def shor_code() -> StabilizerCode:
    """The [9,1,3] Shor code; ``Zbar = X^9`` so ``|0_L>`` is the GHZ-block product."""
    return StabilizerCode(
        9, 1,
        ("ZZIIIIIII", "IZZIIIIII", "IIIZZIIII", "IIIIZZIII", "IIIIIIZZI", "IIIIIIIZZ",
         "XXXXXXIII", "IIIXXXXXX"),
        ("ZZZZZZZZZ",), ("XXXXXXXXX",), name="shor",
    )


def random_code(n: int, k: int, seed: int = 0) -> IsometricCode:
    """Random ``2^n x 2^k`` isometry from a seeded complex Gaussian matrix."""
    if not 0 <= k < n:
        raise ValueError("need 0 <= k < n")
    rng = np.random.default_rng(seed)
    return IsometricCode(haar_isometry(2 ** n, 2 ** k, rng), name=f"random[{n},{k}]s{seed}")


def code_by_name(name: str, **kw):
    table = {"five_qubit": five_qubit_code, "steane": steane_code, "shor": shor_code}
    if name in table:
        return table[name]()
    if name == "random":
        return random_code(kw.get("n", 6), kw.get("k", 2), kw.get("seed", 0))
    raise ValueError(f"unknown code {name!r}")


@dataclass(frozen=True)
class SyndromeDecomposition:
    """Syndrome subspaces ``S_q`` and the operators connecting them."""

    code: StabilizerCode
    destabilizers: tuple  # Pauli T_j, anticommuting with generator j only

    @property
    def num_syndromes(self) -> int:
        return 2 ** (self.code.n - self.code.k)

    @property
    def num_normalizers(self) -> int:
        return 4 ** self.code.k

    def translation(self, q: int) -> Pauli:
        """Pauli ``T_q`` mapping the code space onto ``S_q``."""
        m = len(self.destabilizers)
        P = Pauli.identity(self.code.n)
        for j in range(m):
            if (q >> (m - 1 - j)) & 1:
                P = P * self.destabilizers[j]
        return P

    @cached_property
    def _translation_mats(self):
        return [self.translation(q).matrix() for q in range(self.num_syndromes)]

    def basis(self, q: int) -> np.ndarray:
        """Columns ``|m>_q``, ordered by logical-Z eigenvalues."""
        return self._translation_mats[q] @ self.code.U_C

    def encoding(self, q: int) -> np.ndarray:
        """``U_Cq = W_q U_C``."""
        return self.basis(q)

    def projector(self, q: int) -> np.ndarray:
        B = self.basis(q)
        return B @ B.conj().T

    @cached_property
    def projectors(self) -> tuple:
        return tuple(self.projector(q) for q in range(self.num_syndromes))

    def transfer(self, q: int, q2: int) -> np.ndarray:
        """``W_qq' = sum_m |m>_q' <m|_q``."""
        return self.basis(q2) @ self.basis(q).conj().T

    def normalizer(self, p: int) -> Pauli:
        k = self.code.k
        P = Pauli.identity(self.code.n)
        for i in range(k):
            if (p >> (2 * k - 1 - i)) & 1:
                P = P * self.code.logical_x[i]
        for i in range(k):
            if (p >> (k - 1 - i)) & 1:
                P = P * self.code.logical_z[i]
        return P

    def normalizer_matrix(self, p: int) -> np.ndarray:
        return self.normalizer(p).matrix()

    def source_normalizer(self, p: int) -> np.ndarray:
        """``A_p^S``, the same product of ``X``/``Z`` on the source qubits."""
        k = self.code.k
        labels_x = ["X" if (p >> (2 * k - 1 - i)) & 1 else "I" for i in range(k)]
        labels_z = ["Z" if (p >> (k - 1 - i)) & 1 else "I" for i in range(k)]
        return Pauli.from_label("".join(labels_x)).matrix() @ Pauli.from_label("".join(labels_z)).matrix()

    def classify(self, E: Pauli):
        """Return ``(p, q, c)`` with ``E U_C = c A_p W_q U_C`` exactly.

        ``c`` is a power of ``i``, returned as an integer quarter phase.
        """
        code = self.code
        q = code.syndrome(E)
        N = self.translation(q).adjoint() * E
        # N commutes with the stabilizer; read off its logical content
        k = code.k
        p = 0
        for i in range(k):
            p |= N.symplectic(code.logical_z[i]) << (2 * k - 1 - i)
        for i in range(k):
            p |= N.symplectic(code.logical_x[i]) << (k - 1 - i)
        A = self.normalizer(p)
        S = A.adjoint() * N
        # S is a stabilizer element up to phase: S = i^c prod g_j^b_j
        gens = code.generators
        b = gf2_solve(np.array([g.bits() for g in gens]).T, S.bits())
        if b is None:
            raise ValueError(f"{E.label} does not decompose over the stabilizer")
        G = Pauli.identity(code.n)
        for j, bit in enumerate(b):
            if bit:
                G = G * gens[j]
        if G.x != S.x or G.z != S.z:
            raise ValueError("stabilizer decomposition mismatch")
        c = (S.phase - G.phase) % 4
        return p, q, c


def _destabilizers(code: StabilizerCode):
    gens = code.generators
    logicals = code.logical_x + code.logical_z
    n = code.n
    m = len(gens)
    # symplectic form: <a, b> = a_x . b_z + a_z . b_x; solve for the bits of T_j
    rows = []
    for P in gens + logicals:
        rows.append(np.concatenate([np.array(P.z), np.array(P.x)]))
    A = np.array(rows, dtype=np.uint8)
    found = []
    for j in range(m):
        rhs = np.zeros(len(rows), dtype=np.uint8)
        rhs[j] = 1
        sol = gf2_solve(A, rhs)
        if sol is None:
            raise ValueError("inconsistent stabilizer input")
        found.append(Pauli(tuple(int(v) for v in sol[:n]), tuple(int(v) for v in sol[n:]), 0))
    # make the destabilizers mutually commute (adding g_i keeps all other products)
    for j in range(m):
        for i in range(j):
            if not found[i].commutes(found[j]):
                G = gens[i]
                found[j] = Pauli(found[j].x, found[j].z, 0) * Pauli(G.x, G.z, 0)
    # normalize phases so every T_j is Hermitian with sign +1
    return tuple(Pauli.from_label(T.label) for T in found)


def syndrome_decomposition(code: StabilizerCode) -> SyndromeDecomposition:
    if not isinstance(code, StabilizerCode):
        raise TypeError("syndrome decomposition needs a stabilizer code")
    dec = SyndromeDecomposition(code, _destabilizers(code))
    for j, T in enumerate(dec.destabilizers):
        for i, g in enumerate(code.generators):
            if g.symplectic(T) != (i == j):
                raise ValueError("inconsistent stabilizer input")
    return dec


@dataclass(frozen=True)
class PauliErrorTable:
    """Classification of a Pauli channel over ``(p, q)`` cells.

    ``probabilities[p, q]`` is ``sum |a|^2`` over all error terms landing in
    cell ``(p, q)``; ``terms`` keeps each term as
    ``(label, p, q, amplitude_with_phase)``.
    """

    probabilities: np.ndarray
    terms: tuple

    @property
    def best_normalizers(self) -> np.ndarray:
        """``p_q = argmax_p |a_pq|^2``; ties go to the smallest ``p``."""
        return np.argmax(self.probabilities, axis=0)

    @property
    def best_weights(self) -> np.ndarray:
        """``|a~_q|^2`` per syndrome."""
        return np.max(self.probabilities, axis=0)

    def optimal_fidelity(self) -> float:
        return float(np.sum(self.best_weights))


def pauli_error_coefficients(code: StabilizerCode, spec: PauliChannelSpec,
                             dec: SyndromeDecomposition | None = None) -> PauliErrorTable:
    """Sort every scaled Pauli error into its ``(p, q)`` cell."""
    if spec.n != code.n:
        raise ValueError(f"channel acts on {spec.n} qubits, code has {code.n}")
    dec = dec or syndrome_decomposition(code)
    probs = np.zeros((dec.num_normalizers, dec.num_syndromes))
    terms = []
    for label, amp in spec.terms:
        E = Pauli.from_label(label)
        p, q, c = dec.classify(E)
        probs[p, q] += abs(amp) ** 2
        terms.append((label, p, q, amp * 1j ** c))
    return PauliErrorTable(probs, tuple(terms))


def min_weight_corrections(code: StabilizerCode) -> list:
    """Lowest-weight Pauli for every syndrome; ties go to the lexicographically smallest."""
    need = 2 ** (code.n - code.k)
    table = [None] * need
    remaining = need
    for label in paulis_up_to_weight(code.n, code.n):
        q = code.syndrome(Pauli.from_label(label))
        if table[q] is None:
            table[q] = label
            remaining -= 1
            if remaining == 0:
                break
    return table
