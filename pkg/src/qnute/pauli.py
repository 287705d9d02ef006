"""Exact complex-weighted Pauli-string algebra on n-qubit registers.

Index 0 of a string is the leftmost (most significant) tensor factor, so
``dense_matrix`` realizes ``kron(factor_0, factor_1, ...)`` and basis index
``k`` reads its bits most-significant-first.
"""

from __future__ import annotations

import itertools
from enum import Enum
from functools import lru_cache

import numpy as np

from .errors import CapacityError, DimensionMismatchError

SYMBOLS = "IXYZ"

# Dense realizations above this many qubits exceed desk-scale memory.
DENSE_QUBIT_GUARD = 14

# Canonicalization drops terms with |coefficient| below this.
COEFF_CUTOFF = 1e-14

# Single-qubit products: (a, b) -> (phase, a*b) with phase in {1, -1, i, -i}.
_MUL: dict[tuple[str, str], tuple[complex, str]] = {}
for _s in SYMBOLS:
    _MUL[("I", _s)] = (1.0 + 0j, _s)
    _MUL[(_s, "I")] = (1.0 + 0j, _s)
    _MUL[(_s, _s)] = (1.0 + 0j, "I")
for _a, _b, _c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
    _MUL[(_a, _b)] = (1j, _c)
    _MUL[(_b, _a)] = (-1j, _c)


class PauliString(str):
    """Tensor product of single-qubit Paulis written as a symbol string, e.g. "IXZ"."""

    def __new__(cls, symbols) -> "PauliString":
        s = super().__new__(cls, symbols)
        if not s:
            raise ValueError("Pauli string must contain at least one symbol")
        bad = set(s) - set(SYMBOLS)
        if bad:
            raise ValueError(f"invalid Pauli symbols {sorted(bad)} in {str(s)!r}")
        return s

    @property
    def support(self) -> tuple[int, ...]:
        """Qubit indices whose symbol is not the identity."""
        return tuple(i for i, ch in enumerate(self) if ch != "I")

    @property
    def y_count(self) -> int:
        return self.count("Y")


def identity_string(n: int) -> PauliString:
    return PauliString("I" * n)


def multiply_strings(p: PauliString, q: PauliString) -> tuple[complex, PauliString]:
    """Return (phase, r) with matrix(p) @ matrix(q) == phase * matrix(r)."""
    if len(p) != len(q):
        raise DimensionMismatchError(f"string lengths differ: {len(p)} vs {len(q)}")
    phase = 1.0 + 0j
    out = []
    for a, b in zip(p, q):
        ph, c = _MUL[(a, b)]
        phase *= ph
        out.append(c)
    return phase, PauliString("".join(out))


@lru_cache(maxsize=None)
def string_action(s: PauliString) -> tuple[np.ndarray, np.ndarray]:
    """Gather representation of w = matrix(s) @ v as w = phases * v[indices]."""
    n = len(s)
    dim = 1 << n
    k = np.arange(dim)
    xmask = 0
    phase = np.ones(dim, dtype=complex)
    for i, ch in enumerate(s):
        bit = (k >> (n - 1 - i)) & 1
        if ch == "X":
            xmask |= 1 << (n - 1 - i)
        elif ch == "Y":
            xmask |= 1 << (n - 1 - i)
            phase = phase * (1j * (1 - 2 * bit))
        elif ch == "Z":
            phase = phase * (1 - 2 * bit)
    src = k ^ xmask
    return src, phase[src]


def apply_string(s: PauliString, vec: np.ndarray) -> np.ndarray:
    """Apply matrix(s) to a length-2^n vector."""
    idx, ph = string_action(s)
    if vec.shape[-1] != idx.shape[0]:
        raise DimensionMismatchError(
            f"vector length {vec.shape[-1]} does not match {len(s)}-qubit string"
        )
    return ph * vec[..., idx]


def _string_dense(s: PauliString) -> np.ndarray:
    idx, ph = string_action(s)
    dim = idx.shape[0]
    m = np.zeros((dim, dim), dtype=complex)
    m[np.arange(dim), idx] = ph
    return m


class PauliSum:
    """Canonicalized complex-weighted sum of equal-length Pauli strings.

    Terms are merged, sorted lexicographically by symbol sequence, and dropped
    when their coefficient magnitude falls below ``COEFF_CUTOFF``.  Instances
    are immutable and hashable.
    """

    __slots__ = ("terms", "_hash")

    def __init__(self, terms=()):
        merged: dict[PauliString, complex] = {}
        length: int | None = None
        for coeff, string in terms:
            if not isinstance(string, PauliString):
                string = PauliString(string)
            if length is None:
                length = len(string)
            elif len(string) != length:
                raise DimensionMismatchError(
                    f"mixed string lengths in sum: {length} vs {len(string)}"
                )
            merged[string] = merged.get(string, 0j) + complex(coeff)
        canon = tuple(
            (c, s) for s, c in sorted(merged.items()) if abs(c) > COEFF_CUTOFF
        )
        object.__setattr__(self, "terms", canon)
        object.__setattr__(self, "_hash", hash(canon))

    def __setattr__(self, name, value):
        raise AttributeError("PauliSum is immutable")

    @classmethod
    def identity(cls, n: int, coeff: complex = 1.0) -> "PauliSum":
        return cls([(coeff, identity_string(n))])

    @property
    def num_qubits(self) -> int | None:
        """Register size, or None for the empty sum."""
        return len(self.terms[0][1]) if self.terms else None

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, PauliSum) and self.terms == other.terms

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return format_pauli_sum(self)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        return PauliSum(self.terms + other.terms)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-other)

    def __neg__(self) -> "PauliSum":
        return PauliSum((-c, s) for c, s in self.terms)

    def __mul__(self, scalar) -> "PauliSum":
        return PauliSum((c * scalar, s) for c, s in self.terms)

    __rmul__ = __mul__

    def __matmul__(self, other: "PauliSum") -> "PauliSum":
        out = []
        for ca, sa in self.terms:
            for cb, sb in other.terms:
                phase, s = multiply_strings(sa, sb)
                out.append((ca * cb * phase, s))
        return PauliSum(out)

    def tensor(self, other: "PauliSum") -> "PauliSum":
        """Kronecker product; self supplies the leftmost factors."""
        return PauliSum(
            (ca * cb, PauliString(str(sa) + str(sb)))
            for ca, sa in self.terms
            for cb, sb in other.terms
        )

    def adjoint(self) -> "PauliSum":
        return PauliSum((c.conjugate(), s) for c, s in self.terms)

    @property
    def is_hermitian(self) -> bool:
        """True when the sum equals its formal adjoint after canonicalization."""
        return self == self.adjoint()

    @property
    def has_real_matrix(self) -> bool:
        """True when the dense realization has no imaginary entries.

        A string's matrix is real for an even Y count and purely imaginary for
        an odd one, so the check is structural and needs no dense work.
        """
        for c, s in self.terms:
            if s.y_count % 2 == 0:
                if abs(c.imag) > COEFF_CUTOFF:
                    return False
            elif abs(c.real) > COEFF_CUTOFF:
                return False
        return True

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Apply the dense realization to a length-2^n vector without forming it."""
        out = np.zeros_like(np.asarray(vec, dtype=complex))
        for c, s in self.terms:
            out += c * apply_string(s, vec)
        return out


def tensor(a: PauliSum, b: PauliSum) -> PauliSum:
    return a.tensor(b)


class LadderOp(Enum):
    """Single-qubit corner matrices: projectors NW/SE and shifts NE/SW."""

    NW = "NW"
    SE = "SE"
    NE = "NE"
    SW = "SW"


_LADDER_TERMS = {
    LadderOp.NW: ((0.5, "I"), (0.5, "Z")),
    LadderOp.SE: ((0.5, "I"), (-0.5, "Z")),
    LadderOp.NE: ((0.5, "X"), (0.5j, "Y")),
    LadderOp.SW: ((0.5, "X"), (-0.5j, "Y")),
}


def ladder_as_pauli(op: LadderOp) -> PauliSum:
    """One-qubit ladder/projector operator as a two-term Pauli sum."""
    return PauliSum(_LADDER_TERMS[op])


@lru_cache(maxsize=None)
def ladder_power(op: LadderOp, n: int) -> PauliSum:
    """n-fold tensor power of a ladder operator (a single corner entry)."""
    if n < 1:
        raise ValueError("tensor power requires n >= 1")
    out = ladder_as_pauli(op)
    for _ in range(n - 1):
        out = out.tensor(ladder_as_pauli(op))
    return out


def _check_dense_size(n: int) -> None:
    if n > DENSE_QUBIT_GUARD:
        raise CapacityError(
            f"dense realization of {n} qubits exceeds the {DENSE_QUBIT_GUARD}-qubit guard"
        )


def dense_matrix(s: PauliSum, n: int) -> np.ndarray:
    """Dense 2^n x 2^n realization of a Pauli sum."""
    _check_dense_size(n)
    if s.num_qubits not in (None, n):
        raise DimensionMismatchError(
            f"sum acts on {s.num_qubits} qubits, dense realization asked for {n}"
        )
    dim = 1 << n
    m = np.zeros((dim, dim), dtype=complex)
    for c, string in s.terms:
        idx, ph = string_action(string)
        m[np.arange(dim), idx] += c * ph
    return m


def decompose_dense(m: np.ndarray) -> PauliSum:
    """Expand a 2^n x 2^n matrix in the Pauli basis via Hilbert-Schmidt products."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {m.shape}")
    dim = m.shape[0]
    n = dim.bit_length() - 1
    if dim != 1 << n or dim < 2:
        raise DimensionMismatchError(f"matrix dimension {dim} is not a power of two")
    _check_dense_size(n)
    rows = np.arange(dim)
    terms = []
    for symbols in itertools.product(SYMBOLS, repeat=n):
        string = PauliString("".join(symbols))
        idx, ph = string_action(string)
        # Tr(P m) picks one entry per row because P has a single entry per row.
        coeff = np.sum(ph * m[idx, rows]) / dim
        if abs(coeff) > COEFF_CUTOFF:
            terms.append((coeff, string))
    return PauliSum(terms)


def format_pauli_sum(s: PauliSum) -> str:
    """Text form, one term per line: "(re+imi) SYMBOLS"; "0" for the empty sum."""
    if not s.terms:
        return "0"
    return "\n".join(
        f"({c.real:.12g}{c.imag:+.12g}i) {string}" for c, string in s.terms
    )


def parse_pauli_sum(text: str) -> PauliSum:
    """Parse the ``format_pauli_sum`` notation (accepts both i and j suffixes)."""
    terms = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line == "0" or line.startswith("#"):
            continue
        try:
            coeff_part, string_part = line.rsplit(None, 1)
        except ValueError:
            raise ValueError(f"malformed Pauli term: {line!r}") from None
        coeff_text = coeff_part.strip().strip("()").replace("i", "j")
        try:
            coeff = complex(coeff_text)
        except ValueError:
            raise ValueError(f"malformed coefficient in Pauli term: {line!r}") from None
        terms.append((coeff, PauliString(string_part)))
    return PauliSum(terms)
