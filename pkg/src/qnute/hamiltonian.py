"""Finite-difference Black-Scholes generators on 2^n-point grids.

Everything here builds L = -iH, the real generator with du/dtau = L u, both
as an explicit tridiagonal operator and as a Pauli sum, plus the splitting of
a Pauli sum into evolution terms with bounded qubit windows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidDomainError,
    UnsupportedSizeError,
)
from .pauli import LadderOp, PauliSum, ladder_as_pauli, ladder_power

CENTRAL = "central"
LINEAR = "linear"


@dataclass(frozen=True)
class Grid:
    """Uniform asset-price grid of 2^n points on [x0, xN]."""

    x0: float
    xN: float
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"grid needs at least one qubit, got n={self.n}")
        if not self.xN > self.x0 >= 0.0:
            raise ValueError(f"grid requires xN > x0 >= 0, got [{self.x0}, {self.xN}]")

    @property
    def num_points(self) -> int:
        return 1 << self.n

    @property
    def h(self) -> float:
        return (self.xN - self.x0) / (self.num_points - 1)

    def points(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.num_points)


@dataclass(frozen=True)
class BSParams:
    """Constant risk-free rate (1/year) and volatility (1/sqrt(year))."""

    r: float
    sigma: float

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ValueError(f"volatility must be non-negative, got {self.sigma}")
        if self.r < 0.0:
            raise ValueError(f"risk-free rate must be non-negative, got {self.r}")


@dataclass(frozen=True)
class TridiagonalOperator:
    """Tridiagonal generator: alpha below, gamma on, beta above the diagonal."""

    alpha: np.ndarray  # length 2^n - 1, sub-diagonal entry of rows 1..2^n-1
    gamma: np.ndarray  # length 2^n
    beta: np.ndarray  # length 2^n - 1, super-diagonal entry of rows 0..2^n-2
    boundary: str

    @property
    def size(self) -> int:
        return self.gamma.shape[0]

    def to_dense(self) -> np.ndarray:
        return (
            np.diag(self.alpha, -1) + np.diag(self.gamma) + np.diag(self.beta, 1)
        ).astype(complex)


def bs_coefficients(grid: Grid, p: BSParams) -> TridiagonalOperator:
    """Central-difference generator rows: alpha_k, beta_k, gamma_k = -r - alpha_k - beta_k."""
    x = grid.points()
    diffusion = p.sigma**2 * x**2 / (2.0 * grid.h**2)
    drift = p.r * x / (2.0 * grid.h)
    alpha = diffusion - drift
    beta = diffusion + drift
    gamma = -p.r - alpha - beta
    return TridiagonalOperator(alpha[1:], gamma, beta[:-1], CENTRAL)


def apply_linear_bc(t: TridiagonalOperator, grid: Grid, p: BSParams) -> TridiagonalOperator:
    """Replace the first and last rows with the linear-boundary coefficients."""
    if t.boundary == LINEAR:
        return t
    gamma = t.gamma.copy()
    alpha = t.alpha.copy()
    beta = t.beta.copy()
    gamma[0] = -p.r - p.r * grid.x0 / grid.h
    beta[0] = p.r * grid.x0 / grid.h
    alpha[-1] = -p.r * grid.xN / grid.h
    gamma[-1] = -p.r + p.r * grid.xN / grid.h
    return TridiagonalOperator(alpha, gamma, beta, LINEAR)


def _identity(n: int) -> PauliSum:
    return PauliSum.identity(n)


@lru_cache(maxsize=None)
def chi_matrix(n: int) -> PauliSum:
    """Pauli form of diag(0, 1, ..., 2^n - 1), built by prepending one qubit at a time."""
    if n < 1:
        raise ValueError("chi_matrix requires n >= 1")
    if n == 1:
        return ladder_as_pauli(LadderOp.SE)
    return _identity(1).tensor(chi_matrix(n - 1)) + float(2 ** (n - 1)) * ladder_as_pauli(
        LadderOp.SE
    ).tensor(_identity(n - 1))


@lru_cache(maxsize=None)
def chi_squared_matrix(n: int) -> PauliSum:
    """Pauli form of diag(k^2), via the squared prepend recursion."""
    if n < 1:
        raise ValueError("chi_squared_matrix requires n >= 1")
    if n == 1:
        return ladder_as_pauli(LadderOp.SE)
    inner = float(2**n) * chi_matrix(n - 1) + float(2 ** (2 * (n - 1))) * _identity(n - 1)
    return _identity(1).tensor(chi_squared_matrix(n - 1)) + ladder_as_pauli(
        LadderOp.SE
    ).tensor(inner)


@lru_cache(maxsize=None)
def d1_matrix(n: int) -> PauliSum:
    """Pauli form of the antisymmetric (0, +-1) central-difference matrix."""
    if n < 1:
        raise ValueError("d1_matrix requires n >= 1")
    if n == 1:
        return PauliSum([(1j, "Y")])
    return (
        _identity(1).tensor(d1_matrix(n - 1))
        + ladder_as_pauli(LadderOp.NE).tensor(ladder_power(LadderOp.SW, n - 1))
        - ladder_as_pauli(LadderOp.SW).tensor(ladder_power(LadderOp.NE, n - 1))
    )


@lru_cache(maxsize=None)
def d2_matrix(n: int) -> PauliSum:
    """Pauli form of the (-2, 1) second-difference matrix."""
    if n < 1:
        raise ValueError("d2_matrix requires n >= 1")
    if n == 1:
        return PauliSum([(-2.0, "I"), (1.0, "X")])
    return (
        _identity(1).tensor(d2_matrix(n - 1))
        + ladder_as_pauli(LadderOp.NE).tensor(ladder_power(LadderOp.SW, n - 1))
        + ladder_as_pauli(LadderOp.SW).tensor(ladder_power(LadderOp.NE, n - 1))
    )


@lru_cache(maxsize=None)
def build_bs_pauli(grid: Grid, p: BSParams, boundary: str = CENTRAL) -> PauliSum:
    """Black-Scholes generator L = -iH as a Pauli sum, central or linear boundary."""
    if boundary not in (CENTRAL, LINEAR):
        raise ValueError(f"unknown boundary mode {boundary!r}")
    n = grid.n
    if boundary == LINEAR and n < 2:
        raise UnsupportedSizeError("linear boundary mode requires n >= 2 qubits")
    h = grid.h
    x_sum = grid.x0 * _identity(n) + h * chi_matrix(n)
    x2_sum = (
        grid.x0**2 * _identity(n)
        + (2.0 * grid.x0 * h) * chi_matrix(n)
        + h**2 * chi_squared_matrix(n)
    )
    gen = (
        (p.sigma**2 / (2.0 * h**2)) * (x2_sum @ d2_matrix(n))
        + (p.r / (2.0 * h)) * (x_sum @ d1_matrix(n))
        - p.r * _identity(n)
    )
    if boundary == LINEAR:
        central = bs_coefficients(grid, p)
        linear = apply_linear_bc(central, grid, p)
        gen = (
            gen
            + (linear.gamma[0] - central.gamma[0]) * ladder_power(LadderOp.NW, n)
            + (linear.beta[0] - central.beta[0])
            * ladder_power(LadderOp.NW, n - 1).tensor(ladder_as_pauli(LadderOp.NE))
            + (linear.alpha[-1] - central.alpha[-1])
            * ladder_power(LadderOp.SE, n - 1).tensor(ladder_as_pauli(LadderOp.SW))
            + (linear.gamma[-1] - central.gamma[-1]) * ladder_power(LadderOp.SE, n)
        )
    return gen


@dataclass(frozen=True)
class HamiltonianTerm:
    """One evolution factor: a Pauli sum plus the qubit window it is assigned to."""

    pauli: PauliSum
    support: frozenset[int]


def window_for_support(support, width: int, n: int) -> tuple[int, ...]:
    """Window of `width` adjacent qubits centred on the support midpoint.

    Ties round toward the lower qubit index; the window is clipped to the
    register. An empty support centres on the middle of the register.
    """
    width = min(width, n)
    if support:
        lo, hi = min(support), max(support)
    else:
        lo = hi = (n - 1) // 2
    mid = (lo + hi) / 2.0
    start = math.floor(mid - (width - 1) / 2.0)
    start = min(max(start, 0), n - width)
    return tuple(range(start, start + width))


def split_terms(
    hsum: PauliSum,
    n: int,
    strategy: str = "single",
    domain_size: int | None = None,
    stride: int = 1,
) -> list[HamiltonianTerm]:
    """Split a Pauli sum into evolution terms.

    "single" keeps one term supported on the whole register.  "windows" groups
    strings into windows of `domain_size` adjacent qubits placed every `stride`
    qubits; a string lands in the window containing its support when one
    exists, otherwise in the window centred on its support midpoint (wider
    strings are deliberately under-covered).  The terms always sum back to the
    input.
    """
    if hsum.num_qubits not in (None, n):
        raise DimensionMismatchError(
            f"sum acts on {hsum.num_qubits} qubits, split asked for {n}"
        )
    if strategy == "single":
        return [HamiltonianTerm(hsum, frozenset(range(n)))]
    if strategy != "windows":
        raise ValueError(f"unknown term strategy {strategy!r}")
    if domain_size is None:
        raise ValueError("windows strategy requires a domain_size")
    if not 1 <= domain_size <= n:
        raise InvalidDomainError(
            f"window width {domain_size} is invalid for an {n}-qubit register"
        )
    if stride < 1:
        raise ValueError(f"stride must be positive, got {stride}")
    starts = list(range(0, n - domain_size + 1, stride))
    if starts[-1] != n - domain_size:
        starts.append(n - domain_size)
    groups: dict[int, list] = {}
    for coeff, string in hsum.terms:
        sup = string.support
        if sup:
            lo, hi = sup[0], sup[-1]
        else:
            lo = hi = (n - 1) // 2
        mid = (lo + hi) / 2.0
        best = min(
            starts,
            key=lambda s: (
                0 if (s <= lo and hi < s + domain_size) else 1,
                abs(s + (domain_size - 1) / 2.0 - mid),
                s,
            ),
        )
        groups.setdefault(best, []).append((coeff, string))
    return [
        HamiltonianTerm(PauliSum(groups[s]), frozenset(range(s, s + domain_size)))
        for s in sorted(groups)
    ]
