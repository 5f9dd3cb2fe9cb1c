"""Matrix permanents and the cost model of their Gray-code evaluation.

Four routes are provided: the literal permutation sum (cross-check oracle),
Ryser's inclusion-exclusion, Glynn's signed row-sum average, and a
roots-of-unity expansion for matrices built from repeated columns. The last
one enumerates auxiliary variables in mixed-radix Gray order, so advancing
from one term to the next costs a single column update of the running row
sums; pinning the variable of a least-repeated column shrinks the
enumeration by that column's factor.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .matrices import UnitaryMatrix

NAIVE_LIMIT = 10
GRAY_LIMIT = 30

__all__ = [
    "GrayStep",
    "CostEstimate",
    "mixed_radix_gray",
    "permanent_naive",
    "permanent_ryser",
    "permanent_glynn",
    "repeated_column_expansion",
    "permanent_repeated",
    "cost_estimate",
    "cost_estimate_fock",
    "output_probability",
]


def _as_square(matrix, limit: int, algorithm: str) -> np.ndarray:
    a = np.asarray(matrix, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"{algorithm} needs a square matrix, got shape {a.shape}")
    if a.shape[0] > limit:
        raise ValueError(
            f"{algorithm} is capped at dimension {limit}, got {a.shape[0]}"
        )
    return a


@dataclass(frozen=True)
class GrayStep:
    """One move of the mixed-radix walk: coordinate changed and its new digit."""

    position: int
    new_value: int


def mixed_radix_gray(moduli: Sequence[int]) -> Iterator[GrayStep]:
    """Walk every tuple of the mixed-radix box, one coordinate at a time.

    Starting from the all-zeros tuple, yields prod(moduli) - 1 steps; each
    step changes exactly one coordinate by one unit. Coordinates with
    modulus 1 never move, and an empty or all-ones list yields nothing
    (the single trivial state).
    """
    radices = [int(r) for r in moduli]
    if any(r < 1 for r in radices):
        raise ValueError(f"moduli must all be >= 1, got {radices}")
    active = [i for i, r in enumerate(radices) if r > 1]
    m = [radices[i] for i in active]
    d = len(active)
    digits = [0] * d
    direction = [1] * d
    focus = list(range(d + 1))
    while True:
        j = focus[0]
        focus[0] = 0
        if j == d:
            return
        digits[j] += direction[j]
        if digits[j] == 0 or digits[j] == m[j] - 1:
            direction[j] = -direction[j]
            focus[j] = focus[j + 1]
            focus[j + 1] = j + 1
        yield GrayStep(position=active[j], new_value=digits[j])


def permanent_naive(matrix) -> complex:
    """Permanent as the literal sum over all row-to-column assignments.

    Factorial cost, capped at dimension 10; this is the independent oracle
    the fast evaluators are checked against.
    """
    a = _as_square(matrix, NAIVE_LIMIT, "permanent_naive")
    n = a.shape[0]
    rows = np.arange(n)
    total = 0j
    perms = itertools.permutations(range(n))
    while True:
        chunk = list(itertools.islice(perms, 40320))
        if not chunk:
            break
        idx = np.array(chunk, dtype=np.intp)
        total += a[rows, idx].prod(axis=1).sum()
    return complex(total)


def permanent_ryser(matrix) -> complex:
    """Inclusion-exclusion over column subsets, visited in Gray order."""
    a = _as_square(matrix, GRAY_LIMIT, "permanent_ryser")
    n = a.shape[0]
    row_sums = np.zeros(n, dtype=np.complex128)
    parity = 1
    total = 0j
    for step in mixed_radix_gray([2] * n):
        if step.new_value:
            row_sums += a[:, step.position]
        else:
            row_sums -= a[:, step.position]
        parity = -parity
        total += parity * row_sums.prod()
    return complex((-1) ** n * total)


def permanent_glynn(matrix) -> complex:
    """Signed average of row-sum products over +-1 auxiliary variables.

    The first variable is pinned to +1; the remaining n-1 are walked in Gray
    order, so each term costs one row update and one row product.
    """
    a = _as_square(matrix, GRAY_LIMIT, "permanent_glynn")
    n = a.shape[0]
    row_sums = a.sum(axis=1)
    sign = 1
    total = row_sums.prod()
    for step in mixed_radix_gray([2] * (n - 1)):
        col = step.position + 1
        row_sums += (-2.0 if step.new_value else 2.0) * a[:, col]
        sign = -sign
        total += sign * row_sums.prod()
    return complex(total / 2 ** (n - 1))


@lru_cache(maxsize=None)
def _unit_roots(order: int) -> np.ndarray:
    roots = np.exp(2j * np.pi * np.arange(order) / order)
    roots.flags.writeable = False
    return roots


def _validated_multiplicities(multiplicities) -> list[int]:
    mult = [int(m) for m in multiplicities]
    if not mult:
        raise ValueError("multiplicities must be non-empty")
    if any(m < 1 for m in mult):
        raise ValueError(f"multiplicities must all be >= 1, got {mult}")
    return mult


def repeated_column_expansion(
    column_block, multiplicities: Sequence[int], fix_minimal: bool = True
) -> tuple[complex, int]:
    """Permanent of the matrix whose j-th column of ``column_block`` appears
    ``multiplicities[j]`` times, returned with the Gray-step count.

    Each column j carries an auxiliary variable ranging over the
    (multiplicities[j] + 1)-th roots of unity; averaging the variable-weighted
    row-sum products filters out exactly the assignments that use every column
    the prescribed number of times, which recovers the standard permanent
    after multiplying by the product of multiplicity factorials.

    With ``fix_minimal`` the variable of the first least-repeated column is
    pinned to 1 and dropped from the enumeration, which is valid precisely
    because that column's multiplicity is minimal; the walk then makes
    prod(m_j + 1) / min(m_j + 1) - 1 steps instead of prod(m_j + 1) - 1.
    """
    a = np.asarray(column_block, dtype=np.complex128)
    mult = _validated_multiplicities(multiplicities)
    n_cols = len(mult)
    n_rows = sum(mult)
    if a.ndim != 2 or a.shape != (n_rows, n_cols):
        raise ValueError(
            f"column block must have shape ({n_rows}, {n_cols}) for multiplicities"
            f" {mult}, got {a.shape}"
        )

    radices = [m + 1 for m in mult]
    roots = [_unit_roots(r) for r in radices]
    fixed = min(range(n_cols), key=lambda j: mult[j]) if fix_minimal else None
    summed = [j for j in range(n_cols) if j != fixed]

    digits = [0] * n_cols
    row_sums = a.sum(axis=1)
    prefactor = 1 + 0j
    total = row_sums.prod()
    steps = 0
    for step in mixed_radix_gray([radices[j] for j in summed]):
        j = summed[step.position]
        old = roots[j][digits[j]]
        new = roots[j][step.new_value]
        digits[j] = step.new_value
        row_sums += (new - old) * a[:, j]
        prefactor *= new * old.conjugate()
        total += prefactor * row_sums.prod()
        steps += 1

    scale = math.prod(map(math.factorial, mult)) / math.prod(radices[j] for j in summed)
    return complex(total * scale), steps


def permanent_repeated(column_block, multiplicities: Sequence[int]) -> complex:
    """Standard permanent of an N x N matrix given as distinct columns plus
    their repetition counts (sum of counts = N)."""
    value, _ = repeated_column_expansion(column_block, multiplicities)
    return value


@dataclass(frozen=True)
class CostEstimate:
    """Operation count of the repeated-column evaluation, exact integers.

    op_units = N * bunching_product / min_factor, where bunching_product is
    prod(m_l + 1) over occupied ports and min_factor its smallest term.
    """

    op_units: int
    bunching_product: int
    min_factor: int


def _occupied_factors(occupations) -> tuple[list[int], int]:
    occ = [int(m) for m in occupations]
    if any(m < 0 for m in occ):
        raise ValueError(f"occupations must be non-negative, got {occ}")
    return [m + 1 for m in occ if m > 0], sum(occ)


def cost_estimate(occupations: Sequence[int]) -> CostEstimate:
    """Evaluation cost of one output probability for the given configuration."""
    factors, n_bosons = _occupied_factors(occupations)
    if not factors:
        raise ValueError("configuration holds no bosons")
    product = math.prod(factors)
    low = min(factors)
    return CostEstimate(
        op_units=n_bosons * (product // low),
        bunching_product=product,
        min_factor=low,
    )


def cost_estimate_fock(input_occupations, output_occupations) -> CostEstimate:
    """Cheaper of the row-based and column-based evaluations when the input
    is a general Fock state: repeated input ports can replace repeated output
    ports in the expansion, whichever side bunches more."""
    in_factors, n_in = _occupied_factors(input_occupations)
    out_factors, n_out = _occupied_factors(output_occupations)
    if n_in != n_out:
        raise ValueError(
            f"input and output boson totals differ: {n_in} != {n_out}"
        )
    if not in_factors or not out_factors:
        raise ValueError("configurations hold no bosons")
    sides = []
    for factors in (in_factors, out_factors):
        product = math.prod(factors)
        low = min(factors)
        sides.append((product // low, product, low))
    ratio, product, low = min(sides)
    return CostEstimate(op_units=n_in * ratio, bunching_product=product, min_factor=low)


def output_probability(u, configuration, input_ports: Sequence[int] | None = None) -> float:
    """Probability of detecting the given output configuration.

    ``configuration`` is the per-port boson count vector (length M, summing
    to N); bosons enter input ports 1..N unless ``input_ports`` overrides.
    The value is |permanent|^2 over the multiplicity factorials.
    """
    if not isinstance(u, UnitaryMatrix):
        raise TypeError("output_probability expects a UnitaryMatrix")
    occ = np.asarray(configuration, dtype=int)
    if occ.ndim != 1 or occ.shape[0] != u.dim:
        raise ValueError(
            f"configuration must have one entry per port ({u.dim}), got shape {occ.shape}"
        )
    if np.any(occ < 0):
        raise ValueError("configuration entries must be non-negative")
    n_bosons = int(occ.sum())
    if n_bosons < 1:
        raise ValueError("configuration holds no bosons")
    rows = list(range(1, n_bosons + 1)) if input_ports is None else [int(r) for r in input_ports]
    if len(rows) != n_bosons:
        raise ValueError(
            f"need {n_bosons} input ports for {n_bosons} bosons, got {len(rows)}"
        )
    if len(set(rows)) != len(rows) or any(not 1 <= r <= u.dim for r in rows):
        raise ValueError(f"input ports must be distinct and within 1..{u.dim}: {rows}")

    ports = np.flatnonzero(occ) + 1
    mult = occ[ports - 1]
    block = u.matrix[np.ix_([r - 1 for r in rows], ports - 1)]
    per, _ = repeated_column_expansion(block, mult.tolist())
    norm = math.prod(map(math.factorial, occ.tolist()))
    return float(abs(per) ** 2 / norm)
