"""Brute-force ground truth, kept deliberately dumb.

Everything here favors obviousness over speed and shares no arithmetic
with the fast paths it exists to check: determinants are cofactor
expansions over plain Python floats, subset loops are written inline,
and the exact-set probability goes through the inclusion-exclusion sum

    Pr[J] = sum over T subseteq complement(J) of (-1)^|T| det(K_{J u T})

rather than the shifted-determinant identity the kernel module uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DimensionMismatch, GroundSetTooLarge, TooLarge
from .kernel import DiscreteDistribution, MarginalKernel

DET_NAIVE_CAP = 8
IE_GROUND_SET_CAP = 12

# chi-squared must dominate 2 * l1^2 whenever finite; checked on every call.
_CHI2_L1_SLACK = 1e-12


@dataclass(frozen=True)
class DistanceReport:
    """l1 and chi-squared distances between two subset distributions.

    chi2 is +inf when q puts mass where p has none; zero_support_atoms
    counts those atoms.
    """

    l1: float
    chi2: float
    zero_support_atoms: int


def _det_cofactor(rows: list[list[float]]) -> float:
    """First-row cofactor expansion, memoized on the live-column mask.

    The submatrix reached after expanding r rows is determined by which
    columns survive, so the mask is a complete key. This is the textbook
    expansion, just without recomputing shared minors.
    """
    k = len(rows)
    memo: dict[int, float] = {}

    def expand(cols: int) -> float:
        if cols == 0:
            return 1.0
        cached = memo.get(cols)
        if cached is not None:
            return cached
        row = rows[k - bin(cols).count("1")]
        sign = 1.0
        acc = 0.0
        rest = cols
        while rest:
            low = rest & -rest
            entry = row[low.bit_length() - 1]
            if entry != 0.0:
                acc += sign * entry * expand(cols ^ low)
            sign = -sign
            rest ^= low
        memo[cols] = acc
        return acc

    return expand((1 << k) - 1)


def det_naive(matrix) -> float:
    """Cofactor-expansion determinant for k x k matrices, k <= 8."""
    rows = [[float(x) for x in row] for row in matrix]
    k = len(rows)
    if any(len(row) != k for row in rows):
        raise ValueError("det_naive needs a square matrix")
    if k > DET_NAIVE_CAP:
        raise TooLarge(f"det_naive accepts k <= {DET_NAIVE_CAP}, got {k}")
    if k == 0:
        return 1.0
    return _det_cofactor(rows)


def _principal_minor(entries, indices: list[int]) -> float:
    sub = [[float(entries[i][j]) for j in indices] for i in indices]
    return _det_cofactor(sub) if sub else 1.0


def atom_probability_ie(K: MarginalKernel, J: int) -> float:
    """Exact-set probability by inclusion-exclusion over complement subsets."""
    n = K.n
    if n > IE_GROUND_SET_CAP:
        raise GroundSetTooLarge(
            f"inclusion-exclusion oracle accepts n <= {IE_GROUND_SET_CAP}, got {n}"
        )
    if J < 0 or J >> n:
        raise ValueError(f"subset mask {J:#x} does not fit a ground set of size {n}")
    entries = K.entries
    jbar = ((1 << n) - 1) & ~J
    total = 0.0
    T = jbar
    while True:
        union = J | T
        indices = [i for i in range(n) if (union >> i) & 1]
        term = _principal_minor(entries, indices)
        if bin(T).count("1") % 2:
            total -= term
        else:
            total += term
        if T == 0:
            break
        T = (T - 1) & jbar
    return total


def distances(q: DiscreteDistribution, p: DiscreteDistribution) -> DistanceReport:
    """Exact l1 (total variation) and chi-squared distances, q against p."""
    if q.n != p.n:
        raise DimensionMismatch(f"tables over different ground sets: {q.n} vs {p.n}")
    abs_sum = 0.0
    chi2 = 0.0
    zero_support = 0
    for qs, ps in zip(q.probs.tolist(), p.probs.tolist()):
        abs_sum += abs(qs - ps)
        if ps > 0.0:
            chi2 += (qs - ps) ** 2 / ps
        elif qs > 0.0:
            zero_support += 1
    l1 = abs_sum / 2.0
    if zero_support:
        chi2 = math.inf
    if math.isfinite(chi2):
        assert chi2 >= 2.0 * l1 * l1 - _CHI2_L1_SLACK, (
            f"chi2={chi2!r} below 2*l1^2 with l1={l1!r}"
        )
    return DistanceReport(l1=l1, chi2=chi2, zero_support_atoms=zero_support)
