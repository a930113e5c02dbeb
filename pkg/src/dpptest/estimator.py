"""Learning half of the pipeline: entry estimates and the candidate grid.

From samples of an unknown DPP we can estimate singleton and pair
containment marginals by counting. Those determine each off-diagonal
entry only up to sign:

    K_ii  ~  fraction of samples containing i
    u_ij  ~  fraction containing both i and j,  with  u_ij = K_ii K_jj - K_ij^2

so |K_ij| is estimated by Kplus = sqrt(max(K_ii_hat * K_jj_hat - u_ij_hat, 0)).
Rather than recover signs, the grid covers both: candidate values for
entry (i, j) are midpoints of `brackets` equal subintervals of the two
confidence intervals [Kplus - w, Kplus + w] and [-Kplus - w, -Kplus + w],
plus the standalone value 0 for the true-zero case. Diagonal entries get
midpoints of ceil(2*xi*eps / step) subintervals of [K_ii_hat +- xi*eps]
clipped to [0, 1]. Widths are chosen so that, on the usual Hoeffding
event, some combination of candidates lands within `step` of the truth
in every entry; the tester then tries them all.

Only the upper triangle is bracketed (the matrix is symmetric), so the
candidate count |M| is the product of per-entry list lengths over
i <= j. |M| is combinatorial; the grid is never materialized as
matrices. enumerate_candidates streams them lazily in a fixed
lexicographic order and supports index-range sharding, so parallel
consumers can split the stream and their union is exhaustive and
duplicate-free.

Candidate values within a list are ordered zero-first, then by
increasing magnitude (positive before negative on ties), which puts the
sparsest matrices at the front of the stream. Exact float collisions
between the two sign intervals (they occur precisely when Kplus == 0.0)
are deduplicated; the list stays odd-sized and 0 stays in it.
"""

from __future__ import annotations

import math
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from .errors import (
    CandidateBudgetExceeded,
    DegenerateZeta,
    DimensionMismatch,
    EmptyBatch,
)
from .kernel import MarginalKernel, project_box
from .sampler import SampleBatch

DEFAULT_CANDIDATE_CAP = 10**6

# Memory guard for a single entry's materialized list; |M| caps don't
# bound per-list length once an override is in play.
_PER_LIST_CAP = 1 << 21

_COUNT_CHUNK = 1 << 20


@dataclass(frozen=True)
class EmpiricalMarginals:
    """Counting estimates: diag[i] of P(i in J), pair[i, j] of P({i,j} in J)."""

    diag: np.ndarray
    pair: np.ndarray
    m: int

    def __post_init__(self) -> None:
        diag = np.asarray(self.diag, dtype=float).copy()
        pair = np.asarray(self.pair, dtype=float).copy()
        n = len(diag)
        if pair.shape != (n, n):
            raise DimensionMismatch(f"pair matrix shape {pair.shape} vs n={n}")
        if np.abs(pair - pair.T).max(initial=0.0) > 1e-12:
            raise ValueError("pair matrix must be symmetric")
        if diag.min(initial=0.0) < 0.0 or diag.max(initial=0.0) > 1.0:
            raise ValueError("singleton marginal outside [0, 1]")
        cap = np.minimum.outer(diag, diag)
        if (pair - cap).max(initial=0.0) > 1e-12:
            raise ValueError("pair marginal exceeds its singleton marginals")
        diag.flags.writeable = False
        pair.flags.writeable = False
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "pair", pair)

    @property
    def n(self) -> int:
        return len(self.diag)


@dataclass(frozen=True)
class BracketingParams:
    """Sample budget and bracketing geometry for one (n, eps, delta, alpha,
    zeta) configuration; `half_width` is the off-diagonal interval radius w."""

    n: int
    m: int
    xi: float
    step: float
    brackets: int
    half_width: float
    eps: float
    delta: float
    alpha: float
    zeta: float

    def __post_init__(self) -> None:
        if self.brackets < 1 or self.step <= 0.0 or self.xi <= 0.0:
            raise ValueError("degenerate bracketing parameters")


@dataclass(frozen=True)
class CandidateGrid:
    """Per-entry candidate values for the upper triangle, plus |M|.

    entries[k] = (i, j) with i <= j in row-major order; values[k] is the
    ordered candidate list for that entry. total_count multiplies the
    list lengths and can be astronomically large; nothing here scales
    with it.
    """

    n: int
    entries: tuple[tuple[int, int], ...]
    values: tuple[tuple[float, ...], ...]
    total_count: int
    brackets: int

    def __post_init__(self) -> None:
        if len(self.entries) != len(self.values):
            raise DimensionMismatch("entry/value lists misaligned")
        expect = math.prod(len(v) for v in self.values)
        if expect != self.total_count:
            raise ValueError("total_count does not match the list lengths")


def empirical_marginals(batch: SampleBatch) -> EmpiricalMarginals:
    """Singleton and pair containment frequencies from a sample batch."""
    m = batch.m
    if m == 0:
        raise EmptyBatch("cannot estimate marginals from zero samples")
    n = batch.n
    counts = np.zeros((n, n))
    for start in range(0, m, _COUNT_CHUNK):
        chunk = batch.subsets[start : start + _COUNT_CHUNK]
        bits = ((chunk[:, None] >> np.arange(n)[None, :]) & 1).astype(float)
        counts += bits.T @ bits
    pair = counts / m
    pair = (pair + pair.T) / 2.0
    return EmpiricalMarginals(diag=np.diag(pair).copy(), pair=pair, m=m)


def magnitude_estimates(em: EmpiricalMarginals) -> tuple[np.ndarray, np.ndarray]:
    """Off-diagonal magnitude estimates (Kplus, Kminus = -Kplus).

    Kplus[i, j] = sqrt(max(diag[i]*diag[j] - pair[i, j], 0)); diagonal
    cells are 0 (they are not pairs).
    """
    outer = np.outer(em.diag, em.diag)
    kplus = np.sqrt(np.maximum(outer - em.pair, 0.0))
    np.fill_diagonal(kplus, 0.0)
    return kplus, -kplus


def bracketing_params(
    n: int,
    eps: float,
    delta: float,
    alpha: float,
    zeta: float,
    *,
    xi: float | None = None,
) -> BracketingParams:
    """Sample budget m, interval scale xi, grid step, and bracket count.

    The keyword-only `xi` override replaces the formula value (used by
    experiments that force a tiny bracket count); everything downstream
    of xi still comes out of the unmodified formulas. alpha = 0 drops
    the 2*xi/alpha branch of the min (treated as +inf).
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    if zeta == 0.0:
        raise DegenerateZeta("zeta = 0 leaves the bracket count undefined")
    if not 0.0 < zeta <= 0.5:
        raise ValueError(f"zeta must be in (0, 0.5], got {zeta}")
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    sqrt_n_atoms = math.sqrt(2.0**n)
    m = math.ceil((math.log(1.0 / delta) + 1.0) * sqrt_n_atoms / eps**2)
    if xi is None:
        xi = 2.0 ** (-n / 4.0) * math.sqrt(math.log(n) + 1.0)
    elif xi <= 0.0:
        raise ValueError(f"xi override must be positive, got {xi}")
    step = eps * zeta / (100.0 * n * n)
    branch = math.sqrt(xi / eps)
    if alpha > 0.0:
        branch = min(branch, 2.0 * xi / alpha)
    brackets = math.ceil(200.0 * n * n / zeta * branch)
    half_width = 2.0 * eps * branch
    return BracketingParams(
        n=n,
        m=m,
        xi=float(xi),
        step=step,
        brackets=brackets,
        half_width=half_width,
        eps=eps,
        delta=delta,
        alpha=alpha,
        zeta=zeta,
    )


def _midpoints(lo: float, hi: float, pieces: int) -> list[float]:
    lo, hi = float(lo), float(hi)
    width = (hi - lo) / pieces
    return [lo + (2 * k - 1) * width / 2.0 for k in range(1, pieces + 1)]


def _order_candidates(values) -> tuple[float, ...]:
    uniq = sorted(set(float(v) for v in values), key=lambda v: (v != 0.0, abs(v), v < 0.0))
    return tuple(uniq)


def candidate_grid(
    em: EmpiricalMarginals,
    bp: BracketingParams,
    *,
    cap: int = DEFAULT_CANDIDATE_CAP,
    allow_over_cap: bool = False,
    zero_floor: float = 0.0,
) -> CandidateGrid:
    """Build per-entry candidate lists around the estimated entries.

    zero_floor > 0 collapses any off-diagonal entry whose magnitude
    estimate falls below it to the single candidate 0. That is sound
    when the ground truth is (alpha, zeta)-normal with alpha >= 2 *
    zero_floor: true entries are either 0 or at least alpha in
    magnitude, so a sub-floor estimate identifies a zero. It keeps |M|
    tractable at n = 6; pass 0 (the default) for the unpruned grid.
    """
    if em.n != bp.n:
        raise DimensionMismatch(f"marginals for n={em.n}, params for n={bp.n}")
    n = em.n
    xi_eps = bp.xi * bp.eps
    diag_pieces = math.ceil(2.0 * xi_eps / bp.step)
    if max(diag_pieces, 2 * bp.brackets + 1) > _PER_LIST_CAP:
        raise CandidateBudgetExceeded(
            f"a single entry would carry more than {_PER_LIST_CAP} candidates"
        )
    kplus, _ = magnitude_estimates(em)
    entries: list[tuple[int, int]] = []
    values: list[tuple[float, ...]] = []
    for i in range(n):
        for j in range(i, n):
            if i == j:
                lo = max(0.0, em.diag[i] - xi_eps)
                hi = min(1.0, em.diag[i] + xi_eps)
                vals = tuple(_midpoints(lo, hi, diag_pieces))
            else:
                mag = float(kplus[i, j])
                if zero_floor > 0.0 and mag < zero_floor:
                    vals = (0.0,)
                else:
                    w = bp.half_width
                    plus = _midpoints(mag - w, mag + w, bp.brackets)
                    minus = _midpoints(-mag - w, -mag + w, bp.brackets)
                    vals = _order_candidates([0.0, *plus, *minus])
            entries.append((i, j))
            values.append(vals)
    total = math.prod(len(v) for v in values)
    if total > cap and not allow_over_cap:
        raise CandidateBudgetExceeded(
            f"|M| = {total} exceeds the cap {cap}; pass allow_over_cap to proceed"
        )
    return CandidateGrid(
        n=n,
        entries=tuple(entries),
        values=tuple(values),
        total_count=total,
        brackets=bp.brackets,
    )


def _matrix_from_digits(grid: CandidateGrid, digits: list[int]) -> np.ndarray:
    mat = np.zeros((grid.n, grid.n))
    for (i, j), d, vals in zip(grid.entries, digits, grid.values):
        mat[i, j] = vals[d]
        mat[j, i] = vals[d]
    return mat


def enumerate_candidates(
    grid: CandidateGrid,
    *,
    start: int = 0,
    stop: int | None = None,
    cap: int = DEFAULT_CANDIDATE_CAP,
    allow_over_cap: bool = False,
) -> Iterator[MarginalKernel]:
    """Stream candidate kernels project_box(raw, 0) in index order.

    The stream is lexicographic over (entry index, candidate index):
    candidate t has digit vector d with t = sum of d_k * prod of list
    lengths after k, so the last entry cycles fastest. [start, stop)
    selects a shard; shards partition the full stream.
    """
    if grid.total_count > cap and not allow_over_cap:
        raise CandidateBudgetExceeded(
            f"|M| = {grid.total_count} exceeds the cap {cap}; "
            "pass allow_over_cap to proceed"
        )
    total = grid.total_count
    stop = total if stop is None else min(stop, total)
    if start < 0 or start > total:
        raise ValueError(f"start {start} outside [0, {total}]")
    if start >= stop:
        return
    lengths = [len(v) for v in grid.values]
    digits = []
    rem = start
    for length in reversed(lengths):
        digits.append(rem % length)
        rem //= length
    digits.reverse()
    for _ in range(start, stop):
        yield project_box(_matrix_from_digits(grid, digits), 0.0)
        for k in range(len(digits) - 1, -1, -1):
            digits[k] += 1
            if digits[k] < lengths[k]:
                break
            digits[k] = 0


def grid_to_json_dict(grid: CandidateGrid) -> dict:
    """Audit dump: per-entry candidate arrays plus |M|."""
    return {
        "n": grid.n,
        "brackets": grid.brackets,
        "total_count": grid.total_count,
        "entries": [
            {"i": i, "j": j, "values": [float(v) for v in vals]}
            for (i, j), vals in zip(grid.entries, grid.values)
        ],
    }
