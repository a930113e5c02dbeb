"""The chi-square/L1 identity test and the full tester loop.

Given m samples with per-subset counts N(J) and a candidate table p, the
statistic

    Z = sum over J with p(J) >= eps/(50*2^n) of
        ((N(J) - m*p(J))^2 - N(J)) / (m*p(J))

concentrates near m * chi2(q, p) over the cutoff set minus the cutoff
mass (each exactly-proportional count contributes -1), so comparing it
with the threshold C = m * eps^2 / 10 separates chi2(q, p) <= eps^2/500
from l1(q, p) >= eps. Ties reject: the accept condition is strictly
Z < C, keeping the conservative side of the boundary.

The tester splits its batch in half (first half learns, second half
tests), builds the candidate grid from the learning half, and runs the
identity test against every enumerated candidate, accepting on the
first candidate that passes and rejecting only after all candidates
fail. The sample budget is the single-test budget amplified by
log(candidate count), scaled by the config constant c_test.

General mode covers arbitrary DPPs by deriving the clamping level
z_bar = 0.005 / (2 * m_star * n) from the general-mode sample budget
m_star and re-running the normal-mode tester at (alpha, zeta) = (0, z_bar):
clamping the unknown kernel's spectrum into [z_bar, 1 - z_bar] moves it
by so little that the clamped and unclamped DPPs are statistically
indistinguishable at this sample size (the coupling argument), so the
verdicts agree by construction.

Config constants: C_TEST_DEFAULT scales the amplified sample budget;
C1_DEFAULT and C2_DEFAULT parameterize the general-mode budget, with
c2_lower_bound giving the supported floor for c2 in terms of c1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateZ, DimensionMismatch, GroundSetTooLarge, InsufficientSamples
from .estimator import (
    DEFAULT_CANDIDATE_CAP,
    bracketing_params,
    candidate_grid,
    empirical_marginals,
    enumerate_candidates,
    magnitude_estimates,
)
from .kernel import GROUND_SET_CAP, DiscreteDistribution, exact_distribution
from .sampler import SampleBatch

C_TEST_DEFAULT = 1.0
C1_DEFAULT = 1.0
C2_DEFAULT = 23.0


@dataclass(frozen=True)
class SubsetCounts:
    """Per-subset sample counts N(J), indexed by mask; m = total draws."""

    n: int
    counts: np.ndarray
    m: int

    def __post_init__(self) -> None:
        arr = np.asarray(self.counts, dtype=np.int64).copy()
        if arr.shape != (1 << self.n,):
            raise DimensionMismatch(
                f"expected {1 << self.n} count cells for n={self.n}, got {arr.shape}"
            )
        if arr.min(initial=0) < 0:
            raise ValueError("negative count")
        if int(arr.sum()) != self.m:
            raise ValueError(f"counts sum to {int(arr.sum())}, m says {self.m}")
        arr.flags.writeable = False
        object.__setattr__(self, "counts", arr)

    @classmethod
    def from_batch(cls, batch: SampleBatch) -> "SubsetCounts":
        if batch.n > GROUND_SET_CAP:
            raise GroundSetTooLarge(f"n={batch.n} exceeds the table cap {GROUND_SET_CAP}")
        counts = np.bincount(batch.subsets, minlength=1 << batch.n)
        return cls(n=batch.n, counts=counts, m=batch.m)


@dataclass(frozen=True)
class TestVerdict:
    """accept/reject with the statistic, threshold, and firing candidate.

    For accept, statistic/candidate_index describe the candidate that
    passed; for reject they describe the best (lowest-Z) candidate seen.
    m is the number of samples behind the statistic.
    """

    decision: str
    statistic: float
    threshold: float
    candidate_index: int | None
    m: int

    def __post_init__(self) -> None:
        if self.decision not in ("accept", "reject"):
            raise ValueError(f"decision must be accept|reject, got {self.decision!r}")
        if (self.decision == "accept") != (self.statistic < self.threshold):
            raise ValueError("decision inconsistent with statistic vs threshold")

    @property
    def accepted(self) -> bool:
        return self.decision == "accept"


@dataclass(frozen=True)
class NormalMode:
    """Tester mode for (alpha, zeta)-normal DPPs."""

    alpha: float
    zeta: float


@dataclass(frozen=True)
class GeneralMode:
    """Tester mode for arbitrary DPPs; derives (0, z_bar) internally."""

    c2: float = C2_DEFAULT


@dataclass(frozen=True)
class GeneralModeParams:
    m_star: int
    z_bar: float


def chi2_l1_statistic(counts: SubsetCounts, p: DiscreteDistribution, eps: float) -> float:
    """Z over the cutoff set {J : p(J) >= eps / (50 * 2^n)}.

    Subsets below the cutoff contribute nothing even when observed.
    """
    if counts.n != p.n:
        raise DimensionMismatch(f"counts over n={counts.n}, table over n={p.n}")
    if counts.m < 1:
        raise ValueError("need at least one sample")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    cutoff = eps / (50.0 * (1 << p.n))
    sel = p.probs >= cutoff
    mp = counts.m * p.probs[sel]
    nj = counts.counts[sel].astype(float)
    return float((((nj - mp) ** 2 - nj) / mp).sum())


def chi2_l1_test(counts: SubsetCounts, p: DiscreteDistribution, eps: float) -> TestVerdict:
    """Accept iff Z < C = m * eps^2 / 10 (ties reject)."""
    z = chi2_l1_statistic(counts, p, eps)
    threshold = counts.m * eps * eps / 10.0
    decision = "accept" if z < threshold else "reject"
    return TestVerdict(
        decision=decision,
        statistic=z,
        threshold=threshold,
        candidate_index=None,
        m=counts.m,
    )


def required_samples(
    n: int, eps: float, delta: float, candidate_count: int, *, c_test: float = C_TEST_DEFAULT
) -> int:
    """Amplified sample budget for testing against candidate_count hypotheses."""
    if candidate_count < 1:
        raise ValueError(f"candidate_count must be >= 1, got {candidate_count}")
    if c_test <= 0.0:
        raise ValueError(f"c_test must be positive, got {c_test}")
    base = math.ceil((math.log(1.0 / delta) + 1.0) * math.sqrt(2.0**n) / eps**2)
    amplify = max(1, math.ceil(math.log(1 + candidate_count)))
    return math.ceil(base * amplify * c_test)


def c2_lower_bound(c1: float = C1_DEFAULT) -> float:
    """Supported floor for the general-mode constant: c1*max{23, 2 ln(c1) + 23}."""
    if c1 <= 0.0:
        raise ValueError(f"c1 must be positive, got {c1}")
    return c1 * max(23.0, 2.0 * math.log(c1) + 23.0)


def general_mode_params(n: int, eps: float, c2: float = C2_DEFAULT) -> GeneralModeParams:
    """General-mode budget m* and clamping level z_bar = 0.005/(2 m* n)."""
    if c2 <= 0.0:
        raise ValueError(f"c2 must be positive, got {c2}")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    n_atoms = 2.0**n
    c_factor = math.log(n_atoms) ** 2 * (math.log(n_atoms) + math.log(1.0 / eps))
    m_star = math.ceil(c2 * c_factor * math.sqrt(n_atoms) / eps**2)
    z_bar = 0.005 / (2.0 * m_star * n)
    # Unreachable for m_star >= 1, n >= 1; kept as the stated contract.
    if z_bar >= 0.5:
        raise DegenerateZ(f"z_bar = {z_bar} >= 0.5")
    return GeneralModeParams(m_star=m_star, z_bar=z_bar)


def dpp_tester(
    samples: SampleBatch,
    eps: float,
    delta: float,
    mode: NormalMode | GeneralMode,
    *,
    c_test: float = C_TEST_DEFAULT,
    candidate_cap: int = DEFAULT_CANDIDATE_CAP,
    allow_over_cap: bool = False,
    xi: float | None = None,
    zero_floor: float | None = None,
) -> TestVerdict:
    """Full tester: learn a candidate grid, test every candidate, first
    acceptance wins.

    The batch is split in half: the first half estimates marginals, the
    second half feeds the identity test. zero_floor defaults to alpha/2
    in normal mode with alpha > 0 (see candidate_grid) and to off
    otherwise. The required batch size is checked against the actual
    enumerated candidate count.

    Normal mode with alpha > 0 carries a structural guard: a kernel with
    spectrum in [zeta, 1-zeta] has off-diagonal Frobenius mass at most
    n * (1/2 - zeta)^2, so at most that over 2*alpha^2 off-diagonal
    pairs can be nonzero. When more magnitude estimates clear the zero
    floor than any normal kernel could support, no candidate is
    marginal-consistent with the data and the tester rejects without
    enumerating. An in-class input trips this only through estimation
    noise pushing true zeros past the floor.
    """
    n = samples.n
    if isinstance(mode, GeneralMode):
        alpha, zeta = 0.0, general_mode_params(n, eps, mode.c2).z_bar
    else:
        alpha, zeta = mode.alpha, mode.zeta
    m_total = samples.m
    m_learn = m_total // 2
    m_test = m_total - m_learn
    if m_learn < 1 or m_test < 1:
        raise InsufficientSamples(f"batch of {m_total} cannot be split for learn+test")
    learn = SampleBatch(n=n, subsets=samples.subsets[:m_learn], seed=samples.seed)
    test = SampleBatch(n=n, subsets=samples.subsets[m_learn:], seed=samples.seed)
    bp = bracketing_params(n, eps, delta, alpha, zeta, xi=xi)
    em = empirical_marginals(learn)
    if zero_floor is None:
        zero_floor = alpha / 2.0 if alpha > 0.0 else 0.0
    if alpha > 0.0 and zero_floor > 0.0:
        kplus, _ = magnitude_estimates(em)
        above = sum(
            1 for i in range(n) for j in range(i + 1, n) if kplus[i, j] >= zero_floor
        )
        pair_budget = math.floor(n * (0.5 - zeta) ** 2 / (2.0 * alpha * alpha))
        if above > pair_budget:
            return TestVerdict(
                decision="reject",
                statistic=math.inf,
                threshold=m_test * eps * eps / 10.0,
                candidate_index=None,
                m=m_test,
            )
    grid = candidate_grid(
        em, bp, cap=candidate_cap, allow_over_cap=allow_over_cap, zero_floor=zero_floor
    )
    needed = required_samples(n, eps, delta, grid.total_count, c_test=c_test)
    if m_total < needed:
        raise InsufficientSamples(
            f"batch has {m_total} samples; {needed} required for "
            f"{grid.total_count} candidates at eps={eps}, delta={delta}"
        )
    counts = SubsetCounts.from_batch(test)
    threshold = m_test * eps * eps / 10.0
    best_z = math.inf
    best_idx: int | None = None
    for idx, cand in enumerate(
        enumerate_candidates(grid, cap=candidate_cap, allow_over_cap=True)
    ):
        z = chi2_l1_statistic(counts, exact_distribution(cand), eps)
        if z < best_z:
            best_z = z
            best_idx = idx
        if z < threshold:
            return TestVerdict(
                decision="accept",
                statistic=z,
                threshold=threshold,
                candidate_index=idx,
                m=m_test,
            )
    return TestVerdict(
        decision="reject",
        statistic=best_z,
        threshold=threshold,
        candidate_index=best_idx,
        m=m_test,
    )
