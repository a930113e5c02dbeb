"""Perturbed-uniform hard instances and a log-submodularity toolkit.

The instance family: draw an i.i.d. sign r_S in {+1, -1} for every
subset mask S and perturb the uniform measure,

    hbar_r(S) = (1 + r_S * eps_prime) / N,   N = 2^n,
    h_r = hbar_r / L_r,                      L_r = sum of hbar_r.

Such an h_r is far from every log-submodular distribution once enough
witnesses appear: a witness is a base set S avoiding elements 1 and 2
whose signs satisfy r_{S u {1,2}} = +1, r_{S u {1}} = -1, r_{S u {2}} = -1.
On each witness quadruple, any log-submodular f must concede an l1
contribution V_S of at least eps_prime / (8N), which a scalar helper
inequality (|1 + eps' - a| + |1 - eps' - b| >= eps'/4 whenever
a / b <= rho = (1 + eps') / (1 - 3 eps'/4)) drives.

Log-submodularity itself is checked through the pairwise product form

    f(S u {i,j}) * f(S) <= f(S u {i}) * f(S u {j})

for all S and distinct i, j outside S, which avoids logs and is robust
to exact zeros in the table (0 * x <= y * z handles itself). DPP tables
and product measures both satisfy it, and generators for random members
of each family live here for distance sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    EpsilonPrimeOutOfRange,
    FamilyMemberNotLogSubmodular,
    NotWitness,
    PreconditionViolated,
)
from .kernel import DiscreteDistribution, exact_distribution, project_box
from .oracle import distances

_BOUND_TOL = 1e-12
_LSM_REL_TOL = 1e-12


@dataclass(frozen=True)
class HardInstance:
    """One drawn sign vector with its perturbed-uniform tables."""

    n: int
    eps_prime: float
    r: np.ndarray
    seed: int | None = None
    hbar: np.ndarray = field(init=False, repr=False, compare=False)
    l_r: float = field(init=False, repr=False, compare=False)
    h: DiscreteDistribution = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"need n >= 2, got {self.n}")
        if not 0.0 < self.eps_prime <= 2.0 / 3.0:
            raise EpsilonPrimeOutOfRange(
                f"eps_prime must be in (0, 2/3], got {self.eps_prime}"
            )
        r = np.asarray(self.r, dtype=np.int8).copy()
        size = 1 << self.n
        if r.shape != (size,):
            raise DimensionMismatch(f"need {size} signs for n={self.n}, got {r.shape}")
        if not np.all(np.abs(r) == 1):
            raise ValueError("signs must be +1 or -1")
        r.flags.writeable = False
        object.__setattr__(self, "r", r)
        hbar = (1.0 + r * self.eps_prime) / size
        hbar.flags.writeable = False
        object.__setattr__(self, "hbar", hbar)
        # Exact form of sum(hbar): keeps the normalizer reproducible.
        l_r = 1.0 + self.eps_prime * int(r.sum(dtype=np.int64)) / size
        object.__setattr__(self, "l_r", float(l_r))
        object.__setattr__(
            self, "h", DiscreteDistribution(n=self.n, probs=hbar / l_r)
        )


@dataclass(frozen=True)
class WitnessSet:
    """Masks S (excluding elements 1 and 2) whose quadruple signs match."""

    n: int
    masks: np.ndarray

    def __post_init__(self) -> None:
        masks = np.asarray(self.masks, dtype=np.int64).copy()
        if len(masks) and np.any(masks & 3):
            raise ValueError("witness masks must exclude elements 1 and 2")
        masks.flags.writeable = False
        object.__setattr__(self, "masks", masks)

    @property
    def cardinality(self) -> int:
        return len(self.masks)

    def __contains__(self, mask: int) -> bool:
        return bool(np.any(self.masks == mask))


def rho(eps_prime: float) -> float:
    """Ratio bound (1 + eps') / (1 - 3 eps'/4) of the helper inequality."""
    if not 0.0 < eps_prime <= 2.0 / 3.0:
        raise EpsilonPrimeOutOfRange(f"eps_prime must be in (0, 2/3], got {eps_prime}")
    return (1.0 + eps_prime) / (1.0 - 0.75 * eps_prime)


def hard_instance(n: int, eps_prime: float, seed: int) -> HardInstance:
    """Draw the sign vector from the seed and build the instance."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if not 0.0 < eps_prime <= 2.0 / 3.0:
        raise EpsilonPrimeOutOfRange(f"eps_prime must be in (0, 2/3], got {eps_prime}")
    gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    r = (gen.integers(0, 2, size=1 << n, dtype=np.int8) * 2 - 1).astype(np.int8)
    return HardInstance(n=n, eps_prime=eps_prime, r=r, seed=seed)


def hard_instance_from_signs(n: int, eps_prime: float, r) -> HardInstance:
    """Build an instance from an explicit sign vector (no seed recorded)."""
    return HardInstance(n=n, eps_prime=eps_prime, r=np.asarray(r, dtype=np.int8))


def witness_set(inst: HardInstance) -> WitnessSet:
    """Enumerate every witness base set of the instance."""
    n = inst.n
    base = np.arange(1 << (n - 2), dtype=np.int64) << 2
    r = inst.r
    hit = (r[base | 3] == 1) & (r[base | 1] == -1) & (r[base | 2] == -1)
    return WitnessSet(n=n, masks=base[hit])


def is_witness(inst: HardInstance, S: int) -> bool:
    """Membership check straight from the sign conditions."""
    if S < 0 or S >> inst.n or (S & 3):
        return False
    r = inst.r
    return bool(r[S | 3] == 1 and r[S | 1] == -1 and r[S | 2] == -1)


@dataclass(frozen=True)
class HelperReport:
    lhs: float
    holds: bool


def helper_inequality(a: float, b: float, eps_prime: float) -> HelperReport:
    """|1 + eps' - a| + |1 - eps' - b| >= eps'/4, valid whenever a/b <= rho."""
    bound_ratio = rho(eps_prime)
    if a < 0.0 or b < 0.0:
        raise ValueError(f"a and b must be nonnegative, got a={a}, b={b}")
    if b == 0.0:
        if a > 0.0:
            raise PreconditionViolated("a/b undefined: b = 0 with a > 0")
    elif a / b > bound_ratio * (1.0 + 1e-12):
        raise PreconditionViolated(
            f"a/b = {a / b:.6g} exceeds rho = {bound_ratio:.6g}"
        )
    lhs = abs(1.0 + eps_prime - a) + abs(1.0 - eps_prime - b)
    return HelperReport(lhs=lhs, holds=bool(lhs >= eps_prime / 4.0 - _BOUND_TOL))


@dataclass(frozen=True)
class VsReport:
    v_s: float
    bound_holds: bool


def vs_contribution(f: DiscreteDistribution, inst: HardInstance, S: int) -> VsReport:
    """Four-term l1 contribution of the witness quadruple of S against f.

    V_S sums half the deviations |hbar(X) - f(X)| over X in {S, S u {1},
    S u {2}, S u {1,2}} (unnormalized hbar, matching the construction).
    bound_holds compares against eps_prime / (8N); the bound is only
    guaranteed for log-submodular f.
    """
    if f.n != inst.n:
        raise DimensionMismatch(f"table over n={f.n}, instance over n={inst.n}")
    if not is_witness(inst, S):
        raise NotWitness(f"mask {S:#x} is not a witness of this instance")
    hbar = inst.hbar
    probs = f.probs
    v_s = 0.5 * sum(
        abs(float(hbar[S | t]) - float(probs[S | t])) for t in (0, 1, 2, 3)
    )
    size = 1 << inst.n
    bound = inst.eps_prime / (8.0 * size)
    return VsReport(v_s=v_s, bound_holds=bool(v_s >= bound - _BOUND_TOL))


def is_log_submodular(f: DiscreteDistribution, *, rel_tol: float = _LSM_REL_TOL) -> bool:
    """Pairwise check f(S|ij) * f(S) <= f(S|i) * f(S|j) over all S, i < j not in S.

    Comparisons carry a multiplicative rel_tol plus an absolute floor of
    rel_tol * max(f)^2, absorbing determinant-level noise in exact DPP
    tables without masking real violations.
    """
    n = f.n
    probs = f.probs
    all_masks = np.arange(1 << n, dtype=np.int64)
    floor = rel_tol * float(probs.max(initial=0.0)) ** 2
    for i in range(n):
        bi = 1 << i
        for j in range(i + 1, n):
            bj = 1 << j
            base = all_masks[(all_masks & (bi | bj)) == 0]
            lhs = probs[base | bi | bj] * probs[base]
            rhs = probs[base | bi] * probs[base | bj]
            if np.any(lhs > rhs + np.maximum(rel_tol * rhs, floor)):
                return False
    return True


def l1_to_log_submodular_lb(inst: HardInstance, family) -> float:
    """Exact minimum l1(h_r, f) over a family of log-submodular tables.

    An upper bound on the instance's true distance to the whole class;
    every member is re-checked and must pass is_log_submodular.
    """
    family = list(family)
    if not family:
        raise ValueError("family must contain at least one distribution")
    best = np.inf
    for k, f in enumerate(family):
        if not is_log_submodular(f):
            raise FamilyMemberNotLogSubmodular(f"family member {k} fails the check")
        best = min(best, distances(inst.h, f).l1)
    return float(best)


def random_dpp_table(n: int, seed: int, *, spread: float = 0.5) -> DiscreteDistribution:
    """Exact table of a random kernel: project_box of a scaled GOE bump at I/2."""
    gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    raw = gen.normal(size=(n, n))
    sym = (raw + raw.T) / 2.0
    bump = spread * sym / (2.0 * np.sqrt(n))
    return exact_distribution(project_box(0.5 * np.eye(n) + bump, 0.0))


def random_product_table(
    n: int, seed: int, *, margin: float = 0.05
) -> DiscreteDistribution:
    """Product measure with independent P(i in J) = lam_i ~ U[margin, 1-margin]."""
    if not 0.0 <= margin < 0.5:
        raise ValueError(f"margin must be in [0, 0.5), got {margin}")
    gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    lam = gen.uniform(margin, 1.0 - margin, size=n)
    probs = np.ones(1)
    for i in range(n):
        probs = np.concatenate([probs * (1.0 - lam[i]), probs * lam[i]])
    return DiscreteDistribution(n=n, probs=probs)


def hard_instance_to_json_dict(inst: HardInstance) -> dict:
    """Dump {n, eps_prime, seed, L_r, r-as-bitstring}; '1' means +1, index = mask."""
    bits = "".join("1" if s == 1 else "0" for s in inst.r.tolist())
    return {
        "n": inst.n,
        "eps_prime": inst.eps_prime,
        "seed": inst.seed,
        "L_r": inst.l_r,
        "r": bits,
    }


def hard_instance_from_json_dict(obj: dict) -> HardInstance:
    n = int(obj["n"])
    bits = obj["r"]
    if len(bits) != 1 << n:
        raise DimensionMismatch(f"bitstring length {len(bits)} but n={n}")
    r = np.array([1 if c == "1" else -1 for c in bits], dtype=np.int8)
    seed = obj.get("seed")
    inst = HardInstance(
        n=n,
        eps_prime=float(obj["eps_prime"]),
        r=r,
        seed=None if seed is None else int(seed),
    )
    stored = float(obj["L_r"])
    if stored != inst.l_r:
        raise ValueError(f"stored L_r {stored!r} does not match recomputed {inst.l_r!r}")
    return inst
