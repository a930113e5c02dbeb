"""Randomized verification suites behind `dpptest verify-lemmas`.

Five suites, each drawing its own instances from a named seed and
returning a SuiteResult. The acceptance tests run them at full trial
counts; the CLI accepts smaller counts for a quick look. Every numeric
check records its slack (distance from the bound, negative = violation)
so a near-miss is visible even when the suite passes.

  min-singular      sigma_min(K - I_Jbar) >= zeta(1-zeta)/sqrt(2) over
                    every diagonal shift of spectrum-normal kernels
  det-perturbation  | |det(B+E)| - |det B| | against the spectral bound,
                    including exact equality at E = 0
  helper-inequality |1+e' - a| + |1-e' - b| >= e'/4 whenever a/b stays
                    below rho(e'), plus exactness at the boundary triple
  coupling          coupled-sampler pair equality vs the 1 - nz floor,
                    per-pair and per-batch, plus marginal fidelity of
                    both coordinates
  crosspath         exact atom tables vs both determinant routes and the
                    inclusion-exclusion oracle, normalization, subset
                    marginals, and log-submodularity of DPP tables
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import oracle
from .hardness import is_log_submodular, rho
from .kernel import (
    MarginalKernel,
    atom_probability,
    det_perturbation_bound,
    exact_distribution,
    marginal,
    min_singular_check,
    project_box,
    validate,
)
from .sampler import sample_coupled
from .subsets import supersets

_ATOL = 1e-8


@dataclass(frozen=True)
class SuiteResult:
    """Outcome of one verification suite."""

    name: str
    trials: int
    checks: int
    failures: int
    worst_slack: float
    detail: dict

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def summary_line(self) -> str:
        verdict = "pass" if self.passed else "FAIL"
        return (
            f"{self.name:<18} trials={self.trials:<8} checks={self.checks:<10} "
            f"failures={self.failures:<4} worst_slack={self.worst_slack:.3e}  {verdict}"
        )


class _Tally:
    def __init__(self) -> None:
        self.checks = 0
        self.failures = 0
        self.worst = math.inf

    def record(self, slack: float, *, tol: float = 0.0) -> None:
        """Count a failure when slack drops below -tol; keep the raw worst."""
        self.checks += 1
        if slack < self.worst:
            self.worst = slack
        if slack < -tol:
            self.failures += 1

    def record_bool(self, ok: bool) -> None:
        self.checks += 1
        if not ok:
            self.failures += 1
            self.worst = min(self.worst, -1.0)


def _random_normal_kernel(gen: np.random.Generator, n: int, zeta: float) -> MarginalKernel:
    """Spectrum uniform in [zeta, 1-zeta] (endpoints forced sometimes)."""
    q, _ = np.linalg.qr(gen.standard_normal((n, n)))
    style = int(gen.integers(3))
    if style == 0:
        w = gen.uniform(zeta, 1.0 - zeta, n)
    elif style == 1:
        w = np.where(gen.random(n) < 0.5, zeta, 1.0 - zeta)
    else:
        w = np.full(n, 0.5)
    return validate((q * w) @ q.T)


def run_min_singular_suite(
    trials: int = 1000, *, n_max: int = 8, seed: int = 0
) -> SuiteResult:
    gen = np.random.default_rng(np.random.SeedSequence((seed, 0x51)))
    tally = _Tally()
    for _ in range(trials):
        n = int(gen.integers(2, n_max + 1))
        zeta = float(gen.uniform(0.02, 0.49))
        K = _random_normal_kernel(gen, n, zeta)
        rep = min_singular_check(K, zeta)
        tally.record(rep.worst_sigma - rep.bound)
    return SuiteResult(
        name="min-singular",
        trials=trials,
        checks=tally.checks,
        failures=tally.failures,
        worst_slack=tally.worst,
        detail={"n_max": n_max},
    )


def run_det_perturbation_suite(
    trials: int = 100_000, *, n_max: int = 6, seed: int = 0
) -> SuiteResult:
    gen = np.random.default_rng(np.random.SeedSequence((seed, 0xDE)))
    tally = _Tally()
    zero_cases = 0
    for t in range(trials):
        n = int(gen.integers(1, n_max + 1))
        g = gen.standard_normal((n, n))
        B = (g + g.T) / 2.0
        if t % 10 == 0:
            E = np.zeros((n, n))
            rep = det_perturbation_bound(B, E)
            # zero perturbation must collapse both sides to exactly zero
            tally.record_bool(rep.lhs == 0.0 and rep.rhs == 0.0 and rep.holds)
            zero_cases += 1
            continue
        h = gen.standard_normal((n, n))
        scale = 10.0 ** gen.uniform(-6.0, 0.0)
        E = scale * (h + h.T) / 2.0
        rep = det_perturbation_bound(B, E)
        # tol matches the report's own slack: at tiny E the lhs is a
        # difference of two near-equal determinants and carries their
        # cancellation noise
        tally.record(rep.rhs - rep.lhs, tol=1e-9)
    return SuiteResult(
        name="det-perturbation",
        trials=trials,
        checks=tally.checks,
        failures=tally.failures,
        worst_slack=tally.worst,
        detail={"n_max": n_max, "zero_perturbation_cases": zero_cases},
    )


def run_helper_inequality_suite(trials: int = 1_000_000, *, seed: int = 0) -> SuiteResult:
    from .hardness import helper_inequality

    gen = np.random.default_rng(np.random.SeedSequence((seed, 0x4E)))
    tally = _Tally()
    eps_primes = gen.uniform(1e-6, 2.0 / 3.0, trials)
    ratios = gen.random(trials)
    bs = gen.uniform(1e-9, 2.0, trials)
    for ep, u, b in zip(eps_primes, ratios, bs):
        ep = float(ep)
        a = float(b) * rho(ep) * float(u)
        rep = helper_inequality(a, float(b), ep)
        tally.record(rep.lhs - ep / 4.0)
    boundary_worst = 0.0
    for ep in np.linspace(1e-4, 2.0 / 3.0, 997):
        ep = float(ep)
        rep = helper_inequality(1.0 + ep, 1.0 - 0.75 * ep, ep)
        gap = abs(rep.lhs - ep / 4.0)
        boundary_worst = max(boundary_worst, gap)
        tally.record(1e-12 - gap)
    return SuiteResult(
        name="helper-inequality",
        trials=trials,
        checks=tally.checks,
        failures=tally.failures,
        worst_slack=tally.worst,
        detail={"boundary_worst_gap": boundary_worst},
    )


def _coupling_kernel(gen: np.random.Generator, n: int) -> MarginalKernel:
    """Eigenvalues pinned to {0, 1} with a couple of interior values, so
    the z-clamp actually moves the spectrum."""
    q, _ = np.linalg.qr(gen.standard_normal((n, n)))
    w = np.where(gen.random(n) < 0.5, 0.0, 1.0)
    w[: max(1, n // 3)] = gen.uniform(0.2, 0.8, max(1, n // 3))
    return validate((q * w) @ q.T)


def run_coupling_suite(
    reps: int = 1000,
    *,
    n: int = 6,
    m: int = 100,
    delta: float = 0.1,
    marginal_draws: int = 200_000,
    marginal_l1_tol: float = 0.02,
    seed: int = 0,
) -> SuiteResult:
    gen = np.random.default_rng(np.random.SeedSequence((seed, 0xC0)))
    z = delta / (2.0 * m * n)
    tally = _Tally()
    unequal_pairs = 0
    bad_reps = 0
    for rep_idx in range(reps):
        K = _coupling_kernel(gen, n)
        batch = sample_coupled(K, z, m, int(gen.integers(2**62)))
        unequal = batch.m - batch.equal_count
        unequal_pairs += unequal
        if unequal:
            bad_reps += 1
    total_pairs = reps * m
    mean_unequal = total_pairs * n * z
    # 5-sigma allowances on top of the union bounds; the true rates sit
    # well below them, so these should never flake
    pair_budget = mean_unequal + 5.0 * math.sqrt(mean_unequal) + 5.0
    tally.record(pair_budget - unequal_pairs)
    rep_mean = reps * m * n * z
    rep_budget = rep_mean + 5.0 * math.sqrt(rep_mean) + 5.0
    tally.record(rep_budget - bad_reps)

    l1_first = l1_second = math.nan
    if marginal_draws > 0:
        # the tolerance is calibrated at 200k draws; widen it as 1/sqrt(m)
        # when a quick run uses fewer
        eff_tol = marginal_l1_tol * max(1.0, math.sqrt(200_000 / marginal_draws))
        K = _coupling_kernel(gen, n)
        big = sample_coupled(K, z, marginal_draws, int(gen.integers(2**62)))
        exact_first = exact_distribution(K)
        exact_second = exact_distribution(project_box(K.entries, z))
        size = 1 << n
        emp_first = np.bincount(big.first, minlength=size) / marginal_draws
        emp_second = np.bincount(big.second, minlength=size) / marginal_draws
        l1_first = 0.5 * float(np.abs(emp_first - exact_first.probs).sum())
        l1_second = 0.5 * float(np.abs(emp_second - exact_second.probs).sum())
        tally.record(eff_tol - l1_first)
        tally.record(eff_tol - l1_second)

    return SuiteResult(
        name="coupling",
        trials=reps,
        checks=tally.checks,
        failures=tally.failures,
        worst_slack=tally.worst,
        detail={
            "z": z,
            "unequal_pairs": unequal_pairs,
            "total_pairs": total_pairs,
            "reps_with_unequal": bad_reps,
            "pair_bound": n * z,
            "batch_bound": m * n * z,
            "marginal_l1_first": l1_first,
            "marginal_l1_second": l1_second,
        },
    )


def _random_kernel(gen: np.random.Generator, n: int) -> MarginalKernel:
    """Box projection of a broad symmetric matrix; spectra often touch
    both endpoints, exercising zero atoms."""
    g = gen.standard_normal((n, n))
    return project_box(0.5 * np.eye(n) + (g + g.T) / (2.0 * math.sqrt(n)))


def run_crosspath_suite(
    trials: int = 200,
    *,
    n_lo: int = 2,
    n_hi: int = 8,
    atoms_per_kernel: int = 6,
    seed: int = 0,
) -> SuiteResult:
    gen = np.random.default_rng(np.random.SeedSequence((seed, 0xCB)))
    tally = _Tally()
    for _ in range(trials):
        n = int(gen.integers(n_lo, n_hi + 1))
        K = _random_kernel(gen, n)
        size = 1 << n
        table = exact_distribution(K)
        tally.record(_ATOL - abs(float(table.probs.sum()) - 1.0))
        for J in gen.integers(0, size, atoms_per_kernel):
            J = int(J)
            p_table = float(table.probs[J])
            p_eigen = atom_probability(K, J, method="eigen")
            p_lu = atom_probability(K, J, method="lu")
            p_ie = oracle.atom_probability_ie(K, J)
            tally.record(_ATOL - abs(p_table - p_eigen))
            tally.record(_ATOL - abs(p_eigen - p_lu))
            tally.record(_ATOL - abs(p_eigen - p_ie))
        for A in gen.integers(0, size, 3):
            A = int(A)
            total = sum(float(table.probs[J]) for J in supersets(A, n))
            tally.record(_ATOL - abs(marginal(K, A) - total))
        tally.record_bool(is_log_submodular(table, rel_tol=_ATOL))
    return SuiteResult(
        name="crosspath",
        trials=trials,
        checks=tally.checks,
        failures=tally.failures,
        worst_slack=tally.worst,
        detail={"n_lo": n_lo, "n_hi": n_hi, "atoms_per_kernel": atoms_per_kernel},
    )


def run_all_suites(
    *,
    seed: int = 0,
    min_singular_trials: int = 1000,
    det_perturbation_trials: int = 100_000,
    helper_trials: int = 1_000_000,
    coupling_reps: int = 1000,
    coupling_marginal_draws: int = 200_000,
    crosspath_trials: int = 200,
) -> list[SuiteResult]:
    return [
        run_min_singular_suite(min_singular_trials, seed=seed),
        run_det_perturbation_suite(det_perturbation_trials, seed=seed),
        run_helper_inequality_suite(helper_trials, seed=seed),
        run_coupling_suite(
            coupling_reps, marginal_draws=coupling_marginal_draws, seed=seed
        ),
        run_crosspath_suite(crosspath_trials, seed=seed),
    ]
