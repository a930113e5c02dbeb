"""The chi-square/l1 identity test and the full tester orchestration."""

import math

import numpy as np
import pytest

from dpptest import (
    DimensionMismatch,
    DiscreteDistribution,
    GeneralMode,
    InsufficientSamples,
    NormalMode,
    SubsetCounts,
    TestVerdict,
    c2_lower_bound,
    chi2_l1_statistic,
    chi2_l1_test,
    dpp_tester,
    exact_distribution,
    general_mode_params,
    hard_instance,
    required_samples,
    sample_table,
    validate,
)

UNIFORM2 = DiscreteDistribution(n=2, probs=[0.25] * 4)


# --- statistic ---


def test_statistic_proportional_counts():
    counts = SubsetCounts(n=2, counts=[1, 1, 1, 1], m=4)
    # every term is ((0)^2 - m p)/(m p) = -1; all four atoms pass the cutoff
    assert chi2_l1_statistic(counts, UNIFORM2, 0.25) == -4.0


def test_statistic_hand_computed_example():
    counts = SubsetCounts(n=2, counts=[3, 1, 0, 0], m=4)
    assert chi2_l1_statistic(counts, UNIFORM2, 0.25) == 2.0


def test_statistic_single_sample():
    p = DiscreteDistribution(n=1, probs=[0.3, 0.7])
    counts = SubsetCounts(n=1, counts=[0, 1], m=1)
    want = ((1 - 0.7) ** 2 - 1) / 0.7 + (0.3**2) / 0.3
    assert chi2_l1_statistic(counts, p, 0.5) == pytest.approx(want, abs=1e-12)
    assert want == pytest.approx(-1.0, abs=1e-12)


def test_statistic_ignores_below_cutoff_subsets():
    p = DiscreteDistribution(n=2, probs=[0.696, 0.3, 0.002, 0.002])
    eps = 0.9  # cutoff eps/(50 N) = 0.0045 excludes the last two atoms
    a = SubsetCounts(n=2, counts=[6, 2, 2, 0], m=10)
    b = SubsetCounts(n=2, counts=[6, 2, 0, 2], m=10)
    c = SubsetCounts(n=2, counts=[6, 2, 1, 1], m=10)
    za = chi2_l1_statistic(a, p, eps)
    assert za == chi2_l1_statistic(b, p, eps)
    assert za == chi2_l1_statistic(c, p, eps)


def test_statistic_dimension_mismatch():
    counts = SubsetCounts(n=2, counts=[1, 1, 1, 1], m=4)
    with pytest.raises(DimensionMismatch):
        chi2_l1_statistic(counts, DiscreteDistribution(n=3, probs=[0.125] * 8), 0.25)


def test_statistic_mean_near_zero_under_identity():
    # multinomial E[(N - mp)^2 - N] = -p per atom, so E[Z] is about -1;
    # the loose contract is |mean Z| <= 0.1 C
    p = exact_distribution(validate([[0.5, 0.3], [0.3, 0.5]]))
    m, eps = 4000, 0.5
    zs = []
    for seed in range(100):
        counts = SubsetCounts.from_batch(sample_table(p, m, seed=seed))
        zs.append(chi2_l1_statistic(counts, p, eps))
    threshold = m * eps * eps / 10
    assert abs(float(np.mean(zs))) <= 0.1 * threshold


# --- verdicts ---


def test_verdict_accept_on_proportional_counts():
    counts = SubsetCounts(n=2, counts=[1, 1, 1, 1], m=4)
    v = chi2_l1_test(counts, UNIFORM2, 0.25)
    assert v.decision == "accept"
    assert v.statistic == -4.0
    assert v.threshold == 4 * 0.25**2 / 10
    assert v.accepted


def test_verdict_tie_rejects():
    # the dataclass enforces the strict-inequality convention
    with pytest.raises(ValueError):
        TestVerdict(decision="accept", statistic=1.0, threshold=1.0, candidate_index=0, m=4)
    v = TestVerdict(decision="reject", statistic=1.0, threshold=1.0, candidate_index=0, m=4)
    assert not v.accepted


def test_verdict_identity_accept_rate():
    p = exact_distribution(validate(0.5 * np.eye(3)))
    m, eps = 1900, 0.25
    accepts = sum(
        chi2_l1_test(SubsetCounts.from_batch(sample_table(p, m, seed=s)), p, eps).accepted
        for s in range(30)
    )
    assert accepts >= 27


def test_verdict_far_reject_rate():
    p = exact_distribution(validate(0.5 * np.eye(3)))
    # move 0.15 of mass between two atoms: l1 distance 0.15 < eps... use 0.3
    q_probs = np.array(p.probs).copy()
    q_probs[0] += 0.3
    q_probs[7] -= 0.3
    q_probs = np.clip(q_probs, 0.0, None)
    q = DiscreteDistribution(n=3, probs=q_probs / q_probs.sum())
    m, eps = 1900, 0.25
    rejects = sum(
        not chi2_l1_test(SubsetCounts.from_batch(sample_table(q, m, seed=s)), p, eps).accepted
        for s in range(30)
    )
    assert rejects >= 27


# --- sample budgets ---


def test_required_samples_base_case():
    assert required_samples(2, 1.0, math.exp(-1.0), 1) == 4


def test_required_samples_amplification():
    base = required_samples(2, 1.0, math.exp(-1.0), 1)
    assert required_samples(2, 1.0, math.exp(-1.0), 10**6) == 14 * base


def test_required_samples_eps_scaling():
    lo = required_samples(4, 0.2, 0.1, 1)
    hi = required_samples(4, 0.4, 0.1, 1)
    assert lo / hi == pytest.approx(4.0, rel=0.05)


def test_required_samples_c_test_scales():
    assert required_samples(2, 1.0, math.exp(-1.0), 1, c_test=10.0) == 40


def test_required_samples_rejects_bad_input():
    with pytest.raises(ValueError):
        required_samples(2, 1.0, 0.5, 0)
    with pytest.raises(ValueError):
        required_samples(2, 1.0, 0.5, 1, c_test=0.0)


# --- general mode parameters ---


def test_general_mode_frozen_example():
    gp = general_mode_params(2, 0.5, 1.0)
    assert gp.m_star == 32
    assert gp.z_bar == pytest.approx(0.005 / 128, abs=1e-20)


def test_general_mode_z_bar_monotone():
    z1 = general_mode_params(4, 0.25, 23.0).z_bar
    z2 = general_mode_params(4, 0.25, 46.0).z_bar
    assert z2 < z1


def test_c2_lower_bound_values():
    assert c2_lower_bound(1.0) == 23.0
    want = 2.0 * max(23.0, 2.0 * math.log(2.0) + 23.0)
    assert c2_lower_bound(2.0) == pytest.approx(want, abs=1e-12)


# --- full tester ---


def test_tester_n1_accepts_any_bernoulli():
    for probs in ([1.0, 0.0], [0.0, 1.0], [0.35, 0.65]):
        q = DiscreteDistribution(n=1, probs=probs)
        batch = sample_table(q, 300, seed=5)
        v = dpp_tester(batch, 0.5, 0.1, NormalMode(alpha=0.0, zeta=0.4))
        assert v.decision == "accept"


def test_tester_insufficient_samples():
    q = DiscreteDistribution(n=1, probs=[0.5, 0.5])
    batch = sample_table(q, 10, seed=0)
    with pytest.raises(InsufficientSamples):
        dpp_tester(batch, 0.5, 0.1, NormalMode(alpha=0.0, zeta=0.4))


def test_tester_accepts_in_class_kernel():
    K = validate([[0.5, 0.3], [0.3, 0.5]])
    batch = sample_table(exact_distribution(K), 3000, seed=21)
    v = dpp_tester(batch, 0.3, 0.1, NormalMode(alpha=0.2, zeta=0.3), xi=1e-6, c_test=10.0)
    assert v.decision == "accept"
    assert v.candidate_index is not None


def test_tester_structural_guard_rejects_dense_correlations():
    # the perturbed-uniform instance lights up far more pairs than any
    # (0.2, 0.3)-normal kernel can carry, so the tester rejects without
    # enumerating candidates
    inst = hard_instance(6, 0.6, seed=3)
    batch = sample_table(inst.h, 400, seed=9)
    v = dpp_tester(batch, 0.25, 0.1, NormalMode(alpha=0.2, zeta=0.3), xi=1e-6)
    assert v.decision == "reject"
    assert v.statistic == math.inf
    assert v.candidate_index is None


def test_general_mode_matches_normal_at_z_bar():
    K = validate([[0.5, 0.3], [0.3, 0.5]])
    batch = sample_table(exact_distribution(K), 400, seed=13)
    z_bar = general_mode_params(2, 0.5).z_bar
    # xi tiny enough to force singleton diagonals even at zeta = z_bar
    xi = 1e-19
    vg = dpp_tester(batch, 0.5, 0.5, GeneralMode(), xi=xi)
    vn = dpp_tester(batch, 0.5, 0.5, NormalMode(alpha=0.0, zeta=z_bar), xi=xi)
    assert vg.decision == vn.decision
    assert vg.statistic == vn.statistic
    assert vg.candidate_index == vn.candidate_index


def test_counts_from_batch_and_validation():
    q = DiscreteDistribution(n=2, probs=[0.4, 0.3, 0.2, 0.1])
    batch = sample_table(q, 50, seed=2)
    counts = SubsetCounts.from_batch(batch)
    assert counts.m == 50
    assert int(counts.counts.sum()) == 50
    with pytest.raises(ValueError):
        SubsetCounts(n=2, counts=[1, 1, 1, 1], m=5)
    with pytest.raises(DimensionMismatch):
        SubsetCounts(n=2, counts=[1, 1, 1], m=3)
