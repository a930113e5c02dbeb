"""Marginal estimation, bracketing parameters, and the candidate grid."""

import math

import numpy as np
import pytest

from dpptest import (
    CandidateBudgetExceeded,
    DegenerateZeta,
    DimensionMismatch,
    EmpiricalMarginals,
    SampleBatch,
    bracketing_params,
    candidate_grid,
    empirical_marginals,
    enumerate_candidates,
    exact_distribution,
    grid_to_json_dict,
    magnitude_estimates,
    marginal,
    random_normal_kernel,
    sample_dpp,
    validate,
)

# xi small enough to force one bracket per entry; value is irrelevant as
# long as it is positive and far below the step scale
TINY_XI = 1e-6


def marginals_of(diag, u01) -> EmpiricalMarginals:
    pair = np.array([[diag[0], u01], [u01, diag[1]]])
    return EmpiricalMarginals(diag=np.asarray(diag, dtype=float), pair=pair, m=1000)


# --- empirical marginals ---


def test_two_sample_batch_counts():
    batch = SampleBatch(n=2, subsets=np.array([0b01, 0b11]))
    em = empirical_marginals(batch)
    assert list(em.diag) == [1.0, 0.5]
    assert em.pair[0, 1] == 0.5
    assert em.m == 2


def test_all_empty_batch_gives_zeros():
    batch = SampleBatch(n=3, subsets=np.zeros(10, dtype=np.int64))
    em = empirical_marginals(batch)
    assert np.all(em.diag == 0.0)
    assert np.all(em.pair == 0.0)


def test_marginals_converge_to_kernel_minors():
    K = validate([[0.5, 0.3], [0.3, 0.5]])
    em = empirical_marginals(sample_dpp(K, 100_000, seed=19))
    assert em.diag[0] == pytest.approx(0.5, abs=0.01)
    assert em.diag[1] == pytest.approx(0.5, abs=0.01)
    assert em.pair[0, 1] == pytest.approx(marginal(K, 0b11), abs=0.01)


# --- magnitude estimates ---


def test_magnitude_plain_case():
    kplus, kminus = magnitude_estimates(marginals_of([0.5, 0.5], 0.16))
    assert kplus[0, 1] == pytest.approx(0.3, abs=1e-15)
    assert kminus[0, 1] == pytest.approx(-0.3, abs=1e-15)


def test_magnitude_guard_clause():
    kplus, kminus = magnitude_estimates(marginals_of([0.4, 0.4], 0.2))
    assert kplus[0, 1] == 0.0
    assert kminus[0, 1] == 0.0


def test_magnitude_saturated_marginals():
    kplus, _ = magnitude_estimates(marginals_of([1.0, 1.0], 1.0))
    assert kplus[0, 1] == 0.0


# --- bracketing parameters ---


def test_bracketing_sample_budget():
    bp = bracketing_params(4, 0.1, 0.05, 0.2, 0.25)
    assert bp.m == 1599  # ceil((ln 20 + 1) * 4 / 0.01)


def test_bracketing_step():
    bp = bracketing_params(4, 0.1, 0.05, 0.2, 0.25)
    assert bp.step == pytest.approx(1.5625e-5, abs=1e-20)


def test_bracketing_xi_natural_log():
    bp = bracketing_params(4, 0.1, 0.05, 0.2, 0.25)
    assert bp.xi == pytest.approx(2.0 ** (-1.0) * math.sqrt(math.log(4) + 1), abs=1e-15)
    assert bp.xi == pytest.approx(0.77238176459570346, abs=1e-15)


def test_bracketing_half_width_uses_min_branch():
    bp = bracketing_params(4, 0.1, 0.05, 0.2, 0.25)
    want = 2 * 0.1 * min(2 * bp.xi / 0.2, math.sqrt(bp.xi / 0.1))
    assert bp.half_width == pytest.approx(want, abs=1e-15)


def test_bracketing_alpha_zero_drops_branch():
    bp = bracketing_params(4, 0.1, 0.05, 0.0, 0.25)
    assert bp.half_width == pytest.approx(2 * 0.1 * math.sqrt(bp.xi / 0.1), abs=1e-15)


def test_bracketing_degenerate_zeta():
    with pytest.raises(DegenerateZeta):
        bracketing_params(4, 0.1, 0.05, 0.2, 0.0)


def test_bracketing_rejects_bad_ranges():
    with pytest.raises(ValueError):
        bracketing_params(4, 1.0, 0.05, 0.2, 0.25)
    with pytest.raises(ValueError):
        bracketing_params(4, 0.1, 0.0, 0.2, 0.25)
    with pytest.raises(ValueError):
        bracketing_params(4, 0.1, 0.05, 1.5, 0.25)


def test_bracketing_xi_override():
    bp = bracketing_params(2, 0.25, 0.1, 0.2, 0.3, xi=TINY_XI)
    assert bp.xi == TINY_XI
    assert bp.brackets == 1
    with pytest.raises(ValueError):
        bracketing_params(2, 0.25, 0.1, 0.2, 0.3, xi=-1.0)


# --- candidate grid ---


def test_single_bracket_grid_hits_the_estimates():
    em = marginals_of([0.5, 0.5], 0.16)
    bp = bracketing_params(2, 0.25, 0.1, 0.2, 0.3, xi=TINY_XI)
    grid = candidate_grid(em, bp)
    assert grid.entries == ((0, 0), (0, 1), (1, 1))
    assert grid.values[0] == pytest.approx((0.5,))
    assert grid.values[2] == pytest.approx((0.5,))
    # off-diagonal: zero, the positive magnitude, the negative magnitude
    assert sorted(grid.values[1]) == pytest.approx([-0.3, 0.0, 0.3], abs=1e-12)
    assert grid.total_count == 3


def test_zero_floor_collapses_small_entries():
    em = marginals_of([0.4, 0.6], 0.24)  # product equals u -> magnitude 0
    bp = bracketing_params(2, 0.25, 0.1, 0.2, 0.3, xi=TINY_XI)
    grid = candidate_grid(em, bp, zero_floor=0.1)
    assert grid.values[1] == (0.0,)
    assert grid.total_count == 1


def test_grid_dimension_mismatch():
    em = marginals_of([0.5, 0.5], 0.16)
    bp = bracketing_params(3, 0.25, 0.1, 0.2, 0.3, xi=TINY_XI)
    with pytest.raises(DimensionMismatch):
        candidate_grid(em, bp)


def test_grid_budget_cap():
    gen = np.random.Generator(np.random.PCG64(1))
    K = random_normal_kernel(4, 0.2, 0.3, seed=2)
    em = empirical_marginals(sample_dpp(K, 2000, seed=3))
    bp = bracketing_params(4, 0.25, 0.1, 0.2, 0.3, xi=1e-6)
    grid = candidate_grid(em, bp)  # fits: at most 3^6 combinations
    with pytest.raises(CandidateBudgetExceeded):
        candidate_grid(em, bp, cap=2)
    assert candidate_grid(em, bp, cap=2, allow_over_cap=True).total_count == grid.total_count


def test_grid_json_dump_shape():
    em = marginals_of([0.5, 0.5], 0.16)
    bp = bracketing_params(2, 0.25, 0.1, 0.2, 0.3, xi=TINY_XI)
    dump = grid_to_json_dict(candidate_grid(em, bp))
    assert dump["n"] == 2
    assert dump["total_count"] == 3
    assert [e["i"] for e in dump["entries"]] == [0, 0, 1]
    assert len(dump["entries"][1]["values"]) == 3


# --- candidate enumeration ---


def test_enumeration_single_bracket_kernels():
    em = marginals_of([0.5, 0.5], 0.16)
    bp = bracketing_params(2, 0.25, 0.1, 0.2, 0.3, xi=TINY_XI)
    grid = candidate_grid(em, bp)
    kernels = list(enumerate_candidates(grid))
    assert len(kernels) == 3
    offs = sorted(round(float(k.entries[0, 1]), 9) for k in kernels)
    assert offs == pytest.approx([-0.3, 0.0, 0.3], abs=1e-9)
    for k in kernels:
        evals = np.linalg.eigvalsh(k.entries)
        assert evals.min() >= -1e-12 and evals.max() <= 1.0 + 1e-12


def test_enumeration_sharding_partitions_stream():
    K = random_normal_kernel(3, 0.2, 0.3, seed=6)
    em = empirical_marginals(sample_dpp(K, 4000, seed=7))
    bp = bracketing_params(3, 0.3, 0.1, 0.2, 0.3, xi=TINY_XI)
    grid = candidate_grid(em, bp)
    full = [k.entries for k in enumerate_candidates(grid)]
    cut = grid.total_count // 2
    sharded = [k.entries for k in enumerate_candidates(grid, start=0, stop=cut)]
    sharded += [k.entries for k in enumerate_candidates(grid, start=cut)]
    assert len(full) == grid.total_count
    for a, b in zip(full, sharded):
        assert np.array_equal(a, b)


def test_enumeration_respects_cap():
    em = marginals_of([0.5, 0.5], 0.16)
    bp = bracketing_params(2, 0.25, 0.1, 0.2, 0.3, xi=TINY_XI)
    grid = candidate_grid(em, bp)
    with pytest.raises(CandidateBudgetExceeded):
        list(enumerate_candidates(grid, cap=2))
    assert len(list(enumerate_candidates(grid, cap=2, allow_over_cap=True))) == 3


def test_singleton_grid_returns_projected_estimate():
    # zero off-diagonal estimate + floor -> every list is a singleton
    em = marginals_of([0.4, 0.6], 0.24)
    bp = bracketing_params(2, 0.25, 0.1, 0.2, 0.3, xi=TINY_XI)
    grid = candidate_grid(em, bp, zero_floor=0.1)
    kernels = list(enumerate_candidates(grid))
    assert len(kernels) == 1
    assert np.allclose(kernels[0].entries, np.diag([0.4, 0.6]), atol=1e-12)


def test_exact_estimates_put_truth_on_the_grid():
    # feed the true marginals directly: the single-bracket candidates sit
    # exactly on |K*| and the grid contains the true kernel up to sign
    K = validate([[0.5, -0.25], [-0.25, 0.5]])
    em = marginals_of([0.5, 0.5], float(marginal(K, 0b11)))
    bp = bracketing_params(2, 0.25, 0.1, 0.2, 0.3, xi=TINY_XI)
    grid = candidate_grid(em, bp)
    best = min(
        float(np.abs(k.entries - K.entries).max())
        for k in enumerate_candidates(grid)
    )
    assert best <= bp.step


def test_candidate_tables_are_distributions():
    K = random_normal_kernel(3, 0.2, 0.3, seed=30)
    em = empirical_marginals(sample_dpp(K, 3000, seed=31))
    bp = bracketing_params(3, 0.3, 0.1, 0.2, 0.3, xi=TINY_XI)
    for cand in enumerate_candidates(candidate_grid(em, bp)):
        table = exact_distribution(cand)
        assert float(table.probs.sum()) == pytest.approx(1.0, abs=1e-8)
