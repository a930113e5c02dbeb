"""Spectral DPP sampling, the clamped-kernel coupling, and table draws."""

import numpy as np
import pytest

from dpptest import (
    DiscreteDistribution,
    distances,
    exact_distribution,
    hard_instance,
    project_box,
    sample_coupled,
    sample_dpp,
    sample_table,
    validate,
)
from dpptest.subsets import popcount


def empirical_table(batch) -> DiscreteDistribution:
    counts = np.bincount(batch.subsets, minlength=1 << batch.n)
    return DiscreteDistribution(n=batch.n, probs=counts / batch.m)


# --- sample_dpp ---


def test_projection_on_single_vector_is_deterministic():
    K = validate(np.diag([1.0, 0.0]))
    batch = sample_dpp(K, 200, seed=3)
    assert np.all(batch.subsets == 0b01)


def test_rank_projection_fixes_cardinality():
    gen = np.random.Generator(np.random.PCG64(2))
    M = gen.normal(size=(5, 5))
    M = M + M.T
    w, vecs = np.linalg.eigh(M)
    lam = np.array([1.0, 1.0, 1.0, 0.0, 0.0])
    K = validate((vecs * lam) @ vecs.T)
    batch = sample_dpp(K, 300, seed=8)
    assert all(popcount(int(J)) == 3 for J in batch.subsets)


def test_same_seed_bit_identical():
    K = validate(0.5 * np.eye(3))
    a = sample_dpp(K, 500, seed=77)
    b = sample_dpp(K, 500, seed=77)
    assert np.array_equal(a.subsets, b.subsets)
    c = sample_dpp(K, 500, seed=78)
    assert not np.array_equal(a.subsets, c.subsets)


def test_uniform_frequencies_within_three_se():
    K = validate(0.5 * np.eye(4))
    m = 100_000
    batch = sample_dpp(K, m, seed=12)
    freq = np.bincount(batch.subsets, minlength=16) / m
    se = np.sqrt((1 / 16) * (15 / 16) / m)
    assert np.abs(freq - 1 / 16).max() <= 3 * se


def test_block_kernel_matches_exact_table():
    K = validate([[0.5, 0.3], [0.3, 0.5]])
    batch = sample_dpp(K, 40_000, seed=5)
    rep = distances(empirical_table(batch), exact_distribution(K))
    assert rep.l1 <= 0.01


# --- sample_coupled ---


def test_coupling_in_box_spectrum_all_equal():
    K = validate([[0.5, 0.3], [0.3, 0.5]])  # eigenvalues 0.2, 0.8
    cb = sample_coupled(K, 0.1, 400, seed=4)
    assert cb.equal_count == cb.m
    assert np.array_equal(cb.first, cb.second)


def test_coupling_z_zero_identity():
    gen = np.random.Generator(np.random.PCG64(6))
    M = gen.normal(size=(3, 3))
    K = project_box(M + M.T, 0.0)
    cb = sample_coupled(K, 0.0, 300, seed=9)
    assert cb.equal_count == cb.m
    assert np.array_equal(cb.first, cb.second)


def test_coupling_marginals_track_both_kernels():
    # one eigenvalue below z, so the clamped kernel genuinely differs
    gen = np.random.Generator(np.random.PCG64(15))
    M = gen.normal(size=(2, 2))
    M = M + M.T
    w, vecs = np.linalg.eigh(M)
    K = validate((vecs * np.array([0.02, 0.9])) @ vecs.T)
    z = 0.2
    cb = sample_coupled(K, z, 6000, seed=31)
    first = DiscreteDistribution(n=2, probs=np.bincount(cb.first, minlength=4) / cb.m)
    second = DiscreteDistribution(n=2, probs=np.bincount(cb.second, minlength=4) / cb.m)
    assert distances(first, exact_distribution(K)).l1 <= 0.05
    assert distances(second, exact_distribution(project_box(K.entries, z))).l1 <= 0.05


def test_coupling_equality_rate_near_union_bound():
    # eigenvalue 0.999 clamped to 1 - z: per-draw miss probability <= nz
    n, z = 3, 0.002
    gen = np.random.Generator(np.random.PCG64(23))
    M = gen.normal(size=(n, n))
    M = M + M.T
    w, vecs = np.linalg.eigh(M)
    K = validate((vecs * np.array([0.999, 0.5, 0.4])) @ vecs.T)
    cb = sample_coupled(K, z, 4000, seed=2)
    assert cb.equal_count >= cb.m * (1 - n * z) - 3 * np.sqrt(cb.m * n * z)


def test_coupled_batch_pairs_view():
    K = validate(0.5 * np.eye(2))
    cb = sample_coupled(K, 0.0, 5, seed=1)
    assert cb.pairs() == [(int(a), int(b)) for a, b in zip(cb.first, cb.second)]


# --- sample_table ---


def test_table_point_mass():
    p = DiscreteDistribution(n=2, probs=[0.0, 0.0, 1.0, 0.0])
    batch = sample_table(p, 50, seed=0)
    assert np.all(batch.subsets == 0b10)


def test_table_uniform_frequencies():
    p = DiscreteDistribution(n=3, probs=[0.125] * 8)
    m = 80_000
    batch = sample_table(p, m, seed=44)
    freq = np.bincount(batch.subsets, minlength=8) / m
    se = np.sqrt(0.125 * 0.875 / m)
    assert np.abs(freq - 0.125).max() <= 3 * se


def test_table_draws_consistent_for_hard_instance():
    inst = hard_instance(6, 0.6, seed=10)
    errs = []
    for m in (10_000, 100_000, 1_000_000):
        batch = sample_table(inst.h, m, seed=91)
        errs.append(distances(empirical_table(batch), inst.h).l1)
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] <= 0.01


def test_table_seed_determinism():
    p = DiscreteDistribution(n=2, probs=[0.1, 0.2, 0.3, 0.4])
    a = sample_table(p, 100, seed=6)
    b = sample_table(p, 100, seed=6)
    assert np.array_equal(a.subsets, b.subsets)
