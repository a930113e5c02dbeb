"""Bitmask helper behavior: the rest of the package leans on these."""

import pytest

from dpptest.subsets import (
    check_mask,
    complement,
    full_mask,
    indices_to_mask,
    mask_to_indices,
    popcount,
    submasks,
    supersets,
)


def test_full_mask():
    assert full_mask(0) == 0
    assert full_mask(3) == 0b111
    assert full_mask(10) == 1023


def test_mask_index_roundtrip():
    for mask in range(64):
        assert indices_to_mask(mask_to_indices(mask)) == mask


def test_mask_to_indices_ascending():
    assert mask_to_indices(0) == ()
    assert mask_to_indices(0b101) == (0, 2)
    assert mask_to_indices(0b110010) == (1, 4, 5)


def test_popcount_matches_python():
    for mask in (0, 1, 0b1011, 255, 12345):
        assert popcount(mask) == bin(mask).count("1")


def test_complement():
    assert complement(0, 3) == 0b111
    assert complement(0b101, 3) == 0b010
    assert complement(full_mask(5), 5) == 0


def test_check_mask_accepts_in_range():
    assert check_mask(0b11, 2) == 0b11
    assert check_mask(0, 4) == 0


def test_check_mask_rejects_stray_bits():
    with pytest.raises(ValueError):
        check_mask(0b100, 2)
    with pytest.raises(ValueError):
        check_mask(-1, 4)


def test_submasks_enumerates_the_power_set_of_the_mask():
    got = sorted(submasks(0b101))
    assert got == [0, 0b001, 0b100, 0b101]
    # 2^k submasks of a k-bit mask, no duplicates
    full = list(submasks(0b1111))
    assert len(full) == 16
    assert len(set(full)) == 16


def test_supersets_within_ground_set():
    got = sorted(supersets(0b010, 3))
    assert got == [0b010, 0b011, 0b110, 0b111]
    assert sorted(supersets(0, 2)) == [0, 1, 2, 3]
    assert list(supersets(full_mask(4), 4)) == [full_mask(4)]
