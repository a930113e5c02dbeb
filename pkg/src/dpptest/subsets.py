"""Bitmask subset helpers.

Subsets of [n] = {1, ..., n} are n-bit masks: element i corresponds to bit
i - 1. Masks keep bits above position n - 1 zero.
"""

from __future__ import annotations

from collections.abc import Iterator


def full_mask(n: int) -> int:
    return (1 << n) - 1


def check_mask(mask: int, n: int) -> int:
    if mask < 0 or mask >> n:
        raise ValueError(f"mask {mask:#x} has bits outside a ground set of size {n}")
    return mask


def mask_to_indices(mask: int) -> tuple[int, ...]:
    """0-based positions of the set bits, ascending."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return tuple(out)


def indices_to_mask(indices) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << i
    return mask


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def complement(mask: int, n: int) -> int:
    return full_mask(n) & ~mask


def submasks(mask: int) -> Iterator[int]:
    """All submasks of mask, including 0 and mask itself."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def supersets(mask: int, n: int) -> Iterator[int]:
    """All supersets of mask within [n]."""
    free = complement(mask, n)
    for extra in submasks(free):
        yield mask | extra
