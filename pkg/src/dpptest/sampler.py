"""Seeded DPP sampling through the elementary-DPP mixture.

A DPP with kernel K = V diag(lambda) V^T is a mixture of elementary DPPs:
pick eigenvector v independently with probability lambda_v, collect the
picks into V', and draw from the DPP whose kernel is the projection
K^{V'} = sum of v v^T over V'. At the sizes this package targets the
elementary draw is done exactly: build the projection's full 2^n atom
table once per distinct V' (memoized per batch) and invert the CDF.

The coupled sampler draws from K and from its clamped version
project_box(K, z) simultaneously, reusing one uniform vector for both
eigenvector selections. Both selections agree unless some x_v lands in
the clamped sliver, and since clamping keeps eigenvectors, an equal
selection means the two elementary DPPs coincide and a single table draw
is shared. That makes each pair of subsets equal with probability at
least 1 - n*z.

Randomness contract: one root SeedSequence per call, one spawned child
stream per draw. A future parallel implementation can hand child t to
any worker and reproduce this serial stream bit for bit. Uniforms are
consumed in a fixed documented order per draw.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GroundSetTooLarge
from .kernel import (
    GROUND_SET_CAP,
    DiscreteDistribution,
    MarginalKernel,
    exact_distribution,
    project_box,
)

_ORTHO_TOL = 1e-9


@dataclass(frozen=True)
class SampleBatch:
    """Immutable batch of subset draws (masks) plus the seed that made it."""

    n: int
    subsets: np.ndarray
    seed: int | None = None

    def __post_init__(self) -> None:
        arr = np.asarray(self.subsets, dtype=np.int64)
        if arr.ndim != 1:
            raise ValueError(f"subsets must be a flat mask array, got shape {arr.shape}")
        if len(arr) and (arr.min() < 0 or int(arr.max()) >> self.n):
            raise ValueError("subset mask outside the ground set")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "subsets", arr)

    @property
    def m(self) -> int:
        return len(self.subsets)


@dataclass(frozen=True)
class CoupledBatch:
    """Paired draws from K (first) and project_box(K, z) (second)."""

    n: int
    z: float
    first: np.ndarray
    second: np.ndarray
    equal_count: int
    seed: int | None = None

    def __post_init__(self) -> None:
        a = np.asarray(self.first, dtype=np.int64).copy()
        b = np.asarray(self.second, dtype=np.int64).copy()
        if a.shape != b.shape or a.ndim != 1:
            raise ValueError("coupled batch needs two equal-length mask arrays")
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "first", a)
        object.__setattr__(self, "second", b)
        if self.equal_count != int(np.count_nonzero(a == b)):
            raise ValueError("equal_count does not match the pair data")

    @property
    def m(self) -> int:
        return len(self.first)

    def pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.first.tolist(), self.second.tolist()))


@dataclass(frozen=True)
class ElementaryStage:
    """Eigendecomposition of K plus one Bernoulli selection V' of its
    eigenvectors (a mask over eigenvector indices, ascending eigenvalue
    order)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    selected: int

    def __post_init__(self) -> None:
        vecs = np.asarray(self.eigenvectors, dtype=float)
        gram = vecs.T @ vecs
        if np.abs(gram - np.eye(vecs.shape[1])).max(initial=0.0) > _ORTHO_TOL:
            raise ValueError("eigenvectors are not orthonormal within 1e-9")

    def projection_kernel(self) -> MarginalKernel:
        """K^{V'} = sum of v v^T over the selected eigenvectors."""
        n = self.eigenvectors.shape[0]
        cols = [v for v in range(len(self.eigenvalues)) if (self.selected >> v) & 1]
        sel = self.eigenvectors[:, cols]
        proj = sel @ sel.T
        return project_box((proj + proj.T) / 2.0, 0.0)


class _ElementaryTables:
    """Per-batch memo of elementary atom CDFs, keyed by the V' mask."""

    def __init__(self, eigenvectors: np.ndarray, n: int) -> None:
        self._vecs = eigenvectors
        self._n = n
        self._cdfs: dict[int, np.ndarray] = {}

    def cdf(self, selected: int) -> np.ndarray:
        hit = self._cdfs.get(selected)
        if hit is not None:
            return hit
        cols = [v for v in range(self._n) if (selected >> v) & 1]
        sel = self._vecs[:, cols]
        proj = sel @ sel.T
        table = exact_distribution(project_box((proj + proj.T) / 2.0, 0.0))
        cdf = np.cumsum(table.probs)
        self._cdfs[selected] = cdf
        return cdf


def _draw_from_cdf(cdf: np.ndarray, u: float) -> int:
    j = int(np.searchsorted(cdf, u, side="right"))
    return min(j, len(cdf) - 1)


def sample_dpp(K: MarginalKernel, m: int, seed: int, *, cap: int = GROUND_SET_CAP) -> SampleBatch:
    """Draw m subsets from the DPP with kernel K. Deterministic given seed.

    Per draw, uniforms are consumed as: n Bernoulli thresholds for the
    eigenvector selection (ascending eigenvalue order), then one uniform
    for the inverse-CDF elementary draw.
    """
    if K.n > cap:
        raise GroundSetTooLarge(f"n={K.n} exceeds the sampling cap {cap}")
    if m < 1:
        raise ValueError(f"need m >= 1 draws, got {m}")
    n = K.n
    w, vecs = np.linalg.eigh(K.entries)
    lam = np.clip(w, 0.0, 1.0)
    tables = _ElementaryTables(vecs, n)
    children = np.random.SeedSequence(seed).spawn(m)
    masks = np.empty(m, dtype=np.int64)
    weights = 1 << np.arange(n, dtype=np.int64)
    for t in range(m):
        gen = np.random.Generator(np.random.PCG64(children[t]))
        u = gen.random(n + 1)
        selected = int(((u[:n] < lam) * weights).sum())
        masks[t] = _draw_from_cdf(tables.cdf(selected), u[n])
    return SampleBatch(n=n, subsets=masks, seed=seed)


def sample_coupled(
    K: MarginalKernel, z: float, m: int, seed: int, *, cap: int = GROUND_SET_CAP
) -> CoupledBatch:
    """Draw m coupled pairs (J from K, J' from project_box(K, z)).

    One uniform vector x drives both eigenvector selections; equal
    selections share a single elementary draw, so those pairs are equal
    by construction. Uniform consumption per draw: n selection
    thresholds, then two table uniforms (the second is burned when the
    selections coincide, keeping the stream layout fixed).
    """
    if K.n > cap:
        raise GroundSetTooLarge(f"n={K.n} exceeds the sampling cap {cap}")
    if m < 1:
        raise ValueError(f"need m >= 1 draws, got {m}")
    if not 0.0 <= z < 0.5:
        raise ValueError(f"z must lie in [0, 0.5), got {z}")
    n = K.n
    w, vecs = np.linalg.eigh(K.entries)
    lam = np.clip(w, 0.0, 1.0)
    lam_clamped = np.clip(w, z, 1.0 - z)
    tables = _ElementaryTables(vecs, n)
    children = np.random.SeedSequence(seed).spawn(m)
    first = np.empty(m, dtype=np.int64)
    second = np.empty(m, dtype=np.int64)
    weights = 1 << np.arange(n, dtype=np.int64)
    for t in range(m):
        gen = np.random.Generator(np.random.PCG64(children[t]))
        x = gen.random(n)
        u1, u2 = gen.random(2)
        sel1 = int(((x < lam) * weights).sum())
        sel2 = int(((x < lam_clamped) * weights).sum())
        if sel1 == sel2:
            j = _draw_from_cdf(tables.cdf(sel1), u1)
            first[t] = j
            second[t] = j
        else:
            first[t] = _draw_from_cdf(tables.cdf(sel1), u1)
            second[t] = _draw_from_cdf(tables.cdf(sel2), u2)
    equal = int(np.count_nonzero(first == second))
    return CoupledBatch(n=n, z=z, first=first, second=second, equal_count=equal, seed=seed)


def sample_table(p: DiscreteDistribution, m: int, seed: int) -> SampleBatch:
    """i.i.d. inverse-CDF draws from an explicit atom table."""
    if m < 1:
        raise ValueError(f"need m >= 1 draws, got {m}")
    cdf = np.cumsum(p.probs)
    gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    u = gen.random(m)
    masks = np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)
    return SampleBatch(n=p.n, subsets=masks.astype(np.int64), seed=seed)
