"""Marginal kernels as DPP parameterizations.

A determinantal point process over the ground set [n] = {1, ..., n} is
parameterized by a symmetric marginal kernel K with eigenvalues in [0, 1].
Containment marginals are principal minors, P(A subseteq J) = det(K_A),
and the probability of drawing exactly J is

    Pr[J] = |det(K - I_Jbar)|,

where I_Jbar is the identity restricted to the complement of J. This
module owns kernel validation, those exact probabilities, the spectral
box projection, and numeric checks of the two matrix inequalities the
rest of the pipeline leans on (the shifted-kernel singular-value floor
and the determinant perturbation bound).

Conventions used throughout:

- Subsets are n-bit masks (see module subsets); element i is bit i - 1.
- Determinants of symmetric matrices are products of eigenvalues from a
  symmetric eigendecomposition, which behaves better near singularity
  than LU for these shifted kernels. An LU route is kept behind the
  ``method`` flag of :func:`atom_probability` purely for cross-checking.
- Validation tolerates eigenvalue excursions up to 1e-9 beyond [0, 1]
  (floating-point dust from upstream arithmetic), clamps them, and
  rejects anything larger.
- Everything here is a pure function of immutable values; arrays are
  stored read-only and can be shared across threads freely.

The full-table operations enumerate all 2^n subsets and are capped at
n = 16, which keeps the worst case around 10^5 small eigendecompositions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    GroundSetTooLarge,
    NormalityViolated,
    NotSymmetric,
    SingularB,
    SpectrumOutOfRange,
)
from .subsets import check_mask, full_mask, mask_to_indices

SYMMETRY_TOL = 1e-12
SPECTRUM_TOL = 1e-9
TABLE_SUM_TOL = 1e-8
GROUND_SET_CAP = 16

# Chunk size for batched eigenvalue sweeps over all 2^n shifted kernels;
# bounds peak memory at a few MB regardless of n.
_EIG_CHUNK = 4096


@dataclass(frozen=True)
class NormalityBounds:
    """Structural promise (alpha, zeta): eigenvalues of K lie in
    [zeta, 1 - zeta] and every nonzero entry has magnitude >= alpha."""

    alpha: float
    zeta: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if not 0.0 <= self.zeta <= 0.5:
            raise ValueError(f"zeta must be in [0, 0.5], got {self.zeta}")


@dataclass(frozen=True)
class MarginalKernel:
    """Validated symmetric kernel with spectrum in [0, 1].

    Construct through :func:`validate` (or :func:`project_box`); the raw
    constructor only enforces the cheap shape/symmetry invariants.
    """

    n: int
    entries: np.ndarray
    normality: NormalityBounds | None = None

    def __post_init__(self) -> None:
        arr = np.asarray(self.entries, dtype=float)
        if arr.shape != (self.n, self.n):
            raise DimensionMismatch(
                f"expected a {self.n}x{self.n} matrix, got shape {arr.shape}"
            )
        if np.abs(arr - arr.T).max(initial=0.0) > SYMMETRY_TOL:
            raise NotSymmetric("kernel entries are not symmetric within 1e-12")
        if np.abs(arr).max(initial=0.0) > 1.0 + SPECTRUM_TOL:
            raise SpectrumOutOfRange(
                f"entry magnitude {np.abs(arr).max():.6g} exceeds 1"
            )
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probability table over all 2^n subsets, indexed by mask."""

    n: int
    probs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.probs, dtype=float)
        if arr.shape != (1 << self.n,):
            raise DimensionMismatch(
                f"expected {1 << self.n} atoms for n={self.n}, got shape {arr.shape}"
            )
        if arr.min(initial=0.0) < 0.0:
            raise ValueError(f"negative atom probability {arr.min():.3e}")
        total = float(arr.sum())
        if abs(total - 1.0) > TABLE_SUM_TOL:
            raise ValueError(f"atom probabilities sum to {total!r}, not 1")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "probs", arr)


@dataclass(frozen=True)
class MinSingularReport:
    """Worst shifted-kernel singular value over all subsets vs the floor."""

    worst_sigma: float
    worst_subset: int
    bound: float
    holds: bool


@dataclass(frozen=True)
class DetPerturbationReport:
    lhs: float
    rhs: float
    holds: bool


def validate(matrix, normality: NormalityBounds | None = None) -> MarginalKernel:
    """Check symmetry and spectrum, clamp eigenvalue dust, build a kernel.

    Eigenvalues may stick out of [0, 1] by at most 1e-9; such excursions
    are clamped (re-projecting onto the box with the same eigenvectors).
    Larger violations raise SpectrumOutOfRange.
    """
    arr = np.asarray(matrix, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {arr.shape}")
    if np.abs(arr - arr.T).max(initial=0.0) > SYMMETRY_TOL:
        raise NotSymmetric(
            f"matrix is not symmetric within {SYMMETRY_TOL:g} "
            f"(max asymmetry {np.abs(arr - arr.T).max():.3e})"
        )
    n = arr.shape[0]
    sym = (arr + arr.T) / 2.0
    evals = np.linalg.eigvalsh(sym)
    if evals[0] < -SPECTRUM_TOL or evals[-1] > 1.0 + SPECTRUM_TOL:
        bad = evals[0] if evals[0] < -SPECTRUM_TOL else evals[-1]
        raise SpectrumOutOfRange(f"eigenvalue {bad!r} outside [0, 1] by more than 1e-9")
    if evals[0] < 0.0 or evals[-1] > 1.0:
        w, vecs = np.linalg.eigh(sym)
        sym = (vecs * np.clip(w, 0.0, 1.0)) @ vecs.T
        sym = (sym + sym.T) / 2.0
    return MarginalKernel(n=n, entries=sym, normality=normality)


def _shifted(K: MarginalKernel, mask: int) -> np.ndarray:
    """K - I_Jbar for the subset given by mask."""
    out = K.entries.copy()
    comp = full_mask(K.n) & ~mask
    for i in mask_to_indices(comp):
        out[i, i] -= 1.0
    return out


def atom_probability(K: MarginalKernel, J: int, *, method: str = "eigen") -> float:
    """Exact probability of drawing the subset J, |det(K - I_Jbar)|.

    method="eigen" (default) multiplies eigenvalues of the symmetric
    shift; method="lu" goes through the generic LU determinant and exists
    for cross-checks only.
    """
    check_mask(J, K.n)
    shifted = _shifted(K, J)
    if method == "eigen":
        det = float(np.prod(np.linalg.eigvalsh(shifted)))
    elif method == "lu":
        det = float(np.linalg.det(shifted))
    else:
        raise ValueError(f"unknown method {method!r}")
    return min(abs(det), 1.0)


def _shift_diagonals(K: MarginalKernel, masks: np.ndarray) -> np.ndarray:
    """Stack of K - I_Jbar for a vector of masks (len(masks), n, n)."""
    n = K.n
    bits = (masks[:, None] >> np.arange(n)[None, :]) & 1
    stack = np.broadcast_to(K.entries, (len(masks), n, n)).copy()
    idx = np.arange(n)
    stack[:, idx, idx] -= 1.0 - bits
    return stack


def exact_distribution(K: MarginalKernel, *, cap: int = GROUND_SET_CAP) -> DiscreteDistribution:
    """Full 2^n atom table of the DPP, via batched eigendecompositions."""
    n = K.n
    if n > cap:
        raise GroundSetTooLarge(f"n={n} exceeds the full-table cap {cap}")
    size = 1 << n
    probs = np.empty(size)
    for start in range(0, size, _EIG_CHUNK):
        masks = np.arange(start, min(start + _EIG_CHUNK, size))
        stack = _shift_diagonals(K, masks)
        dets = np.prod(np.linalg.eigvalsh(stack), axis=1)
        probs[start : start + len(masks)] = np.abs(dets)
    return DiscreteDistribution(n=n, probs=probs)


def marginal(K: MarginalKernel, A: int) -> float:
    """Containment marginal P(A subseteq J) = det(K_A); 1 for A = empty."""
    check_mask(A, K.n)
    if A == 0:
        return 1.0
    idx = list(mask_to_indices(A))
    sub = K.entries[np.ix_(idx, idx)]
    return float(np.prod(np.linalg.eigvalsh(sub)))


def project_box(M, z: float = 0.0) -> MarginalKernel:
    """Clamp the spectrum of a symmetric M into [z, 1 - z], eigenvectors kept.

    z = 0 projects onto valid kernels; z > 0 additionally pushes the
    spectrum away from both endpoints. Idempotent, and Frobenius-
    contractive toward every matrix already inside the box.
    """
    if not 0.0 <= z < 0.5:
        raise ValueError(f"z must lie in [0, 0.5), got {z}")
    arr = np.asarray(M, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {arr.shape}")
    if np.abs(arr - arr.T).max(initial=0.0) > SYMMETRY_TOL:
        raise NotSymmetric("matrix is not symmetric within 1e-12")
    sym = (arr + arr.T) / 2.0
    w, vecs = np.linalg.eigh(sym)
    clamped = (vecs * np.clip(w, z, 1.0 - z)) @ vecs.T
    clamped = (clamped + clamped.T) / 2.0
    return MarginalKernel(n=arr.shape[0], entries=clamped)


def min_singular_check(
    K: MarginalKernel, zeta: float, *, cap: int = GROUND_SET_CAP
) -> MinSingularReport:
    """Scan all 2^n shifts K - I_Jbar for the smallest singular value.

    For symmetric matrices singular values are the absolute eigenvalues,
    so the scan reuses the batched symmetric eigensolver. The floor being
    certified is zeta * (1 - zeta) / sqrt(2).
    """
    n = K.n
    if n > cap:
        raise GroundSetTooLarge(f"n={n} exceeds the full-table cap {cap}")
    evals = np.linalg.eigvalsh(K.entries)
    if evals[0] < zeta - SPECTRUM_TOL or evals[-1] > 1.0 - zeta + SPECTRUM_TOL:
        raise NormalityViolated(
            f"spectrum [{evals[0]:.6g}, {evals[-1]:.6g}] leaves "
            f"[{zeta:.6g}, {1.0 - zeta:.6g}]"
        )
    size = 1 << n
    worst_sigma = np.inf
    worst_subset = 0
    for start in range(0, size, _EIG_CHUNK):
        masks = np.arange(start, min(start + _EIG_CHUNK, size))
        stack = _shift_diagonals(K, masks)
        sigmas = np.abs(np.linalg.eigvalsh(stack)).min(axis=1)
        k = int(np.argmin(sigmas))
        if sigmas[k] < worst_sigma:
            worst_sigma = float(sigmas[k])
            worst_subset = int(masks[k])
    bound = zeta * (1.0 - zeta) / np.sqrt(2.0)
    return MinSingularReport(
        worst_sigma=worst_sigma,
        worst_subset=worst_subset,
        bound=float(bound),
        holds=bool(worst_sigma >= bound - SPECTRUM_TOL),
    )


def det_perturbation_bound(B, E) -> DetPerturbationReport:
    """Check | |det(B+E)| - |det(B)| | against the spectral-norm bound

        |det(B)| * (n * ||E||_2 / sigma_n(B)) * (||E||_2 / sigma_n(B) + 1)^(n-1).

    Both matrices must be symmetric; sigma_n(B) must be positive.
    """
    Ba = np.asarray(B, dtype=float)
    Ea = np.asarray(E, dtype=float)
    for name, a in (("B", Ba), ("E", Ea)):
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise NotSymmetric(f"{name} must be square, got shape {a.shape}")
        if np.abs(a - a.T).max(initial=0.0) > SYMMETRY_TOL:
            raise NotSymmetric(f"{name} is not symmetric within 1e-12")
    if Ba.shape != Ea.shape:
        raise DimensionMismatch(f"B has shape {Ba.shape}, E has shape {Ea.shape}")
    n = Ba.shape[0]
    eig_b = np.linalg.eigvalsh(Ba)
    sigma_n = float(np.abs(eig_b).min())
    if sigma_n == 0.0:
        raise SingularB("smallest singular value of B is zero")
    norm_e = float(np.abs(np.linalg.eigvalsh(Ea)).max())
    det_b = float(np.prod(eig_b))
    det_be = float(np.prod(np.linalg.eigvalsh(Ba + Ea)))
    lhs = abs(abs(det_be) - abs(det_b))
    ratio = norm_e / sigma_n
    rhs = abs(det_b) * (n * ratio) * (ratio + 1.0) ** (n - 1)
    return DetPerturbationReport(lhs=lhs, rhs=rhs, holds=bool(lhs <= rhs + SPECTRUM_TOL))


def random_normal_kernel(
    n: int, alpha: float, zeta: float, seed: int, *, max_pairs: int | None = None
) -> MarginalKernel:
    """Random kernel that is (alpha, zeta)-normal by construction.

    Disjoint 2x2 blocks [[1/2, +-b], [+-b, 1/2]] with alpha <= |b| <=
    1/2 - zeta (eigenvalues 1/2 +- |b|), remaining diagonal entries free
    inside (zeta, 1 - zeta). Requires alpha <= 1/2 - zeta; alpha = 0
    degenerates to a diagonal kernel. max_pairs caps the block count
    (default n // 2).
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if not 0.0 < zeta < 0.5:
        raise ValueError(f"zeta must be in (0, 0.5), got {zeta}")
    if alpha < 0.0 or alpha > 0.5 - zeta:
        raise ValueError(
            f"alpha must be in [0, 1/2 - zeta] = [0, {0.5 - zeta}], got {alpha}"
        )
    gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    limit = n // 2 if max_pairs is None else min(max_pairs, n // 2)
    pairs = int(gen.integers(0, limit + 1)) if alpha > 0.0 else 0
    order = gen.permutation(n)
    entries = np.diag(gen.uniform(zeta + 0.02, 1.0 - zeta - 0.02, n))
    for k in range(pairs):
        i, j = int(order[2 * k]), int(order[2 * k + 1])
        b = float(gen.uniform(alpha, 0.5 - zeta)) * (1 if gen.random() < 0.5 else -1)
        entries[i, i] = entries[j, j] = 0.5
        entries[i, j] = entries[j, i] = b
    return validate(entries, normality=NormalityBounds(alpha=alpha, zeta=zeta))


def kernel_to_json_dict(K: MarginalKernel) -> dict:
    """Row-major JSON form {"n": ..., "entries": [...]}."""
    return {"n": K.n, "entries": [float(x) for x in K.entries.reshape(-1)]}


def kernel_from_json_dict(obj: dict) -> MarginalKernel:
    n = int(obj["n"])
    entries = np.asarray(obj["entries"], dtype=float)
    if entries.shape != (n * n,):
        raise DimensionMismatch(
            f"kernel file claims n={n} but carries {entries.size} entries"
        )
    return validate(entries.reshape(n, n))


def distribution_to_json_dict(p: DiscreteDistribution) -> dict:
    return {"n": p.n, "probs": [float(x) for x in p.probs]}


def distribution_from_json_dict(obj: dict) -> DiscreteDistribution:
    n = int(obj["n"])
    probs = np.asarray(obj["probs"], dtype=float)
    return DiscreteDistribution(n=n, probs=probs)
