"""Exception hierarchy for dpptest.

Every failure mode that callers are expected to branch on gets its own
class; anything that can only be a caller bug stays a plain ValueError.
"""

from __future__ import annotations


class DppTestError(Exception):
    """Base class for all dpptest-specific failures."""


class NotSymmetric(DppTestError):
    """Input matrix is not square-symmetric within tolerance."""


class SpectrumOutOfRange(DppTestError):
    """An eigenvalue violates [0, 1] by more than the dust tolerance."""


class GroundSetTooLarge(DppTestError):
    """Ground set exceeds the cap for full 2^n enumeration."""


class NormalityViolated(DppTestError):
    """Kernel spectrum leaves the required [zeta, 1 - zeta] band."""


class SingularB(DppTestError):
    """Base matrix of the perturbation bound has a zero singular value."""


class EmptyBatch(DppTestError):
    """A sample batch with zero draws where at least one is required."""


class DegenerateZeta(DppTestError):
    """zeta = 0 leaves the bracket count undefined."""


class DegenerateZ(DppTestError):
    """Clamping level z reached 0.5; the clamped spectrum collapses."""


class CandidateBudgetExceeded(DppTestError):
    """Candidate count |M| is over the configured cap and no override given."""


class InsufficientSamples(DppTestError):
    """Batch is smaller than the required sample count for this test."""


class DimensionMismatch(DppTestError):
    """Operands are defined over different ground sets or shapes."""


class EpsilonPrimeOutOfRange(DppTestError):
    """Perturbation size eps_prime outside (0, 2/3]."""


class PreconditionViolated(DppTestError):
    """A stated precondition of a numeric helper does not hold."""


class NotWitness(DppTestError):
    """Subset is not a member of the witness family of the instance."""


class FamilyMemberNotLogSubmodular(DppTestError):
    """A comparison family member fails the log-submodularity check."""


class TooLarge(DppTestError):
    """Matrix too large for the naive cofactor determinant."""


class SampleFormatError(DppTestError):
    """Malformed sample file; message carries the offending line number."""
