"""Distribution testing for determinantal point processes.

Exact atom probabilities and sampling for DPPs over small ground sets,
marginal-bracketing kernel learning, the chi-square/L1 identity test and
its full tester loop, the coupled sampler behind the general-DPP
reduction, the hard-instance family used for lower-bound experiments,
and a brute-force oracle that cross-checks all of it.
"""

from .errors import (
    CandidateBudgetExceeded,
    DegenerateZ,
    DegenerateZeta,
    DimensionMismatch,
    DppTestError,
    EmptyBatch,
    EpsilonPrimeOutOfRange,
    FamilyMemberNotLogSubmodular,
    GroundSetTooLarge,
    InsufficientSamples,
    NormalityViolated,
    NotSymmetric,
    NotWitness,
    PreconditionViolated,
    SampleFormatError,
    SingularB,
    SpectrumOutOfRange,
    TooLarge,
)
from .estimator import (
    BracketingParams,
    CandidateGrid,
    EmpiricalMarginals,
    bracketing_params,
    candidate_grid,
    empirical_marginals,
    enumerate_candidates,
    grid_to_json_dict,
    magnitude_estimates,
)
from .hardness import (
    HardInstance,
    WitnessSet,
    hard_instance,
    hard_instance_from_json_dict,
    hard_instance_from_signs,
    hard_instance_to_json_dict,
    helper_inequality,
    is_log_submodular,
    is_witness,
    l1_to_log_submodular_lb,
    random_dpp_table,
    random_product_table,
    rho,
    vs_contribution,
    witness_set,
)
from .kernel import (
    DiscreteDistribution,
    MarginalKernel,
    NormalityBounds,
    atom_probability,
    det_perturbation_bound,
    distribution_from_json_dict,
    distribution_to_json_dict,
    exact_distribution,
    kernel_from_json_dict,
    kernel_to_json_dict,
    marginal,
    min_singular_check,
    project_box,
    random_normal_kernel,
    validate,
)
from .oracle import atom_probability_ie, det_naive, distances
from .sampler import (
    CoupledBatch,
    ElementaryStage,
    SampleBatch,
    sample_coupled,
    sample_dpp,
    sample_table,
)
from .suites import SuiteResult, run_all_suites
from .tester import (
    GeneralMode,
    NormalMode,
    SubsetCounts,
    TestVerdict,
    c2_lower_bound,
    chi2_l1_statistic,
    chi2_l1_test,
    dpp_tester,
    general_mode_params,
    required_samples,
)

__version__ = "0.1.0"

__all__ = [
    "BracketingParams",
    "CandidateBudgetExceeded",
    "CandidateGrid",
    "CoupledBatch",
    "DegenerateZ",
    "DegenerateZeta",
    "DimensionMismatch",
    "DiscreteDistribution",
    "DppTestError",
    "ElementaryStage",
    "EmpiricalMarginals",
    "EmptyBatch",
    "EpsilonPrimeOutOfRange",
    "FamilyMemberNotLogSubmodular",
    "GeneralMode",
    "GroundSetTooLarge",
    "HardInstance",
    "InsufficientSamples",
    "MarginalKernel",
    "NormalMode",
    "NormalityBounds",
    "NormalityViolated",
    "NotSymmetric",
    "NotWitness",
    "PreconditionViolated",
    "SampleBatch",
    "SampleFormatError",
    "SingularB",
    "SpectrumOutOfRange",
    "SubsetCounts",
    "SuiteResult",
    "TestVerdict",
    "TooLarge",
    "WitnessSet",
    "atom_probability",
    "atom_probability_ie",
    "bracketing_params",
    "c2_lower_bound",
    "candidate_grid",
    "chi2_l1_statistic",
    "chi2_l1_test",
    "det_naive",
    "det_perturbation_bound",
    "distances",
    "distribution_from_json_dict",
    "distribution_to_json_dict",
    "dpp_tester",
    "empirical_marginals",
    "enumerate_candidates",
    "exact_distribution",
    "general_mode_params",
    "grid_to_json_dict",
    "hard_instance",
    "hard_instance_from_json_dict",
    "hard_instance_from_signs",
    "hard_instance_to_json_dict",
    "helper_inequality",
    "is_log_submodular",
    "is_witness",
    "kernel_from_json_dict",
    "kernel_to_json_dict",
    "l1_to_log_submodular_lb",
    "magnitude_estimates",
    "marginal",
    "min_singular_check",
    "project_box",
    "random_dpp_table",
    "random_normal_kernel",
    "random_product_table",
    "required_samples",
    "rho",
    "run_all_suites",
    "sample_coupled",
    "sample_dpp",
    "sample_table",
    "validate",
    "vs_contribution",
    "witness_set",
]
