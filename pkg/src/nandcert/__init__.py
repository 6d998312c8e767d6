"""Certificates for balanced NAND formulas, at desk scale.

Exhaustive certificate oracles and closed-form sizes, the randomized
zero-error evaluator with exact expectations, spectral adversary bounds
with explicit promise/search constructions, t-fold direct-sum
composition, and a query-cost simulation of the recursive certificate
finders with a zero-error cutoff-and-restart wrapper.
"""

from .formula import (
    Certificate,
    FormulaShape,
    brute_force_minimal_certificates,
    certifying_patterns,
    closed_form_cert_size,
    evaluate,
    forced_value,
    forced_value_partial,
    format_assignment,
    homogeneity_check,
    is_certificate,
    min_certificate_size,
    parse_assignment,
)
from .classical_eval import (
    EvalTrace,
    LambdaConstant,
    exact_expected_queries,
    growth_constant,
    monte_carlo_queries,
    randomized_evaluate,
    worst_case_expected,
    worst_case_recursive,
)
from .adversary import (
    AdversaryMatrix,
    DualWitness,
    FunctionTable,
    build_promise_gamma,
    build_search_gamma,
    build_two_level_promise_function,
    build_unique_search_function,
    dual_value,
    hadamard_difference_norm,
    optimize_dual,
    primal_value,
    query_lower_bound,
    spectral_norm,
    uniform_dual_witness,
)
from .direct_sum import (
    DirectSumRow,
    compose_dual,
    compose_gamma,
    kron_norm_check,
    product_function,
    verify_direct_sum,
)
from .cert_sim import (
    CostModel,
    CutoffExceeded,
    NonHaltingDetected,
    ProbeReport,
    RestartLimitExceeded,
    RunRecord,
    closed_form_bound,
    non_halting_probe,
    recurrence_expected_cost,
    simulate_certify,
    simulate_zero_error_wrapper,
    wrapper_cutoff,
)
from .caps import CapExceeded, Caps, current_caps

__version__ = "0.1.0"
