from ._aop import (
    AopError,
    Basis,
    build_basis,
    compute_metrics,
    conditional_prior,
    conditional_trace_variance,
    fit,
    generate_dataset,
    sample_prior,
    true_functions,
)

__all__ = [
    "AopError",
    "Basis",
    "build_basis",
    "compute_metrics",
    "conditional_prior",
    "conditional_trace_variance",
    "fit",
    "generate_dataset",
    "sample_prior",
    "true_functions",
]
