"""Parallel ensemble sampler with late Metropolis adjustment."""

from ._core import (
    Target,
    RunResult,
    banana,
    standard_gaussian,
    icg,
    custom_target,
    run,
    grads_to_threshold,
    equipartition_gaussian,
    __version__,
)

__all__ = [
    "Target",
    "RunResult",
    "banana",
    "standard_gaussian",
    "icg",
    "custom_target",
    "run",
    "grads_to_threshold",
    "equipartition_gaussian",
    "__version__",
]
