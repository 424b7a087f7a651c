"""Inverse optimization of paths, bipartite perfect matchings and arborescences
with several weight functions under the l1-norm, in exact rational arithmetic."""

from .errors import InstanceError, NegativeCycleError, NoPerfectMatchingError, TruncatedFamilyError
from .graphs import DeviationVector, Instance, parse_instance, serialize_instance
from .multi import (
    inverse_arborescence_multi,
    inverse_matching_multi,
    inverse_path_multi,
    separate_arborescence,
    solve_inverse_multi,
    verify_deviation,
    verify_witness,
)
from .oracle import (
    brute_force_optimum,
    brute_force_restricted,
    check_mildly_adequate_condition,
    enumerate_feasible,
    lower_bound,
    synthesize_counterexample_weight,
)
from .single import inverse_arborescence_single, inverse_matching_single, inverse_path_single, solve_inverse_single

__version__ = "0.1.0"
