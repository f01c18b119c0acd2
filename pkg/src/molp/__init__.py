"""One-exact approximate Pareto sets for multiobjective minimization.

A solution set is *one-exact* at factor epsilon when every feasible solution
is matched by a member that is no worse in the first objective and within
factor ``1+epsilon`` in all others.  The library computes such sets through
pluggable scalarization oracles, ships adapters for explicit lists,
biobjective shortest path and min-cost-makespan scheduling, and carries its
own brute-force verification layer.
"""

from .core import (
    ApproxFactor,
    ContractViolationError,
    DenominatorCapError,
    EpsilonSchedule,
    EvaluatedSolution,
    InvalidParameterError,
    MolpError,
    ObjectiveVector,
    ParseError,
    ProblemHandle,
    Rational,
    UnsupportedOracleError,
    ValidationError,
    alpha_dominates,
    derive_delta,
    dominates,
    one_exact_alpha,
    parse_rational,
)
from .oracles import (
    OracleAudit,
    constrained,
    constrained_via_dual_restrict,
    dual_restrict,
    dual_restrict_via_pareto_routine,
    reduce_dual_restrict1_via_restrict2,
    reduce_restrict2_via_dual_restrict1,
    restrict,
)
from .algorithms import (
    ParetoRunResult,
    adaptive_sweep,
    alternating_sweep,
    greedy_minimum,
    grid_sweep,
    stripe_cover,
)
from .problems import (
    ExplicitInstance,
    GraphInstance,
    SchedulingInstance,
    explicit_oracles,
    load_instance,
    scheduling_handle,
    shortest_path_handle,
)
from .generators import (
    near_twin_instance,
    partition_reduction,
    random_explicit_instance,
    staircase_instance,
    triple_staircase_instance,
)
from .verify import (
    VerificationReport,
    audit_summary,
    brute_force_pareto,
    exhaustive_min_cover,
    exhaustive_min_one_exact,
    verify_one_exact,
)

__version__ = "0.1.0"
