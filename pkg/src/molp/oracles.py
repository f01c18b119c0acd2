"""Scalarization oracles: audited entry points and generic reductions.

Three subproblems are distinguished, each optimizing objective ``index``
subject to bounds on all other objectives (bounds are listed in ascending
objective order, skipping ``index``):

* ``constrained``    -- exact optimum, bounds met exactly.
* ``restrict``       -- optimum within factor ``1+delta``, bounds met exactly.
* ``dual_restrict``  -- value no worse than the bounded optimum, bounds
  relaxed by factor ``1+delta``.  NO is a valid answer only when no solution
  meets the bounds exactly, so NO and a solution may both be acceptable.

The reductions below turn an adapter for one subproblem into an answerer for
another on biobjective instances, and certify their answers through the
minimum-separation property of the value model rather than through any
assumption about which answers the adapter prefers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .core import (
    ContractViolationError,
    EvaluatedSolution,
    InvalidParameterError,
    ProblemHandle,
    UnsupportedOracleError,
    format_rational,
    two_pow,
)

__all__ = [
    "OracleAnswer",
    "AuditRecord",
    "OracleAudit",
    "constrained",
    "restrict",
    "dual_restrict",
    "box_min_first",
    "reduce_dual_restrict1_via_restrict2",
    "reduce_restrict2_via_dual_restrict1",
    "constrained_via_dual_restrict",
    "dual_restrict_via_pareto_routine",
]

OracleAnswer = Optional[EvaluatedSolution]

CONSTRAINED = "constrained"
RESTRICT = "restrict"
DUAL_RESTRICT = "dual_restrict"
BOX = "box"


@dataclass(frozen=True, slots=True)
class AuditRecord:
    kind: str
    index: int
    delta: Optional[Fraction]
    bounds: tuple[Fraction, ...]
    answer: Optional[tuple[Fraction, ...]]  # image values, or None for NO
    ordinal: int

    def to_line(self) -> str:
        """Tab-separated export; objective indices are printed 1-based."""
        delta_text = format_rational(self.delta) if self.delta is not None else "-"
        bounds_text = " ".join(format_rational(b) for b in self.bounds)
        if self.answer is None:
            answer_text = "NO"
        else:
            answer_text = " ".join(format_rational(v) for v in self.answer)
        return "\t".join(
            [self.kind, str(self.index + 1), delta_text, bounds_text, answer_text]
        )


@dataclass
class OracleAudit:
    """Append-only ledger of oracle invocations, one record per call.

    Records are appended on call completion, so a reduction's inner probes
    precede its own record.  An audit belongs to a single run context and is
    the only mutable state in the oracle layer.
    """

    records: list[AuditRecord] = field(default_factory=list)

    def record(
        self,
        kind: str,
        index: int,
        delta: Optional[Fraction],
        bounds: Sequence[Fraction],
        answer: OracleAnswer,
    ) -> None:
        image = tuple(answer.image.values) if answer is not None else None
        self.records.append(
            AuditRecord(kind, index, delta, tuple(bounds), image, len(self.records))
        )

    def __len__(self) -> int:
        return len(self.records)

    def count(self, kind: str) -> int:
        return sum(1 for r in self.records if r.kind == kind)

    def export_lines(self) -> list[str]:
        return [r.to_line() for r in self.records]


def _check_bounds(handle: ProblemHandle, index: int, bounds: Sequence[Fraction]) -> None:
    if not 0 <= index < handle.p:
        raise ContractViolationError(f"objective index {index} out of range")
    if len(bounds) != handle.p - 1:
        raise ContractViolationError(
            f"expected {handle.p - 1} bounds, got {len(bounds)}"
        )
    for b in bounds:
        if b <= 0:
            raise InvalidParameterError(f"bounds must be positive, got {b}")


def constrained(
    handle: ProblemHandle,
    index: int,
    bounds: Sequence[Fraction],
    audit: Optional[OracleAudit] = None,
) -> OracleAnswer:
    """Exact budget-constrained optimum of objective ``index``."""
    _check_bounds(handle, index, bounds)
    if not handle.has_constrained(index):
        raise UnsupportedOracleError(f"no exact constrained oracle for index {index}")
    answer = handle.constrained(index, tuple(bounds), audit=audit)
    if audit is not None:
        audit.record(CONSTRAINED, index, None, bounds, answer)
    return answer


def restrict(
    handle: ProblemHandle,
    index: int,
    delta: Fraction,
    bounds: Sequence[Fraction],
    audit: Optional[OracleAudit] = None,
) -> OracleAnswer:
    """Bounds met exactly, optimized objective within factor ``1+delta``."""
    _check_bounds(handle, index, bounds)
    if delta <= 0:
        raise InvalidParameterError("delta must be positive")
    if not handle.has_restrict(index):
        raise UnsupportedOracleError(f"no restrict oracle for index {index}")
    answer = handle.restrict(index, delta, tuple(bounds), audit=audit)
    if audit is not None:
        audit.record(RESTRICT, index, delta, bounds, answer)
    return answer


def dual_restrict(
    handle: ProblemHandle,
    index: int,
    delta: Fraction,
    bounds: Sequence[Fraction],
    audit: Optional[OracleAudit] = None,
) -> OracleAnswer:
    """Optimized objective no worse than the bounded optimum, bounds relaxed
    by factor ``1+delta``."""
    _check_bounds(handle, index, bounds)
    if delta <= 0:
        raise InvalidParameterError("delta must be positive")
    if not handle.has_dual_restrict(index):
        raise UnsupportedOracleError(f"no dual restrict oracle for index {index}")
    answer = handle.dual_restrict(index, delta, tuple(bounds), audit=audit)
    if audit is not None:
        audit.record(DUAL_RESTRICT, index, delta, bounds, answer)
    return answer


def box_min_first(
    handle: ProblemHandle,
    lows: Sequence[Fraction],
    highs: Sequence[Fraction],
    audit: Optional[OracleAudit] = None,
) -> OracleAnswer:
    """Minimum-first-objective point within a closed stripe on objectives
    2..p; available only on adapters with box-query capability."""
    if not handle.has_box_query:
        raise UnsupportedOracleError("box queries not available")
    answer = handle.min_first_in_stripe(tuple(lows), tuple(highs))
    if audit is not None:
        audit.record(BOX, 0, None, tuple(lows) + tuple(highs), answer)
    return answer


# ---------------------------------------------------------------------------
# Biobjective grid bisection shared by both reduction directions.
#
# The search grid is the set of integer multiples of 2**(-2M) in
# [2**-M, 2**M].  Feasible values need not lie on the grid; certification at
# a grid transition relies only on the 2**(-2M) minimum separation between
# distinct feasible values.
# ---------------------------------------------------------------------------


def _grid_bisect(probe: Callable[[Fraction], OracleAnswer], M: int) -> OracleAnswer:
    """Find a transition of ``probe`` over the budget grid.

    ``probe(value)`` returns a witness when the budget ``value`` is accepted
    and None otherwise; acceptance must be guaranteed for every grid value at
    or above some (unknown) threshold.  Returns the witness found at the low
    end of a (reject, accept) transition, or None when the top budget is
    rejected.
    """
    step = two_pow(-2 * M)
    lo_value = two_pow(-M)
    top = (two_pow(M) - lo_value) / step
    assert top.denominator == 1
    top_index = int(top)

    def value_at(t: int) -> Fraction:
        return lo_value + t * step

    witness = probe(value_at(top_index))
    if witness is None:
        return None
    # invariant: rejected at lo (lo = -1 stands for "below the value range",
    # where rejection is forced), accepted at hi with a stored witness
    lo, hi = -1, top_index
    while hi - lo > 1:
        mid = (lo + hi) // 2
        candidate = probe(value_at(mid))
        if candidate is not None:
            hi, witness = mid, candidate
        else:
            lo = mid
    return witness


def reduce_dual_restrict1_via_restrict2(
    handle: ProblemHandle,
    delta: Fraction,
    s2: Fraction,
    audit: Optional[OracleAudit] = None,
) -> OracleAnswer:
    """Answer a first-objective dual-restrict query with binary search over
    second-objective restrict queries (biobjective only).

    Bisects the first-objective budget over the separation grid; a probe is
    accepted when the restrict answer exists and already satisfies the
    relaxed second-objective bound.  At a transition (reject at ``B``,
    accept at ``B + 2**(-2M)``) the rejection certifies that every solution
    with second objective within ``s2`` has first objective above ``B``, and
    minimum separation then pins the accepted witness at or below the bounded
    optimum.  At most ``3*M + 1`` restrict calls are made.
    """
    if handle.p != 2:
        raise UnsupportedOracleError("reduction defined for biobjective handles")
    if delta <= 0 or s2 <= 0:
        raise InvalidParameterError("delta and bound must be positive")
    if not handle.has_restrict(1):
        raise UnsupportedOracleError("no restrict oracle for the second objective")
    relaxed = (1 + delta) * s2

    def probe(b1: Fraction) -> OracleAnswer:
        answer = restrict(handle, 1, delta, (b1,), audit)
        if answer is not None and answer.image[1] <= relaxed:
            return answer
        return None

    return _grid_bisect(probe, handle.M)


def reduce_restrict2_via_dual_restrict1(
    handle: ProblemHandle,
    delta: Fraction,
    b1: Fraction,
    audit: Optional[OracleAudit] = None,
) -> OracleAnswer:
    """Answer a second-objective restrict query with binary search over
    first-objective dual-restrict queries (biobjective only).

    Bisects the second-objective bound over the separation grid; a probe at
    bound ``S`` is accepted when the dual-restrict answer exists and meets
    the first-objective budget.  When values sit on the grid the caller's
    ``delta`` is probed directly.  Off-grid values need a slightly tighter
    probe ratio (the accepted bound can overshoot the true optimum by one
    grid step, a relative error of at most ``2**-M``); when even that is
    unavailable because ``delta <= 2**-M``, exact constrained probes are
    used, which pin the optimum exactly at the transition.
    """
    if handle.p != 2:
        raise UnsupportedOracleError("reduction defined for biobjective handles")
    if delta <= 0 or b1 <= 0:
        raise InvalidParameterError("delta and budget must be positive")
    if not handle.has_dual_restrict(0):
        raise UnsupportedOracleError("no dual restrict oracle for the first objective")
    M = handle.M

    if handle.values_on_grid:
        probe_delta = delta
    else:
        tightened = (delta - two_pow(-M)) / (1 + two_pow(-M))
        probe_delta = tightened if tightened > 0 else None

    if probe_delta is not None:

        def probe(s2: Fraction) -> OracleAnswer:
            answer = dual_restrict(handle, 0, probe_delta, (s2,), audit)
            if answer is not None and answer.image[0] <= b1:
                return answer
            return None

    else:

        def probe(s2: Fraction) -> OracleAnswer:
            answer = constrained_via_dual_restrict(handle, 0, (s2,), audit)
            if answer is not None and answer.image[0] <= b1:
                return answer
            return None

    return _grid_bisect(probe, M)


def _exactifying_delta(M: int, bounds: Sequence[Fraction]) -> Fraction:
    """A probe ratio so small the relaxation cannot span half a separation
    step: ``delta * B <= 2**(-2M-1)`` for every bound ``B`` in play."""
    delta = two_pow(-3 * M - 1)
    half_step = two_pow(-2 * M - 1)
    for b in bounds:
        if delta * b > half_step:
            delta = half_step / b
    return delta


def constrained_via_dual_restrict(
    handle: ProblemHandle,
    index: int,
    bounds: Sequence[Fraction],
    audit: Optional[OracleAudit] = None,
) -> OracleAnswer:
    """Exact constrained answer built from dual-restrict probes.

    Probes with a ratio small enough that any bound violation by the answer
    lands strictly within one separation step above the violated bound.  A
    violating answer therefore cannot share a value with any solution meeting
    that bound, so the bound can be tightened to just below the violating
    value without changing the feasible region, and the probe repeated.  The
    loop ends with either NO (region empty) or a witness meeting every bound,
    whose optimized value is exact by the dual-restrict guarantee.
    """
    _check_bounds(handle, index, bounds)
    if not handle.has_dual_restrict(index):
        raise UnsupportedOracleError(f"no dual restrict oracle for index {index}")
    step = two_pow(-2 * handle.M)
    others = [j for j in range(handle.p) if j != index]
    current = list(bounds)
    result: OracleAnswer = None
    while True:
        probe_delta = _exactifying_delta(handle.M, current)
        answer = dual_restrict(handle, index, probe_delta, current, audit)
        if answer is None:
            break
        violated = [k for k, j in enumerate(others) if answer.image[j] > current[k]]
        if not violated:
            result = answer
            break
        for k in violated:
            # values are at least 2**-M > step, so the new bound stays positive
            current[k] = answer.image[others[k]] - step
    if audit is not None:
        audit.record(CONSTRAINED, index, None, bounds, result)
    return result


def dual_restrict_via_pareto_routine(
    routine: Callable[[ProblemHandle, Fraction], Sequence[EvaluatedSolution]],
    handle: ProblemHandle,
    delta: Fraction,
    bounds: Sequence[Fraction],
    audit: Optional[OracleAudit] = None,
) -> OracleAnswer:
    """Answer a first-objective dual-restrict query from any routine that
    produces a one-exact approximate Pareto set at factor ``delta``.

    If no member of the produced set meets the relaxed bounds, NO is valid:
    a solution meeting the bounds exactly would have to be approximated by a
    member within the relaxation.  Otherwise the member with minimum first
    objective among those within the relaxed bounds is valid for the same
    reason.
    """
    _check_bounds(handle, 0, bounds)
    if delta <= 0:
        raise InvalidParameterError("delta must be positive")
    pareto = routine(handle, delta)
    candidates = [
        s
        for s in pareto
        if all(s.image[j + 1] <= (1 + delta) * b for j, b in enumerate(bounds))
    ]
    answer = None
    if candidates:
        answer = min(candidates, key=lambda s: (s.image[0], s.image.values, s.witness))
    if audit is not None:
        audit.record(DUAL_RESTRICT, 0, delta, bounds, answer)
    return answer
