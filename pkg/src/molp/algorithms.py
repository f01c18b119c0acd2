"""Construction of one-exact approximate Pareto sets.

Five producers share one result shape:

* :func:`stripe_cover`   -- pick a minimum-first-objective point per
  geometric stripe (box queries; explicit adapters only).
* :func:`grid_sweep`     -- one dual-restrict call per cell of a fixed
  geometric grid over the bounded objectives; any number of objectives.
* :func:`adaptive_sweep` -- biobjective descent that re-anchors the
  second-objective bound on what the oracle returns; output at most twice
  the smallest one-exact set for the effective factor.
* :func:`alternating_sweep` -- biobjective interleaving of restrict and
  dual-restrict queries with the same factor-2 size guarantee and exactly
  one call of each kind per iteration.
* :func:`greedy_minimum` -- exact-oracle greedy producing a smallest
  one-exact set outright.

Every producer takes the target factor ``epsilon`` and derives its rational
step ratio ``delta`` with :func:`molp.core.derive_delta`; the effective
factor ``(1+delta)**k - 1 <= epsilon`` is reported in the result schedule.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .core import (
    ContractViolationError,
    DEFAULT_DENOMINATOR_CAP,
    EpsilonSchedule,
    EvaluatedSolution,
    InvalidParameterError,
    ProblemHandle,
    UnsupportedOracleError,
    derive_delta,
    dominates,
    geometric_power,
    min_exponent_at_least,
    two_pow,
)
from . import oracles
from .oracles import OracleAudit

__all__ = [
    "ParetoRunResult",
    "AdaptiveCheckpoint",
    "stripe_cover",
    "grid_sweep",
    "adaptive_sweep",
    "alternating_sweep",
    "greedy_minimum",
    "PHASE_PROBE",
    "PHASE_DESCEND",
    "PHASE_COMMIT",
    "PHASE_DONE",
]

PHASE_PROBE = "probe"
PHASE_DESCEND = "descend"
PHASE_COMMIT = "commit"
PHASE_DONE = "done"


@dataclass(frozen=True)
class ParetoRunResult:
    """A computed solution set plus everything needed to audit the run."""

    solutions: tuple[EvaluatedSolution, ...]
    audit: OracleAudit
    epsilon: Fraction
    schedule: Optional[EpsilonSchedule]
    stats: dict = field(default_factory=dict)
    trace: tuple[str, ...] = ()

    def images(self) -> list[tuple[Fraction, ...]]:
        return [s.image.values for s in self.solutions]

    def __len__(self) -> int:
        return len(self.solutions)


def _dedupe(solutions: Sequence[EvaluatedSolution]) -> tuple[EvaluatedSolution, ...]:
    seen: set[str] = set()
    kept = []
    for sol in solutions:
        if sol.witness not in seen:
            seen.add(sol.witness)
            kept.append(sol)
    return tuple(kept)


def _drop_dominated(solutions: Sequence[EvaluatedSolution]) -> tuple[EvaluatedSolution, ...]:
    return tuple(
        s
        for s in solutions
        if not any(dominates(o.image, s.image) for o in solutions if o is not s)
    )


def _finish(solutions, audit, epsilon, schedule, stats, filter_dominated, trace=()):
    kept = _dedupe(solutions)
    if filter_dominated:
        kept = _drop_dominated(kept)
    stats = dict(stats)
    stats["set_size"] = len(kept)
    return ParetoRunResult(
        solutions=kept,
        audit=audit,
        epsilon=Fraction(epsilon),
        schedule=schedule,
        stats=stats,
        trace=tuple(trace),
    )


# ---------------------------------------------------------------------------
# Stripe cover (box queries)
# ---------------------------------------------------------------------------


def stripe_cover(
    handle: ProblemHandle,
    epsilon: Fraction,
    filter_dominated: bool = False,
) -> ParetoRunResult:
    """One minimum-first-objective point per geometric hyperstripe.

    The value cube is covered by stripes spanning the full first-objective
    range and one factor-``(1+epsilon)`` interval per other objective; a
    stripe's minimum-first point one-exact-approximates everything in the
    stripe.  Needs box-query capability.
    """
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise InvalidParameterError("epsilon must be positive")
    if not handle.has_box_query:
        raise UnsupportedOracleError("stripe cover needs box queries")
    ratio = 1 + epsilon
    u = min_exponent_at_least(ratio, two_pow(handle.M))
    audit = OracleAudit()
    chosen: list[EvaluatedSolution] = []
    stripes_hit = 0
    for cell in itertools.product(range(-u, u), repeat=handle.p - 1):
        lows = tuple(geometric_power(ratio, i) for i in cell)
        highs = tuple(geometric_power(ratio, i + 1) for i in cell)
        answer = oracles.box_min_first(handle, lows, highs, audit)
        if answer is not None:
            stripes_hit += 1
            chosen.append(answer)
    stats = {"stripes": (2 * u) ** (handle.p - 1), "stripes_hit": stripes_hit, "u": u}
    return _finish(chosen, audit, epsilon, None, stats, filter_dominated)


# ---------------------------------------------------------------------------
# Fixed-grid sweep
# ---------------------------------------------------------------------------


def grid_sweep(
    handle: ProblemHandle,
    epsilon: Fraction,
    denominator_cap: int = DEFAULT_DENOMINATOR_CAP,
    filter_dominated: bool = False,
    parallel: bool = False,
    max_workers: Optional[int] = None,
) -> ParetoRunResult:
    """One dual-restrict call per cell of a geometric bound grid.

    The step ratio is the square-root schedule, so a returned point covers
    the full stripe below its own cell.  The number of calls is exactly
    ``(2*u)**(p-1)`` with ``u`` the least exponent driving ``1+delta`` past
    ``2**M``.  Cells are independent; ``parallel=True`` solves them in a
    thread pool and merges answers (and audit records) in cell order, so
    output is identical to the sequential run.
    """
    schedule = derive_delta(Fraction(epsilon), 2, denominator_cap)
    if not handle.has_dual_restrict(0):
        raise UnsupportedOracleError("grid sweep needs first-objective dual restrict")
    d = schedule.delta
    ratio = 1 + d
    u = min_exponent_at_least(ratio, two_pow(handle.M))
    audit = OracleAudit()
    cells = list(itertools.product(range(-u + 1, u + 1), repeat=handle.p - 1))
    bounds_list = [
        tuple(geometric_power(ratio, i) for i in cell) for cell in cells
    ]
    chosen: list[EvaluatedSolution] = []
    if parallel:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            answers = list(
                pool.map(lambda b: handle.dual_restrict(0, d, b, audit=None), bounds_list)
            )
        for bounds, answer in zip(bounds_list, answers):
            audit.record(oracles.DUAL_RESTRICT, 0, d, bounds, answer)
            if answer is not None:
                chosen.append(answer)
    else:
        for bounds in bounds_list:
            answer = oracles.dual_restrict(handle, 0, d, bounds, audit)
            if answer is not None:
                chosen.append(answer)
    stats = {"cells": len(cells), "u": u, "calls": len(audit)}
    return _finish(chosen, audit, epsilon, schedule, stats, filter_dominated)


# ---------------------------------------------------------------------------
# Adaptive biobjective sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdaptiveCheckpoint:
    """Run state at the inner-loop test of the adaptive sweep: both the
    current anchor and its follow-up probe are solutions, and the bound sits
    two steps below the anchor."""

    current: EvaluatedSolution
    probe: EvaluatedSolution
    s2: Fraction
    committed: tuple[EvaluatedSolution, ...]
    delta: Fraction


def _check_adaptive_invariants(cp: AdaptiveCheckpoint) -> None:
    d = cp.delta
    if cp.s2 != cp.current.image[1] / (1 + d) ** 2:
        raise ContractViolationError("bound is not two steps below the anchor")
    if cp.probe.image[1] > cp.current.image[1] / (1 + d):
        raise ContractViolationError("probe did not descend a full step")
    if cp.probe.image[0] < cp.current.image[0]:
        raise ContractViolationError("probe improved the exact objective")
    if cp.committed:
        committed_min = min(s.image[1] for s in cp.committed)
        if cp.current.image[1] > committed_min / (1 + d) ** 3:
            raise ContractViolationError("anchor too close to the committed set")


def adaptive_sweep(
    handle: ProblemHandle,
    epsilon: Fraction,
    denominator_cap: int = DEFAULT_DENOMINATOR_CAP,
    filter_dominated: bool = False,
    check_invariants: bool = False,
    checkpoint: Optional[Callable[[AdaptiveCheckpoint], None]] = None,
) -> ParetoRunResult:
    """Biobjective adaptive descent on the second-objective bound.

    Starting from the top of the value range, each answer re-anchors the
    bound at its own second objective shrunk by two quarter-root steps; as
    long as the follow-up probe ties the anchor's first objective it
    replaces the anchor (it dominates it), otherwise the anchor is committed
    and the bound drops by the full effective factor.  The run is a
    three-phase machine (probe / descend / commit) and stops at the first NO.

    ``check_invariants`` enforces the descent invariants from run state at
    every inner-loop test and the pairwise output spacing at the end;
    ``checkpoint`` receives the same state for external (oracle-truth)
    validation.
    """
    if handle.p != 2:
        raise UnsupportedOracleError("adaptive sweep is biobjective only")
    schedule = derive_delta(Fraction(epsilon), 4, denominator_cap)
    if not handle.has_dual_restrict(0):
        raise UnsupportedOracleError("adaptive sweep needs first-objective dual restrict")
    d = schedule.delta
    shrink2 = (1 + d) ** 2
    one_plus_eff = 1 + schedule.effective_epsilon
    audit = OracleAudit()
    committed: list[EvaluatedSolution] = []
    trace: list[str] = []
    s2 = two_pow(handle.M)
    iterations = 0

    def solve(bound: Fraction) -> Optional[EvaluatedSolution]:
        return oracles.dual_restrict(handle, 0, d, (bound,), audit)

    def step_bound(new_value: Fraction, old_value: Fraction) -> Fraction:
        if check_invariants and new_value > old_value / (1 + d):
            raise ContractViolationError("bound step smaller than one ratio")
        return new_value

    phase = PHASE_PROBE
    current: Optional[EvaluatedSolution] = None
    probe: Optional[EvaluatedSolution] = None
    while phase != PHASE_DONE:
        trace.append(phase)
        iterations += 1
        if phase == PHASE_PROBE:
            current = solve(s2)
            if current is None:
                phase = PHASE_DONE
                continue
            s2 = step_bound(current.image[1] / shrink2, s2)
            probe = solve(s2)
            if probe is None:
                committed.append(current)
                phase = PHASE_DONE
            else:
                phase = PHASE_DESCEND
        elif phase == PHASE_DESCEND:
            state = AdaptiveCheckpoint(current, probe, s2, tuple(committed), d)
            if check_invariants:
                _check_adaptive_invariants(state)
            if checkpoint is not None:
                checkpoint(state)
            if probe.image[0] == current.image[0]:
                current = probe
                s2 = step_bound(current.image[1] / shrink2, s2)
                probe = solve(s2)
                if probe is None:
                    committed.append(current)
                    phase = PHASE_DONE
            else:
                phase = PHASE_COMMIT
        elif phase == PHASE_COMMIT:
            committed.append(current)
            s2 = step_bound(current.image[1] / one_plus_eff, s2)
            phase = PHASE_PROBE
    trace.append(PHASE_DONE)

    if check_invariants:
        unique = _dedupe(committed)
        ordered = sorted(unique, key=lambda s: s.image[1])
        for a, b in zip(ordered, ordered[1:]):
            if b.image[1] < (1 + d) ** 3 * a.image[1]:
                raise ContractViolationError("committed answers spaced too tightly")

    stats = {"iterations": iterations, "calls": len(audit)}
    return _finish(
        committed, audit, epsilon, schedule, stats, filter_dominated, trace
    )


# ---------------------------------------------------------------------------
# Alternating biobjective sweep
# ---------------------------------------------------------------------------


def alternating_sweep(
    handle: ProblemHandle,
    epsilon: Fraction,
    denominator_cap: int = DEFAULT_DENOMINATOR_CAP,
    filter_dominated: bool = False,
) -> ParetoRunResult:
    """Biobjective sweep alternating second-objective restrict with
    first-objective dual-restrict, one call of each per iteration.

    Each iteration pushes the first-objective budget strictly below the last
    answer (by one separation step) and grows the second-objective bound by
    at least the cube-root ratio, with the effective factor capping the
    growth; the output has the same factor-2 size guarantee as the adaptive
    sweep against the smallest one-exact set for the effective factor.
    """
    if handle.p != 2:
        raise UnsupportedOracleError("alternating sweep is biobjective only")
    schedule = derive_delta(Fraction(epsilon), 3, denominator_cap)
    if not (handle.has_restrict(1) and handle.has_dual_restrict(0)):
        raise UnsupportedOracleError(
            "alternating sweep needs second-objective restrict and first-objective dual restrict"
        )
    d = schedule.delta
    grow = (1 + schedule.effective_epsilon) / (1 + d)
    step = two_pow(-2 * handle.M)
    top = two_pow(handle.M)
    audit = OracleAudit()
    one = Fraction(1)

    gate = oracles.restrict(handle, 1, one, (top,), audit)
    if gate is None:
        return _finish([], audit, epsilon, schedule, {"iterations": 0, "calls": len(audit)}, filter_dominated)

    def must(answer: Optional[EvaluatedSolution]) -> EvaluatedSolution:
        if answer is None:
            raise ContractViolationError("adapter answered NO on a nonempty region")
        return answer

    leftmost = must(oracles.dual_restrict(handle, 0, one, (top,), audit))
    anchor = must(oracles.restrict(handle, 1, d, (top,), audit))
    s2 = (1 + d) * anchor.image[1]
    current = must(oracles.dual_restrict(handle, 0, d, (s2,), audit))
    b1 = current.image[0] - step
    chosen = [current]
    iterations = 0
    while b1 >= leftmost.image[0]:
        iterations += 1
        anchor = must(oracles.restrict(handle, 1, d, (b1,), audit))
        s2 = grow * max(s2, anchor.image[1] / (1 + d))
        current = must(oracles.dual_restrict(handle, 0, d, (s2,), audit))
        b1 = current.image[0] - step
        chosen.append(current)
    stats = {"iterations": iterations, "calls": len(audit)}
    return _finish(chosen, audit, epsilon, schedule, stats, filter_dominated)


# ---------------------------------------------------------------------------
# Greedy minimum (exact oracles)
# ---------------------------------------------------------------------------


def _constrained_any(handle, index, bounds, audit):
    if handle.has_constrained(index):
        return oracles.constrained(handle, index, bounds, audit)
    if handle.has_dual_restrict(index):
        return oracles.constrained_via_dual_restrict(handle, index, bounds, audit)
    raise UnsupportedOracleError(f"no exact constrained route for index {index}")


def greedy_minimum(
    handle: ProblemHandle,
    epsilon: Fraction,
    filter_dominated: bool = False,
) -> ParetoRunResult:
    """Smallest one-exact set via exact budget-constrained oracles.

    Right to left: take the exact first-objective optimum under a
    second-objective budget one factor above the best reachable second
    objective, then move the first-objective budget one separation step past
    the answer and repeat.  Every answer is necessary and the set of answers
    suffices, so the output has minimum cardinality.  Uses
    ``2*|output| + 1`` constrained calls.
    """
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise InvalidParameterError("epsilon must be positive")
    if handle.p != 2:
        raise UnsupportedOracleError("greedy minimum is biobjective only")
    one_plus_eps = 1 + epsilon
    step = two_pow(-2 * handle.M)
    top = two_pow(handle.M)
    audit = OracleAudit()

    gate = _constrained_any(handle, 1, (top,), audit)
    if gate is None:
        return _finish([], audit, epsilon, None, {"iterations": 0, "calls": len(audit)}, filter_dominated)

    def must(answer):
        if answer is None:
            raise ContractViolationError("adapter answered NO on a nonempty region")
        return answer

    leftmost = must(_constrained_any(handle, 0, (top,), audit))
    anchor = gate
    b2 = one_plus_eps * anchor.image[1]
    current = must(_constrained_any(handle, 0, (b2,), audit))
    b1 = current.image[0] - step
    chosen = [current]
    iterations = 0
    while b1 >= leftmost.image[0]:
        iterations += 1
        anchor = must(_constrained_any(handle, 1, (b1,), audit))
        b2 = one_plus_eps * anchor.image[1]
        current = must(_constrained_any(handle, 0, (b2,), audit))
        b1 = current.image[0] - step
        chosen.append(current)
    stats = {"iterations": iterations, "calls": len(audit)}
    return _finish(chosen, audit, epsilon, None, stats, filter_dominated)
