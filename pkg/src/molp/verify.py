"""Ground-truth checkers: brute-force nondominated sets, coverage
verification, exhaustive minimum covers, and audit summaries.

Everything here is deliberately independent of the construction algorithms:
checkers enumerate, they never reuse oracle plumbing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .core import (
    ApproxFactor,
    ContractViolationError,
    EvaluatedSolution,
    InvalidParameterError,
    alpha_dominates,
    dominates,
    format_rational,
    one_exact_alpha,
)
from .oracles import OracleAudit

__all__ = [
    "VerificationReport",
    "brute_force_pareto",
    "verify_one_exact",
    "exhaustive_min_cover",
    "exhaustive_min_one_exact",
    "AuditSummary",
    "audit_summary",
]

EXHAUSTIVE_CAP = 20


@dataclass(frozen=True)
class VerificationReport:
    verdict: bool
    witness: Optional[EvaluatedSolution] = None
    needed_factors: Optional[tuple[Fraction, ...]] = None
    metrics: dict = field(default_factory=dict)

    def to_text(self) -> str:
        lines = [f"verdict={'pass' if self.verdict else 'fail'}"]
        if self.witness is not None:
            lines.append(f"witness={self.witness.witness} {self.witness.image.to_text()}")
        if self.needed_factors is not None:
            lines.append(
                "needed_factors=" + " ".join(format_rational(v) for v in self.needed_factors)
            )
        for key in sorted(self.metrics):
            lines.append(f"{key}={self.metrics[key]}")
        return "\n".join(lines) + "\n"


def brute_force_pareto(universe: Sequence[EvaluatedSolution]) -> list[EvaluatedSolution]:
    """The nondominated members of an explicit solution universe.

    Solutions with equal images are collapsed to the one with the smallest
    witness token, so the result carries one witness per nondominated point.
    """
    by_image: dict[tuple, EvaluatedSolution] = {}
    for sol in universe:
        key = sol.image.values
        kept = by_image.get(key)
        if kept is None or sol.witness < kept.witness:
            by_image[key] = sol
    unique = sorted(by_image.values(), key=lambda s: (s.image.values, s.witness))
    result = []
    for sol in unique:
        if not any(dominates(other.image, sol.image) for other in unique if other is not sol):
            result.append(sol)
    return result


def verify_one_exact(
    chosen: Sequence[EvaluatedSolution],
    universe: Sequence[EvaluatedSolution],
    alpha: ApproxFactor,
) -> VerificationReport:
    """Check that every universe member is alpha-dominated by some chosen
    solution.  Chosen witnesses must re-evaluate to their claimed images
    inside the universe; anything else is a contract violation, not a fail.
    """
    by_token = {s.witness: s.image for s in universe}
    for sol in chosen:
        known = by_token.get(sol.witness)
        if known is None or known != sol.image:
            raise ContractViolationError(
                f"witness {sol.witness!r} is not a feasible solution of the instance"
            )
    for member in universe:
        if not any(alpha_dominates(sol.image, member.image, alpha) for sol in chosen):
            needed = None
            if chosen:
                ratios = [
                    tuple(si / mi for si, mi in zip(sol.image, member.image))
                    for sol in chosen
                ]
                needed = min(
                    ratios,
                    key=lambda r: (max(x / a for x, a in zip(r, alpha.alphas)), r),
                )
            return VerificationReport(
                verdict=False,
                witness=member,
                needed_factors=needed,
                metrics={"set_size": len(chosen), "universe_size": len(universe)},
            )
    return VerificationReport(
        verdict=True,
        metrics={"set_size": len(chosen), "universe_size": len(universe)},
    )


def _greedy_cover(masks: list[int], full: int) -> list[int]:
    chosen: list[int] = []
    covered = 0
    while covered != full:
        best_i = -1
        best_gain = -1
        for i, mask in enumerate(masks):
            gain = bin(mask & ~covered).count("1")
            if gain > best_gain:
                best_gain, best_i = gain, i
        if best_gain <= 0:
            raise ContractViolationError("cover is infeasible")
        chosen.append(best_i)
        covered |= masks[best_i]
    return chosen


def exhaustive_min_cover(
    universe: Sequence[EvaluatedSolution],
    alpha: ApproxFactor,
    cap: int = EXHAUSTIVE_CAP,
) -> tuple[int, list[EvaluatedSolution]]:
    """Minimum-cardinality subset alpha-dominating the whole universe.

    Branch and bound over the cover matrix: branch on the uncovered member
    with the fewest candidate coverers, seed the bound with a greedy cover.
    Deterministic: candidates are explored in instance order and the first
    minimum found at the final depth bound is returned.  Exponential in the
    worst case, hence the hard cap on universe size.
    """
    n = len(universe)
    if n > cap:
        raise InvalidParameterError(f"universe size {n} exceeds cap {cap}")
    if n == 0:
        return 0, []
    masks = []
    for sol in universe:
        mask = 0
        for j, member in enumerate(universe):
            if alpha_dominates(sol.image, member.image, alpha):
                mask |= 1 << j
        masks.append(mask)
    full = (1 << n) - 1
    greedy = _greedy_cover(masks, full)
    best_size = len(greedy)
    best_pick: Optional[list[int]] = sorted(greedy)

    coverers = [
        [i for i in range(n) if masks[i] >> j & 1] for j in range(n)
    ]

    pick: list[int] = []

    def search(covered: int, limit: int) -> bool:
        if covered == full:
            return True
        if limit == 0:
            return False
        uncovered = [j for j in range(n) if not covered >> j & 1]
        # cheap bound: one pick covers at most max-mask many members
        max_gain = max(bin(masks[i] & ~covered).count("1") for i in range(n))
        if len(uncovered) > limit * max_gain:
            return False
        j = min(uncovered, key=lambda j: len(coverers[j]))
        for i in coverers[j]:
            pick.append(i)
            if search(covered | masks[i], limit - 1):
                return True
            pick.pop()
        return False

    for size in range(1, best_size):
        pick.clear()
        if search(0, size):
            best_size = size
            best_pick = sorted(pick)
            break
    assert best_pick is not None
    return best_size, [universe[i] for i in best_pick]


def exhaustive_min_one_exact(
    universe: Sequence[EvaluatedSolution],
    epsilon: Fraction,
    cap: int = EXHAUSTIVE_CAP,
) -> tuple[int, list[EvaluatedSolution]]:
    """Minimum cardinality of a one-exact epsilon-cover, with one witness set."""
    if not universe:
        return 0, []
    p = universe[0].image.p
    return exhaustive_min_cover(universe, one_exact_alpha(Fraction(epsilon), p), cap)


@dataclass(frozen=True)
class AuditSummary:
    total: int
    by_kind: dict
    by_delta: dict
    max_inverse_delta: Optional[Fraction]


def audit_summary(audit: OracleAudit) -> AuditSummary:
    by_kind: dict[str, int] = {}
    by_delta: dict[Fraction, int] = {}
    max_inv: Optional[Fraction] = None
    for record in audit.records:
        by_kind[record.kind] = by_kind.get(record.kind, 0) + 1
        if record.delta is not None:
            by_delta[record.delta] = by_delta.get(record.delta, 0) + 1
            inv = 1 / record.delta
            if max_inv is None or inv > max_inv:
                max_inv = inv
    return AuditSummary(
        total=len(audit.records),
        by_kind=by_kind,
        by_delta=by_delta,
        max_inverse_delta=max_inv,
    )
