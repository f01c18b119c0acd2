"""Exact-arithmetic vocabulary for multiobjective minimization.

All objective values are exact rationals (``fractions.Fraction``); no
algorithmic path touches floating point.  Instances are assumed to satisfy a
bounded-value model parameterized by a nonnegative integer exponent ``M``:

* every objective value of every feasible solution lies in ``[2**-M, 2**M]``,
* two distinct values of the same objective differ by at least ``2**(-2*M)``.

Both properties are load-bearing: the adaptive algorithms subtract
``2**(-2*M)`` from budgets to step strictly past a value, and the bisection
reductions rely on the separation to certify transitions exactly.
"""

from __future__ import annotations

import re
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence

__all__ = [
    "Rational",
    "MolpError",
    "ContractViolationError",
    "InvalidParameterError",
    "DenominatorCapError",
    "UnsupportedOracleError",
    "ValidationError",
    "ParseError",
    "ObjectiveVector",
    "EvaluatedSolution",
    "ApproxFactor",
    "EpsilonSchedule",
    "ProblemHandle",
    "parse_rational",
    "format_rational",
    "dominates",
    "alpha_dominates",
    "one_exact_alpha",
    "derive_delta",
    "two_pow",
    "min_exponent_at_least",
    "geometric_power",
]

Rational = Fraction

DEFAULT_DENOMINATOR_CAP = 10**6


class MolpError(Exception):
    """Base class for all library errors."""


class ContractViolationError(MolpError):
    """An operation was called with arguments breaking its contract."""


class InvalidParameterError(MolpError):
    """A parameter is outside its documented domain."""


class DenominatorCapError(InvalidParameterError):
    """No positive step ratio exists under the requested denominator cap."""


class UnsupportedOracleError(MolpError):
    """The problem adapter does not provide the requested oracle."""


class ValidationError(MolpError):
    """An instance violates the bounded-value model or its own invariants."""


class ParseError(ValidationError):
    """A text artifact (instance, solution set, report input) is malformed."""


_RATIONAL_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


def parse_rational(text: str) -> Fraction:
    """Parse the canonical text form ``a`` or ``a/b`` (base 10)."""
    text = text.strip()
    if not _RATIONAL_RE.match(text):
        raise ParseError(f"not a rational literal: {text!r}")
    if "/" in text:
        num, den = text.split("/")
        if int(den) == 0:
            raise ParseError(f"zero denominator: {text!r}")
        return Fraction(int(num), int(den))
    return Fraction(int(text))


def format_rational(value: Fraction) -> str:
    """Canonical text form: ``a/b`` in lowest terms, or ``a`` for integers."""
    return str(value)


def two_pow(exponent: int) -> Fraction:
    """``2**exponent`` as an exact fraction; the exponent may be negative."""
    return Fraction(2) ** exponent


@dataclass(frozen=True, slots=True)
class ObjectiveVector:
    """A point in objective space: ``p >= 2`` strictly positive rationals."""

    values: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if len(self.values) < 2:
            raise ContractViolationError("objective vectors need at least 2 entries")
        for v in self.values:
            if not isinstance(v, Fraction):
                raise ContractViolationError(f"non-rational entry: {v!r}")
            if v <= 0:
                raise ContractViolationError(f"non-positive objective value: {v}")

    @classmethod
    def of(cls, *values) -> "ObjectiveVector":
        return cls(tuple(Fraction(v) for v in values))

    @classmethod
    def from_text(cls, text: str) -> "ObjectiveVector":
        return cls(tuple(parse_rational(tok) for tok in text.split()))

    def to_text(self) -> str:
        return " ".join(format_rational(v) for v in self.values)

    @property
    def p(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, index: int) -> Fraction:
        return self.values[index]

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self.values)


@dataclass(frozen=True, slots=True)
class EvaluatedSolution:
    """An opaque adapter-defined witness paired with its image.

    The witness token must be re-evaluable by the adapter that produced it;
    checkers use that to confirm the image was not fabricated.
    """

    witness: str
    image: ObjectiveVector


@dataclass(frozen=True, slots=True)
class ApproxFactor:
    """Componentwise approximation factors, each at least 1."""

    alphas: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        for a in self.alphas:
            if a < 1:
                raise ContractViolationError(f"approximation factor below 1: {a}")

    @classmethod
    def of(cls, *alphas) -> "ApproxFactor":
        return cls(tuple(Fraction(a) for a in alphas))

    def __len__(self) -> int:
        return len(self.alphas)

    def __getitem__(self, index: int) -> Fraction:
        return self.alphas[index]


def dominates(a: ObjectiveVector, b: ObjectiveVector) -> bool:
    """Strict Pareto dominance for minimization.

    True iff ``a`` is componentwise no worse than ``b`` and strictly better
    in at least one component.
    """
    if len(a) != len(b):
        raise ContractViolationError("dimension mismatch")
    strict = False
    for ai, bi in zip(a, b):
        if ai > bi:
            return False
        if ai < bi:
            strict = True
    return strict


def alpha_dominates(a: ObjectiveVector, b: ObjectiveVector, alpha: ApproxFactor) -> bool:
    """True iff ``a[i] <= alpha[i] * b[i]`` for every component."""
    if len(a) != len(b) or len(a) != len(alpha):
        raise ContractViolationError("dimension mismatch")
    return all(ai <= fi * bi for ai, bi, fi in zip(a, b, alpha.alphas))


def one_exact_alpha(epsilon: Fraction, p: int) -> ApproxFactor:
    """The factor vector ``(1, 1+eps, ..., 1+eps)`` of length ``p``."""
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise InvalidParameterError("epsilon must be positive")
    if p < 2:
        raise InvalidParameterError("need at least two objectives")
    return ApproxFactor((Fraction(1),) + (Fraction(1) + epsilon,) * (p - 1))


@dataclass(frozen=True, slots=True)
class EpsilonSchedule:
    """A target factor ``epsilon`` and the per-oracle step ratio ``delta``.

    ``delta`` plays the role of a rational stand-in for the exact real root
    ``(1+epsilon)**(1/root_order) - 1``: it is the largest rational of bounded
    denominator with ``(1+delta)**root_order <= 1+epsilon``.  Correctness
    arguments only ever use that inequality, so the substitution is safe; the
    effective factor ``(1+delta)**root_order - 1 <= epsilon`` is exposed for
    size-ratio accounting.
    """

    epsilon: Fraction
    delta: Fraction
    root_order: int

    def __post_init__(self) -> None:
        if self.root_order not in (2, 3, 4):
            raise InvalidParameterError("root order must be 2, 3 or 4")
        if self.epsilon <= 0 or self.delta <= 0:
            raise InvalidParameterError("epsilon and delta must be positive")
        if (1 + self.delta) ** self.root_order > 1 + self.epsilon:
            raise InvalidParameterError("delta too large for the schedule")
        if self.delta >= self.epsilon:
            raise InvalidParameterError("delta must be smaller than epsilon")

    @property
    def effective_epsilon(self) -> Fraction:
        """``(1+delta)**root_order - 1``; never larger than ``epsilon``."""
        return (1 + self.delta) ** self.root_order - 1


def _largest_true(predicate, hi_guard: int) -> int:
    """Largest ``t >= 1`` with ``predicate(t)``, assuming monotone predicate
    and ``predicate(1)``; never probes beyond ``hi_guard``."""
    t = 1
    while t * 2 <= hi_guard and predicate(t * 2):
        t *= 2
    lo, hi = t, min(t * 2, hi_guard)
    # invariant: predicate(lo), not predicate(hi + 1) conceptually
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if predicate(mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


def _best_fraction_below(is_le, max_den: int) -> tuple[int, int]:
    """Largest fraction ``p/q`` with ``q <= max_den`` and ``is_le(p, q)``.

    ``is_le(p, q)`` must decide ``p/q <= x`` for a fixed target ``x >= 0``.
    Walks the Stern-Brocot tree with batched descent, so the number of
    predicate calls is logarithmic rather than linear in ``max_den``.
    """
    la, lb = 0, 1  # best known fraction <= x
    ra, rb = 1, 0  # strict upper bracket (starts at infinity)
    while lb + rb <= max_den:
        if is_le(la + ra, lb + rb):
            limit = (max_den - lb) // rb if rb else max_den
            t = _largest_true(
                lambda t: lb + t * rb <= max_den and is_le(la + t * ra, lb + t * rb),
                max(limit, 1),
            )
            la, lb = la + t * ra, lb + t * rb
        else:
            # step the upper bracket toward x; cap t so denominators can
            # only overshoot the cap by one batch, which ends the loop
            limit = max(1, (max_den - rb) // lb + 1)
            t = _largest_true(
                lambda t: t <= limit and not is_le(ra + t * la, rb + t * lb),
                limit,
            )
            ra, rb = ra + t * la, rb + t * lb
    return la, lb


def derive_delta(
    epsilon: Fraction,
    root_order: int,
    denominator_cap: int = DEFAULT_DENOMINATOR_CAP,
) -> EpsilonSchedule:
    """Largest rational ``delta`` with bounded denominator and
    ``(1+delta)**root_order <= 1+epsilon``.

    Verification is by exact rational powering; no floating point and no
    logarithms.  Raises :class:`DenominatorCapError` when no positive delta
    exists under the cap.
    """
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise InvalidParameterError("epsilon must be positive")
    if root_order not in (2, 3, 4):
        raise InvalidParameterError("root order must be 2, 3 or 4")
    if denominator_cap < 1:
        raise InvalidParameterError("denominator cap must be at least 1")
    one_plus_eps = 1 + epsilon

    def is_le(p: int, q: int) -> bool:
        return Fraction(q + p, q) ** root_order <= one_plus_eps

    num, den = _best_fraction_below(is_le, denominator_cap)
    if num == 0:
        raise DenominatorCapError(
            f"no positive delta with denominator <= {denominator_cap}"
        )
    return EpsilonSchedule(epsilon, Fraction(num, den), root_order)


def min_exponent_at_least(ratio: Fraction, target: Fraction) -> int:
    """Smallest integer ``u >= 0`` with ``ratio**u >= target``.

    Computed by exact repeated multiplication (``ratio > 1`` required), the
    no-logarithm counterpart of ``ceil(log(target) / log(ratio))``.
    """
    if ratio <= 1:
        raise InvalidParameterError("ratio must exceed 1")
    u = 0
    power = Fraction(1)
    while power < target:
        power *= ratio
        u += 1
    return u


class _PowerLadder:
    """Cached exact powers ``base**i`` for integer ``i`` of either sign."""

    def __init__(self, base: Fraction):
        if base <= 0:
            raise InvalidParameterError("base must be positive")
        self.base = base
        self._pos = [Fraction(1)]

    def power(self, exponent: int) -> Fraction:
        mag = abs(exponent)
        while len(self._pos) <= mag:
            self._pos.append(self._pos[-1] * self.base)
        value = self._pos[mag]
        return value if exponent >= 0 else 1 / value


_ladders: dict[Fraction, _PowerLadder] = {}


def geometric_power(base: Fraction, exponent: int) -> Fraction:
    """``base**exponent`` with per-base caching of the power ladder."""
    ladder = _ladders.get(base)
    if ladder is None:
        ladder = _ladders[base] = _PowerLadder(base)
    return ladder.power(exponent)


class ProblemHandle(ABC):
    """Adapter contract for a problem instance.

    A handle publishes the objective count ``p``, the bound exponent ``M`` of
    the value model, capability flags, and the oracle entry points it
    supports.  Handles are immutable after construction; oracle calls are
    read-only and safe to issue concurrently.  The optional ``audit``
    argument is threaded through so adapters that implement one oracle in
    terms of another can record the inner calls as well.

    ``values_on_grid`` reports whether every objective value is an integer
    multiple of ``2**(-2*M)``; reductions use it to pick probe ratios.
    """

    p: int
    M: int
    has_box_query: bool = False
    values_on_grid: bool = False

    def has_constrained(self, index: int) -> bool:
        return False

    def has_restrict(self, index: int) -> bool:
        return False

    def has_dual_restrict(self, index: int) -> bool:
        return False

    def constrained(
        self, index: int, bounds: Sequence[Fraction], audit=None
    ) -> Optional[EvaluatedSolution]:
        raise UnsupportedOracleError("constrained oracle not available")

    def restrict(
        self, index: int, delta: Fraction, bounds: Sequence[Fraction], audit=None
    ) -> Optional[EvaluatedSolution]:
        raise UnsupportedOracleError("restrict oracle not available")

    def dual_restrict(
        self, index: int, delta: Fraction, bounds: Sequence[Fraction], audit=None
    ) -> Optional[EvaluatedSolution]:
        raise UnsupportedOracleError("dual restrict oracle not available")

    def min_first_in_stripe(
        self, lows: Sequence[Fraction], highs: Sequence[Fraction]
    ) -> Optional[EvaluatedSolution]:
        """Minimum-first-objective point whose other objectives fall in the
        closed boxes ``[lows[j], highs[j]]``; None when the stripe is empty."""
        raise UnsupportedOracleError("box queries not available")

    @abstractmethod
    def evaluate(self, witness: str) -> ObjectiveVector:
        """Recompute the image of a witness token."""
