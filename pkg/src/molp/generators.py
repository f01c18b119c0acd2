"""Instance families with known ground truth, plus seeded random instances.

Each family realizes a specific gap between plain approximate Pareto sets
and their one-exact counterparts, or a hardness gadget whose smallest
one-exact cover size encodes a decision problem.  All constructions are
exact-rational and validated against the bounded-value model on emission.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import (
    InvalidParameterError,
    MolpError,
    ObjectiveVector,
    two_pow,
)
from .problems import ExplicitInstance, SchedulingInstance

__all__ = [
    "staircase_instance",
    "near_twin_instance",
    "partition_k_formula",
    "partition_inequalities_hold",
    "PartitionReduction",
    "partition_reduction",
    "triple_staircase_instance",
    "random_explicit_instance",
    "GeneratorSpec",
    "FAMILIES",
]

FAMILIES = ("thm2", "thm5", "thm6", "thm8", "random")


def staircase_instance(epsilon: Fraction, n: int) -> ExplicitInstance:
    """``n+1`` points with first objective falling arithmetically and second
    objective growing by ``(1+epsilon)**2`` per step.

    No point one-exact-approximates any other (the whole instance is the
    smallest one-exact cover), yet the last point alone is a plain
    ``(1+epsilon, 1+epsilon)`` cover.
    """
    eps = Fraction(epsilon)
    if eps <= 0:
        raise InvalidParameterError("epsilon must be positive")
    if n < 1:
        raise InvalidParameterError("need n >= 1")
    ratio = (1 + eps) ** 2
    points = []
    for i in range(n + 1):
        first = 1 + Fraction(n - i, n) * eps
        second = ratio**i
        points.append((f"x{i}", ObjectiveVector((first, second))))
    return ExplicitInstance.build(points)


def near_twin_instance(
    epsilon: Fraction,
    anchor_first: Fraction = Fraction(10),
    anchor_second: Fraction = Fraction(8),
    include_twin: bool = False,
) -> ExplicitInstance:
    """Two points whose one-exact cover is a singleton, plus an optional
    near-twin one unit below the anchor that forces a second member.

    Telling the two variants apart through relaxed-bound probes alone needs
    a relaxation finer than one part in the anchor's second objective, which
    is what makes the family a probe-resolution stress test.
    """
    eps = Fraction(epsilon)
    f1 = Fraction(anchor_first)
    f2 = Fraction(anchor_second)
    if eps <= 0:
        raise InvalidParameterError("epsilon must be positive")
    if f1 < 2 or f2 < 2:
        raise InvalidParameterError("anchor values must be at least 2")
    points = [
        ("x1", ObjectiveVector((f1 - 1, (1 + eps) * f2))),
        ("x2", ObjectiveVector((f1, f2))),
    ]
    if include_twin:
        points.append(("x3", ObjectiveVector((f1, f2 - 1))))
    return ExplicitInstance.build(points)


def partition_k_formula(total: Fraction, epsilon: Fraction) -> int:
    """``ceil((1-eps)/(2*eps) * total - 1 - 1/eps)``, evaluated exactly."""
    total = Fraction(total)
    eps = Fraction(epsilon)
    return math.ceil((1 - eps) / (2 * eps) * total - 1 - 1 / eps)


def partition_inequalities_hold(k: Fraction, total: Fraction, epsilon: Fraction) -> bool:
    """The three exact conditions the balancing length must satisfy: the
    all-on-one-machine schedule misses a balanced split by more than the
    factor, reaches any off-balance split within it, and reaches any
    schedule running both balancing jobs together."""
    k = Fraction(k)
    total = Fraction(total)
    eps = Fraction(epsilon)
    lhs = (k + total) / (1 + eps)
    half = total / 2
    return lhs > k + half and lhs <= k + half + 1 and lhs <= 2 * k


@dataclass(frozen=True)
class PartitionReduction:
    """A scheduling gadget whose smallest one-exact cover size answers a
    number-partition question: 1 when the values cannot be split evenly,
    2 or more when they can."""

    instance: SchedulingInstance
    k: int
    scale: int
    scaled_values: tuple[int, ...]

    @property
    def scaled_total(self) -> int:
        return sum(self.scaled_values)


def partition_reduction(
    values: Sequence[int], epsilon: Fraction
) -> PartitionReduction:
    """Scheduling gadget for a number-partition instance at factor epsilon.

    Regular jobs mirror the partition values (cost on machine 0 only); two
    balancing jobs of length ``k`` pay 1 on their home machine and 2 on the
    other.  The values are first rescaled by the smallest factor making the
    total even and large enough for the balancing length to exist (splitting
    evenly is invariant under rescaling).  Emission fails loudly if the
    computed ``k`` misses any of the three exact inequalities.
    """
    eps = Fraction(epsilon)
    if not 0 < eps < Fraction(1, 2):
        raise InvalidParameterError("epsilon must lie strictly between 0 and 1/2")
    values = tuple(int(v) for v in values)
    if not values or any(v <= 0 for v in values):
        raise InvalidParameterError("partition values must be positive integers")
    total = sum(values)
    threshold = 4 / (1 - 2 * eps)
    scale = 1
    while scale * total < threshold or (scale * total) % 2 != 0:
        scale += 1
    scaled = tuple(scale * v for v in values)
    scaled_total = scale * total
    k = partition_k_formula(scaled_total, eps)
    if k <= 0 or not partition_inequalities_hold(k, scaled_total, eps):
        raise MolpError(
            f"balancing length {k} violates the gadget inequalities"
        )
    jobs = [
        (f"j{i}", [(Fraction(a), Fraction(a)), (Fraction(a), Fraction(0))])
        for i, a in enumerate(scaled)
    ]
    jobs.append(("b1", [(Fraction(k), Fraction(1)), (Fraction(k), Fraction(2))]))
    jobs.append(("b2", [(Fraction(k), Fraction(2)), (Fraction(k), Fraction(1))]))
    return PartitionReduction(
        instance=SchedulingInstance.build(2, jobs),
        k=k,
        scale=scale,
        scaled_values=scaled,
    )


def triple_staircase_instance(
    epsilon: Fraction,
    n: int,
    base: tuple[Fraction, Fraction, Fraction] = (Fraction(1), Fraction(1), Fraction(8)),
    include_twins: bool = False,
) -> ExplicitInstance:
    """Three-objective family: a base point covering a staircase of ``n``
    points exactly, with optional twins sitting one unit lower in the third
    objective that each demand their own cover member.

    With twins the smallest one-exact cover jumps from 1 to at least
    ``n+1``, which is the three-objective obstruction to any constant size
    factor from relaxed-bound probes.
    """
    eps = Fraction(epsilon)
    if eps <= 0:
        raise InvalidParameterError("epsilon must be positive")
    if n < 1:
        raise InvalidParameterError("need n >= 1")
    b1, b2, b3 = (Fraction(v) for v in base)
    if b1 <= 0 or b2 <= 0:
        raise InvalidParameterError("base values must be positive")
    if b3 < 2 or b3 / (1 + eps) - 1 <= 0:
        raise InvalidParameterError(
            "third base value must be at least 2 and exceed 1+epsilon"
        )
    ratio = (1 + eps) ** 2
    third = b3 / (1 + eps)
    points = [("x0", ObjectiveVector((b1, b2, b3)))]
    for i in range(1, n + 1):
        first = b1 + n - i
        second = ratio**i * b2
        points.append((f"x{i}", ObjectiveVector((first, second, third))))
        if include_twins:
            points.append((f"y{i}", ObjectiveVector((first, second, third - 1))))
    return ExplicitInstance.build(points)


@dataclass(frozen=True)
class GeneratorSpec:
    """Declarative draw from one instance family; unused fields are ignored
    by families that do not take them.  Family preconditions are enforced by
    the family constructors when :meth:`build` runs."""

    family: str
    epsilon: Fraction = Fraction(1)
    n: int = 2
    values: tuple[int, ...] = ()
    seed: int = 0
    p: int = 2
    count: int = 8
    m_target: int = 3
    anchor: tuple[Fraction, Fraction] = (Fraction(10), Fraction(8))
    include_twin: bool = False
    base: tuple[Fraction, Fraction, Fraction] = (Fraction(1), Fraction(1), Fraction(8))
    include_twins: bool = False

    def build(self):
        """The generated instance plus a dict of derived constants."""
        if self.family == "thm2":
            return staircase_instance(self.epsilon, self.n), {}
        if self.family == "thm5":
            return (
                near_twin_instance(
                    self.epsilon, *self.anchor, include_twin=self.include_twin
                ),
                {},
            )
        if self.family == "thm6":
            reduction = partition_reduction(self.values, self.epsilon)
            return reduction.instance, {"K": reduction.k, "scale": reduction.scale}
        if self.family == "thm8":
            return (
                triple_staircase_instance(
                    self.epsilon, self.n, self.base, self.include_twins
                ),
                {},
            )
        if self.family == "random":
            return (
                random_explicit_instance(self.p, self.count, self.m_target, self.seed),
                {},
            )
        raise InvalidParameterError(f"unknown family {self.family!r}")


def random_explicit_instance(
    p: int, count: int, m_target: int, seed: int
) -> ExplicitInstance:
    """Seeded uniform points on the separation grid of exponent ``m_target``.

    Every coordinate is ``2**-m + t * 2**-2m`` for an integer ``t``, so any
    point set drawn this way satisfies the bounded-value model at ``m_target``
    by construction (the derived exponent may come out smaller).
    """
    if p < 2:
        raise InvalidParameterError("need at least two objectives")
    if count < 0:
        raise InvalidParameterError("count must be nonnegative")
    if m_target < 1:
        raise InvalidParameterError("m_target must be at least 1")
    rng = random.Random(seed)
    lo = two_pow(-m_target)
    step = two_pow(-2 * m_target)
    slots = int((two_pow(m_target) - lo) / step)
    points = []
    for i in range(count):
        vec = ObjectiveVector(
            tuple(lo + rng.randint(0, slots) * step for _ in range(p))
        )
        points.append((f"p{i}", vec))
    return ExplicitInstance.build(points, p=p)
