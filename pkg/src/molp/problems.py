"""Problem adapters: explicit solution lists, biobjective shortest path, and
min-cost-makespan scheduling, plus the line-oriented instance file formats.

Every adapter derives the smallest bound exponent ``M`` (at least 1) under
which its value set fits the bounded-value model, and reports whether all
values are integer multiples of ``2**(-2*M)`` (``values_on_grid``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .core import (
    ContractViolationError,
    EvaluatedSolution,
    InvalidParameterError,
    ObjectiveVector,
    ParseError,
    ProblemHandle,
    UnsupportedOracleError,
    ValidationError,
    format_rational,
    parse_rational,
    two_pow,
)
from . import oracles

__all__ = [
    "ExplicitInstance",
    "ExplicitHandle",
    "explicit_oracles",
    "GraphInstance",
    "GraphHandle",
    "shortest_path_handle",
    "shortest_path_dual_restrict",
    "SchedulingInstance",
    "SchedulingHandle",
    "scheduling_handle",
    "parse_instance_text",
    "load_instance",
    "instance_to_text",
]

DEFAULT_PATH_ENUMERATION_CAP = 10
DEFAULT_ASSIGNMENT_CAP = 1 << 15
DEFAULT_DP_STATE_CAP = 2_000_000


def _range_exponent(values: Iterable[Fraction]) -> int:
    """Smallest m with all values in [2**-m, 2**m]."""
    m = 0
    values = list(values)
    while any(v > two_pow(m) or v < two_pow(-m) for v in values):
        m += 1
    return m


def _separation_exponent(per_objective: Iterable[Sequence[Fraction]]) -> int:
    """Smallest m with distinct same-objective values at least 2**-2m apart."""
    m = 0
    gaps: list[Fraction] = []
    for column in per_objective:
        ordered = sorted(set(column))
        gaps.extend(b - a for a, b in zip(ordered, ordered[1:]))
    while any(gap < two_pow(-2 * m) for gap in gaps):
        m += 1
    return m


def _on_grid(values: Iterable[Fraction], M: int) -> bool:
    scale = 1 << (2 * M)
    return all((v * scale).denominator == 1 for v in values)


# ---------------------------------------------------------------------------
# Explicit solution lists
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExplicitInstance:
    """All feasible solutions given as (token, image) pairs."""

    p: int
    points: tuple[tuple[str, ObjectiveVector], ...]
    M: int
    values_on_grid: bool

    @classmethod
    def build(
        cls,
        points: Sequence[tuple[str, ObjectiveVector]],
        declared_M: Optional[int] = None,
        p: Optional[int] = None,
    ) -> "ExplicitInstance":
        points = tuple((str(t), v) for t, v in points)
        if points:
            p = points[0][1].p if p is None else p
        elif p is None:
            p = 2
        tokens = [t for t, _ in points]
        if len(set(tokens)) != len(tokens):
            raise ValidationError("duplicate witness tokens")
        for token, vec in points:
            if vec.p != p:
                raise ValidationError(f"point {token} has {vec.p} objectives, want {p}")
            if any(ch.isspace() for ch in token) or "#" in token or not token:
                raise ValidationError(f"bad token {token!r}")
        columns = [[vec[i] for _, vec in points] for i in range(p)]
        all_values = [v for col in columns for v in col]
        derived = max(1, _range_exponent(all_values), _separation_exponent(columns))
        if declared_M is None:
            M = derived
        else:
            M = declared_M
            if M < 1:
                raise ValidationError("bound exponent must be at least 1")
            if any(v > two_pow(M) or v < two_pow(-M) for v in all_values):
                raise ValidationError(f"values leave [2^-{M}, 2^{M}]")
            if _separation_exponent(columns) > M:
                raise ValidationError(f"values closer than 2^-{2 * M} at M={M}")
        return cls(p=p, points=points, M=M, values_on_grid=_on_grid(all_values, M))

    def universe(self) -> list[EvaluatedSolution]:
        return [EvaluatedSolution(t, v) for t, v in self.points]

    def evaluate(self, witness: str) -> ObjectiveVector:
        for token, vec in self.points:
            if token == witness:
                return vec
        raise ValidationError(f"unknown witness {witness!r}")

    def __len__(self) -> int:
        return len(self.points)


class ExplicitHandle(ProblemHandle):
    """Exact oracles by enumeration over an explicit solution list.

    Tie-breaking everywhere: lexicographically smallest image, then smallest
    witness token, so runs are reproducible.  The dual-restrict oracle
    returns a solution whenever one fits the relaxed bounds (minimizing the
    optimized objective over the relaxed region), which is always a
    conforming answer and only says NO when forced to.
    """

    has_box_query = True

    def __init__(self, instance: ExplicitInstance):
        self.instance = instance
        self.p = instance.p
        self.M = instance.M
        self.values_on_grid = instance.values_on_grid

    def has_constrained(self, index: int) -> bool:
        return 0 <= index < self.p

    def has_restrict(self, index: int) -> bool:
        return 0 <= index < self.p

    def has_dual_restrict(self, index: int) -> bool:
        return 0 <= index < self.p

    def _best(self, index, candidates) -> Optional[EvaluatedSolution]:
        best = min(
            candidates,
            key=lambda tv: (tv[1][index], tv[1].values, tv[0]),
            default=None,
        )
        if best is None:
            return None
        return EvaluatedSolution(best[0], best[1])

    def _meeting(self, index: int, limits: Sequence[Fraction]):
        others = [j for j in range(self.p) if j != index]
        return (
            (t, v)
            for t, v in self.instance.points
            if all(v[j] <= lim for j, lim in zip(others, limits))
        )

    def constrained(self, index, bounds, audit=None):
        return self._best(index, self._meeting(index, bounds))

    def restrict(self, index, delta, bounds, audit=None):
        # the exact optimum is trivially within any (1+delta) factor
        return self._best(index, self._meeting(index, bounds))

    def dual_restrict(self, index, delta, bounds, audit=None):
        relaxed = [(1 + delta) * b for b in bounds]
        return self._best(index, self._meeting(index, relaxed))

    def min_first_in_stripe(self, lows, highs):
        if len(lows) != self.p - 1 or len(highs) != self.p - 1:
            raise ContractViolationError("stripe needs p-1 interval bounds")
        candidates = (
            (t, v)
            for t, v in self.instance.points
            if all(lo <= v[j + 1] <= hi for j, (lo, hi) in enumerate(zip(lows, highs)))
        )
        return self._best(0, candidates)

    def evaluate(self, witness: str) -> ObjectiveVector:
        return self.instance.evaluate(witness)


def explicit_oracles(instance: ExplicitInstance) -> ExplicitHandle:
    return ExplicitHandle(instance)


# ---------------------------------------------------------------------------
# Biobjective shortest path
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GraphInstance:
    """Directed multigraph with two positive rational costs per edge."""

    n: int
    edges: tuple[tuple[int, int, Fraction, Fraction], ...]
    source: int
    target: int
    M: int
    values_on_grid: bool

    @classmethod
    def build(cls, n, edges, source, target) -> "GraphInstance":
        edges = tuple((int(u), int(v), Fraction(c1), Fraction(c2)) for u, v, c1, c2 in edges)
        if n < 2:
            raise ValidationError("need at least two nodes")
        if not (0 <= source < n and 0 <= target < n):
            raise ValidationError("source/target out of range")
        if source == target:
            raise ValidationError("source and target must differ")
        for u, v, c1, c2 in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValidationError(f"edge endpoint out of range: {(u, v)}")
            if c1 <= 0 or c2 <= 0:
                raise ValidationError("edge costs must be strictly positive")
        costs = [c for _, _, c1, c2 in edges for c in (c1, c2)]
        m = 1
        if costs:
            top = n * max(costs)
            while any(c < two_pow(-m) for c in costs) or top > two_pow(m):
                m += 1
        return cls(
            n=n,
            edges=edges,
            source=source,
            target=target,
            M=m,
            values_on_grid=_on_grid(costs, m),
        )


def _edge_token(edge_indices: Sequence[int]) -> str:
    return "|".join(f"e{i}" for i in edge_indices)


def _parse_edge_token(token: str) -> list[int]:
    try:
        return [int(part[1:]) for part in token.split("|")]
    except (ValueError, IndexError) as exc:
        raise ValidationError(f"bad path token {token!r}") from exc


def shortest_path_dual_restrict(
    instance: GraphInstance,
    delta: Fraction,
    s2: Fraction,
    state_cap: int = DEFAULT_DP_STATE_CAP,
) -> Optional[EvaluatedSolution]:
    """First-objective dual-restrict for s-t paths by budget rounding.

    Second-objective edge costs are rounded up to units of
    ``delta * s2 / n``, and a dynamic program minimizes the first objective
    over (node, rounded budget) states with budget cap ``ceil(n/delta) + n``.
    Rounding up means every path within the true budget survives, so the
    best surviving value is no worse than the bounded optimum; candidate
    answers are then screened best-first against the relaxed bound on their
    exact second-objective cost.
    """
    if delta <= 0 or s2 <= 0:
        raise InvalidParameterError("delta and bound must be positive")
    n = instance.n
    theta = delta * s2 / n
    budget_cap = math.ceil(Fraction(n) / delta) + n
    if n * (budget_cap + 1) > state_cap:
        raise UnsupportedOracleError("budget resolution too fine for the state cap")

    scaled = [math.ceil(c2 / theta) for _, _, _, c2 in instance.edges]
    denom_lcm = 1
    for _, _, c1, _ in instance.edges:
        denom_lcm = denom_lcm * c1.denominator // math.gcd(denom_lcm, c1.denominator)
    int_c1 = [int(c1 * denom_lcm) for _, _, c1, _ in instance.edges]

    out_edges: list[list[int]] = [[] for _ in range(n)]
    for idx, (u, _, _, _) in enumerate(instance.edges):
        out_edges[u].append(idx)

    INF = None
    # best[b][v] = (int first-objective cost, parent budget, parent edge index)
    best: list[list] = [[INF] * n for _ in range(budget_cap + 1)]
    best[0][instance.source] = (0, -1, -1)
    for b in range(budget_cap + 1):
        row = best[b]
        for v in range(n):
            state = row[v]
            if state is INF:
                continue
            cost = state[0]
            for idx in out_edges[v]:
                nb = b + scaled[idx]
                if nb > budget_cap:
                    continue
                ncost = cost + int_c1[idx]
                cur = best[nb][instance.edges[idx][1]]
                if cur is INF or ncost < cur[0]:
                    best[nb][instance.edges[idx][1]] = (ncost, b, idx)

    candidates = [
        (best[b][instance.target][0], b)
        for b in range(budget_cap + 1)
        if best[b][instance.target] is not INF
    ]
    candidates.sort()
    relaxed = (1 + delta) * s2
    for _, b in candidates:
        edges_rev = []
        node, budget = instance.target, b
        while budget != 0 or node != instance.source:
            _, pb, pe = best[budget][node]
            edges_rev.append(pe)
            node, budget = instance.edges[pe][0], pb
        # the state chain may encode a walk (a cost tie can make a cyclic
        # chain win a state); strip cycles, which never raises either cost
        nodes = [instance.source]
        edge_list: list[int] = []
        for idx in edges_rev[::-1]:
            head = instance.edges[idx][1]
            if head in nodes:
                cut = nodes.index(head)
                nodes = nodes[: cut + 1]
                edge_list = edge_list[:cut]
            else:
                nodes.append(head)
                edge_list.append(idx)
        c1 = sum(instance.edges[i][2] for i in edge_list)
        c2 = sum(instance.edges[i][3] for i in edge_list)
        if c2 <= relaxed:
            return EvaluatedSolution(
                _edge_token(edge_list), ObjectiveVector((c1, c2))
            )
    return None


class GraphHandle(ProblemHandle):
    """Oracle surface for biobjective shortest path.

    First-objective dual-restrict is native (rounding dynamic program);
    second-objective restrict is answered through the bisection reduction;
    exact constrained oracles are backed by full path enumeration and are
    only advertised on small graphs (a testing convenience, not an
    algorithmic claim).
    """

    def __init__(
        self,
        instance: GraphInstance,
        enumeration_cap: int = DEFAULT_PATH_ENUMERATION_CAP,
        state_cap: int = DEFAULT_DP_STATE_CAP,
    ):
        self.instance = instance
        self.p = 2
        self.M = instance.M
        self.values_on_grid = instance.values_on_grid
        self.enumeration_cap = enumeration_cap
        self.state_cap = state_cap
        self._paths: Optional[list[EvaluatedSolution]] = None

    def has_dual_restrict(self, index: int) -> bool:
        return index == 0

    def has_restrict(self, index: int) -> bool:
        return index == 1

    def has_constrained(self, index: int) -> bool:
        return self.instance.n <= self.enumeration_cap

    def dual_restrict(self, index, delta, bounds, audit=None):
        if index != 0:
            raise UnsupportedOracleError("dual restrict only for the first objective")
        return shortest_path_dual_restrict(
            self.instance, delta, bounds[0], state_cap=self.state_cap
        )

    def restrict(self, index, delta, bounds, audit=None):
        if index != 1:
            raise UnsupportedOracleError("restrict only for the second objective")
        return oracles.reduce_restrict2_via_dual_restrict1(
            self, delta, bounds[0], audit
        )

    def constrained(self, index, bounds, audit=None):
        if not self.has_constrained(index):
            raise UnsupportedOracleError("graph too large for path enumeration")
        others = [j for j in range(2) if j != index]
        candidates = [
            s
            for s in self.paths()
            if all(s.image[j] <= b for j, b in zip(others, bounds))
        ]
        if not candidates:
            return None
        return min(candidates, key=lambda s: (s.image[index], s.image.values, s.witness))

    def paths(self) -> list[EvaluatedSolution]:
        """All simple source-target paths (the solution universe)."""
        if self._paths is None:
            if self.instance.n > self.enumeration_cap:
                raise UnsupportedOracleError("graph too large for path enumeration")
            out_edges: list[list[int]] = [[] for _ in range(self.instance.n)]
            for idx, (u, _, _, _) in enumerate(self.instance.edges):
                out_edges[u].append(idx)
            found: list[EvaluatedSolution] = []
            stack: list[int] = []
            seen = {self.instance.source}

            def walk(node: int) -> None:
                if node == self.instance.target:
                    found.append(
                        EvaluatedSolution(
                            _edge_token(stack), self.evaluate(_edge_token(stack))
                        )
                    )
                    return
                for idx in out_edges[node]:
                    nxt = self.instance.edges[idx][1]
                    if nxt in seen:
                        continue
                    seen.add(nxt)
                    stack.append(idx)
                    walk(nxt)
                    stack.pop()
                    seen.remove(nxt)

            walk(self.instance.source)
            found.sort(key=lambda s: (s.image.values, s.witness))
            self._paths = found
        return self._paths

    def evaluate(self, witness: str) -> ObjectiveVector:
        edge_list = _parse_edge_token(witness)
        c1 = Fraction(0)
        c2 = Fraction(0)
        for i in edge_list:
            if not 0 <= i < len(self.instance.edges):
                raise ValidationError(f"unknown edge index {i}")
            c1 += self.instance.edges[i][2]
            c2 += self.instance.edges[i][3]
        return ObjectiveVector((c1, c2))


def shortest_path_handle(
    instance: GraphInstance,
    enumeration_cap: int = DEFAULT_PATH_ENUMERATION_CAP,
    state_cap: int = DEFAULT_DP_STATE_CAP,
) -> GraphHandle:
    return GraphHandle(instance, enumeration_cap, state_cap)


# ---------------------------------------------------------------------------
# Min-cost-makespan scheduling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SchedulingInstance:
    """Jobs on parallel machines; per job and machine a processing time and a
    cost, both nonnegative.  Objectives: total cost, then makespan."""

    m: int
    jobs: tuple[tuple[str, tuple[tuple[Fraction, Fraction], ...]], ...]

    @classmethod
    def build(cls, m: int, jobs) -> "SchedulingInstance":
        m = int(m)
        if m < 1:
            raise ValidationError("need at least one machine")
        jobs = tuple(
            (str(token), tuple((Fraction(p), Fraction(c)) for p, c in options))
            for token, options in jobs
        )
        tokens = [t for t, _ in jobs]
        if len(set(tokens)) != len(tokens):
            raise ValidationError("duplicate job tokens")
        for token, options in jobs:
            if len(options) != m:
                raise ValidationError(f"job {token} needs {m} machine entries")
            for p, c in options:
                if p < 0 or c < 0:
                    raise ValidationError("processing times and costs must be >= 0")
        if jobs and not any(min(p for p, _ in options) > 0 for _, options in jobs):
            raise ValidationError("at least one job must take time on every machine")
        return cls(m=m, jobs=jobs)

    @property
    def n(self) -> int:
        return len(self.jobs)


def _assignment_token(assignment: Sequence[int]) -> str:
    return "-".join(str(i) for i in assignment)


class SchedulingHandle(ProblemHandle):
    """Desk-scale oracle surface for scheduling: enumerates every assignment
    of jobs to machines and answers through the explicit-list machinery.

    Total cost is shifted by +1 so the first objective is strictly positive
    even with zero job costs; the shift preserves value order and the first
    objective is compared exactly, so nothing downstream changes.
    """

    has_box_query = True
    COST_SHIFT = Fraction(1)

    def __init__(self, instance: SchedulingInstance, assignment_cap: int = DEFAULT_ASSIGNMENT_CAP):
        count = instance.m ** instance.n
        if count > assignment_cap:
            raise UnsupportedOracleError(
                f"{count} assignments exceed the enumeration cap {assignment_cap}"
            )
        self.instance = instance
        points = []
        if instance.n > 0:
            assignment = [0] * instance.n
            while True:
                vec = self._objectives(assignment)
                points.append((_assignment_token(assignment), vec))
                k = instance.n - 1
                while k >= 0 and assignment[k] == instance.m - 1:
                    assignment[k] = 0
                    k -= 1
                if k < 0:
                    break
                assignment[k] += 1
        self._explicit = ExplicitHandle(
            ExplicitInstance.build(points, p=2)
        )
        self.p = 2
        self.M = self._explicit.M
        self.values_on_grid = self._explicit.values_on_grid

    def _objectives(self, assignment: Sequence[int]) -> ObjectiveVector:
        loads = [Fraction(0)] * self.instance.m
        cost = Fraction(0)
        for job_index, machine in enumerate(assignment):
            p, c = self.instance.jobs[job_index][1][machine]
            loads[machine] += p
            cost += c
        return ObjectiveVector((cost + self.COST_SHIFT, max(loads)))

    def raw_cost(self, witness: str) -> Fraction:
        """Unshifted total cost of an assignment token."""
        return self.evaluate(witness)[0] - self.COST_SHIFT

    def universe(self) -> list[EvaluatedSolution]:
        return self._explicit.instance.universe()

    def has_constrained(self, index: int) -> bool:
        return True

    def has_restrict(self, index: int) -> bool:
        return True

    def has_dual_restrict(self, index: int) -> bool:
        return True

    def constrained(self, index, bounds, audit=None):
        return self._explicit.constrained(index, bounds)

    def restrict(self, index, delta, bounds, audit=None):
        return self._explicit.restrict(index, delta, bounds)

    def dual_restrict(self, index, delta, bounds, audit=None):
        return self._explicit.dual_restrict(index, delta, bounds)

    def min_first_in_stripe(self, lows, highs):
        return self._explicit.min_first_in_stripe(lows, highs)

    def evaluate(self, witness: str) -> ObjectiveVector:
        try:
            assignment = [int(tok) for tok in witness.split("-")]
        except ValueError as exc:
            raise ValidationError(f"bad assignment token {witness!r}") from exc
        if len(assignment) != self.instance.n or any(
            not 0 <= a < self.instance.m for a in assignment
        ):
            raise ValidationError(f"bad assignment token {witness!r}")
        return self._objectives(assignment)


def scheduling_handle(
    instance: SchedulingInstance, assignment_cap: int = DEFAULT_ASSIGNMENT_CAP
) -> SchedulingHandle:
    return SchedulingHandle(instance, assignment_cap)


# ---------------------------------------------------------------------------
# Instance file formats (UTF-8, line oriented, '#' starts a comment)
# ---------------------------------------------------------------------------


def _content_lines(text: str) -> list[list[str]]:
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    return rows


def parse_instance_text(text: str):
    rows = _content_lines(text)
    if not rows:
        raise ParseError("empty instance file")
    header = rows[0]
    if header[0] != "molp" or len(header) < 2:
        raise ParseError(f"bad header: {' '.join(header)}")
    kind = header[1]
    body = rows[1:]
    if kind == "explicit":
        if len(header) != 3:
            raise ParseError("explicit header needs an objective count")
        try:
            p = int(header[2])
        except ValueError as exc:
            raise ParseError("objective count must be an integer") from exc
        points = []
        try:
            for row in body:
                if row[0] != "point" or len(row) != 2 + p:
                    raise ParseError(f"bad point line: {' '.join(row)}")
                points.append(
                    (row[1], ObjectiveVector(tuple(parse_rational(t) for t in row[2:])))
                )
            return ExplicitInstance.build(points, p=p)
        except (ContractViolationError, ValidationError) as exc:
            raise ParseError(str(exc)) from exc
    if kind == "graph":
        n = source = target = None
        edges = []
        for row in body:
            if row[0] == "nodes" and len(row) == 2:
                n = int(row[1])
            elif row[0] == "source" and len(row) == 2:
                source = int(row[1])
            elif row[0] == "target" and len(row) == 2:
                target = int(row[1])
            elif row[0] == "edge" and len(row) == 5:
                edges.append(
                    (int(row[1]), int(row[2]), parse_rational(row[3]), parse_rational(row[4]))
                )
            else:
                raise ParseError(f"bad graph line: {' '.join(row)}")
        if n is None or source is None or target is None:
            raise ParseError("graph file needs nodes, source and target lines")
        try:
            return GraphInstance.build(n, edges, source, target)
        except ValidationError as exc:
            raise ParseError(str(exc)) from exc
    if kind == "sched":
        if len(header) != 3:
            raise ParseError("sched header needs a machine count")
        m = int(header[2])
        jobs = []
        for row in body:
            if row[0] != "job" or len(row) != 2 + 2 * m:
                raise ParseError(f"bad job line: {' '.join(row)}")
            options = [
                (parse_rational(row[2 + 2 * i]), parse_rational(row[3 + 2 * i]))
                for i in range(m)
            ]
            jobs.append((row[1], options))
        try:
            return SchedulingInstance.build(m, jobs)
        except ValidationError as exc:
            raise ParseError(str(exc)) from exc
    raise ParseError(f"unknown instance kind: {kind}")


def load_instance(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_instance_text(fh.read())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def instance_to_text(instance) -> str:
    if isinstance(instance, ExplicitInstance):
        lines = [f"molp explicit {instance.p}"]
        lines += [f"point {t} {v.to_text()}" for t, v in instance.points]
    elif isinstance(instance, GraphInstance):
        lines = [
            "molp graph",
            f"nodes {instance.n}",
            f"source {instance.source}",
            f"target {instance.target}",
        ]
        lines += [
            f"edge {u} {v} {format_rational(c1)} {format_rational(c2)}"
            for u, v, c1, c2 in instance.edges
        ]
    elif isinstance(instance, SchedulingInstance):
        lines = [f"molp sched {instance.m}"]
        for token, options in instance.jobs:
            flat = " ".join(
                f"{format_rational(p)} {format_rational(c)}" for p, c in options
            )
            lines.append(f"job {token} {flat}")
    else:
        raise ContractViolationError(f"unknown instance type {type(instance)!r}")
    return "\n".join(lines) + "\n"
