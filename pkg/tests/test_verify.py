import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from molp.core import (
    ApproxFactor,
    ContractViolationError,
    EvaluatedSolution,
    InvalidParameterError,
    ObjectiveVector,
    dominates,
    one_exact_alpha,
)
from molp.generators import staircase_instance
from molp.algorithms import greedy_minimum
from molp.oracles import OracleAudit, dual_restrict
from molp.problems import ExplicitInstance, explicit_oracles
from molp.verify import (
    audit_summary,
    brute_force_pareto,
    exhaustive_min_cover,
    exhaustive_min_one_exact,
    verify_one_exact,
)

from molp_testutils import nonempty_fuzz_instance

F = Fraction


def sols(*pairs):
    return [EvaluatedSolution(t, ObjectiveVector.of(*v)) for t, v in pairs]


class TestBruteForcePareto:
    def test_mutually_incomparable(self):
        universe = sols(("a", (2, 1)), ("b", (F(3, 2), 4)), ("c", (1, 16)))
        assert brute_force_pareto(universe) == sorted(
            universe, key=lambda s: s.image.values
        )

    def test_dominated_dropped(self):
        universe = sols(("a", (1, 1)), ("b", (2, 2)))
        assert [s.witness for s in brute_force_pareto(universe)] == ["a"]

    def test_empty(self):
        assert brute_force_pareto([]) == []

    def test_equal_images_keep_smallest_token(self):
        universe = sols(("z", (1, 1)), ("a", (1, 1)))
        assert [s.witness for s in brute_force_pareto(universe)] == ["a"]


class TestVerifyOneExact:
    def test_whole_universe_passes(self):
        universe = sols(("a", (2, 1)), ("b", (1, 16)))
        assert verify_one_exact(universe, universe, one_exact_alpha(F(1), 2)).verdict

    def test_staircase_last_point_passes_plain_factors(self):
        inst = staircase_instance(F(1), 2)
        universe = inst.universe()
        chosen = [s for s in universe if s.witness == "x0"]
        assert verify_one_exact(chosen, universe, ApproxFactor.of(2, 2)).verdict

    def test_staircase_last_point_fails_one_exact(self):
        inst = staircase_instance(F(1), 2)
        universe = inst.universe()
        chosen = [s for s in universe if s.witness == "x0"]
        report = verify_one_exact(chosen, universe, one_exact_alpha(F(1), 2))
        assert not report.verdict
        assert report.witness.witness in ("x1", "x2")
        assert report.needed_factors is not None

    def test_infeasible_member_rejected(self):
        universe = sols(("a", (2, 1)))
        fake = sols(("ghost", (1, 1)))
        with pytest.raises(ContractViolationError):
            verify_one_exact(fake, universe, one_exact_alpha(F(1), 2))
        tampered = sols(("a", (1, 1)))
        with pytest.raises(ContractViolationError):
            verify_one_exact(tampered, universe, one_exact_alpha(F(1), 2))

    def test_superset_monotone(self):
        rng = random.Random(71)
        for _ in range(40):
            inst = nonempty_fuzz_instance(rng, max_points=8)
            universe = inst.universe()
            alpha = one_exact_alpha(F(1), 2)
            base = [s for s in universe if rng.random() < 0.5]
            if not base:
                continue
            if verify_one_exact(base, universe, alpha).verdict:
                extra = base + [rng.choice(universe)]
                assert verify_one_exact(extra, universe, alpha).verdict

    def test_dropping_dominated_member_keeps_verdict(self):
        rng = random.Random(72)
        checked = 0
        for _ in range(200):
            inst = nonempty_fuzz_instance(rng, max_points=8)
            universe = inst.universe()
            alpha = one_exact_alpha(F(1), 2)
            if not verify_one_exact(universe, universe, alpha).verdict:
                continue
            chosen = list(universe)
            dominated = [
                s
                for s in chosen
                if any(dominates(o.image, s.image) for o in chosen)
            ]
            if not dominated:
                continue
            chosen.remove(dominated[0])
            assert verify_one_exact(chosen, universe, alpha).verdict
            checked += 1
        assert checked > 10

    def test_report_serialization(self):
        inst = staircase_instance(F(1), 2)
        universe = inst.universe()
        chosen = [s for s in universe if s.witness == "x0"]
        text = verify_one_exact(chosen, universe, one_exact_alpha(F(1), 2)).to_text()
        assert text.startswith("verdict=fail\n")
        assert "witness=" in text and "set_size=1" in text


class TestExhaustiveMinimum:
    def test_staircase_sizes(self):
        inst = staircase_instance(F(1), 3)
        size, witness = exhaustive_min_one_exact(inst.universe(), F(1))
        assert size == 4 and len(witness) == 4

    def test_single_point(self):
        inst = ExplicitInstance.build([("a", ObjectiveVector.of(1, 1))])
        assert exhaustive_min_one_exact(inst.universe(), F(1))[0] == 1

    def test_empty(self):
        assert exhaustive_min_one_exact([], F(1)) == (0, [])

    def test_cap(self):
        rng = random.Random(73)
        inst = nonempty_fuzz_instance(rng, max_points=8)
        with pytest.raises(InvalidParameterError):
            exhaustive_min_cover(inst.universe(), one_exact_alpha(F(1), 2), cap=2)

    def test_agrees_with_greedy_minimum(self):
        rng = random.Random(74)
        for _ in range(40):
            inst = nonempty_fuzz_instance(rng, max_points=12)
            eps = rng.choice([F(1), F(1, 2), F(3)])
            size, _ = exhaustive_min_one_exact(inst.universe(), eps)
            run = greedy_minimum(explicit_oracles(inst), eps)
            assert size == len(run.solutions)

    def test_one_exact_minimum_at_least_plain_minimum(self):
        rng = random.Random(75)
        for _ in range(60):
            inst = nonempty_fuzz_instance(rng, max_points=10, p=rng.choice([2, 3]))
            eps = rng.choice([F(1), F(1, 2)])
            universe = inst.universe()
            one_exact_size, _ = exhaustive_min_one_exact(universe, eps)
            plain_alpha = ApproxFactor(tuple([1 + eps] * inst.p))
            plain_size, _ = exhaustive_min_cover(universe, plain_alpha)
            assert one_exact_size >= plain_size

    def test_witness_is_a_cover(self):
        rng = random.Random(76)
        for _ in range(30):
            inst = nonempty_fuzz_instance(rng, max_points=10)
            eps = F(1)
            size, witness = exhaustive_min_one_exact(inst.universe(), eps)
            assert len(witness) == size
            assert verify_one_exact(
                witness, inst.universe(), one_exact_alpha(eps, 2)
            ).verdict


coordinate = st.integers(min_value=0, max_value=60).map(lambda t: F(1, 4) + t * F(1, 16))
point_lists = st.lists(st.tuples(coordinate, coordinate), max_size=8)


@given(point_lists)
@settings(max_examples=80, deadline=None)
def test_brute_force_pareto_is_exactly_the_nondominated_set(coords):
    universe = [
        EvaluatedSolution(f"t{i}", ObjectiveVector(v)) for i, v in enumerate(coords)
    ]
    front = brute_force_pareto(universe)
    images = {s.image.values for s in front}
    for a in front:
        assert not any(dominates(b.image, a.image) for b in universe)
    for member in universe:
        assert any(
            b.image.values == member.image.values or dominates(b.image, member.image)
            for b in front
        )
    assert len(images) == len(front)


class TestAuditSummary:
    def test_empty(self):
        summary = audit_summary(OracleAudit())
        assert summary.total == 0
        assert summary.by_kind == {} and summary.max_inverse_delta is None

    def test_grid_run_counts(self):
        from molp.algorithms import grid_sweep, greedy_minimum

        inst = staircase_instance(F(1), 2)  # bound exponent 4
        handle = explicit_oracles(inst)
        summary = audit_summary(grid_sweep(handle, F(21, 100)).audit)
        assert summary.by_kind == {"dual_restrict": 60}
        assert summary.by_delta == {F(1, 10): 60}
        assert summary.max_inverse_delta == 10
        greedy = greedy_minimum(explicit_oracles(staircase_instance(F(1), 3)), F(1))
        assert audit_summary(greedy.audit).by_kind["constrained"] <= 2 * 4 + 3

    def test_counts_and_max_inverse(self):
        inst = staircase_instance(F(1), 2)
        handle = explicit_oracles(inst)
        audit = OracleAudit()
        dual_restrict(handle, 0, F(1, 10), (F(4),), audit)
        dual_restrict(handle, 0, F(1, 2), (F(4),), audit)
        summary = audit_summary(audit)
        assert summary.total == 2
        assert summary.by_kind == {"dual_restrict": 2}
        assert summary.by_delta == {F(1, 10): 1, F(1, 2): 1}
        assert summary.max_inverse_delta == 10
