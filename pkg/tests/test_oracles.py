import random
from fractions import Fraction

import pytest

from molp.core import (
    InvalidParameterError,
    ObjectiveVector,
    UnsupportedOracleError,
    two_pow,
)
from molp.oracles import (
    OracleAudit,
    constrained,
    constrained_via_dual_restrict,
    dual_restrict,
    restrict,
)
from molp.problems import ExplicitInstance, explicit_oracles

from molp_testutils import (
    assert_constrained_contract,
    assert_dual_restrict_contract,
    assert_restrict_contract,
    brute_opt,
    fuzz_instance,
    nonempty_fuzz_instance,
)

F = Fraction


@pytest.fixture
def three_point_handle():
    inst = ExplicitInstance.build(
        [
            ("a", ObjectiveVector.of(2, 1)),
            ("b", ObjectiveVector.of(F(3, 2), 4)),
            ("c", ObjectiveVector.of(1, 16)),
        ]
    )
    return explicit_oracles(inst)


class TestConstrained:
    def test_scan_example(self, three_point_handle):
        ans = constrained(three_point_handle, 0, (F(4),))
        assert ans.image.values == (F(3, 2), F(4))

    def test_infeasible(self, three_point_handle):
        assert constrained(three_point_handle, 0, (F(1, 2),)) is None

    def test_loose_bound(self, three_point_handle):
        ans = constrained(three_point_handle, 0, (F(16),))
        assert ans.image.values == (F(1), F(16))

    def test_rejects_nonpositive_bounds(self, three_point_handle):
        with pytest.raises(InvalidParameterError):
            constrained(three_point_handle, 0, (F(0),))


class TestRestrict:
    def test_exact_optimum_example(self, three_point_handle):
        ans = restrict(three_point_handle, 1, F(1, 10), (F(3, 2),))
        assert ans.image.values == (F(3, 2), F(4))
        assert ans.image[0] <= F(3, 2) and ans.image[1] <= F(11, 10) * 4

    def test_infeasible(self, three_point_handle):
        assert restrict(three_point_handle, 1, F(1, 10), (F(1, 2),)) is None

    def test_unique_candidate(self):
        inst = ExplicitInstance.build([("only", ObjectiveVector.of(1, 1))])
        handle = explicit_oracles(inst)
        ans = restrict(handle, 1, F(5), (F(1),))
        assert ans.witness == "only"


class TestDualRestrict:
    def test_tight_bound_example(self, three_point_handle):
        ans = dual_restrict(three_point_handle, 0, F(1, 2), (F(1),))
        assert ans.image.values == (F(2), F(1))

    def test_empty_region(self, three_point_handle):
        assert dual_restrict(three_point_handle, 0, F(1, 2), (F(1, 2),)) is None

    def test_loose_bound(self, three_point_handle):
        ans = dual_restrict(three_point_handle, 0, F(1, 2), (F(16),))
        assert ans.image.values == (F(1), F(16))

    def test_capability_error(self):
        from molp.problems import GraphInstance, shortest_path_handle

        graph = shortest_path_handle(
            GraphInstance.build(2, [(0, 1, F(1), F(1))], 0, 1)
        )
        with pytest.raises(UnsupportedOracleError):
            dual_restrict(graph, 1, F(1), (F(1),))


class TestFuzzedContracts:
    def test_dual_restrict_contract(self):
        rng = random.Random(2024)
        for _ in range(300):
            inst = fuzz_instance(rng, p=rng.choice([2, 3]))
            handle = explicit_oracles(inst)
            universe = inst.universe()
            delta = rng.choice([F(1, 10), F(1, 3), F(1), F(3)])
            bounds = tuple(
                two_pow(-handle.M) + F(rng.randint(0, 40), 8) for _ in range(handle.p - 1)
            )
            ans = dual_restrict(handle, 0, delta, bounds)
            assert_dual_restrict_contract(universe, 0, delta, bounds, ans)

    def test_restrict_and_constrained_contracts(self):
        rng = random.Random(99)
        for _ in range(200):
            inst = fuzz_instance(rng, p=2)
            handle = explicit_oracles(inst)
            universe = inst.universe()
            index = rng.choice([0, 1])
            bounds = (two_pow(-handle.M) + F(rng.randint(0, 40), 8),)
            assert_constrained_contract(
                universe, index, bounds, constrained(handle, index, bounds)
            )
            delta = F(rng.randint(1, 8), 8)
            assert_restrict_contract(
                universe, index, delta, bounds, restrict(handle, index, delta, bounds)
            )

    def test_opt_monotone_in_bounds(self):
        rng = random.Random(55)
        for _ in range(100):
            inst = nonempty_fuzz_instance(rng, p=2)
            universe = inst.universe()
            lo = two_pow(-inst.M) + F(rng.randint(0, 20), 8)
            hi = lo + F(rng.randint(0, 20), 8)
            opt_lo = brute_opt(universe, 0, (lo,))
            opt_hi = brute_opt(universe, 0, (hi,))
            if opt_lo is not None:
                assert opt_hi is not None and opt_hi <= opt_lo


class TestConstrainedViaDualRestrict:
    def test_agrees_with_scan(self, three_point_handle):
        ans = constrained_via_dual_restrict(three_point_handle, 0, (F(4),))
        assert ans.image.values == (F(3, 2), F(4))
        assert constrained_via_dual_restrict(three_point_handle, 0, (F(1, 2),)) is None
        tight = constrained_via_dual_restrict(three_point_handle, 0, (F(1),))
        assert tight.image.values == (F(2), F(1))

    def test_bound_just_below_a_cheap_point(self):
        # The relaxed probe window admits a point with much better first
        # objective that violates the bound; the reduction must still find
        # the exact optimum instead of reporting NO.
        inst = ExplicitInstance.build(
            [("hi", ObjectiveVector.of(5, 1)), ("lo", ObjectiveVector.of(1, F(5, 4)))]
        )
        handle = explicit_oracles(inst)
        bound = F(5, 4) - F(1, 100)
        ans = constrained_via_dual_restrict(handle, 0, (bound,))
        assert ans is not None and ans.image.values == (F(5), F(1))

    def test_agrees_with_scan_fuzzed(self):
        rng = random.Random(7)
        for _ in range(200):
            inst = fuzz_instance(rng, p=2)
            handle = explicit_oracles(inst)
            universe = inst.universe()
            index = rng.choice([0, 1])
            base = two_pow(-handle.M) + F(rng.randint(0, 40), 16)
            exact = constrained(handle, index, (base,))
            via = constrained_via_dual_restrict(handle, index, (base,))
            if exact is None:
                assert via is None
            else:
                assert via is not None and via.image[index] == exact.image[index]
            assert_constrained_contract(universe, index, (base,), via)

    def test_three_objectives(self):
        rng = random.Random(17)
        for _ in range(60):
            inst = fuzz_instance(rng, p=3, max_points=10)
            handle = explicit_oracles(inst)
            bounds = tuple(
                two_pow(-handle.M) + F(rng.randint(0, 30), 8) for _ in range(2)
            )
            via = constrained_via_dual_restrict(handle, 0, bounds)
            assert_constrained_contract(inst.universe(), 0, bounds, via)


class TestAudit:
    def test_records_every_call(self, three_point_handle):
        audit = OracleAudit()
        constrained(three_point_handle, 0, (F(4),), audit)
        restrict(three_point_handle, 1, F(1, 10), (F(3, 2),), audit)
        dual_restrict(three_point_handle, 0, F(1, 2), (F(1),), audit)
        dual_restrict(three_point_handle, 0, F(1, 2), (F(1, 2),), audit)
        assert len(audit) == 4
        assert [r.kind for r in audit.records] == [
            "constrained",
            "restrict",
            "dual_restrict",
            "dual_restrict",
        ]
        assert audit.records[1].delta == F(1, 10)
        assert [r.ordinal for r in audit.records] == [0, 1, 2, 3]

    def test_export_format(self, three_point_handle):
        audit = OracleAudit()
        dual_restrict(three_point_handle, 0, F(1, 2), (F(1),), audit)
        dual_restrict(three_point_handle, 0, F(1, 2), (F(1, 2),), audit)
        lines = audit.export_lines()
        assert lines[0] == "dual_restrict\t1\t1/2\t1\t2 1"
        assert lines[1] == "dual_restrict\t1\t1/2\t1/2\tNO"

    def test_nested_reduction_calls_are_recorded(self, three_point_handle):
        audit = OracleAudit()
        constrained_via_dual_restrict(three_point_handle, 0, (F(4),), audit)
        kinds = [r.kind for r in audit.records]
        assert kinds.count("constrained") == 1
        assert kinds.count("dual_restrict") >= 1
        # the outer record keeps the caller's parameters
        outer = audit.records[-1]
        assert outer.kind == "constrained" and outer.delta is None
        assert outer.bounds == (F(4),)
