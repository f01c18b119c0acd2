import random
from fractions import Fraction

import pytest

from molp.core import (
    ObjectiveVector,
    ParseError,
    UnsupportedOracleError,
    ValidationError,
    one_exact_alpha,
)
from molp.algorithms import adaptive_sweep, alternating_sweep, greedy_minimum, grid_sweep
from molp.generators import partition_reduction
from molp.problems import (
    ExplicitInstance,
    GraphInstance,
    SchedulingInstance,
    instance_to_text,
    parse_instance_text,
    scheduling_handle,
    shortest_path_dual_restrict,
    shortest_path_handle,
)
from molp.verify import verify_one_exact

from molp_testutils import assert_dual_restrict_contract, fuzz_graph

F = Fraction


class TestExplicitInstance:
    def test_smallest_exponent_derived(self):
        inst = ExplicitInstance.build(
            [("a", ObjectiveVector.of(2, 1)), ("b", ObjectiveVector.of(F(3, 2), 4)),
             ("c", ObjectiveVector.of(1, 16))]
        )
        assert inst.M == 4
        assert inst.values_on_grid

    def test_declared_exponent_range_violation(self):
        with pytest.raises(ValidationError):
            ExplicitInstance.build([("a", ObjectiveVector.of(1, 16))], declared_M=3)

    def test_declared_exponent_separation_violation(self):
        points = [
            ("a", ObjectiveVector.of(1, 1)),
            ("b", ObjectiveVector.of(1, 1 + F(1, 64))),
        ]
        with pytest.raises(ValidationError):
            ExplicitInstance.build(points, declared_M=2)
        inst = ExplicitInstance.build(points, declared_M=3)
        assert inst.M == 3

    def test_duplicate_tokens_rejected(self):
        with pytest.raises(ValidationError):
            ExplicitInstance.build(
                [("a", ObjectiveVector.of(1, 1)), ("a", ObjectiveVector.of(2, 2))]
            )

    def test_minimum_exponent_is_one(self):
        inst = ExplicitInstance.build([("a", ObjectiveVector.of(1, 1))])
        assert inst.M == 1

    def test_off_grid_flagged(self):
        inst = ExplicitInstance.build(
            [("a", ObjectiveVector.of(F(1, 3), 1)), ("b", ObjectiveVector.of(1, 2))]
        )
        assert not inst.values_on_grid


class TestShortestPathDualRestrict:
    @pytest.fixture
    def parallel_edges(self):
        return GraphInstance.build(
            2, [(0, 1, F(1), F(10)), (0, 1, F(10), F(1))], 0, 1
        )

    def test_tight_budget_takes_cheap_second(self, parallel_edges):
        ans = shortest_path_dual_restrict(parallel_edges, F(1, 2), F(1))
        assert ans.image.values == (F(10), F(1))

    def test_loose_budget_takes_cheap_first(self, parallel_edges):
        ans = shortest_path_dual_restrict(parallel_edges, F(1, 2), F(10))
        assert ans.image.values == (F(1), F(10))

    def test_disconnected_graph(self):
        graph = GraphInstance.build(3, [(0, 1, F(1), F(1))], 0, 2)
        assert shortest_path_dual_restrict(graph, F(1), F(4)) is None

    def test_contract_fuzzed(self):
        rng = random.Random(41)
        for trial in range(100):
            graph = fuzz_graph(rng, rational=trial % 2 == 0)
            handle = shortest_path_handle(graph)
            universe = handle.paths()
            delta = rng.choice([F(1, 4), F(1, 2), F(1), F(2)])
            s2 = F(rng.randint(1, 40), rng.randint(1, 4))
            ans = shortest_path_dual_restrict(graph, delta, s2)
            if ans is not None:
                # the dynamic program may return a walk token; re-evaluate it
                assert handle.evaluate(ans.witness) == ans.image
                universe_plus = universe + [ans]
            else:
                universe_plus = universe
            assert_dual_restrict_contract(universe_plus, 0, delta, (s2,), ans)

    def test_answers_are_simple_paths(self):
        rng = random.Random(45)
        for _ in range(80):
            graph = fuzz_graph(rng, max_nodes=6, max_extra_edges=10)
            delta = rng.choice([F(1, 4), F(1)])
            s2 = F(rng.randint(1, 40), 2)
            ans = shortest_path_dual_restrict(graph, delta, s2)
            if ans is None:
                continue
            nodes = [graph.source]
            for part in ans.witness.split("|"):
                nodes.append(graph.edges[int(part[1:])][1])
            assert len(set(nodes)) == len(nodes)
            assert nodes[-1] == graph.target

    def test_tying_walk_is_stripped_to_a_path(self):
        # two routes tie on the first objective at the same rounded budget;
        # whichever state chain wins, the answer must be cycle-free
        graph = GraphInstance.build(
            3,
            [
                (0, 1, F(3), F(1)),   # s -> m
                (1, 1, F(3), F(1)),   # self loop at m
                (1, 2, F(4), F(1)),   # m -> t
                (0, 1, F(6), F(2)),   # heavier parallel s -> m
            ],
            0,
            2,
        )
        ans = shortest_path_dual_restrict(graph, F(2), F(10))
        assert ans is not None
        assert ans.image[0] == F(7)
        parts = [int(p[1:]) for p in ans.witness.split("|")]
        assert 1 not in parts  # the self loop never survives

    def test_larger_delta_never_turns_solution_into_no(self):
        rng = random.Random(42)
        for _ in range(60):
            graph = fuzz_graph(rng)
            s2 = F(rng.randint(1, 30), 2)
            small, big = F(1, 4), F(3, 2)
            a_small = shortest_path_dual_restrict(graph, small, s2)
            a_big = shortest_path_dual_restrict(graph, big, s2)
            if a_small is not None:
                assert a_big is not None


class TestGraphHandle:
    def test_diamond_all_algorithms(self):
        graph = GraphInstance.build(
            4,
            [
                (0, 1, F(1), F(4)),
                (0, 2, F(4), F(1)),
                (1, 3, F(1), F(4)),
                (2, 3, F(4), F(1)),
                (0, 3, F(3), F(3)),
            ],
            0,
            3,
        )
        handle = shortest_path_handle(graph)
        universe = handle.paths()
        assert len(universe) == 3
        alpha = one_exact_alpha(F(1), 2)
        for result in (
            grid_sweep(handle, F(1)),
            adaptive_sweep(handle, F(1), check_invariants=True),
            alternating_sweep(handle, F(1)),
            greedy_minimum(handle, F(1)),
        ):
            report = verify_one_exact(result.solutions, universe, alpha)
            assert report.verdict

    def test_single_edge(self):
        graph = GraphInstance.build(2, [(0, 1, F(2), F(3))], 0, 1)
        handle = shortest_path_handle(graph)
        for result in (
            grid_sweep(handle, F(1)),
            adaptive_sweep(handle, F(1)),
            alternating_sweep(handle, F(1)),
            greedy_minimum(handle, F(1)),
        ):
            assert [s.image.values for s in result.solutions] == [(F(2), F(3))]

    def test_disconnected_graph_empty_outputs(self):
        graph = GraphInstance.build(3, [(0, 1, F(1), F(1))], 0, 2)
        handle = shortest_path_handle(graph)
        assert grid_sweep(handle, F(1)).solutions == ()
        assert adaptive_sweep(handle, F(1)).solutions == ()
        assert alternating_sweep(handle, F(1)).solutions == ()
        assert greedy_minimum(handle, F(1)).solutions == ()

    def test_off_grid_costs_full_stack(self):
        # costs in thirds never sit on the separation grid, so the
        # restrict reduction must run with its tightened probe ratio
        rng = random.Random(44)
        for _ in range(15):
            graph = fuzz_graph(rng, max_nodes=5, max_extra_edges=5, rational=True)
            handle = shortest_path_handle(graph)
            if handle.values_on_grid:
                continue
            universe = handle.paths()
            eps = rng.choice([F(1), F(3)])
            alpha = one_exact_alpha(eps, 2)
            for result in (
                adaptive_sweep(handle, eps, check_invariants=True),
                alternating_sweep(handle, eps),
                greedy_minimum(handle, eps),
            ):
                assert verify_one_exact(result.solutions, universe, alpha).verdict

    def test_enumeration_cap_gates_constrained(self):
        graph = GraphInstance.build(2, [(0, 1, F(1), F(1))], 0, 1)
        handle = shortest_path_handle(graph, enumeration_cap=1)
        assert not handle.has_constrained(0)
        with pytest.raises(UnsupportedOracleError):
            handle.paths()

    def test_source_target_validation(self):
        with pytest.raises(ValidationError):
            GraphInstance.build(2, [(0, 1, F(1), F(1))], 0, 0)
        with pytest.raises(ValidationError):
            GraphInstance.build(2, [(0, 1, F(0), F(1))], 0, 1)


class TestScheduling:
    def test_objectives_match_independent_recomputation(self):
        rng = random.Random(43)
        instance = SchedulingInstance.build(
            2,
            [
                ("j0", [(F(2), F(1)), (F(2), F(0))]),
                ("j1", [(F(1), F(3)), (F(4), F(0))]),
                ("j2", [(F(3), F(2)), (F(1), F(1))]),
            ],
        )
        handle = scheduling_handle(instance)
        for _ in range(20):
            assignment = [rng.randrange(2) for _ in range(3)]
            token = "-".join(str(x) for x in assignment)
            loads = [F(0), F(0)]
            cost = F(0)
            for j, machine in enumerate(assignment):
                p, c = instance.jobs[j][1][machine]
                loads[machine] += p
                cost += c
            image = handle.evaluate(token)
            assert image[0] == cost + 1
            assert image[1] == max(loads)

    def test_one_job_one_machine(self):
        instance = SchedulingInstance.build(1, [("j0", [(F(2), F(3))])])
        handle = scheduling_handle(instance)
        assert len(handle.universe()) == 1
        result = greedy_minimum(handle, F(1))
        assert len(result.solutions) == 1

    def test_gadget_unique_minimum_cost(self):
        reduction = partition_reduction([1, 1, 2], F(1, 4))
        handle = scheduling_handle(reduction.instance)
        sbar = "1-1-1-0-1"
        assert handle.raw_cost(sbar) == 2
        cheaper_or_equal = [
            s for s in handle.universe() if s.image[0] <= handle.evaluate(sbar)[0]
        ]
        assert [s.witness for s in cheaper_or_equal] == [sbar]

    def test_assignment_cap(self):
        instance = SchedulingInstance.build(
            2, [(f"j{i}", [(F(1), F(0)), (F(1), F(0))]) for i in range(6)]
        )
        with pytest.raises(UnsupportedOracleError):
            scheduling_handle(instance, assignment_cap=10)

    def test_zero_time_everywhere_rejected(self):
        with pytest.raises(ValidationError):
            SchedulingInstance.build(2, [("j0", [(F(0), F(1)), (F(0), F(2))])])


class TestFileFormats:
    def test_explicit_roundtrip(self):
        inst = ExplicitInstance.build(
            [("a", ObjectiveVector.of(2, 1)), ("b", ObjectiveVector.of(F(3, 2), 4))]
        )
        again = parse_instance_text(instance_to_text(inst))
        assert again.points == inst.points

    def test_graph_roundtrip(self):
        graph = GraphInstance.build(
            3, [(0, 1, F(1, 2), F(3)), (1, 2, F(2), F(5, 4))], 0, 2
        )
        again = parse_instance_text(instance_to_text(graph))
        assert again == graph

    def test_sched_roundtrip(self):
        reduction = partition_reduction([1, 2, 3], F(1, 4))
        again = parse_instance_text(instance_to_text(reduction.instance))
        assert again == reduction.instance

    def test_comments_and_blank_lines(self):
        text = """
        # an instance
        molp explicit 2
        point a 2 1   # trailing comment
        point b 3/2 4
        """
        inst = parse_instance_text(text)
        assert len(inst) == 2

    @pytest.mark.parametrize(
        "bad",
        [
            "",
            "molp unknown 2",
            "molp explicit x",
            "molp explicit 2\npoint a 1",
            "molp explicit 2\npoint a 1 0",
            "molp graph\nnodes 2\nsource 0\ntarget 0\nedge 0 1 1 1",
            "molp sched 2\njob a 1 1",
        ],
    )
    def test_parse_errors(self, bad):
        with pytest.raises(ParseError):
            parse_instance_text(bad)
