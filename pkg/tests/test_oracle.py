"""Metric repair, instance generation, ground-truth enumeration, and fuzzing."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cofix import (
    Arity,
    Coefficients,
    InstanceRecipe,
    MappingMode,
    MappingSet,
    MetricMode,
    MetricSpace,
    TableMapping,
    check_condition_two,
    check_condition_three,
    check_condition_four,
    check_range_inclusions,
    enumerate_common_fixed_points,
    enumerate_fixed_points,
    generate_instance,
    identity_mapping,
    metric_closure_repair,
    oracle_summary,
    picard_solve,
    run_fuzz,
    solve_four,
    solve_three,
    validate_coefficients,
    verify_metric_axioms,
)
from cofix.errors import DomainError, ExhaustiveOnInfinite

PATH3_TABLE = np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]])


class TestMetricClosureRepair:
    def test_valid_table_is_untouched(self):
        out = metric_closure_repair(PATH3_TABLE)
        assert np.array_equal(out, PATH3_TABLE)

    def test_triangle_violations_are_shortcut(self):
        out = metric_closure_repair(np.array([[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]]))
        assert np.array_equal(out, PATH3_TABLE)

    def test_asymmetry_resolved_by_minimum(self):
        out = metric_closure_repair(np.array([[0.0, 3.0], [1.0, 0.0]]))
        assert np.array_equal(out, [[0.0, 1.0], [1.0, 0.0]])

    def test_garbage_entries_are_tamed(self):
        out = metric_closure_repair(np.array([[0.0, -2.0], [np.nan, 0.0]]))
        rep = verify_metric_axioms(MetricSpace.finite(out), tolerance=0.0)
        assert rep.passed
        # nan collapses to zero, so the separation bump supplies the distance
        assert out[0, 1] == pytest.approx(2.0 / 2**20)

    def test_oversized_entries_are_clipped(self):
        out = metric_closure_repair(np.array([[0.0, 1e9], [1e9, 0.0]]))
        assert out[0, 1] == 1024.0

    def test_non_square_rejected(self):
        with pytest.raises(DomainError):
            metric_closure_repair(np.zeros((2, 3)))

    def test_result_always_passes_exact_verification(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            n = int(rng.integers(2, 12))
            raw = rng.uniform(0.0, 10.0, size=(n, n))
            out = metric_closure_repair(raw)
            assert verify_metric_axioms(MetricSpace.finite(out), tolerance=0.0).passed

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10**6), n=st.integers(2, 8))
    def test_repair_is_idempotent(self, seed, n):
        raw = np.random.default_rng(seed).uniform(0.0, 6.0, size=(n, n))
        once = metric_closure_repair(raw)
        assert np.array_equal(metric_closure_repair(once), once)


class TestEnumeration:
    def test_fixed_points(self):
        space = MetricSpace.finite(PATH3_TABLE)
        assert enumerate_fixed_points(space, TableMapping([0, 0, 1])) == (0,)
        assert enumerate_fixed_points(space, identity_mapping(3)) == (0, 1, 2)

    def test_common_fixed_points(self):
        space = MetricSpace.finite(PATH3_TABLE)
        S = TableMapping([0, 0, 2])
        T = TableMapping([0, 1, 1])
        assert enumerate_common_fixed_points(space, S, T) == (0,)

    def test_summary_collects_per_mapping_results(self):
        space = MetricSpace.finite(PATH3_TABLE)
        ms = MappingSet(S=TableMapping([0, 0, 2]), T=TableMapping([0, 1, 1]), arity=Arity.TWO)
        result = oracle_summary(space, ms)
        assert result.fixed_points == {"S": (0, 2), "T": (0, 1)}
        assert result.common_fixed_points == (0,)
        assert result.unique_common_fixed_point == 0
        assert result.coincidence_classes == ()
        json.dumps(result.to_dict())

    def test_summary_groups_coincidence_classes(self):
        space = MetricSpace.finite(PATH3_TABLE)
        ms = MappingSet(
            S=TableMapping([1, 1, 1]), T=TableMapping([1, 1, 1]), f=TableMapping([0, 0, 1]), arity=Arity.THREE
        )
        result = oracle_summary(space, ms)
        assert result.common_fixed_points == ()
        assert result.unique_common_fixed_point is None
        assert len(result.coincidence_classes) == 1
        klass = result.coincidence_classes[0]
        assert klass.value == 1 and klass.points == (2,)

    def test_ambiguous_common_fixed_points_have_no_unique_answer(self):
        space = MetricSpace.finite(PATH3_TABLE)
        ident = identity_mapping(3)
        result = oracle_summary(space, MappingSet(S=ident, T=ident, arity=Arity.TWO))
        assert result.common_fixed_points == (0, 1, 2)
        assert result.unique_common_fixed_point is None

    def test_needs_finite_space(self):
        from cofix import AffineMapping

        half = AffineMapping([[0.5]], [0.0])
        with pytest.raises(ExhaustiveOnInfinite):
            oracle_summary(MetricSpace.euclidean(1), MappingSet(S=half, T=half, arity=Arity.TWO))


class TestInstanceRecipe:
    def test_roundtrip(self):
        r = InstanceRecipe(seed=5, n=8, arity=Arity.THREE, metric_mode=MetricMode.INTEGER)
        assert InstanceRecipe.from_dict(json.loads(json.dumps(r.to_dict()))) == r

    def test_coercion_from_plain_values(self):
        r = InstanceRecipe(seed=0, n=4, arity=3, metric_mode="integer", mapping_mode="random")
        assert r.arity is Arity.THREE
        assert r.metric_mode is MetricMode.INTEGER
        assert r.mapping_mode is MappingMode.RANDOM

    def test_tiny_universe_rejected(self):
        with pytest.raises(DomainError):
            InstanceRecipe(seed=0, n=1)


class TestAnchorInstances:
    @pytest.mark.parametrize("mode", list(MetricMode))
    def test_two_mapping_instances_are_exact(self, mode):
        for seed in range(6):
            inst = generate_instance(InstanceRecipe(seed=seed, n=9, metric_mode=mode))
            assert verify_metric_axioms(inst.space, tolerance=0.0).passed
            # margins stay non-positive in exact float evaluation
            rep = check_condition_two(inst.space, inst.maps.S, inst.maps.T, inst.coefficients, tolerance=0.0)
            assert rep.satisfied
            assert inst.oracle.common_fixed_points == (inst.anchor,)
            assert 0.35 <= inst.phi <= 0.65
            assert inst.coefficients.gamma == inst.phi

    def test_every_start_descends_to_the_anchor(self):
        inst = generate_instance(InstanceRecipe(seed=3, n=12))
        for x0 in inst.space.points():
            rep = picard_solve(inst.space, inst.maps.S, inst.maps.T, inst.coefficients, x0)
            assert rep.converged and rep.point == inst.anchor

    def test_three_mapping_instances_carry_noninjective_factor(self):
        for seed in range(6):
            inst = generate_instance(InstanceRecipe(seed=seed, n=8, arity=Arity.THREE))
            f = inst.maps.f
            assert len(set(int(v) for v in f.table)) < f.n
            assert check_range_inclusions(inst.space, inst.maps).holds
            rep = check_condition_three(
                inst.space, inst.maps.S, inst.maps.T, f, inst.coefficients, tolerance=0.0
            )
            assert rep.satisfied
            pipe = solve_three(inst.space, inst.maps.S, inst.maps.T, f, inst.coefficients)
            assert pipe.succeeded and pipe.common_fixed_point == inst.anchor

    def test_four_mapping_instances_use_min_term_weight(self):
        for seed in range(6):
            inst = generate_instance(InstanceRecipe(seed=seed, n=8, arity=Arity.FOUR))
            assert inst.coefficients.L == inst.phi
            rep = check_condition_four(
                inst.space,
                inst.maps.S,
                inst.maps.T,
                inst.maps.f,
                inst.maps.g,
                inst.coefficients,
                tolerance=0.0,
            )
            assert rep.satisfied
            pipe = solve_four(
                inst.space, inst.maps.S, inst.maps.T, inst.maps.f, inst.maps.g, inst.coefficients
            )
            assert pipe.succeeded and pipe.common_fixed_point == inst.anchor

    def test_generation_is_deterministic(self):
        a = generate_instance(InstanceRecipe(seed=11, n=7, arity=Arity.THREE))
        b = generate_instance(InstanceRecipe(seed=11, n=7, arity=Arity.THREE))
        assert np.array_equal(a.space.table, b.space.table)
        assert a.maps.S == b.maps.S and a.maps.f == b.maps.f
        assert a.anchor == b.anchor and a.phi == b.phi

    def test_two_point_universe(self):
        inst = generate_instance(InstanceRecipe(seed=0, n=2, arity=Arity.THREE))
        assert inst.oracle.common_fixed_points == (inst.anchor,)


class TestRandomInstances:
    def test_random_mode_attaches_plain_oracle(self):
        inst = generate_instance(
            InstanceRecipe(seed=4, n=10, mapping_mode=MappingMode.RANDOM, metric_mode=MetricMode.EMBEDDED)
        )
        assert inst.anchor is None and inst.phi is None
        assert verify_metric_axioms(inst.space, tolerance=0.0).passed
        validate_coefficients(inst.coefficients)

    def test_random_higher_arity_instances_keep_inclusions(self):
        for seed in range(8):
            inst = generate_instance(
                InstanceRecipe(seed=seed, n=9, arity=Arity.THREE, mapping_mode=MappingMode.RANDOM)
            )
            assert check_range_inclusions(inst.space, inst.maps).holds


class TestRunFuzz:
    def test_anchor_two_mapping_batch_is_clean(self):
        summary = run_fuzz(30, seed=100, n_max=12)
        assert summary.clean
        t = summary.tallies
        assert t["generated"] == 30
        assert t["condition_satisfied"] == 30
        assert t["converged"] == 30
        assert t["oracle_matched"] == 30
        assert summary.elapsed > 0.0
        json.dumps(summary.to_dict())

    def test_anchor_three_mapping_batch_is_clean(self):
        summary = run_fuzz(15, seed=200, arity=Arity.THREE, n_max=10)
        assert summary.clean
        assert summary.tallies["pipeline_common_fixed_point"] == 15

    def test_anchor_four_mapping_batch_is_clean(self):
        summary = run_fuzz(10, seed=300, arity=Arity.FOUR, n_max=10)
        assert summary.clean
        assert summary.tallies["pipeline_common_fixed_point"] == 10

    def test_random_two_mapping_batch_accounts_for_every_instance(self):
        summary = run_fuzz(40, seed=400, mapping_mode=MappingMode.RANDOM, n_max=12)
        t = summary.tallies
        assert t["generated"] == 40
        assert t["condition_satisfied"] + t["condition_violated"] == 40
        assert t["converged"] + t["rate_violated"] + t["max_iterations"] == 40
        # a converged orbit on a separated table sits exactly on a fixed point
        assert summary.clean
        assert t["oracle_matched"] == t["converged"]

    def test_random_three_mapping_batch(self):
        summary = run_fuzz(15, seed=500, arity=Arity.THREE, mapping_mode=MappingMode.RANDOM, n_max=9)
        assert summary.clean
        total = sum(v for k, v in summary.tallies.items() if k.startswith("pipeline_"))
        assert total == 15

    def test_input_guards(self):
        with pytest.raises(DomainError):
            run_fuzz(0)
        with pytest.raises(DomainError):
            run_fuzz(5, n_min=5, n_max=3)
