"""Metric space construction, point handling, and axiom verification."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cofix import AxiomReport, Flavor, MetricSpace, verify_metric_axioms
from cofix.errors import DomainError

# path-graph metric on four points
PATH4 = [
    [0.0, 1.0, 2.0, 3.0],
    [1.0, 0.0, 1.0, 2.0],
    [2.0, 1.0, 0.0, 1.0],
    [3.0, 2.0, 1.0, 0.0],
]


@pytest.fixture
def path4():
    return MetricSpace.finite(PATH4)


class TestFiniteSpace:
    def test_basics(self, path4):
        assert path4.is_finite
        assert path4.flavor is Flavor.FINITE_EXPLICIT
        assert path4.n == 4
        assert path4.complete
        assert list(path4.points()) == [0, 1, 2, 3]
        assert path4.default_tolerance == 1e-12

    def test_distance_lookup(self, path4):
        assert path4.distance(0, 3) == 3.0
        assert path4.distance(3, 0) == 3.0
        assert path4.distance(2, 2) == 0.0

    def test_table_is_read_only(self, path4):
        with pytest.raises(ValueError):
            path4.table[0, 1] = 99.0

    def test_rejects_non_square(self):
        with pytest.raises(DomainError):
            MetricSpace.finite(np.zeros((2, 3)))

    def test_rejects_non_finite_entries(self):
        bad = [[0.0, np.nan], [np.nan, 0.0]]
        with pytest.raises(DomainError):
            MetricSpace.finite(bad)

    def test_contains(self, path4):
        assert path4.contains(0)
        assert path4.contains(np.int64(3))
        assert not path4.contains(4)
        assert not path4.contains(-1)
        assert not path4.contains(1.5)

    def test_distance_rejects_foreign_point(self, path4):
        with pytest.raises(DomainError):
            path4.distance(0, 7)

    def test_points_equal_is_exact_index(self, path4):
        assert path4.points_equal(2, np.int64(2))
        assert not path4.points_equal(2, 3)

    def test_canonicalize_materialize_roundtrip(self, path4):
        c = path4.canonicalize(np.int64(2))
        assert c == 2 and isinstance(c, int)
        assert path4.materialize(c) == 2

    def test_complete_flag_pinned_true(self):
        sp = MetricSpace(flavor=Flavor.FINITE_EXPLICIT, table=np.array(PATH4), complete=False)
        assert sp.complete


class TestEuclideanSpace:
    def test_basics(self):
        sp = MetricSpace.euclidean(3)
        assert not sp.is_finite
        assert sp.dimension == 3
        assert sp.default_tolerance == 1e-9
        with pytest.raises(DomainError):
            sp.n

    def test_distance_is_norm(self):
        sp = MetricSpace.euclidean(3)
        assert sp.distance([0.0, 0.0, 0.0], [3.0, 4.0, 0.0]) == 5.0

    def test_points_equal_uses_eq_tol(self):
        sp = MetricSpace.euclidean(2)
        a = np.array([1.0, 2.0])
        assert sp.points_equal(a, a + 1e-12)
        assert not sp.points_equal(a, a + 1.0)

    def test_canonicalize_materialize_roundtrip(self):
        sp = MetricSpace.euclidean(2)
        c = sp.canonicalize(np.array([0.5, -1.5]))
        assert c == (0.5, -1.5)
        back = sp.materialize(c)
        assert isinstance(back, np.ndarray)
        assert np.array_equal(back, [0.5, -1.5])

    def test_wrong_dimension_rejected(self):
        sp = MetricSpace.euclidean(2)
        with pytest.raises(DomainError):
            sp.distance(np.zeros(3), np.zeros(3))

    def test_incomplete_flag_survives(self):
        assert not MetricSpace.euclidean(2, complete=False).complete

    def test_rejects_bad_dimension(self):
        with pytest.raises(DomainError):
            MetricSpace.euclidean(0)


class TestAxiomChecks:
    def test_valid_table_passes(self, path4):
        rep = verify_metric_axioms(path4)
        assert rep.passed
        assert rep.mode == "exhaustive"
        assert rep.tolerance == 0.0
        assert [c.name for c in rep.checks] == ["identity", "symmetry", "positivity", "triangle"]

    def test_identity_violation(self):
        tab = np.array(PATH4)
        tab[1, 1] = 0.5
        rep = verify_metric_axioms(MetricSpace.finite(tab))
        chk = rep.check("identity")
        assert not chk.passed
        assert chk.witness == (1,)
        assert chk.magnitude == 0.5

    def test_symmetry_violation(self):
        tab = np.array(PATH4)
        tab[0, 1] = 2.0
        chk = verify_metric_axioms(MetricSpace.finite(tab)).check("symmetry")
        assert not chk.passed
        assert chk.magnitude == 1.0

    def test_positivity_violation(self):
        chk = verify_metric_axioms(MetricSpace.finite(np.zeros((2, 2)))).check("positivity")
        assert not chk.passed
        assert chk.witness == (0, 1)

    def test_triangle_violation(self):
        tab = [[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]]
        rep = verify_metric_axioms(MetricSpace.finite(tab))
        chk = rep.check("triangle")
        assert not chk.passed
        assert chk.witness == (0, 1, 2)
        assert chk.magnitude == 3.0

    def test_tolerance_slack_admits_near_miss(self):
        tab = [[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]]
        assert verify_metric_axioms(MetricSpace.finite(tab), tolerance=3.0).passed

    def test_negative_tolerance_rejected(self, path4):
        with pytest.raises(DomainError):
            verify_metric_axioms(path4, tolerance=-1.0)

    def test_euclidean_sampled_mode(self):
        sp = MetricSpace.euclidean(2)
        rep = verify_metric_axioms(sp, samples=64, seed=7, box=(-2.0, 2.0))
        assert rep.passed
        assert rep.mode == "sampled"
        assert rep.seed == 7
        assert rep.box == (-2.0, 2.0)
        assert rep.samples == 64

    def test_euclidean_sampling_is_deterministic(self):
        sp = MetricSpace.euclidean(3)
        a = verify_metric_axioms(sp, samples=32, seed=5).to_dict()
        b = verify_metric_axioms(sp, samples=32, seed=5).to_dict()
        assert a == b

    def test_euclidean_bad_sampling_inputs(self):
        sp = MetricSpace.euclidean(2)
        with pytest.raises(DomainError):
            verify_metric_axioms(sp, box=(1.0, 1.0))
        with pytest.raises(DomainError):
            verify_metric_axioms(sp, samples=0)

    def test_report_roundtrip(self, path4):
        rep = verify_metric_axioms(path4)
        d = rep.to_dict()
        json.dumps(d)
        assert AxiomReport.from_dict(d) == rep

    def test_report_check_lookup(self, path4):
        rep = verify_metric_axioms(path4)
        assert rep.check("triangle").name == "triangle"
        with pytest.raises(KeyError):
            rep.check("nonsense")


@settings(max_examples=25, deadline=None)
@given(n=st.integers(min_value=2, max_value=10), seed=st.integers(min_value=0, max_value=10**6))
def test_embedded_point_clouds_always_yield_metrics(n, seed):
    """Pairwise-distance tables of real point clouds satisfy every axiom."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-5.0, 5.0, size=(n, 3))
    tab = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    rep = verify_metric_axioms(MetricSpace.finite(tab), tolerance=1e-9)
    assert rep.passed
