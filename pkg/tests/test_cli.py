"""Command line behavior: exit codes, output formats, argument handling.

Every test drives ``cofix.cli.main`` directly with an argv list and a
problem file written into ``tmp_path``, so the assertions cover exactly
what a shell user would see.
"""

import json

import pytest

from cofix import cli, load_problem

HALVING_TABLE = [
    [0.0, 1.0, 3.0, 7.0],
    [1.0, 0.0, 2.0, 6.0],
    [3.0, 2.0, 0.0, 4.0],
    [7.0, 6.0, 4.0, 0.0],
]
PATH3 = [[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]]

GAMMA_HALF = {"alpha": 0, "beta": 0, "gamma": 0.5, "delta": 0, "L": 0}
ZERO_COEFS = {"alpha": 0, "beta": 0, "gamma": 0, "delta": 0, "L": 0}


def table_maps(arity, **tables):
    maps = {"arity": arity}
    for label, table in tables.items():
        maps[label] = {"type": "table", "table": table}
    return maps


def write_doc(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def halving_file(tmp_path):
    doc = {
        "space": {"flavor": "finite_explicit", "table": HALVING_TABLE},
        "mappings": table_maps(2, S=[0, 0, 1, 2], T=[0, 0, 1, 2]),
        "coefficients": GAMMA_HALF,
        "solver": {"x0": 3},
    }
    return write_doc(tmp_path, "halving.json", doc)


@pytest.fixture
def violated_file(tmp_path):
    doc = {
        "space": {"flavor": "finite_explicit", "table": HALVING_TABLE},
        "mappings": table_maps(2, S=[0, 1, 2, 3], T=[0, 1, 2, 3]),
        "coefficients": {"alpha": 0.1, "beta": 0.1, "gamma": 0.3, "delta": 0.1, "L": 0.5},
    }
    return write_doc(tmp_path, "violated.json", doc)


@pytest.fixture
def swap_file(tmp_path):
    doc = {
        "space": {"flavor": "finite_explicit", "table": [[0.0, 1.0], [1.0, 0.0]]},
        "mappings": table_maps(2, S=[1, 0], T=[1, 0]),
        "coefficients": GAMMA_HALF,
    }
    return write_doc(tmp_path, "swap.json", doc)


@pytest.fixture
def three_file(tmp_path):
    doc = {
        "space": {"flavor": "finite_explicit", "table": PATH3},
        "mappings": table_maps(3, S=[0, 0, 0], T=[0, 0, 0], f=[0, 2, 1]),
        "coefficients": GAMMA_HALF,
    }
    return write_doc(tmp_path, "three.json", doc)


@pytest.fixture
def degrade_file(tmp_path):
    doc = {
        "space": {"flavor": "finite_explicit", "table": PATH3},
        "mappings": table_maps(3, S=[1, 1, 1], T=[1, 1, 1], f=[0, 0, 1]),
        "coefficients": ZERO_COEFS,
    }
    return write_doc(tmp_path, "degrade.json", doc)


@pytest.fixture
def affine_file(tmp_path):
    doc = {
        "space": {"flavor": "euclidean_affine", "dimension": 1},
        "mappings": {
            "arity": 3,
            "S": {"type": "affine", "matrix": [[0.5]], "offset": [0.0]},
            "T": {"type": "affine", "matrix": [[0.5]], "offset": [0.0]},
            "f": {"type": "affine", "matrix": [[2.0]], "offset": [0.0]},
        },
        "coefficients": {"alpha": 0, "beta": 0, "gamma": 0.3, "delta": 0, "L": 0},
        "pair_source": {"samples": 500, "seed": 9, "box": [-5.0, 5.0]},
        "solver": {"x0": [1.0]},
    }
    return write_doc(tmp_path, "affine3.json", doc)


@pytest.fixture
def four_file(tmp_path):
    doc = {
        "space": {"flavor": "finite_explicit", "table": HALVING_TABLE},
        "mappings": table_maps(
            4, S=[0, 0, 1, 2], T=[0, 0, 1, 2], f=[0, 1, 2, 3], g=[0, 1, 2, 3]
        ),
        "coefficients": GAMMA_HALF,
    }
    return write_doc(tmp_path, "four.json", doc)


class TestCheck:
    def test_passing_problem_exits_zero(self, halving_file, capsys):
        assert cli.main(["check", halving_file]) == cli.EXIT_OK
        out = capsys.readouterr().out
        assert "result: pass" in out
        assert "axioms: pass" in out

    def test_violated_problem_exits_one(self, violated_file, capsys):
        assert cli.main(["check", violated_file]) == cli.EXIT_FAILED
        assert "result: FAIL" in capsys.readouterr().out

    def test_structured_output_parses(self, halving_file, capsys):
        assert cli.main(["check", halving_file, "--format", "structured"]) == cli.EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["passed"] is True
        assert data["condition"]["satisfied"] is True
        assert data["axioms"]["passed"] is True

    def test_missing_file_exits_schema(self, capsys):
        assert cli.main(["check", "/no/such/file.json"]) == cli.EXIT_SCHEMA
        assert capsys.readouterr().err.startswith("schema error:")


class TestSolve:
    def test_converging_problem_exits_zero(self, halving_file, capsys):
        assert cli.main(["solve", halving_file]) == cli.EXIT_OK
        out = capsys.readouterr().out
        assert "status: converged" in out
        assert "point: 0" in out

    def test_rate_violation_exits_one(self, swap_file, capsys):
        assert cli.main(["solve", swap_file]) == cli.EXIT_FAILED
        assert "violation at step" in capsys.readouterr().out

    def test_trace_prints_orbit(self, halving_file, capsys):
        assert cli.main(["solve", halving_file, "--trace"]) == cli.EXIT_OK
        out = capsys.readouterr().out
        assert "[  0]" in out
        assert "start" in out

    def test_x0_override(self, halving_file, capsys):
        assert cli.main(["solve", halving_file, "--x0", "0"]) == cli.EXIT_OK
        assert "iterations: 1" in capsys.readouterr().out

    def test_unparseable_x0_exits_schema(self, halving_file, capsys):
        assert cli.main(["solve", halving_file, "--x0", "abc"]) == cli.EXIT_SCHEMA
        assert "cannot parse start point" in capsys.readouterr().err

    def test_wrong_arity_exits_schema(self, three_file, capsys):
        assert cli.main(["solve", three_file]) == cli.EXIT_SCHEMA
        assert "use solve3" in capsys.readouterr().err

    def test_structured_report_parses(self, halving_file, capsys):
        assert cli.main(["solve", halving_file, "--format", "structured"]) == cli.EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["status"] == "converged"
        assert data["point"] == 0


class TestSolveHigher:
    def test_three_mapping_pipeline(self, three_file, capsys):
        assert cli.main(["solve3", three_file]) == cli.EXIT_OK
        out = capsys.readouterr().out
        assert "common fixed point: 0" in out
        assert "stages:" in out

    def test_affine_pipeline(self, affine_file, capsys):
        assert cli.main(["solve3", affine_file]) == cli.EXIT_OK
        assert "common fixed point" in capsys.readouterr().out

    def test_degraded_instance_exits_one(self, degrade_file, capsys):
        assert cli.main(["solve3", degrade_file]) == cli.EXIT_FAILED
        out = capsys.readouterr().out
        assert "point of coincidence: 1" in out
        assert "INCOMPATIBLE" in out

    def test_coincidence_only_accepts_degraded_instance(self, degrade_file, capsys):
        assert cli.main(["solve3", degrade_file, "--coincidence-only"]) == cli.EXIT_OK
        assert "point of coincidence: 1" in capsys.readouterr().out

    def test_four_mapping_pipeline(self, four_file, capsys):
        assert cli.main(["solve4", four_file]) == cli.EXIT_OK
        assert "common fixed point: 0" in capsys.readouterr().out

    def test_arity_mismatch_exits_schema(self, halving_file, capsys):
        assert cli.main(["solve3", halving_file]) == cli.EXIT_SCHEMA
        assert "solve3 handles 3 mappings" in capsys.readouterr().err

    def test_inclusion_failure_exits_one(self, tmp_path, capsys):
        doc = {
            "space": {"flavor": "finite_explicit", "table": PATH3},
            "mappings": table_maps(3, S=[2, 2, 2], T=[2, 2, 2], f=[0, 0, 0]),
            "coefficients": ZERO_COEFS,
        }
        path = write_doc(tmp_path, "badinc.json", doc)
        assert cli.main(["solve3", path]) == cli.EXIT_FAILED
        err = capsys.readouterr().err
        assert err.startswith("failed: [inclusions]")

    def test_structured_report_parses(self, three_file, capsys):
        assert cli.main(["solve3", three_file, "--format", "structured"]) == cli.EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["status"] == "common_fixed_point"
        assert data["common_fixed_point"] == 0


class TestReduce:
    def test_emits_loadable_two_mapping_problem(self, three_file, capsys):
        assert cli.main(["reduce", three_file, "--format", "structured"]) == cli.EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        reduced = load_problem(doc)
        assert int(reduced.maps.arity) == 2
        assert reduced.metadata["reduced_from_arity"] == 3
        assert reduced.metadata["image"] == [0, 1, 2]

    def test_degraded_image_is_partial(self, degrade_file, capsys):
        assert cli.main(["reduce", degrade_file, "--format", "structured"]) == cli.EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["metadata"]["image"] == [0, 1]

    def test_human_output_names_induced_maps(self, three_file, capsys):
        assert cli.main(["reduce", three_file]) == cli.EXIT_OK
        out = capsys.readouterr().out
        assert "induced S:" in out
        assert "image: [0, 1, 2]" in out

    def test_two_mapping_problem_is_rejected(self, halving_file, capsys):
        assert cli.main(["reduce", halving_file]) == cli.EXIT_SCHEMA
        assert "three- or four-mapping" in capsys.readouterr().err


class TestOracle:
    def test_enumerates_finite_problem(self, halving_file, capsys):
        assert cli.main(["oracle", halving_file]) == cli.EXIT_OK
        out = capsys.readouterr().out
        assert "fixed points of S: [0]" in out
        assert "common fixed points: [0]" in out

    def test_structured_output_parses(self, four_file, capsys):
        assert cli.main(["oracle", four_file, "--format", "structured"]) == cli.EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["common_fixed_points"] == [0]
        assert set(data["fixed_points"]) == {"S", "T", "f", "g"}

    def test_euclidean_problem_is_rejected(self, affine_file, capsys):
        assert cli.main(["oracle", affine_file]) == cli.EXIT_SCHEMA
        assert "finite problem" in capsys.readouterr().err


class TestFuzz:
    def test_small_clean_batch_exits_zero(self, capsys):
        assert cli.main(["fuzz", "--count", "5", "--seed", "0"]) == cli.EXIT_OK
        out = capsys.readouterr().out
        assert "fuzz: 5 instances" in out
        assert "mismatches: none" in out

    def test_structured_summary_parses(self, capsys):
        argv = ["fuzz", "--count", "4", "--seed", "1", "--arity", "3", "--format", "structured"]
        assert cli.main(argv) == cli.EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["tallies"]["generated"] == 4
        assert data["mismatch_seeds"] == []
        assert data["arity"] == 3

    def test_zero_count_exits_schema(self, capsys):
        assert cli.main(["fuzz", "--count", "0"]) == cli.EXIT_SCHEMA
        assert capsys.readouterr().err.startswith("input error:")

    def test_mode_flags_are_validated_by_argparse(self, capsys):
        with pytest.raises(SystemExit):
            cli.main(["fuzz", "--metric-mode", "nonsense"])
