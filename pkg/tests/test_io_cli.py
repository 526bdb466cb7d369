import json
import subprocess
import sys

import numpy as np
import pytest

from jsrnorm import io
from jsrnorm.cli import main
from jsrnorm.errors import InvalidInputError
from jsrnorm.extremal import EXAMPLE_RHO
from jsrnorm.matset import MatrixSet
from jsrnorm.polytope import cube


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def test_matrix_set_round_trip_is_bit_identical(tmp_path, rng):
    M = MatrixSet(rng.standard_normal((3, 4, 4)) * 10.0 ** rng.integers(-8, 8, (3, 1, 1)))
    p = tmp_path / "m.json"
    io.save_matrix_set(p, M)
    back = io.load_matrix_set(p)
    np.testing.assert_array_equal(back.matrices, M.matrices)
    io.save_matrix_set(tmp_path / "again.json", back)
    assert (tmp_path / "again.json").read_bytes() == p.read_bytes()


def test_ball_round_trip(tmp_path):
    p = tmp_path / "b.json"
    io.write_json(p, io.ball_doc(cube(3)))
    ball = io.parse_ball(io.read_json(p))
    np.testing.assert_array_equal(ball.vertex_reps, cube(3).vertex_reps)


@pytest.mark.parametrize("doc, pointer", [
    ([], ""),
    ({}, "/matrices"),
    ({"matrices": []}, "/matrices"),
    ({"matrices": [[[1, 2], [3]]]}, "/matrices/0/1"),
    ({"matrices": [[[1, 2], [3, "x"]]]}, "/matrices/0/1/1"),
    ({"matrices": [[[1, 2, 3], [3, 4, 5]]]}, "/matrices/0"),
    ({"matrices": [[[1, 2], [3, 4]], [[1]]]}, "/matrices/1"),
    ({"matrices": [[[True, 0], [0, 1]]]}, "/matrices/0/0/0"),
])
def test_schema_pointers(doc, pointer):
    with pytest.raises(io.SchemaError) as exc:
        io.parse_matrix_set(doc)
    assert exc.value.pointer == pointer


def test_ball_schema_and_validation():
    with pytest.raises(io.SchemaError) as exc:
        io.parse_ball({"vertex_reps": [[1.0, 0.0]]})
    assert exc.value.pointer == "/facet_reps"
    with pytest.raises(InvalidInputError):
        # the facet x <= 1/2 cuts off the vertex e_1
        io.parse_ball({"vertex_reps": [[1.0, 0.0], [0.0, 1.0]], "facet_reps": [[2.0, 0.0], [0.0, 1.0]]})


def test_read_json_errors(tmp_path):
    with pytest.raises(InvalidInputError):
        io.read_json(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InvalidInputError):
        io.read_json(bad)


def test_dumps_non_finite_and_precision():
    text = io.dumps({"a": [0.1, float("nan")], "b": True})
    doc = json.loads(text)
    assert doc["a"][0] == 0.1 and doc["a"][1] is None and doc["b"] is True


def test_cli_estimate(capsys):
    assert main(["estimate", "--input", "catalog:example-pair"]) == 0
    out = capsys.readouterr().out
    lo = float(out.split("lower = ")[1].split()[0])
    up = float(out.split("upper = ")[1].split()[0])
    assert lo == pytest.approx(EXAMPLE_RHO, abs=1e-9) and up == pytest.approx(EXAMPLE_RHO, abs=1e-9)


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["estimate", "--input", str(tmp_path / "nope.json")]) == 1
    assert main(["estimate"]) == 1
    assert main(["estimate", "--input", _write(tmp_path / "r.json", {"matrices": [[[1, 2], [3]]]})]) == 1
    assert "/matrices/0/1" in capsys.readouterr().err
    nil = _write(tmp_path / "nil.json", {"matrices": [[[0, 1], [0, 0]]]})
    assert main(["normalize", "--input", nil]) == 1
    # an invariant polytope capped at 2 points cannot close, so --strict turns success into exit 2
    assert main(["extremal", "--input", "catalog:example-pair", "--max-points", "2", "--strict"]) == 2
    assert main(["extremal", "--input", "catalog:example-pair", "--max-points", "2"]) == 0


def test_cli_reports_are_deterministic(tmp_path):
    docs = []
    for k in range(2):
        rp = tmp_path / f"rep{k}.json"
        assert main(["normalize", "--input", "catalog:example-pair", "--word", "0,1,0,0,1",
                     "--report", str(rp), "--out", str(tmp_path / f"out{k}.json")]) == 0
        d = json.loads(rp.read_text())
        d.pop("wall_time")
        docs.append(d)
    assert docs[0] == docs[1]
    assert docs[0]["certified_flags"]["entry_bound"] is True
    out = io.read_json(tmp_path / "out0.json")
    assert np.max(np.abs(out["matrices"])) <= EXAMPLE_RHO + 1e-9


def test_cli_records_input_digests(tmp_path):
    src = tmp_path / "m.json"
    io.save_matrix_set(src, MatrixSet([np.eye(2), np.diag([2.0, 1.0])]))
    rp = tmp_path / "rep.json"
    assert main(["estimate", "--input", str(src), "--norm", "euclidean", "--report", str(rp)]) == 0
    assert json.loads(rp.read_text())["inputs"]["input"] == io.file_digest(src)


@pytest.mark.parametrize("argv", [
    ["auerbach", "--ball", "catalog:example"],
    ["john", "--ball", "catalog:icosahedron"],
    ["shady", "witness", "--J", "1,2"],
    ["shady", "estimate", "--ball", "catalog:cube3", "--grid-level", "1", "--refine", "0"],
    ["submatrix-bound", "--set", "catalog:example-pair", "--depth", "4"],
    ["submatrix-bound", "--set", "catalog:icosahedron-set", "--ball", "catalog:icosahedron", "--J", "1,2",
     "--depth", "2"],
    ["hollowize", "--input", "catalog:example-pair"],
])
def test_cli_commands_run(argv, tmp_path):
    assert main(argv + ["--report", str(tmp_path / "r.json")]) == 0
    assert json.loads((tmp_path / "r.json").read_text())["command"]


def test_cli_render(tmp_path):
    out = tmp_path / "ball.svg"
    assert main(["render", "--ball", "catalog:icosahedron", "--out", str(out)]) == 0
    assert out.read_text().startswith("<svg")
    assert main(["render", "--ball", "catalog:cube4"]) == 1  # unsupported dimension is an input error


def test_cli_bad_index_set():
    assert main(["shady", "witness", "--J", "0,1"]) == 1
    assert main(["shady", "witness", "--J", "a"]) == 1


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "jsrnorm.cli", "estimate", "--input", "catalog:example-pair",
                        "--depth", "3"], capture_output=True, text=True)
    assert r.returncode == 0 and "upper" in r.stdout
