import csv
import io
import json

import numpy as np
import pytest

from qgreduce import CouplingSpec, Potential, catalog
from qgreduce.cli import main
from qgreduce.graph import graph_to_document


@pytest.fixture
def write(tmp_path):
    def _write(g, name="g.json"):
        p = tmp_path / name
        p.write_text(json.dumps(graph_to_document(g)))
        return str(p)
    return _write


def _json(capsys, argv):
    code = main(argv + ["--format", "json"])
    return code, json.loads(capsys.readouterr().out)


def test_dirichlet_free(write, capsys):
    code, rep = _json(capsys, ["dirichlet", write(catalog.single_edge()), "--count", "3"])
    assert code == 0
    vals = [r["value"] for r in rep["tables"]["reference"]]
    assert np.allclose(vals, [np.pi ** 2, 4 * np.pi ** 2, 9 * np.pi ** 2])
    assert len(rep["input_digest"]) == 64


def test_dirichlet_zero_count(write, capsys):
    code, rep = _json(capsys, ["dirichlet", write(catalog.single_edge()), "--count", "0"])
    assert code == 0 and rep["tables"]["reference"] == []


def test_discrete_triangle(write, capsys):
    code, rep = _json(capsys, ["discrete", write(catalog.triangle())])
    rows = [(round(r["eigenvalue"], 12), r["multiplicity"]) for r in rep["tables"]["discrete"]]
    assert code == 0 and rows == [(-0.5, 2), (1.0, 1)]


def test_reduce_csv_columns(write, capsys):
    assert main(["reduce", write(catalog.triangle()), "--gap", "0", "--format", "csv"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert list(rows[0]) == ["z", "multiplicity", "lambda", "method", "residual"]
    assert [int(r["multiplicity"]) for r in rows] == [1, 2]


def test_verify_passes_and_is_deterministic(write, capsys):
    path = write(catalog.triangle())
    outs = []
    for _ in range(2):
        assert main(["verify", path, "--format", "csv"]) == 0
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]


def test_oracle_interval(write, capsys):
    code, rep = _json(capsys, ["oracle", write(catalog.triangle()), "--interval", "1", "9"])
    assert code == 0 and rep["tables"]["oracle"][0]["multiplicity"] == 2


def test_measure_reports_pass(write, capsys):
    code, rep = _json(capsys, ["measure", write(catalog.triangle()), "--interval", "4.0", "4.8",
                               "--eps", "1e-2", "1e-3", "1e-4"])
    assert code == 0 and all(rep["checks"].values())


def test_precondition_exit_code(write, capsys):
    g = catalog.star3(CouplingSpec.delta(0.2, per_degree=True), Potential.polynomial([0.0, 1.0]))
    assert main(["reduce", write(g)]) == 4
    assert "not symmetric" in capsys.readouterr().err


def test_validation_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.yaml"
    p.write_text("vertices: [a\nedges: []\n")
    assert main(["discrete", str(p)]) == 2
    assert "line" in capsys.readouterr().err


def test_missing_file(tmp_path):
    assert main(["discrete", str(tmp_path / "nope.json")]) == 2


def test_interval_containing_eigenvalue_is_precondition(write):
    assert main(["reduce", write(catalog.triangle()), "--interval", "5", "12"]) == 4
