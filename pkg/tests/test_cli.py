import json

import pytest

from morleygraph.albert import MixtureMeasure
from morleygraph.cli import main
from morleygraph.core import LabeledHypergraph
from morleygraph.graphon import StepGraphon
from morleygraph.hypergraphon import StepHypergraphon


@pytest.fixture
def two_block_file(tmp_path):
    path = tmp_path / "model.json"
    w = StepGraphon([0.5, 0.5], [[1.0, 0.0], [0.0, 1.0]])
    path.write_text(json.dumps(w.to_json()))
    return str(path)


@pytest.fixture
def triangle_file(tmp_path):
    path = tmp_path / "graph.json"
    path.write_text(json.dumps(LabeledHypergraph.complete(2, 3).to_json()))
    return str(path)


def test_density_command(two_block_file, triangle_file, tmp_path, capsys):
    code = main(
        [
            "density",
            "--model",
            two_block_file,
            "--graph",
            triangle_file,
            "--mc",
            "5000",
            "--seed",
            "3",
            "--out-dir",
            str(tmp_path / "out"),
        ]
    )
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["exact"] == pytest.approx(0.25, abs=1e-12)
    assert "mc_estimate" in report


def test_sample_command(two_block_file, tmp_path, capsys):
    out = tmp_path / "dump" / "samples.jsonl"
    out.parent.mkdir()
    code = main(
        ["sample", "--model", two_block_file, "-n", "5", "--count", "4", "--seed", "1", "--out", str(out)]
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 4
    for line in lines:
        g = LabeledHypergraph.from_json(json.loads(line))
        assert g.n == 5


def test_sample_hypergraph_command(tmp_path, capsys):
    model = tmp_path / "hyper.json"
    model.write_text(json.dumps(StepHypergraphon.constant(3, 1.0).to_json()))
    out = tmp_path / "samples.jsonl"
    code = main(["sample", "--model", str(model), "-n", "4", "--count", "2", "--seed", "0", "--out", str(out)])
    assert code == 0
    g = LabeledHypergraph.from_json(json.loads(out.read_text().splitlines()[0]))
    assert g == LabeledHypergraph.complete(3, 4)


def test_morley_command(tmp_path, capsys):
    model = tmp_path / "nu.json"
    model.write_text(json.dumps(MixtureMeasure.lebesgue().to_json()))
    code = main(
        [
            "morley",
            "--backend",
            "albert",
            "--model",
            str(model),
            "--formula",
            "R(x1,x2) & R(x1,mb) & !R(x2,mc)",
            "--order",
            "1,2",
            "--out-dir",
            str(tmp_path),
        ]
    )
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["value"] == pytest.approx(1 / 12, abs=1e-12)


def test_morley_with_context(tmp_path, capsys):
    model = tmp_path / "w.json"
    model.write_text(json.dumps(StepGraphon.constant(0.3).to_json()))
    ctx = tmp_path / "ctx.json"
    ctx.write_text(json.dumps({"params": ["c1"], "flat": {"c1": 0}, "adj": {}}))
    code = main(
        [
            "morley",
            "--model",
            str(model),
            "--formula",
            "R(x1,c1) & R(x1,x2)",
            "--context",
            str(ctx),
            "--out-dir",
            str(tmp_path),
        ]
    )
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["value"] == pytest.approx(0.09, abs=1e-12)


def test_verify_command(tmp_path, capsys):
    code = main(["verify", "--suite", "albert-paper", "--tol", "1e-12", "--out-dir", str(tmp_path)])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is True
    on_disk = json.loads((tmp_path / "report.json").read_text())
    assert on_disk["passed"] is True
    assert len(on_disk["detail"]) == 6


def test_demo_command(tmp_path, capsys):
    code = main(["demo", "--name", "noninvariance", "--out-dir", str(tmp_path)])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is True


def test_unknown_suite_errors(tmp_path):
    with pytest.raises(ValueError):
        main(["verify", "--suite", "nope", "--out-dir", str(tmp_path)])
