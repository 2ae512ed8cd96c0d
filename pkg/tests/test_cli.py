import json

import numpy as np
import pytest

from regimbalance.cli import main
from regimbalance.measures import NormalRelevance


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def dataset(tmp_path):
    rng = np.random.default_rng(0)
    y = rng.gamma(6, 1.5, 120)
    lines = ["sex,size,rings"]
    for i, v in enumerate(y):
        lines.append(f"{'MFI'[i % 3]},{np.log1p(v) + 0.1 * rng.standard_normal():.6f},{v:.6f}")
    path = tmp_path / "data.csv"
    path.write_text("\n".join(lines) + "\n")
    return path, y


def test_generate_counts_and_determinism(tmp_path, capsys):
    args = ["generate", "--imbalance", "20", "--n-minority", "100", "--seed", "7", "--out", str(tmp_path)]
    code, out, _ = run(capsys, *args)
    assert code == 0
    csv = tmp_path / "bimodal.csv"
    first = csv.read_bytes()
    assert len(first.decode().splitlines()) == 2101
    assert json.loads(out)["meta"]["seed"] == 7
    assert run(capsys, *args)[0] == 0
    assert csv.read_bytes() == first


def test_generate_rejects_bad_imbalance(tmp_path, capsys):
    code, _, err = run(capsys, "generate", "--imbalance", "0.5", "--out", str(tmp_path))
    assert code == 2 and "imbalance" in err


def test_unknown_preset_and_missing_command(capsys):
    assert run(capsys, "correlate", "--preset", "nope")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "correlate", "--epochs", "2")[0] == 2


def test_audit_against_own_histogram(dataset, tmp_path, capsys):
    path, y = dataset
    counts, edges = np.histogram(y, 20)
    measure = json.dumps({"kind": "histogram", "edges": edges.tolist(), "masses": counts.tolist()})
    code, out, _ = run(
        capsys, "audit", "--data", str(path), "--target", "rings", "--categorical", "sex",
        "--measure-json", measure, "--out", str(tmp_path),
    )
    assert code == 0
    report = json.loads((tmp_path / "audit.json").read_text())
    assert report["imbalance"]["kolmogorov"] < 2 / np.sqrt(y.size)
    assert json.loads(out) == report
    tsv = (tmp_path / "audit.tsv").read_text().splitlines()
    assert tsv[0] == "bin_center\tcount\tmae" and len(tsv) == 21
    assert all(len(row.split("\t")) == 3 for row in tsv)


def test_audit_shifted_normal(dataset, tmp_path, capsys):
    path, y = dataset
    m = NormalRelevance(float(np.mean(y)) + 30, 0.01)
    code, _, _ = run(
        capsys, "audit", "--data", str(path), "--target", "rings", "--features", "size",
        "--measure-json", json.dumps(m.to_dict()), "--out", str(tmp_path), "--format", "text",
    )
    assert code == 0
    w = json.loads((tmp_path / "audit.json").read_text())["imbalance"]["wasserstein"]
    assert w == pytest.approx(30, rel=1e-3)


def test_audit_with_predictions(dataset, tmp_path, capsys):
    path, y = dataset
    preds = tmp_path / "pred.csv"
    preds.write_text("y_true,y_pred\n" + "".join(f"{v!r},{v + 1!r}\n" for v in y.tolist()))
    code, out, _ = run(
        capsys, "audit", "--data", str(path), "--target", "rings", "--categorical", "sex",
        "--predictions", str(preds), "--out", str(tmp_path), "--format", "tsv",
    )
    assert code == 0
    rows = [r.split("\t") for r in out.splitlines()[1:]]
    assert all(r[2] == "null" or float(r[2]) == pytest.approx(1.0) for r in rows)


def test_audit_malformed_row(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    rows = ["a,b"] + [f"{i},{i}" for i in range(12)] + ["1,2,3"]
    path.write_text("\n".join(rows) + "\n")
    code, _, err = run(capsys, "audit", "--data", str(path), "--target", "b", "--out", str(tmp_path))
    assert code == 3 and "14" in err


def test_audit_non_numeric_target(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    rows = ["a,b"] + [f"{i},{i}" for i in range(12)] + ["1,x"]
    path.write_text("\n".join(rows) + "\n")
    code, _, err = run(capsys, "audit", "--data", str(path), "--target", "b", "--out", str(tmp_path))
    assert code == 3 and "14" in err


def test_degeneration_smoke(tmp_path, capsys):
    code, _, _ = run(
        capsys, "degeneration", "--runs", "1", "--epochs", "2", "--imbalances", "1,3",
        "--n-minority", "30", "--out", str(tmp_path), "--format", "text",
    )
    assert code == 0
    body = json.loads((tmp_path / "degeneration.json").read_text())
    assert all(cell["std"] == 0 for row in body["summary"].values() for cell in row.values())
    assert (tmp_path / "degeneration.txt").read_text().startswith("classification")


def test_training_failure_exit_code(tmp_path, capsys):
    code, _, err = run(
        capsys, "degeneration", "--runs", "1", "--epochs", "2", "--imbalances", "1",
        "--n-minority", "30", "--lr", "1e300", "--out", str(tmp_path),
    )
    assert code == 4 and "non-finite" in err


def test_correlate_rows(dataset, tmp_path, capsys):
    path, _ = dataset
    code, _, _ = run(
        capsys, "correlate", "--data", str(path), "--target", "rings", "--categorical", "sex",
        "--preset", "abalone", "--runs", "2", "--points", "3", "--epochs", "2", "--out", str(tmp_path),
    )
    assert code == 0
    report = json.loads((tmp_path / "correlation.json").read_text())
    assert len(report["rows"]) == 6
    assert report["meta"]["config"]["endpoint"] == [18.0, 5.0]


def test_reports_are_byte_identical_on_rerun(dataset, tmp_path, capsys):
    path, _ = dataset
    commands = {
        "generate.json": ["generate", "--n-minority", "20", "--seed", "3"],
        "audit.json": ["audit", "--data", str(path), "--target", "rings", "--categorical", "sex", "--fit",
                       "--epochs", "2"],
        "degeneration.json": ["degeneration", "--runs", "2", "--epochs", "2", "--imbalances", "1,2",
                              "--n-minority", "20"],
        "correlation.json": ["correlate", "--data", str(path), "--target", "rings", "--categorical", "sex",
                             "--endpoint", "18,5", "--runs", "2", "--points", "3", "--epochs", "2"],
    }
    for name, argv in commands.items():
        outs = []
        for _ in range(2):
            code, out, _ = run(capsys, *argv, "--out", str(tmp_path))
            assert code == 0
            outs.append(out)
        assert outs[0] == outs[1]
        meta = json.loads(outs[0])["meta"]
        assert {"seed", "config_hash", "version"} <= set(meta)
