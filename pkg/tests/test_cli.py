import json

import numpy as np
import pytest

from fibered.cli import main, parse_magnitude


@pytest.fixture(scope="module")
def generated(tmp_path_factory):
    out = tmp_path_factory.mktemp("gen")
    assert main(["generate", "mobius", "--n", "300", "--seed", "1", "--out-dir", str(out)]) == 0
    return out


@pytest.fixture(scope="module")
def run_dir(generated, tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    assert main(["fibered", "--points", str(generated / "points.csv"),
                 "--base", str(generated / "base.csv"), "--k", "12", "--d", "2",
                 "--out-dir", str(out)]) == 0
    return out


def test_generate_outputs(generated):
    meta = json.loads((generated / "metadata.json").read_text())
    assert meta["n"] == 300 and meta["suggested_d"] == 2
    assert (generated / "points.csv").read_text().count("\n") == 300


def test_fibered_artifacts(run_dir):
    for name in ("embedding.csv", "embedding.json", "diagnostics.json", "cover.json",
                 "nerve.json", "cocycle.json", "manifest.json"):
        assert (run_dir / name).exists()
    diag = json.loads((run_dir / "diagnostics.json").read_text())
    assert diag["target_dim"] == 3 and diag["w1_trivial"] is False
    man = json.loads((run_dir / "manifest.json").read_text())
    assert len(man["inputs"]["points"]["sha256"]) == 64
    assert man["config_digest"] == diag["config_digest"]
    header = (run_dir / "embedding.csv").read_text().splitlines()[0]
    assert header == "x0,x1,x2"


def test_obstruction_from_dump(run_dir, tmp_path):
    out = tmp_path / "obs.json"
    assert main(["obstruction", "--cocycle", str(run_dir / "cocycle.json"),
                 "--nerve", str(run_dir / "nerve.json"), "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    diag = json.loads((run_dir / "diagnostics.json").read_text())
    assert rep == diag["obstruction"]


def test_diagnose(generated, run_dir, tmp_path):
    out = tmp_path / "diag.json"
    assert main(["diagnose", "--points", str(generated / "points.csv"),
                 "--embedding", str(run_dir / "embedding.csv"),
                 "--cover", str(run_dir / "cover.json"), "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["kappa_min"] >= 0 and len(rep["worst_case_distortion"]) == 12


def test_ph(generated, tmp_path):
    out = tmp_path / "pd.json"
    assert main(["ph", "--points", str(generated / "points.csv"), "--landmarks", "60",
                 "--maxdim", "1", "--out", str(out)]) == 0
    classes = json.loads(out.read_text())
    assert any(c["dim"] == 1 for c in classes)


def test_cut_unfold(generated, tmp_path):
    out = tmp_path / "cut"
    assert main(["cut-unfold", "--points", str(generated / "points.csv"),
                 "--base", str(generated / "base.csv"), "--k", "12", "--n-iter", "300",
                 "--cut", "0.25", "--out-dir", str(out)]) == 0
    header = (out / "embedding.csv").read_text().splitlines()[0]
    assert header == "x0,x1,glue"
    diag = json.loads((out / "diagnostics.json").read_text())
    assert diag["target_dim"] == 2 and diag["tau"] == pytest.approx(1 / (2 * np.pi))


def test_sweep(generated, tmp_path):
    out = tmp_path / "sweep"
    code = main(["sweep", "--points", str(generated / "points.csv"),
                 "--base", str(generated / "base.csv"), "--axis", "noise",
                 "--values", "0", "0.5eps", "--landmarks", "60", "--n-iter", "200",
                 "--out-dir", str(out)])
    assert code == 0
    lines = (out / "summary.csv").read_text().splitlines()
    assert lines[0].startswith("value,magnitude") and len(lines) == 3
    assert (out / "noise_0.5eps" / "embedding.csv").exists()


def test_missing_base_exits_2(generated):
    with pytest.raises(SystemExit) as exc:
        main(["fibered", "--points", str(generated / "points.csv"), "--out-dir", "x"])
    assert exc.value.code == 2


def test_failure_leaves_no_artifacts(generated, tmp_path, capsys):
    out = tmp_path / "bad"
    code = main(["fibered", "--points", str(generated / "points.csv"),
                 "--base", str(generated / "base.csv"), "--d", "1", "--out-dir", str(out)])
    assert code == 1
    assert "fiber rank zero" in capsys.readouterr().err
    assert list(out.iterdir()) == []


def test_bad_config_key(generated, tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"kk": 1}')
    code = main(["fibered", "--points", str(generated / "points.csv"),
                 "--base", str(generated / "base.csv"), "--config", str(cfg),
                 "--out-dir", str(tmp_path / "o")])
    assert code == 1 and "unknown config keys" in capsys.readouterr().err


def test_parse_magnitude():
    assert parse_magnitude("2eps", 1.5) == 3.0
    assert parse_magnitude("eps", 1.5) == 1.5
    assert parse_magnitude("0.25", 1.5) == 0.25


def test_same_seed_identical_files(generated, tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["fibered", "--points", str(generated / "points.csv"),
                     "--base", str(generated / "base.csv"), "--k", "12", "--seed", "4",
                     "--out-dir", str(out)]) == 0
        outs.append((out / "embedding.csv").read_bytes())
    assert outs[0] == outs[1]


@pytest.fixture(scope="module")
def mobius_files(tmp_path_factory):
    out = tmp_path_factory.mktemp("mob")
    assert main(["generate", "mobius", "--n", "1500", "--out-dir", str(out)]) == 0
    return out


def _summary(path):
    import csv
    with open(path) as fh:
        return list(csv.DictReader(fh))


@pytest.mark.slow
def test_sweep_k_on_mobius(mobius_files, tmp_path):
    code = main(["sweep", "--points", str(mobius_files / "points.csv"),
                 "--base", str(mobius_files / "base.csv"), "--axis", "k",
                 "--values", "10", "16", "32", "48", "--landmarks", "100",
                 "--out-dir", str(tmp_path)])
    assert code == 0
    rows = {r["value"]: r for r in _summary(tmp_path / "summary.csv")}
    assert all(rows[k]["w1_trivial"] == "False" for k in ("10", "16", "32", "48"))
    assert float(rows["48"]["avg_sigma"]) > float(rows["16"]["avg_sigma"])


@pytest.mark.slow
def test_sweep_noise_distortion_grows(mobius_files, tmp_path):
    code = main(["sweep", "--points", str(mobius_files / "points.csv"),
                 "--base", str(mobius_files / "base.csv"), "--axis", "noise",
                 "--values", "0", "2eps", "4eps", "--landmarks", "100",
                 "--out-dir", str(tmp_path)])
    assert code == 0
    rows = _summary(tmp_path / "summary.csv")
    sigma = [float(r["avg_sigma"]) for r in rows]
    worst = [float(r["avg_worst_case"]) for r in rows]
    assert sigma == sorted(sigma) and worst == sorted(worst)
