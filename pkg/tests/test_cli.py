from __future__ import annotations

import csv
import json
import subprocess
import sys

import numpy as np
import pytest
import yaml

from netr0.cli import digest, main
from netr0.dataset import load_csv
from netr0.graph import write_edge_list
from netr0.netgen import generate_er


@pytest.fixture(scope="module")
def desk_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("gen") / "desk.csv"
    assert main(["generate", "--profile", "desk", "--seed", "7", "--out", str(out)]) == 0
    return out


@pytest.fixture(scope="module")
def linear_model(desk_csv, tmp_path_factory):
    out = tmp_path_factory.mktemp("train") / "lin.json"
    assert main(["train", "--data", str(desk_csv), "--model", "linear", "--out", str(out)]) == 0
    return out


def test_generate_desk_profile(desk_csv, capsys):
    ds = load_csv(desk_csv)
    assert len(ds) == 100
    assert sorted(set(ds.families)) == ["BA", "ER", "SBM", "SF", "WS"]
    meta = json.loads((desk_csv.parent / (desk_csv.name + ".meta.json")).read_text())
    assert meta["seed"] == 7
    assert meta["config_digest"] == digest(meta["config"])


def test_generate_is_byte_identical(tmp_path):
    outs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        assert main(["generate", "--count", "2", "--seed", "3", "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert len(outs[0].splitlines()) == 11


def test_impossible_er_probability(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text(yaml.safe_dump({"profile": "desk", "build": {"families": {"ER": {"count": 2, "p": [1.5, 2.0]}}}}))
    code = main(["generate", "--config", str(cfg), "--out", str(tmp_path / "x.csv")])
    assert code == 1
    err = capsys.readouterr().err
    assert "ER" in err and "p" in err


def test_train_prints_folds(desk_csv, linear_model, capsys):
    tm = json.loads(linear_model.read_text())
    cv = tm["provenance"]["cross_validation"]
    assert len(cv["per_fold"]) == 10
    assert np.isfinite(cv["mse"])


def test_train_rejects_oversized_hidden_layer(desk_csv, tmp_path, capsys):
    code = main(["train", "--data", str(desk_csv), "--model", "ann", "--n-hidden", "500",
                 "--out", str(tmp_path / "a.json")])
    assert code == 1
    assert "alpha" in capsys.readouterr().err


def test_train_unknown_feature(desk_csv, tmp_path):
    assert main(["train", "--data", str(desk_csv), "--features", "avgdeg,bogus",
                 "--out", str(tmp_path / "m.json")]) == 1


def test_predict_vector(linear_model, tmp_path, capsys):
    out = tmp_path / "pred.json"
    assert main(["predict", "--model", str(linear_model), "--vector", "4,1,1,1,1,4", "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    assert np.isfinite(res["predicted_r0"])
    assert 0 <= res["herd_immunity_threshold"] < 1
    assert "config_digest" in res["provenance"]
    assert "herd immunity threshold" in capsys.readouterr().out


def test_predict_dimension_mismatch(linear_model, capsys):
    assert main(["predict", "--model", str(linear_model), "--vector", "1,2,3"]) == 1
    assert "expects 6 features" in capsys.readouterr().err


def test_predict_edges_with_simulation(linear_model, tmp_path, capsys):
    edges = tmp_path / "g.txt"
    write_edge_list(generate_er(200, 0.2, 5), edges)
    out, trace = tmp_path / "p.json", tmp_path / "trace.csv"
    assert main(["predict", "--model", str(linear_model), "--edges", str(edges), "--simulate",
                 "--profile", "desk", "--trace", str(trace), "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    assert res["simulated_r0"] > 0 and np.isfinite(res["predicted_r0"])
    rows = list(csv.reader(trace.open()))
    assert rows[0] == ["t", "S", "I", "R", "new_SI", "new_IR", "new_ID", "new_RS"]


def test_rank_and_select(desk_csv, tmp_path, capsys):
    out, sel = tmp_path / "rank.csv", tmp_path / "top4.csv"
    assert main(["rank", "--data", str(desk_csv), "--top", "4", "--select-out", str(sel), "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert sorted(r["feature"] for r in rows) == sorted(["avgdeg", "spl", "cc", "den", "dia", "maxdeg"])
    top = load_csv(sel)
    assert len(top.feature_names) == 4
    assert top.feature_names == tuple(r["feature"] for r in sorted(rows, key=lambda r: int(r["rank"])))[:4]


def test_rank_constant_column_last(desk_csv, tmp_path):
    rows = list(csv.DictReader(desk_csv.open()))
    for r in rows:
        r["cc"] = "0.5"
    flat = tmp_path / "flat.csv"
    with flat.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    out = tmp_path / "r.csv"
    assert main(["rank", "--data", str(flat), "--out", str(out)]) == 0
    ranked = sorted(csv.DictReader(out.open()), key=lambda r: int(r["rank"]))
    assert ranked[-1]["feature"] == "cc"


def test_report_subset(desk_csv, linear_model, tmp_path):
    outs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        assert main(["report", "--model", str(linear_model), "--data", str(desk_csv),
                     "--subset", "100", "--seed", "1", "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert len(outs[0].decode().splitlines()) == 101
    assert (tmp_path / "a.csv.meta.json").exists()


def test_report_perfect_model_has_zero_residuals(tmp_path):
    rng = np.random.default_rng(0)
    X = rng.uniform(1, 5, size=(30, 6))
    y = 0.5 + X @ np.array([0.2, 0.1, 0.3, 0.0, 0.4, 0.05])
    data = tmp_path / "exact.csv"
    with data.open("w") as fh:
        fh.write("avgdeg,spl,cc,den,dia,maxdeg,r0,family,seed,n\n")
        for x, t in zip(X, y):
            fh.write(",".join(repr(float(v)) for v in x) + f",{float(t)!r},ER,0,100\n")
    model, out = tmp_path / "m.json", tmp_path / "r.csv"
    assert main(["train", "--data", str(data), "--model", "linear", "--out", str(model)]) == 0
    assert main(["report", "--model", str(model), "--data", str(data), "--out", str(out)]) == 0
    resid = [float(r["residual"]) for r in csv.DictReader(out.open())]
    assert max(abs(r) for r in resid) < 1e-9


def test_report_feature_mismatch(desk_csv, tmp_path):
    four = tmp_path / "m4.json"
    assert main(["train", "--data", str(desk_csv), "--model", "linear", "--features", "avgdeg,spl,cc,den",
                 "--out", str(four)]) == 0
    sel = tmp_path / "sel.csv"
    assert main(["rank", "--data", str(desk_csv), "--top", "2", "--select-out", str(sel)]) == 0
    assert main(["report", "--model", str(four), "--data", str(sel), "--out", str(tmp_path / "r.csv")]) == 1


def test_global_flags_either_side(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["--seed", "3", "generate", "--count", "1", "--out", str(out)]) == 0
    first = out.read_bytes()
    assert main(["generate", "--count", "1", "--seed", "3", "--out", str(out)]) == 0
    assert out.read_bytes() == first


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "netr0.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "netr0" in res.stdout
    res = subprocess.run([sys.executable, "-m", "netr0.cli", "predict"], capture_output=True, text=True)
    assert res.returncode == 1 and "error" in res.stderr


def test_config_seed_used_by_generate(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(yaml.safe_dump({"profile": "desk", "seed": 11, "count": 1}))
    out = tmp_path / "d.csv"
    assert main(["generate", "--config", str(cfg), "--out", str(out)]) == 0
    assert json.loads((tmp_path / "d.csv.meta.json").read_text())["seed"] == 11
    flag = tmp_path / "f.csv"
    assert main(["generate", "--count", "1", "--seed", "11", "--out", str(flag)]) == 0
    assert flag.read_bytes() == out.read_bytes()
