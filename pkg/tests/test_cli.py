import json
import os

import numpy as np
import pytest

from roelab.cli import load_model, main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestClassifyKgroup:
    def test_classify_examples(self, capsys):
        assert run(["classify", "--T", "-1"], capsys)[1].strip() == "AII"
        assert run(["classify"], capsys)[1].strip() == "A"
        assert run(["classify", "--T", "-1", "--C", "1"], capsys)[1].strip() == "DIII"
        assert run(["classify", "--P"], capsys)[1].strip() == "AIII"

    def test_kgroup_examples(self, capsys):
        assert run(["kgroup", "--label", "AII", "--d", "2"], capsys)[1].strip() == "Z2"
        assert run(["kgroup", "--label", "A", "--d", "1"], capsys)[1].strip() == "0"
        assert run(["kgroup", "--label", "A", "--d", "2", "--rotation", "3"],
                   capsys)[1].strip() == "Z^3"

    def test_kgroup_reflection_flags(self, capsys):
        code, out, _ = run(["kgroup", "--label", "BDI", "--d", "1", "--reflection",
                            "--cr-sign", "-1", "--tr-sign", "1"], capsys)
        assert code == 0 and out.strip() == "Z^2"

    def test_bad_sign(self, capsys):
        code, _, err = run(["classify", "--T", "2"], capsys)
        assert code == 2


class TestBuildIndex:
    def test_build_writes_model_file(self, tmp_path, capsys):
        out = tmp_path / "qwz.json"
        code, _, _ = run(["build", "--model", "qwz", "--size", "8", "--m", "1.0",
                          "--out", str(out)], capsys)
        assert code == 0
        H, spec, meta = load_model(str(out))
        assert H.module.dim == 8 * 8 * 2
        assert meta["name"] == "qwz" and meta["params"]["m"] == 1.0

    def test_build_embeds_chiral_spec(self, tmp_path, capsys):
        out = tmp_path / "ssh.json"
        code, _, _ = run(["build", "--model", "ssh", "--t1", "1", "--t2", "0.5",
                          "--n", "60", "--out", str(out)], capsys)
        assert code == 0
        H, spec, _ = load_model(str(out))
        assert spec.has_P
        import roelab as rl
        assert rl.verify_symmetry(H, spec).violations["P"] == 0.0

    def test_unknown_model_exits_2(self, tmp_path, capsys):
        code, _, _ = run(["build", "--model", "nope", "--out",
                          str(tmp_path / "x.json")], capsys)
        assert code == 2

    def test_index_roundtrip(self, tmp_path, capsys):
        model = tmp_path / "ssh.json"
        run(["build", "--model", "ssh", "--t1", "0.5", "--t2", "1.0", "--n", "120",
             "--out", str(model)], capsys)
        rep = tmp_path / "rep.json"
        csvp = tmp_path / "rep.csv"
        code, _, _ = run(["index", "--model-file", str(model), "--formula",
                          "chern_odd", "--windows", "30,40,50",
                          "--out", str(rep), "--csv", str(csvp)], capsys)
        assert code == 0
        doc = json.loads(rep.read_text())
        assert doc["snapped"] == 1 and doc["group"] == "Z"
        assert csvp.read_text().splitlines()[0].startswith("model,")

    def test_index_failure_exits_1(self, tmp_path, capsys):
        model = tmp_path / "ssh.json"
        run(["build", "--model", "ssh", "--t1", "1.0", "--t2", "1.0", "--n", "120",
             "--out", str(model)], capsys)
        code, _, err = run(["index", "--model-file", str(model), "--formula",
                            "chern_odd", "--windows", "30,40"], capsys)
        assert code == 1 and "gap" in err

    def test_deterministic_modulo_timestamp(self, tmp_path, capsys):
        model = tmp_path / "m.json"
        run(["build", "--model", "ssh", "--n", "60", "--out", str(model)], capsys)
        docs = []
        for name in ("a.json", "b.json"):
            rep = tmp_path / name
            run(["index", "--model-file", str(model), "--formula", "chern_odd",
                 "--windows", "10,20", "--out", str(rep)], capsys)
            doc = json.loads(rep.read_text())
            doc.pop("generated_at")
            docs.append(doc)
        assert docs[0] == docs[1]


class TestEdgeAndBEC:
    def test_edge_index_ssh(self, tmp_path, capsys):
        model = tmp_path / "ssh.json"
        run(["build", "--model", "ssh", "--t1", "0.5", "--t2", "1.0", "--n", "160",
             "--out", str(model)], capsys)
        rep = tmp_path / "edge.json"
        code, _, _ = run(["edge-index", "--model-file", str(model),
                          "--normal", "1", "--offset", "79.6",
                          "--out", str(rep)], capsys)
        assert code == 0
        assert json.loads(rep.read_text())["snapped"] == 1

    def test_verify_bec_pass_and_fail_exit(self, tmp_path, capsys):
        model = tmp_path / "ssh.json"
        run(["build", "--model", "ssh", "--t1", "0.5", "--t2", "1.0", "--n", "160",
             "--out", str(model)], capsys)
        rep = tmp_path / "bec.json"
        code, out, _ = run(["verify-bec", "--model-file", str(model),
                            "--normal", "1", "--offset", "79.6",
                            "--windows", "30,45,60", "--out", str(rep)], capsys)
        assert code == 0 and "PASS" in out
        doc = json.loads(rep.read_text())
        assert doc["pass"] and doc["bulk"]["snapped"] == doc["edge"]["snapped"] == 1


class TestSweep:
    def test_seed_sweep_identical_values(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "model": "ssh", "params": {"t1": 0.5, "t2": 1.0}, "size": 100,
            "disorder": 0.2, "formula": "chern_odd", "windows": [25, 35, 45],
            "seeds": list(range(5))}))
        out = tmp_path / "sweep.csv"
        code, _, _ = run(["sweep", "--config", str(cfg), "--out", str(out)], capsys)
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 6
        snapped = {line.split(",")[3] for line in lines[1:]}
        assert snapped == {"1"}

    def test_empty_sweep_header_only(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"model": "ssh", "seeds": [],
                                   "windows": [10, 20], "formula": "chern_odd",
                                   "size": 40}))
        out = tmp_path / "sweep.csv"
        code, _, _ = run(["sweep", "--config", str(cfg), "--out", str(out)], capsys)
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 1 and lines[0].startswith("model,")

    def test_bad_config_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"params": {}}))
        code, _, err = run(["sweep", "--config", str(cfg), "--out",
                            str(tmp_path / "o.csv")], capsys)
        assert code == 2 and "config error" in err

    def test_jobs_env_var(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("ROELAB_JOBS", "2")
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "model": "ssh", "params": {"t1": 0.5, "t2": 1.0}, "size": 60,
            "formula": "chern_odd", "windows": [15, 25], "seeds": [0, 1]}))
        out = tmp_path / "s.csv"
        assert run(["sweep", "--config", str(cfg), "--out", str(out)], capsys)[0] == 0
        assert len(out.read_text().strip().splitlines()) == 3


class TestSpectrum:
    def test_spectrum_and_plot_data(self, tmp_path, capsys):
        model = tmp_path / "m.json"
        run(["build", "--model", "kitaev", "--mu", "1.0", "--n", "40",
             "--out", str(model)], capsys)
        rep = tmp_path / "spec.json"
        plot = tmp_path / "spec.csv"
        code, _, _ = run(["spectrum", "--model-file", str(model), "--out", str(rep),
                          "--emit-plot-data", str(plot)], capsys)
        assert code == 0
        doc = json.loads(rep.read_text())
        assert doc["dim"] == 80 and len(doc["eigenvalues"]) == 80
        assert plot.read_text().splitlines()[0] == "index,energy"
        # particle-hole symmetric spectrum
        w = np.array(doc["eigenvalues"])
        assert np.allclose(np.sort(w), -np.sort(-w)[::-1], atol=1e-10)
