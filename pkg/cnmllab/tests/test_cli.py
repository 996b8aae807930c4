import csv
import json

import pytest

from cnmllab.cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, main


def _write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def _rows(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


@pytest.fixture
def micro_config(tmp_path):
    return _write_config(tmp_path, {
        "model": {"family": "binomial", "N": 1, "M": 1},
        "grid": [0.1, 0.5, 0.9],
        "bayes_priors": [{"name": "flat", "kind": "uniform"}, {"name": "edge", "weights": [1, 0, 0]}],
    })


class TestPredict:

    def test_micro_tables(self, tmp_path, micro_config):
        out = tmp_path / "out"
        assert main(["predict", "--config", micro_config, "--out", str(out)]) == EXIT_OK
        q3 = {(r["j"], r["k"]): float(r["q"]) for r in _rows(out / "cnml3.csv")}
        assert q3[("0", "0")] == pytest.approx(2 / 3) and q3[("0", "1")] == pytest.approx(1 / 3)
        q2 = {(r["j"], r["k"]): float(r["q"]) for r in _rows(out / "cnml2.csv")}
        assert q2[("1", "1")] == pytest.approx(4 / 5)
        q1 = {(r["j"], r["k"]): r for r in _rows(out / "cnml1.csv")}
        assert q1[("0", "1")]["log_q"] == "-inf" and float(q1[("0", "1")]["q"]) == 0.0
        assert [float(r["q"]) for r in _rows(out / "nml.csv")] == pytest.approx([0.5, 0.5])
        assert (out / "bayes_flat.csv").exists() and (out / "bayes_edge.csv").exists()
        regrets = {float(r["regret"]) for r in _rows(out / "regret_cnml3.csv")}
        assert len({round(v, 10) for v in regrets}) == 1

    def test_output_is_byte_identical(self, tmp_path, micro_config):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["predict", "--config", micro_config, "--out", str(a)]) == EXIT_OK
        assert main(["predict", "--config", micro_config, "--out", str(b)]) == EXIT_OK
        for f in sorted(a.iterdir()):
            assert f.read_bytes() == (b / f.name).read_bytes(), f.name

    def test_bayes_priors_need_grid(self, tmp_path):
        cfg = _write_config(tmp_path, {
            "model": {"family": "binomial", "N": 1, "M": 2},
            "bayes_priors": [{"name": "flat", "kind": "uniform"}],
        })
        assert main(["predict", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_USAGE


class TestUsageErrors:

    def test_missing_config_file(self, tmp_path):
        assert main(["predict", "--config", str(tmp_path / "nope.json")]) == EXIT_USAGE

    def test_config_required(self):
        assert main(["lip"]) == EXIT_USAGE

    def test_unknown_command(self):
        assert main(["frobnicate"]) == EXIT_USAGE

    def test_bad_log_level(self, micro_config, tmp_path):
        assert main(["predict", "--config", micro_config, "--out", str(tmp_path), "--log-level", "chatty"]) == EXIT_USAGE

    def test_bad_log_level_from_env(self, micro_config, tmp_path, monkeypatch):
        monkeypatch.setenv("CNMLLAB_LOG_LEVEL", "chatty")
        assert main(["predict", "--config", micro_config, "--out", str(tmp_path)]) == EXIT_USAGE

    def test_unknown_config_key(self, tmp_path):
        cfg = _write_config(tmp_path, {"model": {"family": "binomial", "N": 1, "M": 1}, "colour": "red"})
        assert main(["predict", "--config", cfg]) == EXIT_USAGE

    def test_bad_seed(self, micro_config):
        assert main(["predict", "--config", micro_config, "--seed", "-1"]) == EXIT_USAGE

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{", encoding="utf-8")
        assert main(["predict", "--config", str(path)]) == EXIT_USAGE


class TestFits:

    def test_lip_single_atom(self, tmp_path):
        cfg = _write_config(tmp_path, {"model": {"family": "binomial", "N": 1, "M": 3}, "grid": [0.4]})
        out = tmp_path / "out"
        assert main(["lip", "--config", cfg, "--out", str(out)]) == EXIT_OK
        assert [float(r["weight"]) for r in _rows(out / "lip_prior.csv")] == [1.0]
        report = json.loads((out / "lip_report.json").read_text())
        assert report["converged"] is True and report["functional"] == "cmi"

    def test_project_cnml3(self, tmp_path):
        cfg = _write_config(tmp_path, {
            "model": {"family": "binomial", "N": 1, "M": 4},
            "grid": {"lo": 0.1, "hi": 0.9, "count": 5},
        })
        out = tmp_path / "out"
        assert main(["project", "--config", cfg, "--out", str(out)]) == EXIT_OK
        weights = [float(r["weight"]) for r in _rows(out / "project_cnml3_prior.csv")]
        assert sum(weights) == pytest.approx(1.0)
        assert json.loads((out / "project_cnml3_report.json").read_text())["functional"] == "d"

    def test_project_cnml1_is_infeasible(self, tmp_path, micro_config):
        assert main(["project", "--config", micro_config, "--target", "cnml1", "--out", str(tmp_path)]) == EXIT_FAILED

    def test_iteration_cap_is_a_failure(self, tmp_path):
        cfg = _write_config(tmp_path, {
            "model": {"family": "binomial", "N": 1, "M": 4},
            "grid": {"lo": 0.1, "hi": 0.9, "count": 9},
            "optimizer": {"max_iterations": 1, "gap_tolerance": 1e-14},
        })
        out = tmp_path / "out"
        assert main(["lip", "--config", cfg, "--out", str(out)]) == EXIT_FAILED
        assert json.loads((out / "lip_report.json").read_text())["converged"] is False

    def test_risk_curves(self, tmp_path, micro_config):
        out = tmp_path / "out"
        assert main(["risk", "--config", micro_config, "--out", str(out)]) == EXIT_OK
        names = sorted(p.name for p in out.iterdir())
        assert names == ["risk_bayes_edge.csv", "risk_bayes_flat.csv", "risk_cnml1.csv", "risk_cnml2.csv", "risk_cnml3.csv"]
        assert [r["risk"] for r in _rows(out / "risk_cnml1.csv")] == ["inf", "inf", "inf"]


class TestVerify:

    def test_exact_family(self, tmp_path):
        out = tmp_path / "out"
        assert main(["verify", "--only", "lemma4", "--out", str(out)]) == EXIT_OK
        doc = json.loads((out / "verify.json").read_text())
        assert doc["passed"] is True and doc["seed"] == 0
        assert all(r["name"].startswith("lemma4.") for r in doc["reports"])

    def test_unknown_check(self, tmp_path):
        assert main(["verify", "--only", "lemma4,bogus", "--out", str(tmp_path)]) == EXIT_USAGE

    def test_zero_tolerance_fails(self, tmp_path):
        name = "examples.gaussian_b1.N1M1"
        cfg = _write_config(tmp_path, {"checks": {"samples": 2000, "tolerances": {name: 0.0}}})
        out = tmp_path / "out"
        assert main(["verify", "--config", cfg, "--only", name, "--out", str(out)]) == EXIT_FAILED
        assert json.loads((out / "verify.json").read_text())["passed"] is False

    def test_seed_determinism(self, tmp_path):
        cfg = _write_config(tmp_path, {"checks": {"samples": 2000}})
        runs = []
        for tag, seed in (("a", "5"), ("b", "5"), ("c", "6")):
            out = tmp_path / tag
            main(["verify", "--config", cfg, "--only", "lemma5.mle_mse", "--seed", seed, "--out", str(out)])
            runs.append((out / "verify.json").read_bytes())
        assert runs[0] == runs[1]
        assert runs[0] != runs[2]
