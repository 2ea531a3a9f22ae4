import json
import math
from pathlib import Path

import numpy as np
import pytest

from matgibbs import cli, ifs
from matgibbs.cli import ConfigError, main, parse_config, parse_number

GASKET_YAML = str(Path(__file__).resolve().parents[1] / "configs" / "harmonic-gasket.yaml")


class TestNumbers:
    @pytest.mark.parametrize(
        "text,value",
        [
            ("3/5", 0.6),
            ("sqrt(3)/10", math.sqrt(3) / 10),
            ("-sqrt(3)/15", -math.sqrt(3) / 15),
            ("0.25", 0.25),
            ("1e-3", 1e-3),
            ("sqrt(2)", math.sqrt(2)),
            (3, 3.0),
            (0.5, 0.5),
        ],
    )
    def test_parse(self, text, value):
        assert parse_number(text) == pytest.approx(value, rel=1e-15)

    @pytest.mark.parametrize("text", ["abc", "1/0", "sqrt(-1)", True, None, "3//5"])
    def test_reject(self, text):
        with pytest.raises(ConfigError):
            parse_number(text)


class TestConfig:
    def test_preset(self, gasket):
        sys = parse_config({"preset": "harmonic-gasket"})
        np.testing.assert_array_equal(sys.linears, gasket.linears)

    def test_dyadic_document(self):
        sys = parse_config(
            {"dim": 1, "maps": [{"linear": [[0.5]], "translation": [0]}, {"linear": [[0.5]], "translation": [0.5]}]}
        )
        assert sys.n == 2 and sys.eta == 0.5

    def test_not_contraction(self):
        with pytest.raises(ifs.IfsError, match="map 1: not a contraction"):
            parse_config({"dim": 2, "maps": [{"linear": [[1, 0], [0, 1]], "translation": [0, 0]}]})

    def test_yaml_text(self):
        sys = parse_config("dim: 1\nmaps:\n  - {linear: [['1/3']], translation: [0]}\n  - {linear: [['1/3']], translation: ['2/3']}\n")
        assert sys.eta == pytest.approx(1 / 3)

    @pytest.mark.parametrize(
        "doc,match",
        [
            ({"maps": []}, "dim"),
            ({"dim": 2}, "maps"),
            ({"dim": 0, "maps": [{}]}, "dim"),
            ({"dim": 1, "maps": [{"linear": [[0.5]]}]}, "map 1: missing field 'translation'"),
            ({"dim": 2, "maps": [{"linear": [[0.5, 0]], "translation": [0, 0]}]}, "2 rows"),
            ({"dim": 2, "maps": [{"linear": [[0.5, 0], [0]], "translation": [0, 0]}]}, "row 2"),
            ({"dim": 1, "maps": [{"linear": [["x"]], "translation": [0]}]}, "row 1"),
            ({"dim": 1, "maps": [{"linear": [[0.5]], "translation": [0, 1]}]}, "translation"),
            ([1, 2], "mapping"),
        ],
    )
    def test_schema_errors(self, doc, match):
        with pytest.raises(ConfigError, match=match):
            parse_config(doc)

    def test_gasket_file_round_trip(self, gasket):
        sys = cli.load_system(None, GASKET_YAML)
        np.testing.assert_allclose(sys.linears, gasket.linears, rtol=0, atol=1e-16)
        np.testing.assert_allclose(sys.translations, gasket.translations, rtol=0, atol=1e-15)


class TestWords:
    def test_round_trip(self):
        assert cli.parse_word("1.3.2", 3) == (0, 2, 1)
        assert cli.format_word((0, 2, 1)) == "1.3.2"
        assert cli.parse_word("", 3) == ()

    @pytest.mark.parametrize("text", ["0", "4", "1,2", "a"])
    def test_reject(self, text):
        with pytest.raises(ConfigError):
            cli.parse_word(text, 3)


class TestCommands:
    def test_eigen(self, capsys):
        assert main(["eigen", "--preset", "harmonic-gasket"]) == 0
        out = capsys.readouterr().out
        assert "beta = 0.600000000000\n" in out
        assert "residual" in out and "iterations" in out

    def test_measure(self, capsys):
        assert main(["measure", "--preset", "harmonic-gasket", "--depth", "1"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "word,depth,kappa,tau_11,tau_12,tau_22"
        assert len(lines) == 4
        for k, line in enumerate(lines[1:], start=1):
            word, depth, kap = line.split(",")[:3]
            assert word == str(k) and depth == "1"
            assert kap.startswith("0.333333333333")

    def test_measure_first_row_values(self, capsys):
        main(["measure", "--preset", "harmonic-gasket", "--depth", "1"])
        row = capsys.readouterr().out.splitlines()[1].split(",")
        tau = [float(v) for v in row[3:]]
        np.testing.assert_allclose(tau, [0.6 / math.sqrt(2), 0.0, (1 / 15) / math.sqrt(2)], atol=1e-14)

    def test_measure_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["measure", "--config", GASKET_YAML, "--depth", "4", "--seed", "3", "--out", str(a)]) == 0
        assert main(["measure", "--config", GASKET_YAML, "--depth", "4", "--seed", "3", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert len(a.read_text().splitlines()) == 82

    def test_energy(self, capsys):
        assert main(["energy", "--preset", "harmonic-gasket", "--depth", "2", "--pair", "quadratic"]) == 0
        out = dict(line.split(" = ") for line in capsys.readouterr().out.strip().splitlines())
        assert float(out["self_similarity_residual[L=2]"]) <= 1e-12
        assert "energy[L=3]" in out

    def test_direction(self, capsys):
        assert main(["direction", "--preset", "harmonic-gasket", "--word", "1.1.1"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "depth,word,residual,z_1,z_2"
        assert lines[3].startswith("3,1.1.1,")

    def test_verify_dyadic(self, capsys):
        assert main(["verify", "--preset", "dyadic-1d", "--depth", "8"]) == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert all(line.startswith("CHECK ") and " PASS " in line for line in out)
        names = {line.split()[1] for line in out}
        assert {"gasket.beta", "dyadic.kappa_uniform_L<=10", "dyadic-1d.kappa_sum_L=8"} <= names

    def test_verify_reports_failures(self, capsys, monkeypatch):
        from matgibbs import checks

        monkeypatch.setitem(checks.CRITERIA, "bogus", lambda: [checks.Check("bogus.check", False, 1.0, 0.0)])
        assert main(["verify", "--preset", "dyadic-1d", "--depth", "2"]) == 1
        captured = capsys.readouterr()
        assert "CHECK bogus.check FAIL" in captured.out
        assert json.loads(captured.err) == {"failed": ["bogus.check"]}

    def test_bad_config(self, tmp_path, capsys):
        bad = tmp_path / "bad.yaml"
        bad.write_text("dim: 2\nmaps: [{linear: [[1, 0], [0, 1]], translation: [0, 0]}]\n")
        assert main(["eigen", "--config", str(bad)]) == 2
        assert "map 1: not a contraction" in json.loads(capsys.readouterr().err)["error"]

    def test_depth_cap(self, capsys):
        assert main(["measure", "--preset", "harmonic-gasket", "--depth", "20"]) == 2
        assert "cap" in capsys.readouterr().err

    def test_module_entry(self):
        import subprocess
        import sys

        res = subprocess.run([sys.executable, "-m", "matgibbs", "eigen", "--preset", "dyadic-1d"], capture_output=True, text=True)
        assert res.returncode == 0
        assert "beta = 0.500000000000" in res.stdout
