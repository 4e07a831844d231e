import json

import numpy as np
import pytest

from main import main, parse_complex
from ShatterLab.errors import InputError
from ShatterLab.io_agent import IO_Agent, MANIFEST_SUFFIX


@pytest.fixture
def diag_file(tmp_path):
    return IO_Agent.write_matrix(str(tmp_path / "diag.mtx"), np.diag([0.0, 1.0, 3.0]))


@pytest.fixture
def zero_file(tmp_path):
    path = str(tmp_path / "zero.mtx")
    assert main(["family", "--kind", "Zero", "--n", "4", "--out", path]) == 0
    return path


def read_bytes(path):
    with open(path, "rb") as f:
        return f.read()


class TestParseComplex:
    @pytest.mark.parametrize("text", ["1,2", "1+2j", "1+2i", [1, 2]])
    def test_forms(self, text):
        assert parse_complex(text) == 1 + 2j

    def test_garbage(self):
        with pytest.raises(InputError):
            parse_complex("one")


class TestPerturb:
    def test_dense_noise_fills_zero_matrix(self, tmp_path, zero_file):
        out = str(tmp_path / "a.mtx")
        assert main(["perturb", zero_file, "--rho", "1", "--seed", "42", "--out", out]) == 0
        assert IO_Agent.read_matrix(out).nnz == 16
        assert IO_Agent.read_manifest(out + MANIFEST_SUFFIX).seed == 42

    def test_same_invocation_same_bytes(self, tmp_path, zero_file):
        first, second = str(tmp_path / "a.mtx"), str(tmp_path / "b.mtx")
        main(["perturb", zero_file, "--rho", "0.5", "--seed", "3", "--out", first])
        main(["perturb", zero_file, "--rho", "0.5", "--seed", "3", "--out", second])
        assert read_bytes(first) == read_bytes(second)

    def test_rho_out_of_range(self, tmp_path, zero_file, capsys):
        code = main(["perturb", zero_file, "--rho", "1.5", "--out", str(tmp_path / "a.mtx")])
        assert code == 2
        assert "rho" in capsys.readouterr().err

    def test_missing_input(self, tmp_path):
        assert main(["perturb", str(tmp_path / "nope.mtx"), "--rho", "1", "--out", str(tmp_path / "a.mtx")]) == 1


class TestDiagnose:
    def test_json_report(self, tmp_path, diag_file):
        out = str(tmp_path / "report.json")
        assert main(["diagnose", diag_file, "--out", out]) == 0
        report = IO_Agent.read_json(out)
        assert report["schema"] == "shatterlab/report/v1"
        assert report["eta"] == pytest.approx(1.0)
        assert report["defective"] is False

    def test_defective_fields_are_inf(self, tmp_path, capsys):
        path = IO_Agent.write_matrix(str(tmp_path / "j.mtx"), np.array([[0.0, 1.0], [0.0, 0.0]]))
        assert main(["diagnose", path]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["defective"] is True
        assert report["kappa_v_upper"] == "inf"

    def test_csv_report(self, tmp_path, diag_file):
        out = str(tmp_path / "report.csv")
        assert main(["diagnose", diag_file, "--csv", "--out", out]) == 0
        assert len(IO_Agent.read_csv(out)) == 3

    def test_deterministic_pipeline(self, tmp_path, zero_file):
        outputs = []
        for name in ("a", "b"):
            perturbed = str(tmp_path / f"{name}.mtx")
            report = str(tmp_path / f"{name}.json")
            main(["perturb", zero_file, "--rho", "1", "--seed", "9", "--out", perturbed])
            main(["diagnose", perturbed, "--out", report])
            outputs.append(read_bytes(report))
        assert outputs[0] == outputs[1]


class TestPseudospectrum:
    def test_grid_files(self, tmp_path):
        path = IO_Agent.write_matrix(str(tmp_path / "d.mtx"), np.diag([0.0, 5.0]))
        out = str(tmp_path / "grid.csv")
        assert main(["pseudospectrum", path, "--center", "2.5,0", "--radius", "3", "--res", "4", "--out", out, "--json"]) == 0
        frame = IO_Agent.read_csv(out)
        assert len(frame) == 16
        payload = IO_Agent.read_json(str(tmp_path / "grid.json"))
        np.testing.assert_array_equal(frame["sigma_min"].to_numpy(), np.asarray(payload["sigma_min_field"]))

    def test_area_flag(self, tmp_path, capsys):
        path = IO_Agent.write_matrix(str(tmp_path / "d.mtx"), np.diag([0.0, 5.0]))
        out = str(tmp_path / "grid.csv")
        assert main(["pseudospectrum", path, "--res", "3", "--out", out, "--area", "0.1", "--method", "windows"]) == 0
        assert "area of Lambda_eps" in capsys.readouterr().out


class TestSpecr:
    def test_single_matvec(self, tmp_path):
        path = IO_Agent.write_matrix(str(tmp_path / "i.mtx"), 2 * np.eye(8))
        out = str(tmp_path / "specr.json")
        assert main(["specr", path, "--rho", "0.5", "--eps", "0.1", "--delta", "0.01", "--k", "1", "--with-oracle", "--out", out]) == 0
        payload = IO_Agent.read_json(out)
        assert payload["k_used"] == 1
        assert payload["oracle_spr"] == pytest.approx(2.0, rel=0.01)

    def test_eps_out_of_range(self, tmp_path):
        path = IO_Agent.write_matrix(str(tmp_path / "i.mtx"), np.eye(8))
        assert main(["specr", path, "--rho", "0.5", "--eps", "1.5", "--delta", "0.01"]) == 2


class TestExperiment:
    @pytest.fixture
    def tail_config(self, tmp_path):
        path = str(tmp_path / "tail.json")
        IO_Agent.write_json(path, {
            "campaign": "tail",
            "family": {"kind": "Zero", "n": 6},
            "rho": 1.0,
            "eps_grid": [0.4, 0.3, 0.2, 0.1, 0.05],
            "trials": 100,
            "seed": 11,
        })
        return path

    def test_outputs_and_replay(self, tmp_path, tail_config):
        stem = str(tmp_path / "results" / "tail")
        assert main(["experiment", tail_config, "--out", stem]) == 0
        summary = IO_Agent.read_json(stem + ".json")
        assert summary["schema"] == "shatterlab/tail/v1"
        assert "fitted_slope" in summary["result"]
        assert summary["environment"]["prng"] == "philox4x64-10/seedsequence/v1"

        csv_bytes, json_bytes = read_bytes(stem + ".csv"), read_bytes(stem + ".json")
        assert main(["replay", stem + ".csv" + MANIFEST_SUFFIX]) == 0
        assert read_bytes(stem + ".csv") == csv_bytes
        assert read_bytes(stem + ".json") == json_bytes

    def test_dry_run(self, tmp_path, tail_config, capsys):
        stem = str(tmp_path / "dry")
        assert main(["experiment", tail_config, "--out", stem, "--dry-run"]) == 0
        assert "100 trials" in capsys.readouterr().out
        assert not (tmp_path / "dry.csv").exists()

    def test_malformed_config(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text('{"campaign": "tail", "rho": }')
        assert main(["experiment", str(path), "--dry-run"]) == 1
        assert "line 1" in capsys.readouterr().err

    def test_unknown_key(self, tmp_path, capsys):
        path = str(tmp_path / "bad.json")
        IO_Agent.write_json(path, {"campaign": "coupon", "n": 16, "c_list": [1.0], "colour": "red"})
        assert main(["experiment", path, "--dry-run"]) == 1
        assert "/colour" in capsys.readouterr().err


class TestReplay:
    def test_tampered_manifest(self, tmp_path, zero_file):
        manifest = zero_file + MANIFEST_SUFFIX
        payload = IO_Agent.read_json(manifest)
        payload["config"]["n"] = 5
        IO_Agent.write_json(manifest, payload)
        assert main(["replay", manifest]) == 1

    def test_family_replay(self, tmp_path, zero_file):
        before = read_bytes(zero_file)
        assert main(["replay", zero_file + MANIFEST_SUFFIX]) == 0
        assert read_bytes(zero_file) == before
