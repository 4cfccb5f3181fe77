import csv
import io
import json
import math
import subprocess
import sys
import time
from fractions import Fraction

import pytest

from susylmg.cli import (
    EXIT_CONFIG,
    EXIT_FAILED,
    EXIT_NUMERIC,
    EXIT_OK,
    ConfigError,
    FigureDataset,
    main,
    parse_values,
)
from susylmg.entanglement import amplitude_matrix, entropy_bits, geometric_entanglement, schmidt
from susylmg.specfun import cg_stretched


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestValueParsing:
    def test_lists_and_ranges(self):
        assert parse_values("1,2.5") == [1, Fraction(5, 2)]
        assert parse_values("1..4") == [1, 2, 3, 4]
        assert parse_values("0..1:0.25") == [0, Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), 1]
        assert parse_values("2..16:*2") == [2, 4, 8, 16]
        assert parse_values("1/2") == [Fraction(1, 2)]

    @pytest.mark.parametrize("bad", ["", "x", "1..3:0", "0..8:*2", "1..8:*1"])
    def test_rejects(self, bad):
        with pytest.raises(ConfigError):
            parse_values(bad)


class TestEntropyCommand:
    def test_two_qubits(self, capsys):
        code, out, _ = run(capsys, "entropy", "--J", "1", "--gamma", "0", "--J1", "0.5")
        assert code == EXIT_OK
        (row,) = rows(out)
        assert float(row["S_bits"]) == pytest.approx(1.0, abs=1e-14)
        assert row["rank"] == "2"

    def test_fig1_curve(self, capsys):
        code, out, _ = run(capsys, "entropy", "--J", "100", "--gamma", "0", "--J1", "1..50", "--format", "json")
        doc = json.loads(out)
        assert code == EXIT_OK and doc["figure_id"] == "fig1"
        s = doc["columns"]["S_bits"]
        assert len(s) == 50
        assert all(b > a for a, b in zip(s, s[1:]))
        assert doc["metadata"]["library_version"]

    def test_ratio_grid(self, capsys):
        code, out, _ = run(capsys, "entropy", "--J", "20,40", "--gamma", "0.1,1", "--J1-ratio", "0.25,0.5")
        data = rows(out)
        assert code == EXIT_OK and len(data) == 8
        keys = [(float(r["J"]), float(r["gamma"]), float(r["J1"])) for r in data]
        assert keys == sorted(keys)
        for r in data:
            assert float(r["gammaJ"]) == pytest.approx(float(r["gamma"]) * float(r["J"]))
            assert float(r["S_bits"]) <= float(r["rank_bound_bits"]) + 1e-9

    def test_nats(self, capsys):
        _, out, _ = run(capsys, "entropy", "--J", "1", "--J1", "0.5", "--nats")
        assert float(rows(out)[0]["S_nats"]) == pytest.approx(math.log(2), abs=1e-14)

    def test_csv_floats_round_trip(self, capsys):
        _, out, _ = run(capsys, "entropy", "--J", "30", "--gamma", "0.37", "--J1", "7")
        ref = entropy_bits(schmidt(amplitude_matrix(7, 23, 0.37)))
        assert float(rows(out)[0]["S_bits"]) == ref
        assert out.splitlines()[0].startswith("J,J1,gamma,gammaJ,S_bits")

    def test_thread_count_does_not_change_bytes(self, capsys):
        args = ["entropy", "--J", "24,30", "--gamma", "0,0.2,1.5", "--J1", "1..12"]
        _, one, _ = run(capsys, *args, "--threads", "1")
        _, four, _ = run(capsys, *args, "--threads", "4")
        assert one == four

    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / "s.csv"
        code, out, _ = run(capsys, "entropy", "--J", "2", "--J1", "1", "--out", str(target))
        assert code == EXIT_OK and out == ""
        assert target.read_text().startswith("J,")


class TestOtherCommands:
    def test_schmidt_gamma0_is_cg(self, capsys):
        _, out, _ = run(capsys, "schmidt", "--J", "10", "--gamma", "0", "--J1", "5")
        lam = [float(r["lambda"]) for r in rows(out)]
        cg = sorted((cg_stretched(5, 5, m, -m) for m in range(-5, 6)), reverse=True)
        assert lam == pytest.approx(cg, abs=1e-12)

    def test_schmidt_separable(self, capsys):
        _, out, _ = run(capsys, "schmidt", "--J", "6", "--gamma", "50", "--J1", "3")
        (row,) = rows(out)
        assert float(row["lambda"]) == pytest.approx(1.0, abs=1e-12)

    def test_schmidt_gamma_j_units(self, capsys):
        code, out, _ = run(capsys, "schmidt", "--J", "40", "--gamma-J", "0.1,10", "--J1", "20", "--format", "json")
        doc = json.loads(out)
        assert code == EXIT_OK and doc["figure_id"] == "fig4"
        assert sorted(set(doc["columns"]["gammaJ"])) == pytest.approx([0.1, 10.0])

    def test_geometric(self, capsys):
        _, out, _ = run(capsys, "geometric", "--J", "1,4", "--gamma", "0")
        data = rows(out)
        assert float(data[0]["E_G"]) == pytest.approx(1.0, abs=1e-12)
        ref = -2 * math.log2(math.sqrt(math.factorial(8)) / (2**4 * math.factorial(4)))
        assert float(data[1]["E_G"]) == pytest.approx(ref, abs=1e-12)
        assert float(data[1]["E_G"]) == geometric_entanglement(4, 0.0)

    def test_spectrum(self, capsys):
        code, out, _ = run(capsys, "spectrum", "--J", "3", "--gamma", "0.3", "--format", "json")
        doc = json.loads(out)
        assert code == EXIT_OK
        (check,) = doc["metadata"]["checks"]
        assert abs(check["ground_energy"]) < 1e-12
        assert check["gap"] > 0
        assert len(doc["columns"]["energy"]) == 7

    def test_spectrum_general_level(self, capsys):
        _, out, _ = run(capsys, "spectrum", "--J", "5", "--gamma", "0.8", "--m", "2", "--format", "json")
        (check,) = json.loads(out)["metadata"]["checks"]
        assert check["ground_energy"] == pytest.approx(check["expected_ground_energy"], abs=1e-10)


class TestExitCodes:
    @pytest.mark.parametrize(
        "argv",
        [
            ["entropy", "--J", "1.5", "--J1", "0.5"],
            ["entropy", "--J", "4", "--J1", "5"],
            ["entropy", "--J", "4", "--gamma", "-1", "--J1", "1"],
            ["entropy", "--J", "4"],
            ["entropy", "--J", "4", "--J1", "1", "--J1-ratio", "0.5"],
            ["entropy", "--J", "4", "--J1", "1", "--threads", "0"],
            ["spectrum", "--J", "3", "--m", "0.5"],
            ["nonsense"],
            ["entropy", "--J", "4", "--J1", "1", "--format", "xml"],
        ],
    )
    def test_config_errors(self, capsys, argv):
        code, out, _ = run(capsys, *argv)
        assert code == EXIT_CONFIG
        assert out == ""

    def test_numerical_failure(self, capsys):
        code, _, err = run(capsys, "entropy", "--J", "4", "--gamma", "0.3", "--J1", "2", "--tol-jacobi", "0")
        assert code == EXIT_NUMERIC
        assert "did not converge" in err


class TestVerifyCommand:
    def test_quick_suite(self, capsys):
        start = time.perf_counter()
        code, out, _ = run(capsys, "verify", "--quick", "--max-J", "6")
        assert time.perf_counter() - start < 10
        report = json.loads(out)
        assert code == EXIT_OK and report["passed"]
        for check in report["checks"]:
            assert check["deviation"] <= check["tolerance"]

    def test_zero_tolerance_fails(self, capsys):
        code, out, _ = run(capsys, "verify", "--quick", "--max-J", "4", "--tol-factorization", "0")
        report = json.loads(out)
        assert code == EXIT_FAILED and not report["passed"]
        failed = [c["name"] for c in report["checks"] if not c["passed"]]
        assert "factorization" in failed

    def test_module_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "susylmg", "entropy", "--J", "1", "--J1", "0.5"],
            capture_output=True,
            text=True,
            timeout=60,
        )
        assert proc.returncode == 0
        assert proc.stdout.splitlines()[0].startswith("J,J1")


class TestFigureDataset:
    def test_ragged_rejected(self):
        with pytest.raises(ValueError):
            FigureDataset("fig1", {"a": [1, 2], "b": [1]})

    def test_repr_floats(self):
        ds = FigureDataset("fig1", {"x": [0.1, 1 / 3]})
        assert ds.to_csv() == "x\n0.1\n0.3333333333333333\n"
        assert json.loads(ds.to_json())["columns"]["x"] == [0.1, 1 / 3]
