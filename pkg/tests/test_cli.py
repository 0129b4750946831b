"""End-to-end tests of the command-line surface.

Each test drives cli.main(argv) in process and inspects the JSON or CSV
written to stdout together with the exit code.  Numerical behaviour is
covered by the library tests; here the contract is faithful reporting,
exit codes, and byte-stable output.
"""

import csv
import io
import json
import math

import numpy as np
import pytest

from antitrotter import cli, means
from antitrotter.errors import NotConverged, QNotRankOne
from antitrotter.matnum import PsdMatrix


def psd(data) -> PsdMatrix:
    M = np.asarray(data, dtype=float)
    if M.ndim == 1:
        M = np.diag(M)
    return PsdMatrix.from_matrix(M)


TILT_A = psd([4.0, 1.0])
TILT_B = psd([[5.0, 4.0], [4.0, 5.0]])
PERM_B = psd([1.0, 9.0])
COMM_A = psd([2.0, 1.0])
COMM_B = psd([5.0, 3.0])


def write_doc(tmp_path, name, doc) -> str:
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def write_mat(tmp_path, name, M: PsdMatrix) -> str:
    return write_doc(tmp_path, name, cli.serialize_matrix(M))


def run(capsys, argv):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, argv):
    code, out, _ = run(capsys, argv)
    return code, json.loads(out)


class TestMatrixIO:
    def test_round_trip_is_bit_identical(self):
        from antitrotter.oracle import random_psd

        M = random_psd([31, 0], 4, {"log_range": (1e-2, 1e2)})
        doc = cli.serialize_matrix(M)
        again = cli.serialize_matrix(cli.parse_matrix(doc))
        assert again == doc

    def test_spectral_form_wins_over_entries(self):
        doc = {
            "d": 2,
            "entries": [[1.0, 0.0], [0.0, 1.0]],
            "eigenvalues": [4.0, 1.0],
            "eigenvectors": [[1.0, 0.0], [0.0, 1.0]],
        }
        M = cli.parse_matrix(doc)
        assert M.eigenvalues.tolist() == [4.0, 1.0]

    def test_dense_plain_numbers_without_d(self):
        M = cli.parse_matrix({"entries": [[4, 0], [0, 1]]})
        assert M.d == 2
        np.testing.assert_allclose(M.eigenvalues, [4.0, 1.0])

    def test_garbage_entry_exits_2(self, tmp_path, capsys):
        bad = write_doc(tmp_path, "bad.json", {"entries": [["x", 0], [0, 1]]})
        good = write_mat(tmp_path, "b.json", TILT_B)
        code, _, err = run(capsys, ["limit", bad, good])
        assert code == 2
        assert "error" in err

    def test_spectral_shape_mismatch_exits_3(self, tmp_path, capsys):
        doc = {
            "d": 3,
            "eigenvalues": [2.0, 1.0],
            "eigenvectors": [[1.0, 0.0], [0.0, 1.0]],
        }
        bad = write_doc(tmp_path, "bad.json", doc)
        good = write_mat(tmp_path, "b.json", TILT_B)
        code, _, _ = run(capsys, ["limit", bad, good])
        assert code == 3

    def test_invalid_json_exits_2(self, tmp_path, capsys):
        path = tmp_path / "mangled.json"
        path.write_text("{not json")
        good = write_mat(tmp_path, "b.json", TILT_B)
        code, _, err = run(capsys, ["limit", str(path), good])
        assert code == 2
        assert "invalid JSON" in err

    def test_missing_file_exits_2(self, tmp_path, capsys):
        good = write_mat(tmp_path, "b.json", TILT_B)
        code, _, _ = run(capsys, ["limit", str(tmp_path / "nope.json"), good])
        assert code == 2


class TestLimitCommand:
    def test_tilted_pair_report(self, tmp_path, capsys):
        a = write_mat(tmp_path, "a.json", TILT_A)
        b = write_mat(tmp_path, "b.json", TILT_B)
        code, doc = run_json(capsys, ["limit", a, b, "--deterministic"])
        assert code == 0
        assert doc["command"] == "limit"
        assert doc["d"] == 2 and doc["m"] == 2

        rows = doc["eigenvalues"]
        assert [r["index"] for r in rows] == [1, 2]
        assert rows[0]["log10"] == pytest.approx(math.log10(36.0), abs=1e-9)
        assert rows[0]["linear"] == pytest.approx(36.0, rel=1e-9)
        assert rows[1]["log10"] == pytest.approx(0.0, abs=1e-9)

        entries = doc["matrix"]["entries"]
        assert entries[0][0][0] == pytest.approx(36.0, abs=1e-7)
        assert entries[0][1][0] == pytest.approx(0.0, abs=1e-7)
        assert entries[1][1][0] == pytest.approx(1.0, abs=1e-7)

        assert [(g["first"], g["last"]) for g in doc["groups"]] == [(1, 1), (2, 2)]
        assert set(doc["diagnostics"]) == {"1024", "2048", "4096"}
        assert doc["tolerances"]["minor_tol"] == 1e-10
        assert doc["tolerances"]["product_tol"] == pytest.approx(2e-9)

        assert doc["maximal"]["holds"] is True
        assert doc["maximal"]["witnesses"] == {"1": [[1], [1]]}

    def test_permutation_pair_matrix(self, tmp_path, capsys):
        a = write_mat(tmp_path, "a.json", TILT_A)
        b = write_mat(tmp_path, "b.json", PERM_B)
        code, doc = run_json(capsys, ["limit", a, b, "--deterministic"])
        assert code == 0
        linear = [r["linear"] for r in doc["eigenvalues"]]
        assert linear == pytest.approx([9.0, 4.0], rel=1e-9)
        entries = doc["matrix"]["entries"]
        assert entries[0][0][0] == pytest.approx(4.0, abs=1e-9)
        assert entries[1][1][0] == pytest.approx(9.0, abs=1e-9)
        assert entries[0][1][0] == pytest.approx(0.0, abs=1e-9)

    def test_rank_deficient_pair_uses_inf_sentinels(self, tmp_path, capsys):
        a = write_mat(tmp_path, "a.json", psd([4.0, 0.0]))
        b = write_mat(tmp_path, "b.json", TILT_B)
        code, doc = run_json(capsys, ["limit", a, b, "--deterministic"])
        assert code == 0
        rows = doc["eigenvalues"]
        assert rows[0]["linear"] == pytest.approx(36.0, rel=1e-9)
        assert rows[1]["log10"] == "-inf"
        assert rows[1]["linear"] == 0.0

    def test_commuting_triple(self, tmp_path, capsys):
        a = write_mat(tmp_path, "a.json", COMM_A)
        b = write_mat(tmp_path, "b.json", COMM_B)
        c = write_mat(tmp_path, "c.json", psd([3.0, 2.0]))
        code, doc = run_json(capsys, ["limit", a, b, c, "--deterministic"])
        assert code == 0
        assert doc["m"] == 3
        linear = [r["linear"] for r in doc["eigenvalues"]]
        assert linear == pytest.approx([30.0, 6.0], rel=1e-9)

    def test_single_matrix_exits_2(self, tmp_path, capsys):
        a = write_mat(tmp_path, "a.json", TILT_A)
        code, _, err = run(capsys, ["limit", a])
        assert code == 2
        assert "two matrices" in err

    def test_dimension_mismatch_exits_3(self, tmp_path, capsys):
        a = write_mat(tmp_path, "a.json", TILT_A)
        b = write_mat(tmp_path, "b.json", psd([3.0, 2.0, 1.0]))
        code, _, err = run(capsys, ["limit", a, b])
        assert code == 3
        assert "dimension" in err

    def test_dimension_cap_exits_3(self, tmp_path, capsys):
        eye = [[[float(i == j), 0.0] for j in range(21)] for i in range(21)]
        doc = {"d": 21, "eigenvalues": [1.0] * 21, "eigenvectors": eye}
        a = write_doc(tmp_path, "big.json", doc)
        code, _, _ = run(capsys, ["limit", a, a])
        assert code == 3

    def test_stdin_matrix(self, tmp_path, capsys, monkeypatch):
        b = write_mat(tmp_path, "b.json", TILT_B)
        monkeypatch.setattr(
            "sys.stdin", io.StringIO(json.dumps(cli.serialize_matrix(TILT_A)))
        )
        code, doc = run_json(capsys, ["limit", "-", b, "--deterministic"])
        assert code == 0
        assert doc["eigenvalues"][0]["linear"] == pytest.approx(36.0, rel=1e-9)

    def test_deterministic_reruns_are_byte_identical(self, tmp_path, capsys):
        a = write_mat(tmp_path, "a.json", TILT_A)
        b = write_mat(tmp_path, "b.json", TILT_B)
        _, out1, _ = run(capsys, ["limit", a, b, "--deterministic"])
        _, out2, _ = run(capsys, ["limit", a, b, "--deterministic"])
        assert out1 == out2

    def test_timestamp_present_by_default(self, tmp_path, capsys):
        a = write_mat(tmp_path, "a.json", TILT_A)
        b = write_mat(tmp_path, "b.json", TILT_B)
        code, doc = run_json(capsys, ["limit", a, b])
        assert code == 0
        assert "timestamp" in doc

    def test_bad_schedule_exits_2(self, tmp_path, capsys):
        a = write_mat(tmp_path, "a.json", TILT_A)
        b = write_mat(tmp_path, "b.json", TILT_B)
        code, _, _ = run(capsys, ["limit", a, b, "--p-points", "0"])
        assert code == 2

    def test_group_separation_failure_exits_4(self, tmp_path, capsys, monkeypatch):
        a = write_mat(tmp_path, "a.json", TILT_A)
        b = write_mat(tmp_path, "b.json", TILT_B)

        def boom(*args, **kwargs):
            raise QNotRankOne("forced")

        monkeypatch.setattr(cli.limits, "limit_matrix", boom)
        code, _, err = run(capsys, ["limit", a, b])
        assert code == 4
        assert "group separation failure" in err

    def test_library_failure_exits_1(self, tmp_path, capsys, monkeypatch):
        a = write_mat(tmp_path, "a.json", TILT_A)
        b = write_mat(tmp_path, "b.json", TILT_B)

        def boom(*args, **kwargs):
            raise NotConverged("forced")

        monkeypatch.setattr(cli.limits, "limit_matrix", boom)
        code, _, err = run(capsys, ["limit", a, b])
        assert code == 1
        assert "forced" in err


class TestCheckCommand:
    def test_alt_passes_on_tilted_pair(self, tmp_path, capsys):
        a = write_mat(tmp_path, "a.json", TILT_A)
        b = write_mat(tmp_path, "b.json", TILT_B)
        code, doc = run_json(
            capsys, ["check", a, b, "--property", "alt", "--deterministic"]
        )
        assert code == 0
        assert doc["passes"] is True
        assert len(doc["pairs"]) == 6
        assert all(row["ok"] for row in doc["pairs"])
        assert all(row["p"] < row["q"] for row in doc["pairs"])
        assert doc["worst_margin"] < 1e-8

    def test_gm_passes_on_commuting_pair(self, tmp_path, capsys):
        a = write_mat(tmp_path, "a.json", COMM_A)
        b = write_mat(tmp_path, "b.json", COMM_B)
        code, doc = run_json(
            capsys, ["check", a, b, "--property", "gm", "--deterministic"]
        )
        assert code == 0
        assert doc["passes"] is True
        assert abs(doc["worst_margin"]) < 1e-9

    def test_sandwich_covers_both_families(self, tmp_path, capsys):
        a = write_mat(tmp_path, "a.json", TILT_A)
        b = write_mat(tmp_path, "b.json", TILT_B)
        code, doc = run_json(
            capsys, ["check", a, b, "--property", "sandwich", "--deterministic"]
        )
        assert code == 0
        assert doc["passes"] is True
        points = doc["points"]
        assert len(points) == 14
        assert {row["family"] for row in points} == {"z", "g"}
        assert all(row["ok"] for row in points)

    def test_maximal_holds_on_tilted_pair(self, tmp_path, capsys):
        a = write_mat(tmp_path, "a.json", TILT_A)
        b = write_mat(tmp_path, "b.json", TILT_B)
        code, doc = run_json(
            capsys, ["check", a, b, "--property", "maximal", "--deterministic"]
        )
        assert code == 0
        assert doc["passes"] is True
        assert doc["maximal"]["eigenvalues_match"] is True
        assert doc["maximal"]["witnesses"] == {"1": [[1], [1]]}

    def test_maximal_fails_on_permutation_pair(self, tmp_path, capsys):
        a = write_mat(tmp_path, "a.json", TILT_A)
        b = write_mat(tmp_path, "b.json", PERM_B)
        code, doc = run_json(
            capsys, ["check", a, b, "--property", "maximal", "--deterministic"]
        )
        assert code == 1
        assert doc["passes"] is False
        assert doc["maximal"]["holds"] is False
        assert doc["maximal"]["failing_k"] == 1
        assert doc["maximal"]["witnesses"] == {}
        assert doc["maximal"]["eigenvalues_match"] is None

    def test_single_point_grid_exits_3(self, tmp_path, capsys):
        a = write_mat(tmp_path, "a.json", TILT_A)
        b = write_mat(tmp_path, "b.json", TILT_B)
        code, _, _ = run(
            capsys, ["check", a, b, "--property", "alt", "--p-points", "1"]
        )
        assert code == 3


class TestSweepCommand:
    ARGS = [
        "sweep",
        "--family",
        "z",
        "--count",
        "2",
        "--dim",
        "3",
        "--p-max",
        "256",
        "--p-points",
        "3",
        "--seed",
        "5",
    ]

    def test_csv_layout(self, capsys):
        code, out, _ = run(capsys, self.ARGS)
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == (
            ["seed", "p"]
            + [f"log10_lambda_{k}" for k in (1, 2, 3)]
            + [f"delta_log10_{k}" for k in (1, 2, 3)]
        )
        data = rows[1:]
        assert len(data) == 6
        assert [r[0] for r in data] == ["0", "0", "0", "1", "1", "1"]
        assert [float(r[1]) for r in data[:3]] == [64.0, 128.0, 256.0]
        assert data[0][5:] == ["", "", ""]
        assert all(cell != "" for cell in data[1][5:])
        float(data[1][2])

    def test_csv_rerun_is_byte_identical(self, capsys):
        _, out1, _ = run(capsys, self.ARGS)
        _, out2, _ = run(capsys, self.ARGS)
        assert out1 == out2

    def test_json_summary(self, capsys):
        code, doc = run_json(
            capsys, self.ARGS + ["--format", "json", "--deterministic"]
        )
        assert code == 0
        assert doc["command"] == "sweep"
        assert len(doc["rows"]) == 6
        summary = doc["summary"]
        assert summary["family"] == "z"
        assert summary["count"] == 2 and summary["d"] == 3
        assert len(summary["scores"]) == 2
        for entry in summary["scores"]:
            assert entry["score"] >= 0.0
            assert len(entry["rates"]) == 3

    def test_thread_pool_matches_serial(self, capsys, monkeypatch):
        monkeypatch.delenv("ANTITROTTER_THREADS", raising=False)
        _, serial, _ = run(capsys, self.ARGS)
        monkeypatch.setenv("ANTITROTTER_THREADS", "3")
        _, threaded, _ = run(capsys, self.ARGS)
        assert serial == threaded

    def test_invalid_thread_env_falls_back(self, capsys, monkeypatch):
        monkeypatch.setenv("ANTITROTTER_THREADS", "lots")
        code, _, _ = run(capsys, self.ARGS)
        assert code == 0

    def test_explicit_spectrum_list(self, capsys):
        code, out, _ = run(
            capsys,
            ["sweep", "--count", "1", "--dim", "3", "--spectrum", "4,2,1",
             "--p-points", "3", "--p-max", "256"],
        )
        assert code == 0
        assert len(out.strip().split("\n")) == 4

    def test_dim_out_of_range_exits_3(self, capsys):
        code, _, _ = run(capsys, ["sweep", "--dim", "25"])
        assert code == 3

    def test_bad_spectrum_exits_3(self, capsys):
        code, _, _ = run(capsys, ["sweep", "--spectrum", "abc"])
        assert code == 3

    def test_spectrum_length_mismatch_exits_3(self, capsys):
        code, _, _ = run(capsys, ["sweep", "--dim", "3", "--spectrum", "2,1"])
        assert code == 3

    def test_zero_count_exits_3(self, capsys):
        code, _, _ = run(capsys, ["sweep", "--count", "0"])
        assert code == 3


class TestMeansCommand:
    def test_p0_weighted_limit(self, tmp_path, capsys):
        a = write_mat(tmp_path, "a.json", TILT_A)
        b = write_mat(tmp_path, "b.json", psd([9.0, 4.0]))
        code, doc = run_json(
            capsys,
            ["means", a, b, "--mean", "arithmetic", "--direction", "p0",
             "--deterministic"],
        )
        assert code == 0
        assert doc["mean"] == means.OperatorMeanSpec.arithmetic(0.5).name
        assert doc["normalization"] == "1/p"
        linear = [r["linear"] for r in doc["eigenvalues"]]
        assert linear == pytest.approx([6.0, 2.0], rel=1e-9)

    def test_p0_doubled_normalization(self, tmp_path, capsys):
        a = write_mat(tmp_path, "a.json", TILT_A)
        b = write_mat(tmp_path, "b.json", psd([9.0, 4.0]))
        code, doc = run_json(
            capsys,
            ["means", a, b, "--mean", "arithmetic", "--direction", "p0",
             "--normalization", "2/p", "--deterministic"],
        )
        assert code == 0
        linear = [r["linear"] for r in doc["eigenvalues"]]
        assert linear == pytest.approx([36.0, 4.0], rel=1e-9)

    def test_pinf_join_of_commuting_pair(self, tmp_path, capsys):
        a = write_mat(tmp_path, "a.json", psd([5.0, 4.0]))
        b = write_mat(tmp_path, "b.json", psd([3.0, 2.0]))
        code, doc = run_json(
            capsys,
            ["means", a, b, "--mean", "arithmetic", "--direction", "pinf",
             "--deterministic"],
        )
        assert code == 0
        linear = [r["linear"] for r in doc["eigenvalues"]]
        assert linear == pytest.approx([5.0, 4.0], rel=1e-6)

    def test_pinf_short_schedule_reports_error(self, tmp_path, capsys):
        a = write_mat(tmp_path, "a.json", psd([5.0, 4.0]))
        b = write_mat(tmp_path, "b.json", psd([3.0, 2.0]))
        code, doc = run_json(
            capsys,
            ["means", a, b, "--mean", "arithmetic", "--direction", "pinf",
             "--p-points", "2", "--deterministic"],
        )
        assert code == 1
        assert "error" in doc

    def test_pinf_geometric_2x2_generic_branch(self, tmp_path, capsys):
        a = write_mat(tmp_path, "a.json", TILT_A)
        b = write_mat(tmp_path, "b.json", TILT_B)
        code, doc = run_json(
            capsys,
            ["means", a, b, "--mean", "geometric", "--direction", "pinf",
             "--deterministic"],
        )
        assert code == 0
        assert doc["branch"] == "generic"
        assert doc["normalization_derived"] is False
        linear = [r["linear"] for r in doc["eigenvalues"]]
        assert linear == pytest.approx([9.0, 4.0], rel=1e-8)
        assert doc["matrix"]["d"] == 2

    def test_pinf_geometric_3x3_heuristic(self, tmp_path, capsys):
        a = write_mat(tmp_path, "a.json", psd([4.0, 2.0, 1.0]))
        b = write_mat(tmp_path, "b.json", psd([9.0, 3.0, 1.0]))
        code, doc = run_json(
            capsys,
            ["means", a, b, "--mean", "geometric", "--direction", "pinf",
             "--deterministic"],
        )
        assert code == 0
        assert doc["heuristic"] is True
        assert doc["converged_looking"] is True
        assert doc["monotone_ok"] is True
        expected = np.log10([36.0, 6.0, 1.0])
        np.testing.assert_allclose(doc["eigenvalue_log10"], expected, atol=1e-6)
        assert doc["matrix_estimate"]["d"] == 3

    def test_geometric_rejects_other_weights(self, tmp_path, capsys):
        a = write_mat(tmp_path, "a.json", TILT_A)
        b = write_mat(tmp_path, "b.json", TILT_B)
        code, _, err = run(
            capsys,
            ["means", a, b, "--mean", "geometric", "--alpha", "0.3",
             "--direction", "pinf"],
        )
        assert code == 2
        assert "alpha" in err


class TestRenyiCommand:
    def test_commuting_value_is_frozen(self, tmp_path, capsys):
        rho = write_mat(tmp_path, "rho.json", psd([0.75, 0.25]))
        sigma = write_mat(tmp_path, "sigma.json", psd([0.5, 0.5]))
        code, doc = run_json(
            capsys,
            ["renyi", rho, sigma, "--alpha", "2", "--z", "1", "--deterministic"],
        )
        assert code == 0
        assert doc["command"] == "renyi"
        assert doc["alpha"] == 2.0 and doc["z"] == 1.0
        assert doc["divergence"] == pytest.approx(math.log(1.25), rel=1e-12)

    def test_self_divergence_is_zero(self, tmp_path, capsys):
        rho = write_mat(tmp_path, "rho.json", psd([0.5, 0.5]))
        code, doc = run_json(
            capsys,
            ["renyi", rho, rho, "--alpha", "2", "--z", "1", "--deterministic"],
        )
        assert code == 0
        assert doc["divergence"] == pytest.approx(0.0, abs=1e-12)

    def test_support_violation_reports_plus_inf(self, tmp_path, capsys):
        rho = write_mat(tmp_path, "rho.json", psd([1.0, 0.0]))
        sigma = write_mat(tmp_path, "sigma.json", psd([0.0, 1.0]))
        code, doc = run_json(
            capsys,
            ["renyi", rho, sigma, "--alpha", "1.5", "--z", "1", "--deterministic"],
        )
        assert code == 0
        assert doc["divergence"] == "+inf"

    def test_alpha_one_exits_2(self, tmp_path, capsys):
        rho = write_mat(tmp_path, "rho.json", psd([0.5, 0.5]))
        code, _, _ = run(capsys, ["renyi", rho, rho, "--alpha", "1", "--z", "1"])
        assert code == 2

    def test_z_zero_exits_2(self, tmp_path, capsys):
        rho = write_mat(tmp_path, "rho.json", psd([0.5, 0.5]))
        code, _, _ = run(capsys, ["renyi", rho, rho, "--alpha", "2", "--z", "0"])
        assert code == 2

    def test_non_density_exits_2(self, tmp_path, capsys):
        rho = write_mat(tmp_path, "rho.json", psd([1.0, 1.0]))
        sigma = write_mat(tmp_path, "sigma.json", psd([0.5, 0.5]))
        code, _, _ = run(capsys, ["renyi", rho, sigma, "--alpha", "2", "--z", "1"])
        assert code == 2
