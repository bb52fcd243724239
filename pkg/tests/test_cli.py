import json
from pathlib import Path

import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

import fdakit as fk
from fdakit import io
from fdakit.cli import main

DATA = Path(__file__).parent / "data"
FPCA_CURVES = DATA / "fpca_fixture_curves.csv"
GOLDEN_EIGENVALUES = DATA / "fpca_fixture_eigenvalues_golden.csv"
BUNDLE_CURVES = DATA / "two_bundle_curves.csv"


def run_cli(*args):
    return main([str(a) for a in args])


def read_table(path, skip_comments=True):
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            continue
        rows.append(line.split(","))
    return rows[0], rows[1:]


def write_coords(path, ids, coords):
    lines = ["id,x,y"]
    for curve_id, (x, y) in zip(ids, coords):
        lines.append(f"{curve_id},{float(x)!r},{float(y)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


class TestFpcaCommand:
    def test_eigenvalues_match_oracle_golden(self, tmp_path):
        rc = run_cli("fpca", "--curves", FPCA_CURVES, "--basis", "bspline",
                     "--k", 8, "--order", 4, "--domain", "0:1", "--p", 5,
                     "--out", tmp_path)
        assert rc == 0
        _, got = read_table(tmp_path / "eigenvalues.csv")
        _, golden = read_table(GOLDEN_EIGENVALUES)
        got = np.array([[float(x) for x in row[1:]] for row in got])
        golden = np.array([[float(x) for x in row[1:]] for row in golden])
        assert np.abs(got - golden).max() <= 1e-8

    def test_outputs_carry_provenance(self, tmp_path):
        run_cli("fpca", "--curves", FPCA_CURVES, "--k", 8, "--p", 3,
                "--seed", 21, "--out", tmp_path)
        for name in ("coefficients.csv", "eigenvalues.csv", "scores.csv", "fpca.json"):
            prov = io.parse_provenance(tmp_path / name)
            assert prov["command"] == "fpca"
            assert prov["seed"] == 21
            assert prov["version"] == fk.__version__
            assert prov["params"]["k"] == 8

    def test_component_count_out_of_range_is_usage_error(self, tmp_path, capsys):
        rc = run_cli("fpca", "--curves", FPCA_CURVES, "--k", 8, "--p", 99,
                     "--out", tmp_path)
        assert rc == 2
        assert "n_components" in capsys.readouterr().err


class TestClusterCommand:
    def test_two_bundle_fixture_resolved_exactly(self, tmp_path):
        rc = run_cli("cluster", "--curves", BUNDLE_CURVES, "--basis", "fourier",
                     "--k", 5, "--g-min", 2, "--g-max", 6, "--seed", 1,
                     "--out", tmp_path, "--plot")
        assert rc == 0
        _, rows = read_table(tmp_path / "assignments.csv")
        truth = [0 if row[0].startswith("a") else 1 for row in rows]
        labels = [int(row[1]) for row in rows]
        assert adjusted_rand_score(truth, labels) == 1.0
        header, table = read_table(tmp_path / "silhouette.csv")
        assert header == ["n_clusters", "silhouette", "inertia", "n_iter"]
        by_g = {int(r[0]): float(r[1]) for r in table}
        assert max(by_g, key=by_g.get) == 2
        assert (tmp_path / "curves.svg").read_bytes().startswith(b"<?xml")


class TestSmoothCommand:
    def test_coefficients_round_trip(self, tmp_path):
        rc = run_cli("smooth", "--curves", FPCA_CURVES, "--k", 8,
                     "--out", tmp_path)
        assert rc == 0
        ds = io.read_dataset_csv(tmp_path / "coefficients.csv")
        assert ds.n_curves == 25 and ds.n_basis == 8
        # emitted coefficients reload bitwise
        again = tmp_path / "again.csv"
        io.write_dataset_csv(again, ds, io.provenance_lines("smooth", {}, 0))
        assert np.array_equal(io.read_dataset_csv(again).coefficients,
                              ds.coefficients)


class TestRegressCommand:
    def test_fit_json_written(self, tmp_path):
        curves = io.ingest_curves(FPCA_CURVES)
        dataset = fk.build_dataset(curves, fk.bspline_basis(8, (0.0, 1.0)))
        scores = fk.fpca(dataset, 2).scores
        y = 1.0 + scores @ np.array([0.5, -0.25])
        lines = ["id,y"] + [f"{i},{float(v)!r}" for i, v in zip(dataset.ids, y)]
        response = tmp_path / "resp.csv"
        response.write_text("\n".join(lines) + "\n")
        rc = run_cli("regress", "--curves", FPCA_CURVES, "--k", 8,
                     "--response", response, "--p", 2, "--out", tmp_path)
        assert rc == 0
        fit = json.loads((tmp_path / "fit.json").read_text())
        assert fit["link"] == "identity"
        assert fit["alpha"] == pytest.approx(1.0, abs=1e-6)
        assert np.allclose(fit["d_coeffs"], [0.5, -0.25], atol=1e-6)
        assert len(fit["beta_values"]) == len(fit["beta_grid"])


class TestScanCommand:
    def test_detects_shifted_neighborhood(self, tmp_path):
        run_cli("simulate", "--n", 30, "--k", 5, "--lambdas", "1,0.5",
                "--noise-sd", "0.3", "--grid-points", 31, "--seed", 6,
                "--out", tmp_path / "sim")
        curves = io.ingest_curves(tmp_path / "sim" / "curves.csv")
        rng = np.random.default_rng(8)
        coords = rng.uniform(size=(30, 2))
        near = np.argsort(((coords - coords[4]) ** 2).sum(axis=1))[:8]
        shifted = []
        for i, curve in enumerate(curves):
            values = curve.values + (10.0 if i in near else 0.0)
            shifted.append(fk.RawCurve(id=curve.id, times=curve.times, values=values))
        curve_path = tmp_path / "shifted.csv"
        io.write_curves_csv(curve_path, [c.id for c in shifted],
                            shifted[0].times, np.vstack([c.values for c in shifted]),
                            io.provenance_lines("simulate", {}, 6))
        write_coords(tmp_path / "coords.csv", [c.id for c in shifted], coords)
        rc = run_cli("scan", "--curves", curve_path, "--coords",
                     tmp_path / "coords.csv", "--basis", "fourier", "--k", 5,
                     "--max-fraction", "0.4", "--n-perm", 199, "--seed", 2,
                     "--out", tmp_path, "--plot")
        assert rc == 0
        result = json.loads((tmp_path / "scan.json").read_text())
        assert result["p_value"] == pytest.approx(1 / 200)
        detected = set(result["window_ids"])
        truth = {shifted[i].id for i in near}
        assert len(detected & truth) / len(truth) >= 0.8
        _, rows = read_table(tmp_path / "window.csv")
        flags = {row[0]: int(row[1]) for row in rows}
        assert sum(flags.values()) == len(detected)
        assert all(flags[i] == 1 for i in detected)


class TestSimulateCommand:
    def test_round_trips_through_ingest(self, tmp_path):
        rc = run_cli("simulate", "--n", 12, "--k", 5, "--lambdas", "2,1",
                     "--mean-coeffs", "1,0,0,0,0", "--grid-points", 21,
                     "--noise-sd", "0.1", "--seed", 3, "--out", tmp_path)
        assert rc == 0
        curves = io.ingest_curves(tmp_path / "curves.csv")
        assert len(curves) == 12
        assert all(len(c) == 21 for c in curves)

    def test_invalid_lambdas_usage_error(self, tmp_path, capsys):
        rc = run_cli("simulate", "--n", 5, "--k", 5, "--lambdas", "1,2",
                     "--out", tmp_path)
        assert rc == 2
        assert "nonincreasing" in capsys.readouterr().err


class TestExitCodes:
    def test_unknown_command_is_usage(self, capsys):
        assert run_cli("frobnicate") == 2
        capsys.readouterr()

    def test_missing_input_is_data_error(self, tmp_path, capsys):
        rc = run_cli("fpca", "--curves", tmp_path / "nope.csv", "--out", tmp_path)
        assert rc == 3
        capsys.readouterr()

    def test_malformed_curves_is_data_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("id,t,value\na,0.0,oops\n")
        rc = run_cli("fpca", "--curves", bad, "--out", tmp_path)
        assert rc == 3
        capsys.readouterr()

    def test_underdetermined_fit_is_data_error(self, tmp_path, capsys):
        thin = tmp_path / "thin.csv"
        thin.write_text("id,t,value\n" + "".join(
            f"a,{t},{t}\n" for t in (0.0, 0.5, 1.0)
        ))
        rc = run_cli("smooth", "--curves", thin, "--k", 8, "--out", tmp_path)
        assert rc == 3
        assert "rank" in capsys.readouterr().err.lower()

    def test_separated_logit_is_numerical_error(self, tmp_path, capsys):
        response = tmp_path / "ones.csv"
        curves = io.ingest_curves(FPCA_CURVES)
        response.write_text("id,y\n" + "".join(f"{c.id},1.0\n" for c in curves))
        rc = run_cli("regress", "--curves", FPCA_CURVES, "--k", 8,
                     "--response", response, "--link", "logit", "--p", 2,
                     "--out", tmp_path)
        assert rc == 4
        assert "converge" in capsys.readouterr().err.lower()


class TestDeterminism:
    COMMANDS = {
        "simulate": lambda out: [
            "simulate", "--n", 10, "--k", 5, "--lambdas", "2,1",
            "--noise-sd", "0.2", "--grid-points", 21, "--seed", 11, "--out", out,
            "--plot",
        ],
        "smooth": lambda out: [
            "smooth", "--curves", FPCA_CURVES, "--k", 8, "--out", out, "--plot",
        ],
        "fpca": lambda out: [
            "fpca", "--curves", FPCA_CURVES, "--k", 8, "--p", 4, "--out", out,
        ],
        "cluster": lambda out: [
            "cluster", "--curves", BUNDLE_CURVES, "--basis", "fourier", "--k", 5,
            "--g-min", 2, "--g-max", 4, "--seed", 7, "--out", out, "--plot",
        ],
    }

    @pytest.mark.parametrize("command", sorted(COMMANDS))
    def test_two_runs_produce_identical_bytes(self, tmp_path, command):
        build = self.COMMANDS[command]
        first = tmp_path / "one"
        second = tmp_path / "two"
        assert run_cli(*build(first)) == 0
        assert run_cli(*build(second)) == 0
        names = sorted(p.name for p in first.iterdir())
        assert names == sorted(p.name for p in second.iterdir())
        for name in names:
            assert (first / name).read_bytes() == (second / name).read_bytes(), name
