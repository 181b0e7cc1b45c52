import json
import subprocess
import sys

import numpy as np
import pytest

from dompkit import bench, linalg
from dompkit.cli import main


@pytest.fixture
def identity_problem(tmp_path):
    matrix = tmp_path / "eye.txt"
    measurements = tmp_path / "y.txt"
    linalg.save_matrix(matrix, np.eye(4))
    y = np.zeros(4)
    y[1] = 1.0
    linalg.save_vector(measurements, y)
    return str(matrix), str(measurements)


def test_recover_identity_fixture(identity_problem, capsys):
    matrix, measurements = identity_problem
    code = main(
        ["recover", "--matrix", matrix, "--measurements", measurements,
         "--sparsity", "1", "--algo", "omp"]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["estimate"] == {"2": 1.0}
    assert payload["iterations"] == 1
    assert payload["termination"] == "global-optimum"
    assert payload["residual_norms"] == [pytest.approx(0.0, abs=1e-12)]


def test_recover_rejects_gamma_out_of_range(identity_problem, capsys):
    matrix, measurements = identity_problem
    code = main(
        ["recover", "--matrix", matrix, "--measurements", measurements,
         "--sparsity", "1", "--algo", "domp", "--gamma", "1.3"]
    )
    assert code == 2
    assert "gamma" in capsys.readouterr().err


def test_recover_rejects_unknown_algorithm(identity_problem, capsys):
    matrix, measurements = identity_problem
    code = main(
        ["recover", "--matrix", matrix, "--measurements", measurements,
         "--sparsity", "2", "--algo", "bogus"]
    )
    assert code == 2


def test_recover_gomp_needs_room_for_n(identity_problem):
    matrix, measurements = identity_problem
    code = main(
        ["recover", "--matrix", matrix, "--measurements", measurements,
         "--sparsity", "1", "--algo", "gomp"]
    )
    assert code == 2


def test_recover_missing_file(tmp_path, capsys):
    code = main(
        ["recover", "--matrix", str(tmp_path / "nope.txt"), "--measurements",
         str(tmp_path / "nope2.txt"), "--sparsity", "1", "--algo", "omp"]
    )
    assert code == 3
    captured = capsys.readouterr()
    # diagnostics on stderr, stdout stays data-only
    assert captured.out == ""
    assert captured.err != ""


def test_recover_malformed_matrix(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("2 2\n1 nan\n0 1\n")
    vec = tmp_path / "y.txt"
    vec.write_text("2\n1 0\n")
    code = main(
        ["recover", "--matrix", str(bad), "--measurements", str(vec),
         "--sparsity", "1", "--algo", "omp"]
    )
    assert code == 3
    assert ":2:" in capsys.readouterr().err


def test_recover_dimension_mismatch(tmp_path):
    matrix = tmp_path / "mat.txt"
    linalg.save_matrix(matrix, np.eye(3))
    vec = tmp_path / "y.txt"
    vec.write_text("2\n1 0\n")
    code = main(
        ["recover", "--matrix", str(matrix), "--measurements", str(vec),
         "--sparsity", "1", "--algo", "omp"]
    )
    assert code == 3


def test_recover_seeded_fixture_with_truth(tmp_path, capsys):
    # fixture produced by the seeded ensemble; recovery verified against it
    spec = bench.EnsembleSpec(m=100, n=400, k=10, master_seed=20240915,
                              scaling="one-over-sqrt-m")
    A, x, y = bench.generate_problem(spec, 0)
    matrix = tmp_path / "A.txt"
    measurements = tmp_path / "y.txt"
    truth = tmp_path / "x.txt"
    linalg.save_matrix(matrix, A)
    linalg.save_vector(measurements, y)
    linalg.save_vector(truth, x)
    code = main(
        ["recover", "--matrix", str(matrix), "--measurements", str(measurements),
         "--sparsity", "10", "--algo", "edomp", "--truth", str(truth)]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["success"] is True
    assert payload["relative_error"] <= 1e-5
    estimate = {int(i) - 1: v for i, v in payload["estimate"].items()}
    assert set(estimate) == set(np.flatnonzero(x).tolist())


def test_recover_stop_rule_parsing(identity_problem, capsys):
    matrix, measurements = identity_problem
    code = main(
        ["recover", "--matrix", matrix, "--measurements", measurements,
         "--sparsity", "1", "--algo", "omp", "--stop", "max-iters:0"]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["iterations"] == 0
    assert payload["termination"] == "max-iterations"

    assert main(
        ["recover", "--matrix", matrix, "--measurements", measurements,
         "--sparsity", "1", "--algo", "omp", "--stop", "relerr:1e-5"]
    ) == 2
    assert main(
        ["recover", "--matrix", matrix, "--measurements", measurements,
         "--sparsity", "1", "--algo", "omp", "--stop", "nonsense"]
    ) == 2


def test_sweep_requires_seed(capsys):
    code = main(["phase-gamma", "--trials", "2"])
    assert code == 2
    assert "--seed" in capsys.readouterr().err


def test_phase_gamma_stdout_shape(capsys):
    code = main(
        ["phase-gamma", "--seed", "5", "--trials", "3", "--m", "30", "--n", "120",
         "--k-levels", "3", "--gammas", "0.5,1.0", "--algos", "domp"]
    )
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "algorithm,gamma,k,trials,successes,success_rate,mean_iterations"
    assert len(lines) == 3


def test_phase_k_noisy_criterion(tmp_path):
    out = tmp_path / "curve.csv"
    code = main(
        ["phase-k", "--seed", "6", "--trials", "4", "--m", "30", "--n", "120",
         "--k-levels", "2,4", "--algos", "domp", "--noise", "0.001", "--out", str(out)]
    )
    assert code == 0
    sidecar = json.loads((tmp_path / "curve.csv.meta.json").read_text())
    assert sidecar["spec"]["noise"] == 0.001
    assert out.read_text().startswith("algorithm,k,")


def test_phase_iters_runs(capsys):
    code = main(
        ["phase-iters", "--seed", "7", "--trials", "3", "--m", "30", "--n", "120",
         "--k-levels", "3", "--budgets", "1,3", "--algos", "domp"]
    )
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("algorithm,budget,k,")
    assert len(lines) == 3


def test_scaling_shape(capsys):
    code = main(
        ["scaling", "--seed", "8", "--trials", "2", "--sizes", "20,30",
         "--algos", "domp", "--no-timing"]
    )
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == (
        "algorithm,m,n,k,trials,recovered,unrecovered,success_rate,"
        "mean_iterations,mean_runtime,median3_runtime"
    )
    assert len(lines) == 3
    assert lines[1].startswith("domp,20,100,6,")


@pytest.mark.parametrize(
    "argv",
    [
        ["phase-gamma", "--seed", "11", "--trials", "3", "--m", "30", "--n", "120",
         "--k-levels", "3", "--gammas", "0.5,0.9", "--algos", "domp,edomp"],
        ["phase-iters", "--seed", "12", "--trials", "3", "--m", "30", "--n", "120",
         "--k-levels", "3", "--budgets", "1,2,3", "--algos", "domp"],
        ["phase-k", "--seed", "13", "--trials", "3", "--m", "30", "--n", "120",
         "--k-levels", "2,5", "--algos", "omp,domp"],
        ["scaling", "--seed", "14", "--trials", "2", "--sizes", "20,30",
         "--algos", "omp,domp", "--no-timing"],
    ],
)
def test_sweep_byte_determinism_across_threads(tmp_path, argv):
    outputs = []
    for threads, rep in [(1, 0), (2, 0), (1, 1)]:
        out = tmp_path / f"{threads}-{rep}.csv"
        code = main(argv + ["--threads", str(threads), "--out", str(out)])
        assert code == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]


def test_ric_order(tmp_path, capsys):
    matrix = tmp_path / "mat.txt"
    linalg.save_matrix(matrix, np.eye(4))
    code = main(["ric", "--matrix", str(matrix), "--order", "2"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["delta"] == pytest.approx(0.0, abs=1e-12)
    assert payload["supports_examined"] == 6


def test_ric_highest(tmp_path, capsys):
    matrix = tmp_path / "mat.txt"
    linalg.save_matrix(matrix, np.eye(3))
    code = main(["ric", "--matrix", str(matrix), "--highest"])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["highest_order"] == 3


def test_ric_flag_exclusivity(tmp_path):
    matrix = tmp_path / "mat.txt"
    linalg.save_matrix(matrix, np.eye(3))
    assert main(["ric", "--matrix", str(matrix)]) == 2
    assert main(["ric", "--matrix", str(matrix), "--order", "1", "--highest"]) == 2


def test_ric_cap_guidance(tmp_path, capsys):
    rng = np.random.default_rng(0)
    matrix = tmp_path / "mat.txt"
    linalg.save_matrix(matrix, rng.standard_normal((6, 30)))
    code = main(["ric", "--matrix", str(matrix), "--order", "10", "--cap", "100"])
    assert code == 2
    assert "shrink" in capsys.readouterr().err


def test_verify_theta_suite(capsys):
    code = main(["verify", "--suite", "theta", "--trials", "10", "--seed", "3"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["violations"] == 0
    assert payload["instances"] == 10


def test_verify_bound_suite_inconclusive_exits_zero(capsys):
    # the default small ensemble essentially never passes the RIC gate;
    # inconclusive instances must not fail the suite
    code = main(["verify", "--suite", "bound-domp", "--trials", "4", "--seed", "9"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["violations"] == 0
    assert payload["inconclusive"] == 4


def test_verify_aux_suite(capsys):
    code = main(["verify", "--suite", "aux-inequalities", "--trials", "25", "--seed", "77"])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["violations"] == 0


def test_verify_ric_monotone_suite(capsys):
    code = main(["verify", "--suite", "ric-monotone", "--trials", "5", "--seed", "21"])
    assert code == 0


def test_sweep_gomp_needs_k_at_least_two(capsys):
    code = main(
        ["phase-k", "--seed", "4", "--trials", "2", "--m", "20", "--n", "80",
         "--k-levels", "1,4", "--algos", "gomp"]
    )
    assert code == 2
    assert "gOMP" in capsys.readouterr().err


def test_full_scale_preset_accepts_overrides(capsys):
    # the full-scale preset only changes grid defaults; explicit flags
    # keep the run desk-sized
    code = main(
        ["phase-gamma", "--preset", "full", "--seed", "9", "--trials", "2",
         "--m", "20", "--n", "80", "--k-levels", "2", "--gammas", "0.9",
         "--algos", "domp"]
    )
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2


def test_cli_is_thin_adapter_over_library(tmp_path, capsys):
    # the sweep command and the direct library call emit identical CSV
    code = main(
        ["phase-k", "--seed", "17", "--trials", "4", "--m", "30", "--n", "120",
         "--k-levels", "2,4", "--algos", "omp,domp"]
    )
    assert code == 0
    via_cli = capsys.readouterr().out
    spec = bench.EnsembleSpec(m=30, n=120, k=2, master_seed=17)
    via_lib = bench.success_curves(spec, [2, 4], ["omp", "domp"], trials=4, gamma=0.9).to_csv()
    assert via_cli == via_lib


def test_module_entry_point(tmp_path):
    matrix = tmp_path / "mat.txt"
    vec = tmp_path / "y.txt"
    linalg.save_matrix(matrix, np.eye(3))
    linalg.save_vector(vec, np.array([0.0, 2.0, 0.0]))
    proc = subprocess.run(
        [sys.executable, "-m", "dompkit", "recover", "--matrix", str(matrix),
         "--measurements", str(vec), "--sparsity", "1", "--algo", "omp"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["estimate"] == {"2": 2.0}
