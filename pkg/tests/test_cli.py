import json
import math
import os

import numpy as np
import pytest

from onestep import cli, frames, signals


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_coherence_alltop(capsys):
    code, out, _ = run(capsys, "coherence", "--alltop", "7")
    assert code == 0
    d = json.loads(out)
    assert d["mu"] <= 1 / math.sqrt(7) + 1e-9
    assert {"nu", "spectral_norm", "welch", "cp1", "cp2", "scp1", "scp2"} <= set(d)


def test_coherence_analytic_and_gaussian(capsys):
    code, out, _ = run(capsys, "coherence", "--alltop", "127", "--analytic")
    assert code == 0 and json.loads(out)["analytic"] is True
    code, out, _ = run(capsys, "coherence", "--gaussian", "20", "40", "--seed", "1", "--normalize")
    assert code == 0 and "cp_holds" in json.loads(out)


def test_usage_and_validation_exit_codes(capsys):
    assert run(capsys, "coherence", "--bogus")[0] == 2
    assert run(capsys, "verify", "nonsense")[0] == 2
    assert run(capsys, "coherence", "--alltop", "8")[0] == 3
    assert run(capsys, "coherence", "--alltop", "7", "--analytic", "--form", "operator")[0] == 0
    code, out, err = run(capsys, "coherence", "--gaussian", "10", "5")
    assert code == 3 and out == "" and "invalid" in err


@pytest.fixture
def problem(tmp_path):
    X = frames.identity_frame(8)
    frames.save_frame(tmp_path / "x.txt", X)
    beta = signals.SparseSignal(8, [2, 6], [1.0, -1.0])
    signals.save_measurement(tmp_path / "y.csv", signals.measure(X, beta).y)
    return tmp_path


def test_select_lambda_and_sost(capsys, problem):
    code, out, _ = run(capsys, "select", "--frame-file", str(problem / "x.txt"),
                       "--y", str(problem / "y.csv"), "--lambda", "0.5")
    assert code == 0 and json.loads(out)["selected"] == [2, 6]
    code, out, _ = run(capsys, "select", "--frame-file", str(problem / "x.txt"),
                       "--y", str(problem / "y.csv"), "--sost-k", "5")
    assert code == 0 and len(json.loads(out)["selected"]) == 5


def test_select_needs_one_mode(capsys, problem):
    base = ["select", "--frame-file", str(problem / "x.txt"), "--y", str(problem / "y.csv")]
    assert run(capsys, *base)[0] == 2
    assert run(capsys, *base, "--lambda", "1", "--sost-k", "2")[0] == 2
    assert run(capsys, *base, "--t", "0.3")[0] == 2  # missing snr/sigma2
    assert run(capsys, *base, "--snr", "2", "--sigma2", "1", "--c", "abc")[0] == 2


def test_select_partial_regime_threshold_echo(capsys, tmp_path):
    y = np.zeros(997, dtype=complex)
    y[0] = 1
    signals.save_measurement(tmp_path / "y.csv", y)
    code, out, _ = run(capsys, "select", "--alltop", "997", "--y", str(tmp_path / "y.csv"),
                       "--t", "0.29289", "--c", "auto2t", "--snr", "2", "--sigma2", "1e-2")
    assert code == 0
    th = json.loads(out)["threshold"]
    assert abs(th["lam"] - 1.486) < 1e-3
    assert th["c"] == pytest.approx(2 * 0.29289)
    assert {"mu", "n", "p", "snr", "sigma2", "t"} <= set(th)
    code, out, _ = run(capsys, "select", "--alltop", "997", "--y", str(tmp_path / "y.csv"),
                       "--t", "0.29289", "--c", "auto2t", "--snr-db", str(10 * math.log10(2)),
                       "--sigma2", "1e-2")
    assert abs(json.loads(out)["threshold"]["lam"] - 1.486) < 1e-3


def test_dimension_mismatch_exit_3(capsys, problem):
    code, _, _ = run(capsys, "select", "--alltop", "5", "--y", str(problem / "y.csv"), "--lambda", "1")
    assert code == 3


def test_recover_modes(capsys, problem):
    base = ["recover", "--frame-file", str(problem / "x.txt"), "--y", str(problem / "y.csv")]
    code, out, _ = run(capsys, *base, "--lambda", "0.5")
    d = json.loads(out)
    assert code == 0 and d["selected"] == [2, 6] and d["residual"] < 1e-12
    # mu = 0 for an orthonormal frame, so the recovery threshold is 0
    code, out, _ = run(capsys, *base, "--recovery-c", "10")
    assert code == 0 and json.loads(out)["selected"] == [2, 6]


def test_recover_c10_empty_on_alltop(capsys, tmp_path):
    X = frames.build_gabor_frame(frames.alltop_seed(31))
    y = signals.measure(X, signals.make_signal(X.p, [3, 50], 1.0, 2.0, seed=0)).y
    signals.save_measurement(tmp_path / "y.csv", y)
    code, out, _ = run(capsys, "recover", "--alltop", "31", "--y", str(tmp_path / "y.csv"),
                       "--recovery-c", "10")
    d = json.loads(out)
    assert code == 0 and d["selected"] == [] and d["residual"] == pytest.approx(np.linalg.norm(y))
    assert d["threshold"]["lam"] > np.linalg.norm(y)


def test_recover_over_selection_exit_4(capsys, tmp_path):
    X = frames.build_gabor_frame(frames.alltop_seed(5))
    frames.save_frame(tmp_path / "g.txt", X)
    signals.save_measurement(tmp_path / "y.csv", np.ones(5))
    code, _, err = run(capsys, "recover", "--frame-file", str(tmp_path / "g.txt"),
                       "--y", str(tmp_path / "y.csv"), "--lambda", "0")
    assert code == 4 and "over-selection" in err


def test_missing_file_exit_5(capsys, tmp_path):
    code, _, _ = run(capsys, "select", "--alltop", "5", "--y", str(tmp_path / "none.csv"), "--lambda", "1")
    assert code == 5


def test_frame_export(capsys, tmp_path):
    code, out, _ = run(capsys, "frame", "--alltop", "7", "--out", str(tmp_path / "f.txt"),
                       "--seed-out", str(tmp_path / "g.txt"))
    assert code == 0
    np.testing.assert_array_equal(frames.load_seed(tmp_path / "g.txt"), frames.alltop_seed(7))
    assert frames.load_frame(tmp_path / "f.txt").p == 49
    man = json.loads((tmp_path / "f.txt.manifest.json").read_text())
    assert man["command"] == "frame" and man["outputs"] == [str(tmp_path / "f.txt")]
    assert not [f for f in os.listdir(tmp_path) if f.startswith(".tmp-")]


def small_config(tmp_path, **kw):
    c = {"frame": {"type": "alltop", "n": 31}, "k": [1, 2], "algorithm": "ost",
         "snr_db": 3.0, "sigma2": 0.01,
         "threshold": {"t": (math.sqrt(2) - 1) / math.sqrt(2), "c": "auto2t"},
         "trials": 10, "seed": 1}
    c.update(kw)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(c))
    return str(path)


def test_experiment_outputs_and_determinism(capsys, tmp_path):
    path = small_config(tmp_path)
    code, out, _ = run(capsys, "experiment", path, "--out", str(tmp_path / "a"), "--threads", "1")
    assert code == 0
    summary = json.loads(out)
    assert summary["k"] == [1, 2]
    code, _, _ = run(capsys, "experiment", path, "--out", str(tmp_path / "b"), "--threads", "8")
    assert code == 0
    assert (tmp_path / "a" / "trials.csv").read_bytes() == (tmp_path / "b" / "trials.csv").read_bytes()
    man = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert man["seed"] == 1 and man["config"]["trials"] == 10
    assert {"started", "finished", "version", "outputs", "command"} <= set(man)


def test_experiment_validation_exit_3(capsys, tmp_path):
    assert run(capsys, "experiment", small_config(tmp_path, trials=0))[0] == 3
    assert run(capsys, "experiment", "no_such_bundled_config")[0] == 3


def test_experiment_io_failure_exit_5(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, err = run(capsys, "experiment", small_config(tmp_path), "--out", str(blocker / "sub"))
    assert code == 5 and "I/O" in err


def test_experiment_bundled_config(capsys):
    code, out, _ = run(capsys, "experiment", "fig3_desk", "--trials", "20", "--threads", "1")
    assert code == 0
    d = json.loads(out)
    assert d["subset_rate"][0] >= 0.99


def test_verify_geometry(capsys):
    code, out, _ = run(capsys, "verify", "geometry")
    d = json.loads(out)
    assert code == 0 and d["pass"] and len(d["checks"]) == 20


@pytest.mark.parametrize("suite,trials", [("stoc", 200), ("tails", 2000), ("conditioning", 100),
                                          ("gaussian", 2)])
def test_verify_other_suites(capsys, suite, trials):
    code, out, _ = run(capsys, "verify", suite, "--trials", str(trials))
    d = json.loads(out)
    assert code == 0 and d["suite"] == suite and d["pass"]
