import json

import pytest

from netcorr import read_curve, read_matrix, read_trajectory, sample_contacts_path
from netcorr.cli import derive_seed, main


def run(args, capsys):
    code = main([str(a) for a in args])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def periodic(tmp_path, capsys):
    path = tmp_path / "per.traj"
    code, _, _ = run(["generate", "periodic", "--t", 20, "--n", 120, "--m", 10, "--p", 0.1, "--q", 0.4,
                      "--seed", 3, "--out", path], capsys)
    assert code == 0
    return path


def test_generate_white_embeds_params(tmp_path, capsys):
    path = tmp_path / "w.traj"
    code, _, _ = run(["generate", "white", "--m", 10, "--n", 100, "--p", 0.2, "--seed", 7, "-o", path], capsys)
    assert code == 0
    traj = read_trajectory(path)
    assert (traj.m, traj.n_snapshots) == (10, 100)
    assert traj.metadata["params"] == {"m": 10, "n": 100, "p": 0.2, "seed": 7, "directed": False}
    manifest = json.loads((tmp_path / "w.traj.manifest.json").read_text())
    assert manifest["subcommand"] == "generate white"
    assert manifest["seeds"] == {"seed": 7}
    assert manifest["outputs"] == [str(path)]
    assert "duration_s" in manifest and manifest["version"]


def test_generate_to_stdout(capsys):
    code, out, _ = run(["generate", "darn", "--m", 4, "--n", 10, "--order", 2], capsys)
    assert code == 0
    assert "m=4 n=10 symmetric=1" in out


def test_correlate_with_matrices(periodic, tmp_path, capsys):
    curve_path = tmp_path / "per.csv"
    code, _, _ = run(["correlate", periodic, "--tau-max", 40, "--matrices", "10,30", "-o", curve_path], capsys)
    assert code == 0
    curve = read_curve(curve_path)
    assert curve.lags.tolist() == list(range(41))
    for tau in (10, 30):
        mat = read_matrix(tmp_path / f"per.Ctilde{tau}.csv")
        assert mat.lag == tau and mat.m == 10
    sidecar = json.loads((tmp_path / "per.Ctilde30.csv.json").read_text())
    assert sidecar["N"] == 120


def test_correlate_white_21_rows(tmp_path, capsys):
    src = tmp_path / "w.traj"
    run(["generate", "white", "-o", src], capsys)
    code, _, _ = run(["correlate", src, "--tau-max", 20, "-o", tmp_path / "w.csv"], capsys)
    assert code == 0
    assert len((tmp_path / "w.csv").read_text().splitlines()) == 22  # header + 21 rows


def test_correlate_tau_max_too_large(periodic, capsys):
    code, _, err = run(["correlate", periodic, "--tau-max", 120], capsys)
    assert code == 1
    assert "category=lag-out-of-range" in err


def test_threads_do_not_change_output(periodic, tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(["correlate", periodic, "--tau-max", 60, "--threads", 1, "-o", a], capsys)
    run(["correlate", periodic, "--tau-max", 60, "--threads", 4, "-o", b], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_analyze_zscore(periodic, tmp_path, capsys):
    curve = tmp_path / "c.csv"
    run(["correlate", periodic, "--tau-max", 40, "-o", curve], capsys)
    code, out, _ = run(["analyze", "zscore", curve, "--t", 20, "-o", tmp_path / "z.json"], capsys)
    assert code == 0
    assert "verdict=DETECTED" in out
    report = json.loads((tmp_path / "z.json").read_text())
    assert report["rows"][0]["z"] > 4


def test_analyze_decay_and_offdiag(tmp_path, capsys):
    curves = []
    for order in (1, 2, 3):
        traj, curve = tmp_path / f"d{order}.traj", tmp_path / f"d{order}.csv"
        run(["generate", "darn", "--order", order, "--n", 4000, "--seed", order, "-o", traj], capsys)
        run(["correlate", traj, "--tau-max", 12, "--matrices", 1, "-o", curve], capsys)
        curves.append(curve)
    code, out, _ = run(["analyze", "decay", *curves, "--orders", "1,2,3", "-o", tmp_path / "b.json"], capsys)
    assert code == 0
    report = json.loads((tmp_path / "b.json").read_text())
    betas = [r["beta"] for r in report["rows"]]
    assert betas[0] > betas[1] > betas[2]
    assert report["order_exponent"] < 0
    mats = [tmp_path / f"d{o}.Ctilde1.csv" for o in (1, 2, 3)]
    code, out, _ = run(["analyze", "offdiag", *mats, "-o", tmp_path / "o.json"], capsys)
    assert code == 0 and "offdiag_ratio=" in out


def test_analyze_scaling(periodic, tmp_path, capsys):
    curve = tmp_path / "c.csv"
    run(["correlate", periodic, "--tau-max", 40, "-o", curve], capsys)
    code, _, err = run(["analyze", "scaling", curve, "--k-max", 5], capsys)
    assert code == 0 and "alpha=" in err
    code, _, err = run(["analyze", "scaling", curve, "--k-max", 6], capsys)
    assert code == 1
    assert "category=lag-out-of-range" in err


def test_ingest_and_lifetimes(tmp_path, capsys, caplog):
    traj = tmp_path / "contacts.traj"
    code, _, err = run(["ingest", sample_contacts_path(), "--resolution", 20, "-o", traj], capsys)
    assert code == 0
    assert "dropped 1 self-contact" in caplog.text
    t = read_trajectory(traj)
    assert t.m == 8 and t.resolution == 20
    out = tmp_path / "life.json"
    code, stdout, _ = run(["analyze", "lifetimes", traj, "--shuffles", 10, "--tau-max", 30, "-o", out], capsys)
    assert code == 0
    report = json.loads(out.read_text())
    assert report["tau_clt"] >= 1 and report["n_shuffles"] == 10
    manifest = json.loads((tmp_path / "life.json.manifest.json").read_text())
    assert manifest["seeds"]["shuffle"] == derive_seed(0, "shuffle")


def test_ingest_csv_needs_cols(tmp_path, capsys):
    src = tmp_path / "c.csv"
    src.write_text("a,b,time\n1,2,0\n")
    code, _, err = run(["ingest", src, "--format", "csv", "--resolution", 10], capsys)
    assert code == 1
    assert "category=parse-error" in err and "--cols" in err


def test_config_file_and_manifest_rerun(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("m = 12\nn = 50\np = 0.3\nseed = 11\n")
    first = tmp_path / "a.traj"
    assert run(["generate", "white", "--config", cfg, "-o", first], capsys)[0] == 0
    assert read_trajectory(first).metadata["params"]["m"] == 12
    second = tmp_path / "b.traj"
    manifest = tmp_path / "a.traj.manifest.json"
    assert run(["generate", "white", "--config", manifest, "-o", second], capsys)[0] == 0
    assert first.read_bytes() == second.read_bytes()


def test_logistic_sub_seeds(tmp_path, capsys):
    out = tmp_path / "l.traj"
    code, _, _ = run(["generate", "logistic", "--m", 20, "--l", 30, "--n", 50, "--seed", 4, "-o", out], capsys)
    assert code == 0
    seeds = json.loads((tmp_path / "l.traj.manifest.json").read_text())["seeds"]
    assert seeds == {"seed": 4, "dictionary": derive_seed(4, "dictionary"), "x0": derive_seed(4, "x0")}
    assert derive_seed(4, "x0") != derive_seed(4, "dictionary")


def test_config_errors(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("bogus = 1\n")
    code, _, err = run(["generate", "white", "--config", cfg], capsys)
    assert code == 2 and "category=invalid-parameter" in err


def test_validation_error_exit(capsys):
    code, _, err = run(["generate", "periodic", "--t", 50, "--n", 20], capsys)
    assert code == 1
    assert "category=invalid-parameter" in err and "exceeds" in err


def test_io_error_exit(tmp_path, capsys):
    code, _, err = run(["correlate", tmp_path / "missing.traj"], capsys)
    assert code == 3 and "category=io" in err
