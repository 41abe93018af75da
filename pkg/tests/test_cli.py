import json
import os

import pytest

from tubelab import cli


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_exponents_lemma_alpha(capsys):
    code, out = run_cli(capsys, "exponents", "lemma-alpha", "--n", "3",
                        "--p", "5/2", "--q", "10/3", "--alpha", "3/80")
    assert code == 0
    assert out == {"q_tilde": "34/9", "ratio": "77/45", "p_tilde_inf": "170/77"}


def test_exponents_bootstrap(capsys):
    code, out = run_cli(capsys, "exponents", "bootstrap")
    assert code == 0 and out["fixed_point"] == "3/20"
    code, out = run_cli(capsys, "exponents", "bootstrap", "--alpha", "1",
                        "--steps", "3")
    assert out["iterates"] == ["1", "8/25", "23/125", "98/625"]


def test_exponents_region_vertex(capsys):
    code, out = run_cli(capsys, "exponents", "region",
                        "--kind", "bilinear-restriction-conjecture", "--n", "3")
    assert code == 0
    verts = [tuple((v[0]["num"], v[0]["den"], v[1]["num"], v[1]["den"]))
             for v in out["vertices"]]
    assert (1, 2, 3, 5) in verts


def test_exponents_parse_error(capsys):
    code = cli.main(["exponents", "lemma-alpha", "--p", "5//2",
                     "--q", "10/3", "--alpha", "3/80"])
    assert code == cli.EXIT_USAGE


def test_exponents_whitney_check(capsys):
    code, out = run_cli(capsys, "exponents", "whitney-check", "--n", "3",
                        "--p", "2", "--p-tilde", "199/100", "--q", "2")
    assert code == 0 and out["feasible"] and out["epsilon"] == "2/199"


def test_config_parsing(tmp_path):
    path = tmp_path / "a.cfg"
    path.write_text(
        "command = sweep\nfamily = c1-squashed\nn = 3\np = 2\nq = 5/3\n"
        "scales = 1/4, 1/8, 1/16\nseed = 3\noutput_dir = out\n")
    cfg = cli.load_config(str(path))
    assert cfg.q_value == pytest.approx(5 / 3)
    assert cfg.scales == (0.25, 0.125, 0.0625)


def test_config_missing_seed(tmp_path):
    path = tmp_path / "a.cfg"
    path.write_text(
        "command = sweep\nfamily = c1-squashed\nn = 3\np = 2\nq = 5/3\n"
        "scales = 1/4, 1/8, 1/16\n")
    with pytest.raises(cli.ConfigError):
        cli.load_config(str(path))


def test_config_unknown_key(tmp_path):
    path = tmp_path / "a.cfg"
    path.write_text("command = sweep\nbogus = 1\n")
    with pytest.raises(cli.ConfigError):
        cli.load_config(str(path))


def test_malformed_config_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("command = sweep\nfamily = c1-squashed\n")
    code = cli.main(["sweep", "--config", str(path)])
    assert code == cli.EXIT_USAGE


def sweep_config(tmp_path, outdir, scales="1/4, 1/8, 1/16"):
    path = tmp_path / "c1.cfg"
    path.write_text(
        "command = sweep\nfamily = c1-squashed\nn = 3\np = 2\nq = 5/3\n"
        f"scales = {scales}\nseed = 7\noutput_dir = {outdir}\n")
    return str(path)


def test_sweep_writes_artifacts_and_passes(tmp_path, capsys):
    out1 = tmp_path / "run1"
    cfgp = sweep_config(tmp_path, out1)
    code, summary = run_cli(capsys, "sweep", "--config", cfgp)
    assert code == 0 and summary["pass"]
    csv_text = (out1 / "sweep.csv").read_text()
    assert csv_text.splitlines()[0] == "family,n,p,q,scale,ratio,grid_n,seed"
    assert len(csv_text.splitlines()) == 4
    record = json.loads((out1 / "run_record.json").read_text())
    assert set(record["artifacts"]) == {"summary.json", "sweep.csv"}
    assert record["verdicts"] == {"sweep": True}


def test_sweep_determinism(tmp_path, capsys):
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    cfgp = sweep_config(tmp_path, out1)
    assert cli.main(["sweep", "--config", cfgp]) == 0
    capsys.readouterr()
    assert cli.main(["sweep", "--config", cfgp, "--output-dir", str(out2)]) == 0
    capsys.readouterr()
    assert (out1 / "sweep.csv").read_bytes() == (out2 / "sweep.csv").read_bytes()
    assert (out1 / "summary.json").read_bytes() == (out2 / "summary.json").read_bytes()


def test_sweep_check_replay(tmp_path, capsys):
    out1 = tmp_path / "r1"
    cfgp = sweep_config(tmp_path, out1)
    code, first = run_cli(capsys, "sweep", "--config", cfgp)
    code, replay = run_cli(capsys, "sweep", "--config", cfgp, "--check")
    assert code == 0
    assert replay == first


def test_witness_command(capsys):
    code, out = run_cli(capsys, "witness", "--family", "c1-squashed",
                        "--n", "3", "--scale", "0.125")
    assert code == 0
    assert out["f"]["support_lo"][0] == pytest.approx(-0.5 - 0.125**2)
    assert out["g"]["support_lo"][0] >= 0.25


def test_verify_unknown_suite(capsys):
    code = cli.main(["verify", "--suite", "nonsense"])
    assert code == cli.EXIT_USAGE


def test_verify_lemmas_suite_shape(capsys):
    code, out = run_cli(capsys, "verify", "--suite", "lemmas")
    assert code == 0 and out["pass"]
    checks = out["suites"]["lemmas"]
    assert set(checks) == {"young", "quasi_orthogonality", "xr_est", "cz",
                           "xr_norm_monotone"}
    assert all(c["pass"] for c in checks.values())
    assert checks["quasi_orthogonality"]["worst"]["2.0"] <= 1 + 1e-6


def test_sweep_resource_guard_exit_code(tmp_path, capsys):
    path = tmp_path / "huge.cfg"
    path.write_text(
        "command = sweep\nfamily = c1-squashed\nn = 3\np = 2\nq = 5/3\n"
        "scales = 1/512, 1/1024, 1/2048\nseed = 1\n"
        f"output_dir = {tmp_path / 'o'}\n")
    code = cli.main(["sweep", "--config", str(path)])
    assert code == cli.EXIT_RESOURCE


def test_region_command_alias(capsys):
    code, out = run_cli(capsys, "region",
                        "--kind", "kakeya-bilinear-conjecture", "--n", "3")
    assert code == 0
    verts = [tuple((v[0]["num"], v[0]["den"], v[1]["num"], v[1]["den"]))
             for v in out["vertices"]]
    assert (1, 3, 1, 3) in verts
