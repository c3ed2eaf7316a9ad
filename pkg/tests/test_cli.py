import json

import pytest

from rdfem.cli import build_run_config, main
from rdfem.mesh import load_mesh


def test_turing_subcommand_json(tmp_path, capsys):
    out = tmp_path / "turing.json"
    code = main(["turing", "--a", "0.1", "--b", "0.9", "--d", "10", "--gamma", "29",
                 "-o", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["k2_minus"] == pytest.approx(5.8)
    assert payload["k2_plus"] == pytest.approx(14.5)
    assert [1, 0] in payload["unstable_modes"]


def test_simulate_missing_config_exits_1(tmp_path, capsys):
    code = main(["simulate", "--config", str(tmp_path / "missing.cfg")])
    assert code == 1
    assert "missing.cfg" in capsys.readouterr().err


def test_simulate_tiny_run(tmp_path):
    out = tmp_path / "run"
    code = main([
        "simulate", "--mesh-n", "4", "--scheme", "be", "--tau", "0.01",
        "--method", "picard", "--t-end", "0.05", "--seed", "3", "--out", str(out),
    ])
    assert code == 0
    assert (out / "trace.csv").exists()
    assert (out / "summary.json").exists()


def test_simulate_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    out = tmp_path / "artifacts"
    cfg.write_text(
        "mesh_n = 4\nscheme = be\ntau = 0.01\nmethod = picard\n"
        "t_end = 0.5\nseed = 9\n"
    )
    code = main(["simulate", "--config", str(cfg), "--t-end", "0.02",
                 "--out", str(out)])
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["seed"] == 9
    assert summary["end_time"] == pytest.approx(0.02)  # flag wins over file


def test_eoc_subcommand_writes_csv(tmp_path):
    code = main(["eoc", "--scheme", "cn", "--levels", "1..2", "--out", str(tmp_path)])
    assert code == 0
    lines = [l for l in (tmp_path / "eoc.csv").read_text().splitlines()
             if not l.startswith("#")]
    assert lines[0] == "level,tau,n,E_u,E_v,alpha_u,alpha_v"
    assert len(lines) == 3


def test_mesh_gen_and_check(tmp_path, capsys):
    path = tmp_path / "m.mesh"
    assert main(["mesh", "gen", "--kind", "square", "--n", "3", "-o", str(path)]) == 0
    mesh = load_mesh(path)
    assert mesh.n_vertices == 16
    assert main(["mesh", "check", str(path)]) == 0
    assert "vertices=16" in capsys.readouterr().out


def test_mesh_check_rejects_bad_file(tmp_path, capsys):
    path = tmp_path / "bad.mesh"
    path.write_text("2 3 1\n0 0\n1 0\n0 1\n0 1 5\n")
    assert main(["mesh", "check", str(path)]) == 1


def test_contraction_subcommand(tmp_path, capsys):
    out = tmp_path / "contraction.csv"
    code = main(["contraction", "--tau-list", "1e-3", "--n", "4", "--out", str(out)])
    assert code == 0
    assert "max_ratio" in out.read_text().splitlines()[2] or "tau,max_ratio" in out.read_text()


def test_compare_imex_tiny(tmp_path):
    out = tmp_path / "cmp"
    code = main([
        "compare-imex", "--mesh-n", "4", "--scheme", "be", "--tau", "0.01",
        "--t-end", "0.03", "--schemes", "be", "--variants", "imex,picard",
        "--out", str(out),
    ])
    assert code == 0
    payload = json.loads((out / "imex_comparison.json").read_text())
    assert len(payload["runs"]) == 2


def test_unknown_config_key_rejected():
    with pytest.raises(ValueError):
        build_run_config({"definitely_not_a_key": "1"})


def test_build_run_config_types():
    cfg = build_run_config({"tau": "0.02", "scheme": "cnb5", "mesh_n": "12",
                            "sources": "true", "count": "2", "mode": "fixed"})
    assert cfg.scheme.warmup_steps == 5
    assert cfg.scheme.tau == 0.02
    assert cfg.mesh_n == 12
    assert cfg.sources_on is True
    assert cfg.policy.count == 2
