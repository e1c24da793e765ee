from pathlib import Path

import numpy as np
import pytest

from dgadjoint import __version__
from dgadjoint.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_NAN, EXIT_OK, main
from dgadjoint.config import ConfigError, RunConfig, load_config, parse_config

DEFAULT_CONFIG = Path(__file__).resolve().parents[1] / "configs" / "advection.cfg"


@pytest.fixture
def outdir(tmp_path, monkeypatch):
    monkeypatch.setenv("ADG_OUTPUT_DIR", str(tmp_path / "out"))
    return tmp_path / "out"


def write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_parse_roundtrip_of_resolved_lines():
    cfg = parse_config("mesh.K = 5\nmodel.kind = acoustic\nconvergence.levels = 4, 8\n")
    again = parse_config("\n".join(cfg.resolved_lines()))
    assert again == cfg


def test_defaults_are_valid():
    assert load_config(None) == RunConfig()


@pytest.mark.parametrize("text,key", [
    ("mesh.K = 0", "mesh.K"),
    ("mesh.K = two", "mesh.K"),
    ("basis.N = 0", "basis.N"),
    ("basis.quadrature = gauss", "basis.quadrature"),
    ("model.kind = euler", "model.kind"),
    ("time.T = -1", "time.T"),
    ("verify.epsilons = 1e-4, 1e-3", "verify.epsilons"),
    ("storage.policy = some", "storage.policy"),
    ("mesh.Q = 1", "mesh.Q"),
])
def test_invalid_configs_name_the_key(text, key):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.key == key


def test_boundary_cost_rejected_outside_advection():
    cfg = parse_config("model.kind = acoustic\ncost.boundary_weight = 1.0")
    with pytest.raises(ConfigError):
        cfg.problem()


def test_cli_config_error_exit_code(tmp_path, outdir, capsys):
    assert main(["gradient", "--config", write(tmp_path, "mesh.K = 0\n")]) == EXIT_CONFIG
    assert "mesh.K" in capsys.readouterr().err
    assert main(["forward", "--config", str(tmp_path / "missing.cfg")]) == EXIT_CONFIG


def test_cli_verify_default_config_passes(outdir, capsys):
    assert main(["verify", "--config", str(DEFAULT_CONFIG)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 5
    summary = (outdir / "verify_summary.txt").read_text()
    assert summary.startswith(f"# dgadjoint {__version__}")


def test_cli_gradient_is_byte_identical(tmp_path, monkeypatch):
    cfg = write(tmp_path, "mesh.K = 4\nbasis.N = 2\ntime.n_steps = 20\n")
    blobs = []
    for run in ("a", "b"):
        monkeypatch.setenv("ADG_OUTPUT_DIR", str(tmp_path / run))
        assert main(["gradient", "--config", cfg]) == EXIT_OK
        blobs.append([(tmp_path / run / f).read_bytes() for f in ("gradient.csv", "gradient_summary.csv")])
    assert blobs[0] == blobs[1]


def test_cli_outputs_carry_resolved_config(tmp_path, outdir):
    cfg = write(tmp_path, "model.kind = maxwell1d\nmesh.K = 3\nbasis.N = 2\ntime.n_steps = 12\n")
    assert main(["forward", "--config", cfg]) == EXIT_OK
    text = (outdir / "forward.csv").read_text()
    assert f"# dgadjoint {__version__}" in text
    assert "# model.kind = maxwell1d" in text and "# mesh.K = 3" in text
    header = [ln for ln in text.splitlines() if not ln.startswith("#")][0]
    assert header == "t,element,node,x,H,E"


def test_cli_verify_single_check_and_checkpoint_policy(tmp_path, outdir):
    cfg = write(tmp_path, "model.kind = acoustic\nmesh.K = 4\nbasis.N = 2\nstorage.policy = uniform-checkpoint\n"
                          "basis.quadrature = over-integration\n")
    assert main(["verify", "weakstrong", "--config", cfg]) == EXIT_OK
    assert main(["verify", "adjoint", "--config", cfg]) == EXIT_OK


def test_cli_convergence(tmp_path, outdir):
    cfg = write(tmp_path, "model.kind = advection\n")
    assert main(["convergence", "--config", cfg, "--orders", "1", "--levels", "8", "16", "32"]) == EXIT_OK
    assert (outdir / "convergence.csv").exists()


def test_cli_convergence_failure_exit_code(tmp_path, outdir):
    # two coarse levels at N = 3 cannot show the asymptotic rate
    cfg = write(tmp_path, "model.kind = advection\n")
    assert main(["convergence", "--config", cfg, "--orders", "3", "--levels", "1", "2"]) == EXIT_FAIL


def test_cli_nan_exit_code(tmp_path, outdir):
    cfg = write(tmp_path, "time.T = 100000\ntime.n_steps = 20\n")
    with np.errstate(over="ignore", invalid="ignore"):
        assert main(["forward", "--config", cfg]) == EXIT_NAN
