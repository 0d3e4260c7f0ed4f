import json
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fcnls.cli_io import (
    MAGIC, emit_config, main, parse_config, atomic_write, snapshot_bytes, snapshot_read,
    snapshot_write,
)
from fcnls.errors import ConfigError, SnapshotError, ValidationError
from fcnls.spectral import Field, Grid

BASE = """\
# reference model
model.N = 2
model.s = 0.8
model.b = -0.1
model.alpha = 1
model.p = 3
grid.M = 64
grid.L = 8
"""


def config_file(tmp_path, extra=""):
    path = tmp_path / "run.cfg"
    path.write_text(BASE + extra)
    return str(path)


def test_parse_defaults_and_round_trip():
    cfg = parse_config(BASE)
    assert cfg.params.p == 3.0 and cfg.params.epsilon == -1
    assert cfg.grid == Grid(2, 64, 8.0)
    assert cfg.evolve["dt0"] is None
    assert cfg.sweep["scales"] == (0.5, 0.8, 0.9, 1.3, 1.5)
    again = parse_config(emit_config(cfg))
    assert again == cfg
    assert emit_config(again) == emit_config(cfg)


@pytest.mark.parametrize("extra,code,line", [
    ("grid.bogus = 1\n", "unknown_key", 9),
    ("ground.max_iter = sixty\n", "type_mismatch", 9),
    ("grid.M = 32\n", "duplicate_key", 9),
    ("just words\n", "syntax", 9),
    ("evolve.adaptive = maybe\n", "type_mismatch", 9),
    ("sweep.constant = other\n", "type_mismatch", 9),
])
def test_config_errors_carry_line_numbers(extra, code, line):
    with pytest.raises(ConfigError) as e:
        parse_config(BASE + extra)
    assert (e.value.code, e.value.line) == (code, line)


def test_validation_errors_point_at_the_key():
    with pytest.raises(ConfigError) as e:
        parse_config(BASE.replace("model.b = -0.1", "model.b = 0.1"))
    assert (e.value.code, e.value.line) == ("b_nonnegative", 4)
    with pytest.raises(ConfigError) as e:
        parse_config(BASE.replace("grid.M = 64", "grid.M = 100"))
    assert (e.value.code, e.value.line) == ("bad_resolution", 7)
    text = BASE.replace("model.p = 3\n", "")
    with pytest.raises(ConfigError) as e:
        parse_config(text)
    assert (e.value.code, e.value.line) == ("missing_key", len(text.splitlines()) + 1)
    assert isinstance(e.value, ValidationError)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([2, 3]), st.sampled_from([16, 32]), st.floats(0.5, 50.0),
       st.booleans(), st.integers(0, 2 ** 32 - 1))
def test_snapshot_round_trip_is_bit_exact(tmp_path_factory, dim, M, L, offset, seed):
    g = Grid(dim, M, L, offset)
    rng = np.random.default_rng(seed)
    u = Field(g, rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape))
    path = tmp_path_factory.mktemp("snap") / "u.snap"
    snapshot_write(u, path)
    v = snapshot_read(path, dim)
    assert v.grid == g
    assert v.values.tobytes() == u.values.tobytes()
    assert path.read_bytes() == snapshot_bytes(u)


def test_snapshot_errors(tmp_path):
    g = Grid(2, 16, 4.0)
    u = Field(g, np.ones(g.shape, dtype=complex))
    data = snapshot_bytes(u)
    assert data.startswith(MAGIC)
    bad = tmp_path / "bad.snap"
    bad.write_bytes(b"NOTSNP" + data[6:])
    with pytest.raises(SnapshotError) as e:
        snapshot_read(bad)
    assert e.value.code == "bad_magic"
    short = tmp_path / "short.snap"
    short.write_bytes(data[:-5])
    with pytest.raises(SnapshotError) as e:
        snapshot_read(short)
    assert e.value.code == "truncated"
    assert str(len(data)) in str(e.value)
    good = tmp_path / "good.snap"
    good.write_bytes(data)
    with pytest.raises(SnapshotError) as e:
        snapshot_read(good, dim=3)
    assert e.value.code == "dimension_mismatch"
    nan = Field(g, np.full(g.shape, np.nan, dtype=complex))
    with pytest.raises(ValidationError):
        snapshot_write(nan, tmp_path / "nan.snap")
    assert not (tmp_path / "nan.snap").exists()


def test_atomic_write_leaves_no_temporaries(tmp_path):
    target = tmp_path / "sub" / "a.txt"
    atomic_write(target, "one")
    atomic_write(target, b"two")
    assert target.read_bytes() == b"two"
    assert os.listdir(target.parent) == ["a.txt"]


def test_cli_check_and_ground(tmp_path, capsys):
    cfg = config_file(tmp_path)
    out = tmp_path / "out"
    assert main(["check", "--config", cfg, "--out", str(out)]) == 0
    report = json.loads((out / "check.json").read_text())
    assert report["exponents"]["s_c"] == pytest.approx(0.4)
    assert "s_c" in capsys.readouterr().err
    assert main(["ground", "--config", cfg, "--out", str(out), "--quiet"]) == 0
    phi = snapshot_read(out / "ground.snap", 2)
    meta = json.loads((out / "ground.json").read_text())
    assert meta["residual"] < 1e-8
    assert np.sum(np.abs(phi.values) ** 2) * phi.grid.h ** 2 == pytest.approx(meta["mass"])


def test_cli_outputs_are_deterministic(tmp_path):
    cfg = config_file(tmp_path, "evolve.t_end = 0.05\nevolve.dt0 = 0.01\n")
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["evolve", "--config", cfg, "--out", str(a), "--quiet"]) == 0
    assert main(["evolve", "--config", cfg, "--out", str(b), "--quiet"]) == 0
    assert (a / "series.csv").read_bytes() == (b / "series.csv").read_bytes()
    assert (a / "final.snap").read_bytes() == (b / "final.snap").read_bytes()
    assert json.loads((a / "outcome.json").read_text())["status"] == "Completed"


def test_cli_exit_codes(tmp_path):
    out = str(tmp_path / "o")
    assert main(["bogus", "--config", config_file(tmp_path)]) == 2
    assert main(["check", "--config", str(tmp_path / "missing.cfg"), "--out", out]) == 2
    bad = config_file(tmp_path, "grid.bogus = 1\n")
    assert main(["check", "--config", bad, "--out", out, "--quiet"]) == 2
    capped = config_file(tmp_path, "ground.max_iter = 3\n")
    assert main(["ground", "--config", capped, "--out", out, "--quiet"]) == 4
    # a blow-up prediction cut short by t_end is a mismatch
    short = config_file(tmp_path, "sweep.scales = 1.3\nevolve.t_end = 0.02\n"
                                  "evolve.dt0 = 0.01\n")
    assert main(["dichotomy", "--config", short, "--out", out, "--quiet"]) == 3
    assert "MISMATCH" in (tmp_path / "o" / "dichotomy.csv").read_text()
    sweep = config_file(tmp_path, "sweep.n_samples = 5\n")
    assert main(["sweep", "--config", sweep, "--out", out, "--quiet"]) == 0
