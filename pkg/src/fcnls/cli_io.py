"""Configuration files, field snapshots, reports and the ``fcnls`` command line.

Config text is line oriented: ``section.key = value``; ``#`` starts a comment.
Every key except the ``model`` parameters has a default (see ``fcnls --help``).
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import struct
import sys
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, FCNLSError, NumericalError, SnapshotError, ValidationError
from .model import ProblemParams, derive, regime, validate
from .spectral import Field, Grid

__all__ = [
    "RunConfig", "SCHEMA", "parse_config", "emit_config", "snapshot_write", "snapshot_read",
    "atomic_write", "write_json", "save_ground_state", "main",
]

log = logging.getLogger("fcnls")

MAGIC = b"FCNLS1"
REQUIRED = object()

# section -> key -> (type tag, default)
SCHEMA = {
    "model": {"N": ("int", REQUIRED), "s": ("float", REQUIRED), "b": ("float", REQUIRED),
              "alpha": ("float", REQUIRED), "p": ("float", REQUIRED), "epsilon": ("int", -1)},
    "grid": {"M": ("int", 128), "L": ("float", 8.0), "offset": ("bool", True)},
    "ground": {"tol": ("float", 1e-9), "max_iter": ("int", 2000), "auto_box": ("bool", False)},
    "evolve": {"t_end": ("float", 2.0), "dt0": ("float?", None), "dt_min": ("float", 1e-6),
               "blowup_grad_factor": ("float", 10.0), "blowup_linf_factor": ("float", 20.0),
               "record_every": ("int", 1), "virial_R": ("float?", None),
               "energy_tol": ("float", 1e-6), "adaptive": ("bool", True),
               "dealias": ("bool", False), "scale": ("float", 0.9)},
    "virial": {"R": ("float", 3.0), "eps_hat": ("float", 0.01), "c1": ("float", 1.0),
               "c2": ("float", 1.0), "scale": ("float", 1.3)},
    "sweep": {"scales": ("floats", (0.5, 0.8, 0.9, 1.3, 1.5)), "n_samples": ("int", 200),
              "seed": ("int", 7), "constant": ("str", "quotient")},
    "output": {"dir": ("str", "out")},
}

# validation error code -> offending model key
_CODE_KEY = {"dimension_too_small": "N", "s_out_of_range": "s", "epsilon_invalid": "epsilon",
             "p_le_one": "p", "b_nonnegative": "b", "alpha_nonpositive": "alpha",
             "alpha_ge_N": "alpha", "N_plus_b_le_s": "b",
             "2s_plus_2b_plus_alpha_nonpositive": "b", "N_plus_alpha_plus_2b_le_2s": "alpha",
             "nonfinite_parameter": "s"}


@dataclass(frozen=True)
class RunConfig:
    params: ProblemParams
    grid: Grid
    ground: dict
    evolve: dict
    virial: dict
    sweep: dict
    output_dir: str

    def evolution_config(self, virial_R=None):
        from .evolution import EvolutionConfig
        kw = {k: v for k, v in self.evolve.items() if k != "scale"}
        if virial_R is not None:
            kw["virial_R"] = virial_R
        return EvolutionConfig(**kw)

    def values(self) -> dict:
        out = {"model": asdict(self.params),
               "grid": {"M": self.grid.M, "L": self.grid.L, "offset": self.grid.offset},
               "ground": dict(self.ground), "evolve": dict(self.evolve),
               "virial": dict(self.virial), "sweep": dict(self.sweep),
               "output": {"dir": self.output_dir}}
        return out


def _convert(tag: str, text: str):
    t = text.strip()
    if tag == "int":
        return int(t)
    if tag == "float":
        v = float(t)
        if not math.isfinite(v):
            raise ValueError("not finite")
        return v
    if tag == "float?":
        return None if t.lower() == "none" else _convert("float", t)
    if tag == "bool":
        if t.lower() in ("true", "yes", "1"):
            return True
        if t.lower() in ("false", "no", "0"):
            return False
        raise ValueError("expected true/false")
    if tag == "floats":
        return tuple(_convert("float", x) for x in t.split(",") if x.strip())
    if tag == "str":
        if not t:
            raise ValueError("empty string")
        return t
    raise AssertionError(tag)


def _format(tag: str, v) -> str:
    if v is None:
        return "none"
    if tag == "bool":
        return "true" if v else "false"
    if tag == "float":
        return repr(float(v))
    if tag == "float?":
        return repr(float(v))
    if tag == "floats":
        return ", ".join(repr(float(x)) for x in v)
    return str(v)


def parse_config(text: str) -> RunConfig:
    values = {sec: {} for sec in SCHEMA}
    where = {}
    lines = text.splitlines()
    for no, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("syntax", f"expected 'section.key = value', got {raw!r}", no)
        lhs, rhs = (x.strip() for x in line.split("=", 1))
        sec, dot, key = lhs.partition(".")
        if not dot or sec not in SCHEMA or key not in SCHEMA[sec]:
            raise ConfigError("unknown_key", repr(lhs), no)
        if key in values[sec]:
            raise ConfigError("duplicate_key", repr(lhs), no)
        tag = SCHEMA[sec][key][0]
        try:
            values[sec][key] = _convert(tag, rhs)
        except ValueError as exc:
            raise ConfigError("type_mismatch", f"{lhs}: expected {tag}, got {rhs!r} ({exc})", no)
        where[(sec, key)] = no
    for sec, keys in SCHEMA.items():
        for key, (_, default) in keys.items():
            if key not in values[sec]:
                if default is REQUIRED:
                    raise ConfigError("missing_key", f"{sec}.{key} is required", len(lines) + 1)
                values[sec][key] = default
    params = ProblemParams(**values["model"])
    try:
        validate(params)
    except ValidationError as exc:
        key = _CODE_KEY.get(exc.code, "N")
        raise ConfigError(exc.code, str(exc), where.get(("model", key), 0)) from None
    try:
        grid = Grid(params.N, values["grid"]["M"], values["grid"]["L"], values["grid"]["offset"])
    except ValidationError as exc:
        key = {"bad_resolution": "M", "bad_box": "L"}.get(exc.code, "M")
        raise ConfigError(exc.code, str(exc), where.get(("grid", key), 0)) from None
    if values["sweep"]["constant"] not in ("quotient", "formula"):
        raise ConfigError("type_mismatch", "sweep.constant must be quotient or formula",
                          where.get(("sweep", "constant"), 0))
    return RunConfig(params, grid, values["ground"], values["evolve"], values["virial"],
                     values["sweep"], values["output"]["dir"])


def emit_config(cfg: RunConfig) -> str:
    vals = cfg.values()
    out = []
    for sec, keys in SCHEMA.items():
        for key, (tag, _) in keys.items():
            out.append(f"{sec}.{key} = {_format(tag, vals[sec][key])}")
        out.append("")
    return "\n".join(out)


# ------------------------------------------------------------------ files

def atomic_write(path, data) -> None:
    """Write bytes or text to ``path`` via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    raw = data.encode("utf-8") if isinstance(data, str) else bytes(data)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(raw)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj) -> None:
    atomic_write(path, json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(type(o).__name__)


def snapshot_bytes(u: Field) -> bytes:
    g = u.grid
    head = MAGIC + struct.pack("<I", g.dim) + struct.pack(f"<{g.dim}I", *([g.M] * g.dim))
    head += struct.pack("<dB", g.L, int(g.offset))
    body = np.ascontiguousarray(u.values, dtype="<c16").tobytes(order="C")
    return head + body


def snapshot_write(u: Field, path) -> None:
    if not np.all(np.isfinite(u.values)):
        raise ValidationError("nonfinite_field", "refusing to write non-finite samples")
    atomic_write(path, snapshot_bytes(u))


def snapshot_read(path, dim: int | None = None) -> Field:
    data = Path(path).read_bytes()
    if data[:6] != MAGIC:
        raise SnapshotError("bad_magic", f"{path}: header {data[:6]!r}")
    pos = 6
    if len(data) < pos + 4:
        raise SnapshotError("truncated", f"expected at least {pos + 4} bytes, got {len(data)}")
    (d,) = struct.unpack_from("<I", data, pos)
    pos += 4
    if d not in (2, 3):
        raise SnapshotError("dimension_mismatch", f"dim={d} in file")
    if dim is not None and d != dim:
        raise SnapshotError("dimension_mismatch", f"file dim {d}, expected {dim}")
    need = pos + 4 * d + 9
    if len(data) < need:
        raise SnapshotError("truncated", f"expected at least {need} bytes, got {len(data)}")
    ms = struct.unpack_from(f"<{d}I", data, pos)
    pos += 4 * d
    if len(set(ms)) != 1:
        raise SnapshotError("dimension_mismatch", f"unequal axis lengths {ms}")
    L, off = struct.unpack_from("<dB", data, pos)
    pos += 9
    M = ms[0]
    expected = pos + 16 * M ** d
    if len(data) != expected:
        raise SnapshotError("truncated", f"expected {expected} bytes, got {len(data)}")
    grid = Grid(d, M, L, bool(off))
    vals = np.frombuffer(data, dtype="<c16", offset=pos).reshape(grid.shape).astype(complex)
    return Field(grid, vals)


def save_ground_state(gs, params: ProblemParams, directory, stem: str = "ground") -> dict:
    """Snapshot plus a JSON sidecar with parameters, residual and constants."""
    directory = Path(directory)
    snapshot_write(Field(gs.phi.grid, gs.phi.values.astype(complex)), directory / f"{stem}.snap")
    g = gs.phi.grid
    meta = {"params": asdict(params), "grid": {"dim": g.dim, "M": g.M, "L": g.L,
                                               "offset": g.offset},
            "residual": gs.residual, "iterations": gs.iterations, "mass": gs.mass_phi,
            "grad_s_sq": gs.grad_s_sq_phi, "nonlocal": gs.nonlocal_phi,
            "c_gn_formula": gs.c_gn_formula, "c_gn_quotient": gs.c_gn_quotient}
    write_json(directory / f"{stem}.json", meta)
    return meta


# ------------------------------------------------------------------ command line

EXIT_OK, EXIT_VALIDATION, EXIT_MISMATCH, EXIT_NUMERICAL = 0, 2, 3, 4


def _defaults_help() -> str:
    rows = []
    for sec, keys in SCHEMA.items():
        for key, (tag, default) in keys.items():
            d = "required" if default is REQUIRED else _format(tag, default)
            rows.append(f"  {sec}.{key} ({tag}) = {d}")
    return "config keys and defaults:\n" + "\n".join(rows)


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fcnls", formatter_class=argparse.RawDescriptionHelpFormatter,
        description="Ground states, evolution and threshold experiments.",
        epilog=_defaults_help() + "\n\nexit codes: 0 ok, 2 validation, 3 mismatch, 4 numerical")
    ap.add_argument("command", choices=["check", "ground", "gn", "evolve", "virial",
                                        "dichotomy", "sweep"])
    ap.add_argument("--config", required=True, help="config file (section.key = value)")
    ap.add_argument("--out", help="output directory (overrides output.dir)")
    ap.add_argument("--quiet", action="store_true", help="only errors on stderr")
    return ap


def _ground(cfg: RunConfig):
    from .groundstate import solve
    gs = solve(cfg.params, cfg.grid, tol=cfg.ground["tol"], max_iter=cfg.ground["max_iter"],
               auto_box=cfg.ground["auto_box"])
    log.info("ground state: %d iterations, residual %.3e, mass %.10g",
             gs.iterations, gs.residual, gs.mass_phi)
    return gs


def _run(cmd: str, cfg: RunConfig, out: Path) -> int:
    params = cfg.params
    if cmd == "check":
        d, f = derive(params), regime(params)
        report = {"params": asdict(params), "exponents": asdict(d), "regime": asdict(f)}
        log.info("parameters valid")
        for k, v in asdict(d).items():
            log.info("  %s = %.12g", k, v)
        for k, v in asdict(f).items():
            log.info("  %s = %s", k, v)
        write_json(out / "check.json", report)
        return EXIT_OK

    gs = _ground(cfg)
    if cmd == "ground":
        save_ground_state(gs, params, out)
        return EXIT_OK
    if cmd == "gn":
        gap = abs(gs.c_gn_quotient / gs.c_gn_formula - 1)
        log.info("C_GN formula  = %.12g", gs.c_gn_formula)
        log.info("C_GN quotient = %.12g", gs.c_gn_quotient)
        log.info("relative gap  = %.3e", gap)
        write_json(out / "gn.json", {"c_gn_formula": gs.c_gn_formula,
                                     "c_gn_quotient": gs.c_gn_quotient, "relative_gap": gap})
        return EXIT_OK
    if cmd == "evolve":
        from .evolution import evolve
        run = evolve(gs.phi.scaled(cfg.evolve["scale"]), params, cfg.evolution_config())
        atomic_write(out / "series.csv", run.series.to_csv())
        snapshot_write(run.final, out / "final.snap")
        write_json(out / "outcome.json", {"status": run.status.value, "t": run.t,
                                          "steps": run.steps, "rejected": run.rejected,
                                          **run.metadata})
        log.info("%s at t=%.6g", run.status.value, run.t)
        return EXIT_OK
    if cmd == "virial":
        from .evolution import evolve
        from .virial import variance_report_from_series
        v = cfg.virial
        u0 = gs.phi.scaled(v["scale"])
        run = evolve(u0, params, cfg.evolution_config(virial_R=v["R"]))
        rep = variance_report_from_series(run.series, params, v["R"], u0, eps_hat=v["eps_hat"],
                                          c1=v["c1"], c2=v["c2"])
        atomic_write(out / "variance.csv", rep.to_csv())
        log.info("%s at t=%.6g, %d rows", run.status.value, run.t, len(rep.t))
        return EXIT_OK
    if cmd == "dichotomy":
        from .experiments import dichotomy_sweep
        rep = dichotomy_sweep(params, cfg.sweep["scales"], cfg.evolution_config(), gs)
        atomic_write(out / "dichotomy.csv", rep.to_csv())
        for r in rep.rows:
            log.info("scale %-6g predicted %-12s observed %-15s %s", r.scale,
                     r.predicted.label, r.observed, r.flag)
        if rep.mismatches:
            log.error("%d MISMATCH row(s)", rep.mismatches)
            return EXIT_MISMATCH
        return EXIT_OK
    if cmd == "sweep":
        from .experiments import gn_sweep
        sw = cfg.sweep
        worst = gn_sweep(params, sw["n_samples"], sw["seed"], gs, sw["constant"])
        atomic_write(out / "gn_sweep.csv", "n_samples,seed,constant,max_ratio\n"
                     f"{sw['n_samples']},{sw['seed']},{sw['constant']},{worst!r}\n")
        log.info("max ratio over %d fields: %.9f", sw["n_samples"], worst)
        if worst > 1 + 1e-4:
            log.error("MISMATCH: ratio exceeds the sharp constant")
            return EXIT_MISMATCH
        return EXIT_OK
    raise AssertionError(cmd)


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(message)s"))
    root = logging.getLogger("fcnls")
    root.handlers[:] = [handler]
    root.setLevel(logging.ERROR if args.quiet else logging.INFO)
    root.propagate = False
    try:
        cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
        out = Path(args.out or cfg.output_dir)
        return _run(args.command, cfg, out)
    except ConfigError as exc:
        log.error("config error (%s): %s", exc.code, exc)
        return EXIT_VALIDATION
    except (ValidationError, SnapshotError) as exc:
        log.error("validation error: %s", exc)
        return EXIT_VALIDATION
    except OSError as exc:
        log.error("i/o error: %s", exc)
        return EXIT_VALIDATION
    except NumericalError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except FCNLSError as exc:
        log.error("error: %s", exc)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
