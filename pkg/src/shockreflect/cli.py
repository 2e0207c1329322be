"""Command-line front end: ``hugoniot``, ``solve``, ``verify``, ``sweep``.

Configuration is a flat TOML file (dotted keys or one level of tables).
Every key is validated before any computation; unknown keys are errors.

Exit codes: 0 ok, 1 solver failure or failed verification, 2 physics
precondition, 3 output integrity, 64 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import numpy as np

from .ahead import AheadField
from .eos import BarotropicEos, FluidState
from .errors import ConfigError, DomainError, IntegrityError, PreconditionError, SolverError
from .rankine import residual_J, solve_reflection_point
from .solver import SolverConfig, solve
from .verify import Thresholds, uniqueness_probe, verify

EXIT_OK, EXIT_SOLVER, EXIT_PRECONDITION, EXIT_INTEGRITY, EXIT_CONFIG = 0, 1, 2, 3, 64

# key -> (type, default, check); a default of None means "derived when absent"
_SCHEMA = {
    "eos.kind": (str, "polytropic", lambda v: v in ("polytropic", "isothermal")),
    "eos.K": (float, 0.5, lambda v: v > 0),
    "eos.gamma": (float, 2.0, lambda v: v >= 1),
    "ahead.kind": (str, "constant", lambda v: v in ("constant", "simple_wave")),
    "ahead.rho": (float, 1.0, lambda v: v > 0),
    "ahead.w": (float, -0.5, math.isfinite),
    "ahead.delta": (float, 0.05, math.isfinite),
    "ahead.L": (float, 1.0, lambda v: v > 0),
    "ahead.T": (float, None, lambda v: v > 0),
    "domain.epsilon": (float, 0.05, lambda v: v > 0),
    "grid.n_sigma": (int, 64, lambda v: v >= 8 and v % 2 == 0),
    "grid.n_tau": (int, 64, lambda v: v >= 8 and v % 2 == 0),
    "solver.tol_value": (float, 1e-11, lambda v: v > 0),
    "solver.tol_norm": (float, 1e-8, lambda v: v > 0),
    "solver.max_iter": (int, 200, lambda v: v >= 1),
    "verify.euler_residual_max": (float, 1e-3, lambda v: v > 0),
    "verify.euler_order_min": (float, 1.5, math.isfinite),
    "verify.J_residual_max": (float, 1e-9, lambda v: v > 0),
    "verify.speed_residual_max": (float, 1e-7, lambda v: v > 0),
    "verify.jacobian_origin_rel": (float, 0.05, lambda v: v > 0),
    "verify.asymptotic_ratio_min": (float, 0.25, lambda v: v > 0),
    "verify.asymptotic_ratio_max": (float, 4.0, lambda v: v > 0),
    "verify.uniqueness_factor": (float, 10.0, lambda v: v > 0),
    "verify.asymptotic": (bool, True, lambda v: True),
    "verify.uniqueness": (bool, True, lambda v: True),
    "output.dir": (str, "out", lambda v: len(v) > 0),
}


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


@dataclass(frozen=True)
class RunConfig:
    """Validated flat configuration; ``values`` holds only keys given explicitly."""

    values: tuple

    @classmethod
    def from_mapping(cls, raw: dict) -> "RunConfig":
        flat = _flatten(raw)
        clean = {}
        for key, val in flat.items():
            if key not in _SCHEMA:
                raise ConfigError(f"unknown config key {key!r}")
            typ, _, check = _SCHEMA[key]
            if typ is float and isinstance(val, int) and not isinstance(val, bool):
                val = float(val)
            if typ is not bool and isinstance(val, bool) or not isinstance(val, typ):
                raise ConfigError(f"config key {key!r} must be of type {typ.__name__}")
            if not check(val):
                raise ConfigError(f"config key {key!r} out of range: {val!r}")
            clean[key] = val
        if clean.get("eos.kind", "polytropic") == "isothermal" and clean.get("eos.gamma", 1.0) != 1.0:
            raise ConfigError("config key 'eos.gamma' must be 1 for an isothermal eos")
        if clean.get("eos.kind", "polytropic") == "polytropic" and clean.get("eos.gamma", 2.0) <= 1.0:
            raise ConfigError("config key 'eos.gamma' must exceed 1 for a polytropic eos")
        return cls(tuple(sorted(clean.items())))

    @classmethod
    def from_toml(cls, text: str) -> "RunConfig":
        try:
            raw = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config parse error: {exc}") from exc
        return cls.from_mapping(raw)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        return cls.from_toml(text)

    def __getitem__(self, key):
        given = dict(self.values)
        if key in given:
            return given[key]
        return _SCHEMA[key][1]

    def echo(self) -> dict:
        return dict(self.values)

    def with_epsilon(self, eps: float) -> "RunConfig":
        d = dict(self.values)
        d["domain.epsilon"] = float(eps)
        return RunConfig.from_mapping(d)

    # builders
    def eos(self) -> BarotropicEos:
        kind = self["eos.kind"]
        gamma = self["eos.gamma"] if "eos.gamma" in dict(self.values) else (1.0 if kind == "isothermal" else 2.0)
        return BarotropicEos(kind, self["eos.K"], gamma)

    def horizon(self, refl) -> float:
        T = self["ahead.T"]
        return T if T is not None else 2.0 * self["domain.epsilon"] * (1.0 + refl.a) / refl.eta0

    def ahead(self, eos=None):
        """``(AheadField, ReflectionPointData)`` with beta0' filled in."""
        eos = eos or self.eos()
        base = solve_reflection_point(eos, FluidState(self["ahead.rho"], self["ahead.w"]))
        T = self.horizon(base)
        if self["ahead.kind"] == "constant":
            field = AheadField.constant(eos, self["ahead.rho"], self["ahead.w"], T)
        else:
            field = AheadField.simple_wave(eos, self["ahead.rho"], self["ahead.w"], self["ahead.delta"], self["ahead.L"], T)
        return field, field.reflection_point()

    def solver(self) -> SolverConfig:
        return SolverConfig(
            epsilon=self["domain.epsilon"],
            n_sigma=self["grid.n_sigma"],
            n_tau=self["grid.n_tau"],
            tol_value=self["solver.tol_value"],
            tol_norm=self["solver.tol_norm"],
            max_iter=self["solver.max_iter"],
        )

    def thresholds(self) -> Thresholds:
        return Thresholds(**{f: self[f"verify.{f}"] for f in Thresholds.__dataclass_fields__})


# ---------------------------------------------------------------------------
# output helpers


def _num(x) -> str:
    return repr(float(x))


def _csv_bytes(header, rows) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(v) for v in row])
    return buf.getvalue().encode()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _error_json(exc) -> dict:
    d = {"error": type(exc).__name__, "message": str(exc)}
    it = getattr(exc, "iteration", None)
    if it is not None:
        d["iteration"] = it
    return d


def shock_table(sol) -> bytes:
    sh, spec = sol.shock, sol.spec
    J = residual_J(sol.eos, sh.alpha_plus, sh.beta_plus, sh.alpha_minus, sh.beta_minus)
    rows = zip(sh.v, spec.a * sh.v, sh.t, sh.x, sh.V, sh.Gamma, J)
    return _csv_bytes(["v", "u", "t", "x", "V", "Gamma", "J_residual"], rows)


def field_table(sol) -> bytes:
    spec = sol.spec
    S, Tt = np.meshgrid(spec.sigma, spec.tau, indexing="ij")
    cols = [S, Tt, spec.u, spec.v, sol.time.t, sol.state.x, sol.inv.alpha, sol.inv.beta, sol.rho, sol.w]
    rows = zip(*(c.ravel() for c in cols))
    return _csv_bytes(["sigma", "tau", "u", "v", "t", "x", "alpha", "beta", "rho", "w"], rows)


# ---------------------------------------------------------------------------
# commands


def cmd_hugoniot(cfg: RunConfig, out=None) -> int:
    eos = cfg.eos()
    _, refl = cfg.ahead(eos)
    m1, m2 = refl.margins()
    print(json.dumps(_jsonable({
        "rho0": refl.rho0, "V0": refl.V0, "eta0": refl.eta0, "a": refl.a,
        "beta0": refl.beta0, "beta0_prime": refl.beta0_prime, "margins": [m1, m2],
    }), sort_keys=True))
    return EXIT_OK


def _run_solve(cfg: RunConfig):
    eos = cfg.eos()
    field, refl = cfg.ahead(eos)
    sol, diag = solve(cfg.solver(), eos, field, refl)
    return eos, field, refl, sol, diag


def cmd_solve(cfg: RunConfig, out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    summary = {"config": cfg.echo()}
    try:
        eos, field, refl, sol, diag = _run_solve(cfg)
    except SolverError as exc:
        summary["error"] = _error_json(exc)
        if exc.diagnostics is not None:
            summary["diagnostics"] = exc.diagnostics.to_dict()
        summary["wall_clock"] = time.perf_counter() - t0
        _write_json(out / "summary.json", summary)
        print(json.dumps(_error_json(exc)), file=sys.stderr)
        return EXIT_SOLVER
    shock, fields = shock_table(sol), field_table(sol)
    (out / "shock.csv").write_bytes(shock)
    (out / "fields.csv").write_bytes(fields)
    summary.update(
        diagnostics=diag.to_dict(),
        horizon_T=field.T,
        reflection={"rho0": refl.rho0, "V0": refl.V0, "eta0": refl.eta0, "a": refl.a,
                    "beta0": refl.beta0, "beta0_prime": refl.beta0_prime},
        checksums={"shock.csv": _sha256(shock), "fields.csv": _sha256(fields)},
        wall_clock=time.perf_counter() - t0,
    )
    _write_json(out / "summary.json", summary)
    return EXIT_OK


def check_integrity(out: Path) -> bool:
    """Compare stored CSVs with the checksums in summary.json; False if no solve output exists."""
    summ = out / "summary.json"
    if not summ.exists():
        return False
    try:
        sums = json.loads(summ.read_text())["checksums"]
    except (ValueError, KeyError) as exc:
        raise IntegrityError(f"summary.json unreadable or lacks checksums: {exc}") from exc
    for name, digest in sums.items():
        p = out / name
        if not p.exists() or _sha256(p.read_bytes()) != digest:
            raise IntegrityError(f"checksum mismatch for {name}")
    return True


def cmd_verify(cfg: RunConfig, out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    had_output = check_integrity(out)
    eos, field, refl, sol, diag = _run_solve(cfg)
    th = cfg.thresholds()
    half = None
    if cfg["verify.asymptotic"]:
        hcfg = cfg.with_epsilon(0.5 * cfg["domain.epsilon"])
        half, _ = _run_solve(hcfg)[3:]
    uniq = None
    note = None
    if cfg["verify.uniqueness"]:
        uniq, note = uniqueness_probe(cfg.solver(), eos, field, refl, base=sol)
    rep = verify(sol, diag, th, sol_half=half, uniqueness=uniq, tol_value=cfg["solver.tol_value"])
    if note and note != "ok":
        rep.notes.append(note)
    flat = rep.to_flat()
    flat["iterations"] = float(diag.iterations)
    flat["max_ratio"] = float(diag.max_ratio)
    flat["checked_existing_output"] = float(had_output)
    _write_json(out / "report.json", flat)
    return EXIT_OK if rep.passed else EXIT_SOLVER


def cmd_sweep(cfg: RunConfig, out: Path, epsilons) -> int:
    from .verify import _asym_R

    out.mkdir(parents=True, exist_ok=True)
    fields = ("alpha", "beta", "t", "x")
    header = ["epsilon", "converged", "iterations", "max_ratio"] + [f"R_{f}" for f in fields]
    lines = [",".join(header)]
    for eps in epsilons:
        row = [_num(eps)]
        try:
            sol, diag = _run_solve(cfg.with_epsilon(eps))[3:]
            R, _ = _asym_R(sol)
            row += ["1", str(diag.iterations), _num(diag.max_ratio)] + [_num(R[f]) for f in fields]
        except (SolverError, DomainError, PreconditionError) as exc:
            its = getattr(exc, "iteration", None)
            row += ["0", str(its if its is not None else 0), "nan"] + ["nan"] * len(fields)
        lines.append(",".join(row))
    (out / "sweep.csv").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def _parse_epsilons(text):
    try:
        vals = [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --epsilons list: {text!r}") from exc
    if not vals or any(not v > 0 for v in vals):
        raise ConfigError("--epsilons needs positive values")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shockreflect", description="Reflected-shock solver in characteristic coordinates.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("hugoniot", "solve", "verify", "sweep"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True)
        sp.add_argument("--out", default=None)
        if name == "sweep":
            sp.add_argument("--epsilons", required=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config)
        out = Path(args.out if args.out is not None else cfg["output.dir"])
        if args.command == "hugoniot":
            return cmd_hugoniot(cfg)
        if args.command == "solve":
            return cmd_solve(cfg, out)
        if args.command == "verify":
            return cmd_verify(cfg, out)
        return cmd_sweep(cfg, out, _parse_epsilons(args.epsilons))
    except ConfigError as exc:
        code, err = EXIT_CONFIG, exc
    except (PreconditionError, DomainError) as exc:
        code, err = EXIT_PRECONDITION, exc
    except IntegrityError as exc:
        code, err = EXIT_INTEGRITY, exc
    except SolverError as exc:
        code, err = EXIT_SOLVER, exc
    print(json.dumps(_error_json(err)), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
