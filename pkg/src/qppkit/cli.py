"""Command-line driver.

Every run prints (or writes with ``--output``) one JSON document containing
``seed``, ``query_count``, ``wall_time_ms`` and ``library_version`` next to the
subcommand's results. ``wall_time_ms`` is ``null`` unless ``--timing`` is
given, so that a fixed seed reproduces the output byte for byte.

Exit codes: 0 success, 1 contract or conditioning error, 2 resource cap,
3 I/O failure, 4 a ``verify`` check failed. Errors are reported as JSON on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .approx import ApproxSpec, real_poly_to_json, square_wave_error
from .errors import ConditioningError, ContractError, ResourceError
from .laurent import LaurentPoly, complement, grid
from .linalg import check_density, check_hermitian, check_unitary, hermiticity_residual, unitarity_residual

DEFAULT_SEED = 20221
SEED_ENV = "QPPKIT_SEED"
SUBCOMMANDS = ("angles", "approx", "qps", "period", "qae", "hamsim", "entropy", "verify")


# matrix files


@dataclass
class MatrixFile:
    matrix: np.ndarray
    flags: dict[str, bool] = field(default_factory=dict)


def _infer_flags(M: np.ndarray) -> dict[str, bool]:
    herm = hermiticity_residual(M) <= 1e-10
    flags = {"hermitian": herm, "unitary": unitarity_residual(M) <= 1e-10, "density": False}
    if herm:
        try:
            check_density(M)
            flags["density"] = True
        except ContractError:
            pass
    return flags


def _parse_cell(cell: str) -> complex:
    text = cell.strip().replace(" ", "")
    if "," in text:
        re_, im = text.split(",")
        return complex(float(re_), float(im))
    return complex(text.replace("i", "j"))


def _read_csv(text: str) -> np.ndarray:
    rows = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
    if not rows:
        raise ContractError("matrix file is empty")
    dim = len(rows)
    out = np.zeros((dim, dim), dtype=complex)
    for i, row in enumerate(rows):
        cells = [c for c in row if c.strip()]
        if len(cells) == 2 * dim and all("," not in c for c in cells):
            vals = [complex(float(cells[2 * k]), float(cells[2 * k + 1])) for k in range(dim)]
        elif len(cells) == dim:
            vals = [_parse_cell(c) for c in cells]
        else:
            raise ContractError(f"row {i} has {len(cells)} cells; expected {dim} complex entries")
        out[i] = vals
    return out


def load_matrix(path, expect: str | None = None) -> MatrixFile:
    """Read ``{"dim": n, "entries": [[re, im], ...]}`` (row-major) or a CSV of ``re,im`` cells.

    ``expect`` in ``{"hermitian", "unitary", "density"}`` validates the matrix
    and raises with the offending residual.
    """
    text = Path(path).read_text()
    try:
        if str(path).endswith(".csv"):
            M = _read_csv(text)
        else:
            data = json.loads(text)
            dim = int(data["dim"])
            entries = data["entries"]
            if len(entries) != dim * dim:
                raise ContractError(f"dim {dim} needs {dim * dim} entries, got {len(entries)}")
            M = np.array([complex(float(re_), float(im)) for re_, im in entries]).reshape(dim, dim)
    except (ValueError, TypeError, KeyError) as exc:
        if isinstance(exc, ContractError):
            raise
        raise ContractError(f"malformed matrix file {path}: {exc}") from exc
    checks = {"hermitian": check_hermitian, "unitary": check_unitary, "density": check_density}
    if expect is not None:
        if expect not in checks:
            raise ContractError(f"unknown matrix kind {expect!r}")
        checks[expect](M)
    return MatrixFile(M, _infer_flags(M))


def save_matrix(M, path) -> None:
    A = np.asarray(M, dtype=complex)
    data = {"dim": A.shape[0], "entries": [[float(z.real), float(z.imag)] for z in A.reshape(-1)]}
    Path(path).write_text(json.dumps(data))


_PHASE = re.compile(r"^\s*(-?)\s*(\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d*\.?\d+))?\s*$")


def parse_phase(text) -> float:
    """Numbers or multiples of pi such as ``pi/3``, ``-2pi/5``, ``0.5*pi``."""
    if isinstance(text, (int, float)):
        return float(text)
    m = _PHASE.match(str(text))
    if m:
        sign = -1.0 if m.group(1) else 1.0
        coef = float(m.group(2)) if m.group(2) else 1.0
        den = float(m.group(3)) if m.group(3) else 1.0
        return sign * coef * math.pi / den
    try:
        return float(text)
    except ValueError as exc:
        raise ContractError(f"cannot parse phase {text!r}") from exc


# parameters


@dataclass(frozen=True)
class Param:
    kind: str  # float, int, str, phase, path, flag, floats
    default: object = None
    choices: tuple | None = None


PARAMS: dict[str, dict[str, Param]] = {
    "angles": {
        "target": Param("str", "cos", ("cos", "sin", "square_wave", "exp_cos", "poly")),
        "poly": Param("path"),
        "mode": Param("str", "expectation", ("expectation", "projection")),
        "Delta": Param("float", 0.1),
        "eps": Param("float", 1e-3),
        "t": Param("float", 1.0),
    },
    "approx": {
        "target": Param("str", "square_wave", ("square_wave", "exp_cos", "log_scaled", "power", "monomial_shift")),
        "eps": Param("float", 1e-3),
        "Delta": Param("float", 0.1),
        "t": Param("float", 1.0),
        "gamma": Param("float", 0.05),
        "c": Param("float", 0.5),
        "alpha_frac": Param("float", 0.5),
    },
    "qps": {
        "tau": Param("phase", "pi/3"),
        "unitary": Param("path"),
        "state_index": Param("int", 1),
        "delta": Param("floats", [1e-3]),
        "eps": Param("float", 0.1),
        "Delta": Param("float", 0.25),
    },
    "period": {
        "N": Param("int", 15),
        "x": Param("int", 7),
        "delta": Param("float", 1e-3),
        "eps": Param("float", 0.1),
        "Delta": Param("float", 0.25),
        "attempts": Param("int", 10),
    },
    "qae": {
        "amplitude": Param("float", 0.6),
        "circuit": Param("path"),
        "delta": Param("float", 1e-3),
        "eps": Param("float", 0.1),
        "Delta": Param("float", 0.25),
    },
    "hamsim": {
        "hamiltonian": Param("path"),
        "time": Param("floats", [1.0]),
        "delta": Param("float", 1e-3),
        "lambda": Param("float"),
    },
    "entropy": {
        "kind": Param("str", "von_neumann", ("von_neumann", "relative", "renyi")),
        "alpha": Param("float"),
        "gamma": Param("float"),
        "kappa": Param("int"),
        "eps": Param("float", 1e-2),
        "shots": Param("int"),
        "exact": Param("flag", False),
        "sampler": Param("str", "born", ("born", "amplitude")),
        "state": Param("path"),
        "sigma": Param("path"),
    },
    "verify": {},
}


@dataclass
class RunConfig:
    subcommand: str
    parameters: dict = field(default_factory=dict)
    seed: int = DEFAULT_SEED
    output_path: str | None = None
    format: str = "json"
    timing: bool = False

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ContractError(f"unknown subcommand {self.subcommand!r}; choose from {SUBCOMMANDS}")
        if self.format not in ("json", "csv"):
            raise ContractError(f"format must be json or csv, got {self.format!r}")
        spec = PARAMS[self.subcommand]
        unknown = sorted(set(self.parameters) - set(spec))
        if unknown:
            raise ContractError(f"unknown parameter(s) for {self.subcommand}: {unknown}")
        full = {}
        for name, p in spec.items():
            full[name] = _coerce(name, p, self.parameters.get(name, p.default))
        self.parameters = full
        if not 0 <= int(self.seed) < 2**64:
            raise ContractError("seed must be a 64-bit unsigned integer")
        self.seed = int(self.seed)


def _coerce(name: str, p: Param, value):
    if value is None:
        return None
    try:
        if p.kind == "float":
            out = float(value)
        elif p.kind == "int":
            out = int(value)
        elif p.kind == "phase":
            out = parse_phase(value)
        elif p.kind == "flag":
            out = bool(value)
        elif p.kind == "floats":
            items = value if isinstance(value, (list, tuple)) else str(value).split(",")
            out = [float(v) for v in items]
        else:
            out = str(value)
    except (TypeError, ValueError) as exc:
        raise ContractError(f"parameter {name!r}: cannot read {value!r} as {p.kind}") from exc
    if p.choices is not None and out not in p.choices:
        raise ContractError(f"parameter {name!r} must be one of {p.choices}, got {out!r}")
    return out


def _require(params: dict, name: str):
    if params.get(name) is None:
        raise ContractError(f"parameter {name!r} is required")
    return params[name]


# subcommands


def _cmd_angles(p: dict, seed: int) -> dict:
    from .qsp import expectation_polys, find_angles, round_trip_error

    target = p["target"]
    if target == "poly":
        F = LaurentPoly.from_json(json.loads(Path(_require(p, "poly")).read_text()))
    elif target == "cos":
        F = LaurentPoly.from_fourier([0.5, 0, 0.5])
    elif target == "sin":
        F = LaurentPoly.from_fourier([0.5j, 0, -0.5j])
    elif target == "square_wave":
        F = ApproxSpec("square_wave", p["eps"], Delta=p["Delta"]).build()
    else:
        F = ApproxSpec("exp_cos", p["eps"], t=p["t"]).build()
    if p["mode"] == "expectation":
        P, Q = expectation_polys(F)
    else:
        P, Q = F, complement(F)
    a = find_angles(P, Q)
    return {
        "mode": p["mode"],
        "layers": a.layers,
        "angles": a.to_json(),
        "round_trip_error": round_trip_error(a, P, Q),
        "query_count": a.layers,
    }


def _cmd_approx(p: dict, seed: int) -> dict:
    target = p["target"]
    spec = ApproxSpec(target, p["eps"], Delta=p["Delta"], t=p["t"], gamma=p["gamma"], c=p["c"], alpha_frac=p["alpha_frac"])
    poly = spec.build()
    if isinstance(poly, LaurentPoly):
        if target == "square_wave":
            err = square_wave_error(poly, p["Delta"])
        else:
            xs = grid(poly.degree)
            err = float(np.max(np.abs(poly(xs) - np.exp(-1j * p["t"] * np.cos(xs)))))
        return {"target": target, "degree": poly.degree // 2, "max_error": err, "poly": poly.to_json(), "query_count": 0}
    xs = np.linspace(p["gamma"], 1, 2001)
    refs = {
        "log_scaled": np.log(xs) / (2 * math.log(p["gamma"])),
        "power": p["gamma"] ** p["c"] / 2 * xs ** (-p["c"]),
        "monomial_shift": xs ** p["alpha_frac"] / (2 * math.log(2 * math.e / p["gamma"])),
    }
    err = float(np.max(np.abs(poly(xs) - refs[target])))
    return {"target": target, "degree": poly.degree(), "max_error": err, "poly": real_poly_to_json(poly), "query_count": 0}


def _cmd_qps(p: dict, seed: int) -> dict:
    from .linalg import basis_state
    from .phasesearch import QpsConfig, phase_distance, quantum_phase_search

    if p["unitary"] is not None:
        U = load_matrix(p["unitary"], expect="unitary").matrix
        tau = None
    else:
        tau = p["tau"]
        U = np.diag([1.0, np.exp(1j * tau)])
    chi = basis_state(p["state_index"], U.shape[0])
    rng = np.random.default_rng(seed)
    rows = []
    for delta in p["delta"]:
        res = quantum_phase_search(U, chi, QpsConfig(p["Delta"], p["eps"], delta), rng)
        ok = None if tau is None else bool(phase_distance(res.estimate, tau) < delta)
        rows.append({"delta": delta, "estimate": res.estimate, "queries": res.queries, "success": ok})
    out = dict(rows[0]) if len(rows) == 1 else {"rows": rows}
    out["query_count"] = sum(r["queries"] for r in rows)
    return out


def _cmd_period(p: dict, seed: int) -> dict:
    from .phasesearch import QpsConfig, period_finding

    res = period_finding(p["N"], p["x"], QpsConfig(p["Delta"], p["eps"], p["delta"]), seed, p["attempts"])
    return {"order": res.order, "attempts": res.attempts, "success": res.success, "query_count": res.queries}


def _cmd_qae(p: dict, seed: int) -> dict:
    from .phasesearch import QpsConfig, amplitude_estimation
    from .qsp import ry

    if p["circuit"] is not None:
        A = load_matrix(p["circuit"], expect="unitary").matrix
        target = None
    else:
        a = p["amplitude"]
        if not 0 <= a <= 1:
            raise ContractError(f"amplitude must lie in [0, 1], got {a}")
        A = ry(2 * math.asin(a))
        target = a
    res = amplitude_estimation(A, QpsConfig(p["Delta"], p["eps"], p["delta"]), seed)
    ok = None if target is None else bool(abs(res.estimate - target) <= 2 * p["delta"])
    return {"estimate": res.estimate, "phase": res.phase, "success": ok, "query_count": res.queries}


def _cmd_hamsim(p: dict, seed: int) -> dict:
    from .hamsim import SimRequest, error_vs_exact, simulate

    H = load_matrix(_require(p, "hamiltonian"), expect="hermitian").matrix
    rows = []
    for t in p["time"]:
        res = simulate(SimRequest(H, t, p["delta"], p["lambda"]))
        rows.append(
            {
                "time": t,
                "error_vs_exact": error_vs_exact(res.block, H, t),
                "truncation_order": res.truncation_order,
                "queries": res.queries,
                "query_ratio": res.query_ratio,
                "success_probability": res.success_probability,
            }
        )
    out = dict(rows[0]) if len(rows) == 1 else {"rows": rows}
    out["query_count"] = sum(r["queries"] for r in rows)
    return out


def _cmd_entropy(p: dict, seed: int) -> dict:
    from .entropy import EntropyRequest, estimate

    rho = load_matrix(_require(p, "state"), expect="density").matrix
    sigma = load_matrix(p["sigma"], expect="density").matrix if p["sigma"] is not None else None
    if p["exact"] and p["shots"] is not None:
        raise ContractError("give either --shots or --exact, not both")
    shots = None if p["exact"] or p["shots"] is None else p["shots"]
    if p["sampler"] == "amplitude":
        if p["exact"] or p["shots"] is not None:
            raise ContractError("the amplitude sampler chooses its own budget; drop --shots and --exact")
        shots = "auto"
    req = EntropyRequest(p["kind"], p["alpha"], p["gamma"], p["kappa"], p["eps"], shots, seed, p["sampler"])
    res = estimate(req, rho, sigma)
    return {
        "kind": p["kind"],
        "estimate": res.estimate,
        "half_width": res.half_width,
        "shots_used": res.shots_used,
        "queries": res.queries,
        "warnings": res.warnings,
        "query_count": res.queries,
    }


def _cmd_verify(p: dict, seed: int) -> dict:
    from .verify import run_checks

    checks = [c.to_json() for c in run_checks(seed)]
    return {"checks": checks, "passed": all(c["passed"] for c in checks), "query_count": 0}


COMMANDS = {
    "angles": _cmd_angles,
    "approx": _cmd_approx,
    "qps": _cmd_qps,
    "period": _cmd_period,
    "qae": _cmd_qae,
    "hamsim": _cmd_hamsim,
    "entropy": _cmd_entropy,
    "verify": _cmd_verify,
}


def _to_csv(result: dict) -> str:
    rows = result.get("rows")
    if rows is None:
        rows = [{k: v for k, v in result.items() if not isinstance(v, (dict, list))}]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: v for k, v in r.items() if not isinstance(v, (dict, list))})
    return buf.getvalue()


def execute(config: RunConfig) -> tuple[dict, int]:
    """Run a configuration; returns the output document and the exit code."""
    start = time.perf_counter()
    result = COMMANDS[config.subcommand](config.parameters, config.seed)
    elapsed = (time.perf_counter() - start) * 1000
    doc = {
        "subcommand": config.subcommand,
        "seed": config.seed,
        "library_version": __version__,
        "wall_time_ms": round(elapsed, 3) if config.timing else None,
    }
    doc.update(result)
    code = 4 if config.subcommand == "verify" and not result["passed"] else 0
    return doc, code


def run(config: RunConfig) -> int:
    doc, code = execute(config)
    text = _to_csv(doc) if config.format == "csv" else json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if config.output_path:
        Path(config.output_path).write_text(text)
    else:
        sys.stdout.write(text)
    return code


def default_seed() -> int:
    env = os.environ.get(SEED_ENV)
    if env is None:
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError as exc:
        raise ContractError(f"{SEED_ENV}={env!r} is not an integer") from exc


_FLAG_NAMES = {"lambda": "--lambda", "alpha_frac": "--alpha-frac", "state_index": "--state-index"}


class _Parser(argparse.ArgumentParser):
    # usage errors are contract errors (exit 1), not argparse's exit 2
    def error(self, message):
        raise ContractError(f"{self.prog}: {message}")


def _parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qppkit", description="Quantum phase processing simulator.")
    parser.add_argument("--version", action="version", version=__version__)
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help=f"RNG seed (default ${SEED_ENV} or {DEFAULT_SEED})")
    common.add_argument("--output", default=None, help="write the result here instead of stdout")
    common.add_argument("--format", default=None, choices=("json", "csv"))
    common.add_argument("--timing", action="store_true", default=None, help="record wall_time_ms")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    run_p = sub.add_parser("run", parents=[common], help="run a JSON config file")
    run_p.add_argument("config")
    for name, spec in PARAMS.items():
        sp = sub.add_parser(name, parents=[common])
        for key, p in spec.items():
            flag = _FLAG_NAMES.get(key, f"--{key}")
            if p.kind == "flag":
                sp.add_argument(flag, dest=key, action="store_true", default=None)
            else:
                sp.add_argument(flag, dest=key, default=None)
    return parser


_CONFIG_KEYS = {"subcommand", "parameters", "seed", "output_path", "format", "timing"}


def config_from_file(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ContractError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ContractError("config must be a JSON object")
    unknown = sorted(set(data) - _CONFIG_KEYS)
    if unknown:
        raise ContractError(f"unknown config key(s): {unknown}")
    if "subcommand" not in data:
        raise ContractError("config needs a 'subcommand'")
    if not isinstance(data.get("parameters", {}), dict):
        raise ContractError("config 'parameters' must be an object")
    return data


def build_config(argv) -> RunConfig:
    ns = vars(_parser().parse_args(argv))
    sub = ns.pop("subcommand")
    overrides = {k: ns.pop(k) for k in ("seed", "output", "format", "timing")}
    if sub == "run":
        data = config_from_file(ns.pop("config"))
    else:
        data = {"subcommand": sub, "parameters": {k: v for k, v in ns.items() if v is not None}}
    seed = overrides["seed"] if overrides["seed"] is not None else data.get("seed", default_seed())
    return RunConfig(
        subcommand=data["subcommand"],
        parameters=data.get("parameters", {}),
        seed=seed,
        output_path=overrides["output"] or data.get("output_path"),
        format=overrides["format"] or data.get("format", "json"),
        timing=bool(overrides["timing"] or data.get("timing", False)),
    )


def _fail(exc: Exception, code: int) -> int:
    err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    try:
        return run(build_config(argv))
    except (ContractError, ConditioningError) as exc:
        return _fail(exc, 1)
    except ResourceError as exc:
        return _fail(exc, 2)
    except OSError as exc:
        return _fail(exc, 3)


if __name__ == "__main__":
    sys.exit(main())
