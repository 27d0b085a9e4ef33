"""Configuration-driven command line for reproducible experiment runs.

Commands
--------
``triple-check``   matrix-scale boundary-triple suite (Green identity, Weyl
                   identity, resolvent-formula deviations, conditions).
``lambda0``        contraction-certificate search for a coefficient.
``solve``          boundary-correction resolvent solves for a list of shifts.
``oracle-compare`` refinement study against the finite-difference oracle.
``estimates``      mapping-estimate sweeps and the relative form bound.

Configuration comes from a TOML or JSON file (``--config``) with explicit
flags overriding file values.  Every run writes a JSON manifest with the
echoed configuration, library versions, seeds, wall time and a content hash
per output file.  Exit status: 0 all requested checks passed, 1 a check
failed, 2 invalid configuration, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .errors import RobinlapError
from .grids import BoundaryGrid, SlabFunction, SlabGrid, mixed_synthesis, save_binary, save_csv
from .halfspace import HalfspaceModel
from .multipliers import estimate_operator_norm
from .robin import bmb_operator, find_lambda0, krein_resolvent, load_coefficient
from .triple_lab import (
    FactoredBoundaryOperator,
    build_discrete_triple,
    check_conditions,
    green_identity_defect,
    verify_krein_matrix,
)
from . import estimates as est

_DEFAULTS = {
    "grid": {"d": 2, "N": 64, "L": 2.0 * np.pi, "H": np.pi, "Nd": 64},
    "coefficient": {"expr": "0.0*x1", "p": 3.0, "t": 1.0 / 3.0},
    "solver": {"method": "auto", "tol": 1e-10, "max_iter": 400},
    "run": {"seed": 7, "outdir": None},
    "solve": {"lambdas": [[-4.0, 0.0]], "pde_tol": 1e-8, "bc_tol": 1e-8},
    "lambda0": {"target": 0.5, "iters": 30},
    "triple": {"n": 20, "n_large": 200, "count": 20},
    "oracle": {"grids": [64, 128, 256], "min_ratio": 2.0},
    "estimates": {"p": 1.5, "s": 0.5, "grids": [64, 128, 256], "samples": 100},
}


class ConfigError(Exception):
    pass


def _load_config_file(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file {path} not found")
    text = p.read_text()
    if p.suffix == ".json":
        return json.loads(text)
    try:
        import tomllib  # py >= 3.11
    except ModuleNotFoundError:
        import tomli as tomllib
    try:
        return tomllib.loads(text)
    except Exception as exc:
        raise ConfigError(f"could not parse {path}: {exc}") from exc


def _merge_config(args) -> dict:
    cfg = json.loads(json.dumps(_DEFAULTS))  # deep copy
    if args.config:
        user = _load_config_file(args.config)
        for section, values in user.items():
            if section not in cfg:
                cfg[section] = {}
            if not isinstance(values, dict):
                raise ConfigError(f"config section {section!r} must be a table")
            cfg[section].update(values)
    overrides = {
        ("grid", "d"): args.d,
        ("grid", "N"): args.N,
        ("grid", "L"): args.L,
        ("grid", "H"): args.H,
        ("grid", "Nd"): args.Nd,
        ("coefficient", "expr"): args.coeff,
        ("coefficient", "p"): args.p,
        ("coefficient", "t"): args.t,
        ("solver", "method"): args.method,
        ("solver", "tol"): args.tol,
        ("run", "seed"): args.seed,
        ("run", "outdir"): args.outdir,
        ("lambda0", "target"): args.target,
    }
    for (section, key), value in overrides.items():
        if value is not None:
            cfg[section][key] = value
    if getattr(args, "lambdas", None):
        parsed = []
        for token in args.lambdas:
            parts = [float(x) for x in token.split(",")]
            parsed.append([parts[0], parts[1] if len(parts) > 1 else 0.0])
        cfg["solve"]["lambdas"] = parsed
    if getattr(args, "grids", None):
        values = [int(x) for x in args.grids.split(",")]
        cfg["oracle"]["grids"] = values
        cfg["estimates"]["grids"] = values
    return cfg


def _validate(cfg: dict) -> None:
    g = cfg["grid"]
    if g["d"] not in (2, 3):
        raise ConfigError(f"grid.d must be 2 or 3, got {g['d']}")
    n = int(g["N"])
    if n < 4 or n & (n - 1):
        raise ConfigError(f"grid.N must be a power of two >= 4, got {g['N']}")
    if not (float(g["L"]) > 0 and float(g["H"]) > 0):
        raise ConfigError("grid.L and grid.H must be positive")
    if int(g["Nd"]) < 4:
        raise ConfigError("grid.Nd must be at least 4")
    if float(cfg["solver"]["tol"]) <= 0:
        raise ConfigError("solver.tol must be positive")
    if not (0.0 <= float(cfg["coefficient"]["t"]) <= 1.0):
        raise ConfigError("coefficient.t must lie in [0, 1]")


def _model(cfg: dict) -> HalfspaceModel:
    g = cfg["grid"]
    bdry = BoundaryGrid(int(g["d"]), int(g["N"]), float(g["L"]))
    return HalfspaceModel(SlabGrid(bdry, float(g["H"]), int(g["Nd"])))


def _coefficient(cfg: dict, grid: BoundaryGrid):
    c = cfg["coefficient"]
    return load_coefficient(c["expr"], grid, float(c["p"]), float(c["t"]))


def _write_csv(path: Path, fieldnames, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


# ---------------------------------------------------------------------------
# commands


def _cmd_triple_check(cfg, outdir):
    seed = int(cfg["run"]["seed"])
    rng = np.random.default_rng(seed)
    n = int(cfg["triple"]["n"])
    count = int(cfg["triple"]["count"])
    t = build_discrete_triple(n)
    rows = []
    worst_green = 0.0
    for size in (n, int(cfg["triple"]["n_large"])):
        tt = build_discrete_triple(size)
        for _ in range(count):
            f = rng.standard_normal(tt.size) + 1j * rng.standard_normal(tt.size)
            g = rng.standard_normal(tt.size) + 1j * rng.standard_normal(tt.size)
            d, s = green_identity_defect(tt, f, g)
            worst_green = max(worst_green, d / s)
    worst_dev = 0.0
    for k in range(count):
        herm = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        herm = (herm + herm.conj().T) / 2.0
        fac = FactoredBoundaryOperator.from_matrix(herm)
        for lam in (-1.0, -1.0 + 1.0j, 2.0j):
            rep = verify_krein_matrix(t, fac, lam)
            rows.append(
                {
                    "case": k,
                    "lambda_re": lam.real,
                    "lambda_im": complex(lam).imag,
                    "deviation": repr(rep.deviation),
                    "deviation_unfactored": repr(rep.deviation_unfactored),
                }
            )
            worst_dev = max(worst_dev, rep.deviation)
    cond = check_conditions(t, FactoredBoundaryOperator.from_matrix(0.05 * np.eye(2)), -1.0)
    _write_csv(
        outdir / "triple_krein.csv",
        ["case", "lambda_re", "lambda_im", "deviation", "deviation_unfactored"],
        rows,
    )
    checks = {
        "green_residual": worst_green,
        "green_ok": worst_green <= 1e-12,
        "krein_deviation": worst_dev,
        "krein_ok": worst_dev <= 1e-10,
        "condition_i": cond.condition_i,
    }
    return all(v for k, v in checks.items() if k.endswith("_ok") or k == "condition_i"), checks, [
        outdir / "triple_krein.csv"
    ]


def _cmd_lambda0(cfg, outdir):
    model = _model(cfg)
    alpha = _coefficient(cfg, model.slab.boundary)
    seed = int(cfg["run"]["seed"])
    target = float(cfg["lambda0"]["target"])
    iters = int(cfg["lambda0"]["iters"])
    lam0 = find_lambda0(alpha, model, target=target, iters=iters, seed=seed)
    certified = estimate_operator_norm(
        bmb_operator(alpha, model, lam0), alpha.grid, iters=iters, seed=seed + 1
    )
    payload = {
        "lambda0": lam0,
        "certified_norm": certified,
        "target": target,
        "admissible": alpha.admissible,
    }
    out = outdir / "lambda0.json"
    out.write_text(json.dumps(payload, sort_keys=True, indent=2))
    ok = certified <= target + 1e-6
    return ok, payload, [out]


def _cmd_solve(cfg, outdir):
    model = _model(cfg)
    slab = model.slab
    alpha = _coefficient(cfg, slab.boundary)
    seed = int(cfg["run"]["seed"])
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal(slab.shape) + 1j * rng.standard_normal(slab.shape)
    coeffs /= (1.0 + slab.boundary.xi_sq[..., None] + slab.mu) ** 1.5
    forcing = SlabFunction.from_cosine(slab, mixed_synthesis(slab, coeffs))
    method = cfg["solver"]["method"]
    method = None if method == "auto" else method
    summaries = []
    outputs = []
    ok = True
    for i, (real, imag) in enumerate(cfg["solve"]["lambdas"]):
        lam = complex(real, imag)
        result = krein_resolvent(
            lam,
            forcing,
            alpha,
            model,
            method=method,
            tol=float(cfg["solver"]["tol"]),
            max_iter=int(cfg["solver"]["max_iter"]),
            pde_tol=float(cfg["solve"]["pde_tol"]),
            bc_tol=float(cfg["solve"]["bc_tol"]),
            seed=seed,
        )
        summaries.append(result.summary(lam))
        ok = ok and result.ok and result.converged
        field_path = outdir / f"field_{i}.bin"
        save_binary(result.u, field_path)
        density_path = outdir / f"density_{i}.csv"
        save_csv(result.boundary_density, density_path)
        outputs.extend([field_path, density_path])
    summary_path = outdir / "solve_summary.json"
    summary_path.write_text(json.dumps(summaries, sort_keys=True, indent=2))
    outputs.append(summary_path)
    return ok, {"solves": summaries}, outputs


def _cmd_oracle_compare(cfg, outdir):
    g = cfg["grid"]
    seed = int(cfg["run"]["seed"])
    grids = [int(x) for x in cfg["oracle"]["grids"]]

    def forcing(*coords):
        rsq = sum(c**2 for c in coords[:-1])
        return np.exp(-(rsq + (coords[-1] - 1.0) ** 2))

    rows = est.oracle_refinement_study(
        cfg["coefficient"]["expr"],
        float(cfg["coefficient"]["p"]),
        forcing,
        Ns=grids,
        d=int(g["d"]),
        L=float(g["L"]),
        H=float(g["H"]),
        seed=seed,
    )
    out_rows = [
        {
            "N": r["N"],
            "Nd": r["Nd"],
            "lambda": repr(r["lambda"]),
            "error": repr(r["error"]),
            "ratio": repr(r["ratio"]),
        }
        for r in rows
    ]
    path = outdir / "oracle_compare.csv"
    _write_csv(path, ["N", "Nd", "lambda", "error", "ratio"], out_rows)
    min_ratio = float(cfg["oracle"]["min_ratio"])
    ratios = [r["ratio"] for r in rows[1:]]
    ok = all(r >= min_ratio for r in ratios)
    return ok, {"rows": out_rows, "min_ratio": min_ratio}, [path]


def _cmd_estimates(cfg, outdir):
    e = cfg["estimates"]
    seed = int(cfg["run"]["seed"])
    g = cfg["grid"]
    grids = [int(x) for x in e["grids"]]
    sweep = est.weyl_smoothing_sweep(
        float(e["p"]), float(e["s"]), grids=tuple(grids), d=int(g["d"]),
        L=float(g["L"]), samples=int(e["samples"]), seed=seed,
    )
    power = est.coefficient_power_bound(
        cfg["coefficient"]["expr"], float(cfg["coefficient"]["p"]), float(cfg["coefficient"]["t"]),
        grids=tuple(grids), d=int(g["d"]), L=float(g["L"]), samples=int(e["samples"]), seed=seed,
    )
    absorb = est.sobolev_absorption_constant(
        0.5, 0.1, grids=tuple((n, n) for n in grids[:2]), d=int(g["d"]),
        L=float(g["L"]), H=float(g["H"]), trials=int(e["samples"]), seed=seed,
    )
    klmn = est.klmn_bound(
        cfg["coefficient"]["expr"], float(cfg["coefficient"]["p"]),
        grids=tuple((n, n) for n in grids[:2]), d=int(g["d"]), L=float(g["L"]),
        H=float(g["H"]), trials=int(e["samples"]), seed=seed,
    )
    path = outdir / "estimates.csv"
    est.write_reports_csv([sweep, power, absorb], path)
    klmn_path = outdir / "klmn.json"
    klmn_path.write_text(klmn.to_json())
    sweep_ok = (sweep.verdict == "bounded") == est.smoothing_admissible(
        float(e["p"]), float(e["s"]), int(g["d"])
    )
    checks = {
        "smoothing_verdict": sweep.verdict,
        "smoothing_matches_inequality": sweep_ok,
        "power_verdict": power.verdict,
        "absorption_verdict": absorb.verdict,
        "klmn": {"a": klmn.a, "b": klmn.b, "verdict": klmn.verdict},
    }
    ok = sweep_ok and power.verdict == "bounded" and absorb.verdict == "bounded"
    return ok, checks, [path, klmn_path]


_COMMANDS = {
    "triple-check": _cmd_triple_check,
    "lambda0": _cmd_lambda0,
    "solve": _cmd_solve,
    "oracle-compare": _cmd_oracle_compare,
    "estimates": _cmd_estimates,
}


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    digest.update(path.read_bytes())
    return digest.hexdigest()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robinlap", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="TOML or JSON configuration file")
        p.add_argument("--outdir", help="output directory (env default: cwd/runs)")
        p.add_argument("--seed", type=int, help="base RNG seed")
        p.add_argument("--d", type=int)
        p.add_argument("--N", type=int)
        p.add_argument("--L", type=float)
        p.add_argument("--H", type=float)
        p.add_argument("--Nd", type=int)
        p.add_argument("--coeff", help="coefficient expression or CSV path")
        p.add_argument("--p", type=float, help="integrability exponent")
        p.add_argument("--t", type=float, help="power-split exponent")
        p.add_argument("--method", choices=["auto", "neumann_series", "krylov"])
        p.add_argument("--tol", type=float)
        p.add_argument("--target", type=float, help="contraction target for lambda0")
        p.add_argument("--lambda", dest="lambdas", action="append", metavar="RE[,IM]")
        p.add_argument("--grids", help="comma-separated grid sizes")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.time()
    try:
        cfg = _merge_config(args)
        _validate(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    import os

    outdir = Path(cfg["run"]["outdir"] or os.environ.get("ROBINLAP_OUTDIR") or "runs")
    cfg["run"]["outdir"] = str(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3
    try:
        passed, checks, outputs = _COMMANDS[args.command](cfg, outdir)
    except RobinlapError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        passed, checks, outputs = False, {"error": str(exc)}, []
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3
    manifest = {
        "command": args.command,
        "config": cfg,
        "versions": {
            "robinlap": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
        "seed": cfg["run"]["seed"],
        "wall_time_s": time.time() - start,
        "outputs": [
            {"path": str(p), "bytes": p.stat().st_size, "sha256": _sha256(p)} for p in outputs
        ],
        "checks": _jsonable(checks),
        "pass": bool(passed),
    }
    try:
        (outdir / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2))
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3
    print(json.dumps({"command": args.command, "pass": bool(passed)}))
    return 0 if passed else 1


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (bool, int, float, str)) or obj is None:
        return obj
    return str(obj)


if __name__ == "__main__":
    sys.exit(main())
