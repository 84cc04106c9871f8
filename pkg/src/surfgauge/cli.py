"""Config-driven experiment runner: run / check / export.

Usage:
    python -m surfgauge.cli run <config.json> [--seed N] [--out DIR]
    python -m surfgauge.cli check <identity|hamiltonian|refinement|solver> [--seed N] [--out DIR]
    python -m surfgauge.cli export <run-dir> --format {csv,json}

Configs are JSON with a versioned schema (see CONFIG_SCHEMA).  Runs are
deterministic given the seed: artifacts are written atomically and byte
identical across runs on one platform.  Exit codes: 0 success, 1 failed
checks or solver breakdown, 2 validation errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import tempfile

from . import checks, fixtures, solve
from .mesh import build_surface, read_off

CONFIG_VERSION = 1

CONFIG_SCHEMA = {
    "version": "int, must equal 1",
    "mesh": "{genus: int >= 1, refinement: int >= 0} or {off: path}",
    "group": "'SU(2)' (fixed)",
    "system": "one of none|CoupledHarmonic|CoupledHitchin",
    "alpha_schedule": "monotone list of floats (coupled systems)",
    "epsilon": "-1 or 1",
    "solver": "optional {tol, max_iter}",
    "checks": "list from identity|hamiltonian|refinement|solver",
    "seed": "int",
    "out_dir": "optional output directory",
}

SUITES = {
    "identity": lambda seed: checks.identity_suite(seed=seed),
    "hamiltonian": lambda seed: checks.hamiltonian_suite(seed=seed),
    "refinement": lambda seed: checks.refinement_suite(),
    "solver": lambda seed: checks.solver_suite(),
}


class ConfigError(ValueError):
    pass


def validate_config(cfg: dict) -> dict:
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if cfg.get("version") != CONFIG_VERSION:
        raise ConfigError(f"config version must be {CONFIG_VERSION}")
    mesh = cfg.get("mesh")
    if not isinstance(mesh, dict) or not ({"genus", "refinement"} <= set(mesh) or "off" in mesh):
        raise ConfigError("mesh must give genus+refinement or an off path")
    if "genus" in mesh and (int(mesh["genus"]) < 1 or int(mesh["refinement"]) < 0):
        raise ConfigError("mesh genus must be >= 1 and refinement >= 0")
    if cfg.get("group", "SU(2)") != "SU(2)":
        raise ConfigError("group is fixed to SU(2)")
    system = cfg.get("system", "none")
    if system not in ("none", "CoupledHarmonic", "CoupledHitchin"):
        raise ConfigError(f"unknown system {system!r}")
    eps = cfg.get("epsilon", -1)
    if eps not in (-1, 1):
        raise ConfigError("epsilon must be -1 or 1")
    sched = cfg.get("alpha_schedule", [])
    if system != "none":
        if not sched:
            raise ConfigError("coupled systems need an alpha_schedule")
        if not (
            all(a <= b for a, b in zip(sched, sched[1:]))
            or all(a >= b for a, b in zip(sched, sched[1:]))
        ):
            raise ConfigError("alpha_schedule must be monotone")
    for s in cfg.get("checks", []):
        if s not in SUITES:
            raise ConfigError(f"unknown check suite {s!r}")
    return cfg


def _canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, indent=1)


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d)
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _build_mesh(cfg: dict):
    mesh = cfg["mesh"]
    if "off" in mesh:
        return read_off(mesh["off"])
    return build_surface(int(mesh["genus"]), int(mesh["refinement"]))


def run(config_path: str, seed: int | None = None, out_dir: str | None = None) -> int:
    try:
        with open(config_path) as fh:
            cfg = json.load(fh)
        cfg = validate_config(cfg)
    except (ConfigError, json.JSONDecodeError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if seed is not None:
        cfg["seed"] = int(seed)
    cfg.setdefault("seed", 0)
    out = out_dir or cfg.get("out_dir") or "runs/latest"
    mesh = _build_mesh(cfg)

    manifest = {
        "config_hash": hashlib.sha256(_canonical_json(cfg).encode()).hexdigest(),
        "code_version": 1,
        "euler_characteristic": mesh.euler_characteristic,
        "total_volume": mesh.total_volume,
        "seed": cfg["seed"],
        "config": cfg,
    }

    failed = False
    suite_reports = {}
    for sname in cfg.get("checks", []):
        entries = SUITES[sname](cfg["seed"])
        suite_reports[sname] = entries
        if not all(e["passed"] for e in entries):
            failed = True

    artifacts = {"manifest.json": _canonical_json(manifest)}
    if suite_reports:
        artifacts["checks.json"] = _canonical_json(suite_reports)

    system = cfg.get("system", "none")
    if system != "none":
        g = cfg["mesh"].get("genus", 2)
        r = cfg["mesh"].get("refinement", 1)
        seed_x, _ = fixtures.coupled_seed(g, r)
        scfg = solve.SolverConfig(
            tol=cfg.get("solver", {}).get("tol", 1e-8),
            max_iter=cfg.get("solver", {}).get("max_iter", 40),
        )
        results, ok = solve.continue_alpha(system, seed_x, cfg["epsilon"], cfg["alpha_schedule"], scfg)
        if not ok:
            failed = True
        rows = [("alpha", "residual", "kernel_dim", "iterations")]
        solver_rows = [("alpha", "iteration", "objective", "step")]
        for rr in results:
            rows.append(
                (
                    repr(float(rr["alpha"])),
                    repr(float(rr["norms"]["total"])) if "norms" in rr else "",
                    str(rr["kernel_dim"]),
                    str(rr["report"].iterations),
                )
            )
            for t in rr["report"].trace:
                it, obj, step = (t + (0.0,))[:3] if len(t) < 3 else t
                solver_rows.append(
                    (repr(float(rr["alpha"])), str(it), repr(float(obj)), repr(float(step)))
                )
            artifacts[f"checkpoint_alpha_{rr['alpha']:.4f}.json"] = _canonical_json(
                rr["config"].to_dict()
            )
        buf = io.StringIO()
        csv.writer(buf).writerows(rows)
        artifacts["trace.csv"] = buf.getvalue()
        buf2 = io.StringIO()
        csv.writer(buf2).writerows(solver_rows)
        artifacts["solver_trace.csv"] = buf2.getvalue()
        family = "J" if system == "CoupledHarmonic" else "I"
        end = results[-1]
        if ok:
            basis, info = solve.moduli_basis(family, end["config"], end["alpha"], cfg["epsilon"])
            report = solve.moduli_metric(family, end["config"], end["alpha"], cfg["epsilon"], basis)
            artifacts["moduli.json"] = _canonical_json(report.to_dict())

    for name, text in artifacts.items():
        _atomic_write(os.path.join(out, name), text)
    print(f"run complete: {'FAIL' if failed else 'OK'} -> {out}")
    return 1 if failed else 0


def check(suite: str, seed: int = 0, out_dir: str | None = None) -> int:
    if suite not in SUITES:
        print(f"unknown suite {suite!r}", file=sys.stderr)
        return 2
    entries = SUITES[suite](seed)
    ok = all(e["passed"] for e in entries)
    for e in entries:
        status = "PASS" if e["passed"] else "FAIL"
        print(f"[{status}] {e['name']}: {e['value']:.3e} (tol {e['tol']:.1e})")
    if out_dir:
        _atomic_write(os.path.join(out_dir, f"check_{suite}.json"), _canonical_json(entries))
    print(f"suite {suite}: {'OK' if ok else 'FAILED'}")
    return 0 if ok else 1


def export(run_dir: str, fmt: str) -> int:
    manifest_path = os.path.join(run_dir, "manifest.json")
    if not os.path.exists(manifest_path):
        # a directory of runs: aggregate the manifests and per-run artifacts
        subs = sorted(
            d
            for d in (os.listdir(run_dir) if os.path.isdir(run_dir) else [])
            if os.path.exists(os.path.join(run_dir, d, "manifest.json"))
        )
        if not subs:
            print("missing manifest.json in run directory", file=sys.stderr)
            return 2
        if fmt != "json":
            print("aggregated export supports --format json", file=sys.stderr)
            return 2
        payload = []
        for d in subs:
            entry = {"run": d}
            for name in ("manifest.json", "checks.json", "moduli.json"):
                p = os.path.join(run_dir, d, name)
                if os.path.exists(p):
                    with open(p) as fh:
                        entry[name.split(".")[0]] = json.load(fh)
            payload.append(entry)
        _atomic_write(os.path.join(run_dir, "export.json"), _canonical_json(payload))
        print(f"exported {len(payload)} runs")
        return 0
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    rows = [("alpha", "residual", "kernel_dim", "signature")]
    trace_path = os.path.join(run_dir, "trace.csv")
    signature = ""
    moduli_path = os.path.join(run_dir, "moduli.json")
    if os.path.exists(moduli_path):
        with open(moduli_path) as fh:
            signature = "+".join(str(s) for s in json.load(fh)["signature"])
    if os.path.exists(trace_path):
        with open(trace_path) as fh:
            reader = list(csv.reader(fh))
        for row in reader[1:]:
            rows.append((row[0], row[1], row[2], signature))
    if fmt == "csv":
        buf = io.StringIO()
        csv.writer(buf).writerows(rows)
        _atomic_write(os.path.join(run_dir, "export.csv"), buf.getvalue())
    elif fmt == "json":
        payload = {"manifest": manifest, "rows": [list(r) for r in rows[1:]]}
        _atomic_write(os.path.join(run_dir, "export.json"), _canonical_json(payload))
    else:
        print(f"unknown format {fmt!r}", file=sys.stderr)
        return 2
    print(f"exported {len(rows) - 1} rows")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="surfgauge", description=__doc__)
    sub = parser.add_subparsers(dest="cmd", required=True)
    p_run = sub.add_parser("run")
    p_run.add_argument("config")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default=None)
    p_chk = sub.add_parser("check")
    p_chk.add_argument("suite", choices=sorted(SUITES))
    p_chk.add_argument("--seed", type=int, default=0)
    p_chk.add_argument("--out", default=None)
    p_exp = sub.add_parser("export")
    p_exp.add_argument("run_dir")
    p_exp.add_argument("--format", choices=("csv", "json"), required=True)
    args = parser.parse_args(argv)
    if args.cmd == "run":
        return run(args.config, args.seed, args.out)
    if args.cmd == "check":
        return check(args.suite, args.seed, args.out)
    return export(args.run_dir, args.format)


if __name__ == "__main__":
    sys.exit(main())
