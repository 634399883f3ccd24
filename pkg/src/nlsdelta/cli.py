"""Command-line scenario runner.

    nlsdelta list
    nlsdelta validate CONFIG
    nlsdelta run CONFIG [--out DIR] [--quiet] [--tol-scale X]
    nlsdelta sweep CONFIG [--out DIR] [--jobs N]

Configs are JSON objects or key=value files with a `kind` key; every other
key is a scenario parameter (in JSON they may also sit under "params").
A sweep config adds `sweep` mapping parameter names to lists of values.
"""
import argparse
import itertools
import json
import os
import platform
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy

from . import __version__
from .errors import ConfigurationError, InstabilityError, NLSDeltaError
from .scenarios import DESCRIPTIONS, REQUIRED, RUNNERS, SCHEMAS, normalize_params, required_keys

META_KEYS = ("name", "kind", "output_dir", "sweep")


@dataclass(frozen=True)
class RunArtifact:
    directory: str
    manifest: dict

    @property
    def passed(self):
        return self.manifest["passed"]


# config files --------------------------------------------------------------------

def _parse_value(text):
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text.strip("'\"")


def read_config(path):
    if not os.path.isfile(path):
        raise ConfigurationError(f"config file not found: {path}")
    with open(path) as fh:
        text = fh.read()
    if path.endswith(".json") or text.lstrip().startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(raw, dict):
            raise ConfigurationError(f"{path}: top level must be an object")
        params = dict(raw.pop("params", {}) or {})
        for k, v in raw.items():
            if k not in META_KEYS:
                params[k] = v
        meta = {k: raw[k] for k in META_KEYS if k in raw}
        return meta, params
    meta, params = {}, {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        target = meta if key in META_KEYS else params
        target[key] = _parse_value(value)
    return meta, params


def validate(meta, params):
    """Return (kind, normalized params, errors)."""
    kind = meta.get("kind")
    if kind is None:
        errs = ["kind: missing; required keys per kind:"]
        for k in SCHEMAS:
            req = required_keys(k)
            errs.append(f"  {k}: kind" + "".join(f", {r}" for r in req))
        return None, {}, errs
    norm, errors = normalize_params(kind, params)
    sweep = meta.get("sweep")
    if sweep is not None:
        if not isinstance(sweep, dict) or not sweep:
            errors.append("sweep: must map parameter names to lists of values")
        else:
            for key, vals in sweep.items():
                if kind in SCHEMAS and key not in SCHEMAS[kind]:
                    errors.append(f"sweep.{key}: unknown parameter for {kind}")
                elif not isinstance(vals, list) or not vals:
                    errors.append(f"sweep.{key}: must be a non-empty list")
                else:
                    for v in vals:
                        _, e = normalize_params(kind, {**params, key: v})
                        errors.extend(f"sweep.{x}" for x in e if x.startswith(key + ":"))
    if sweep is not None:
        # swept keys may be absent from the base parameters
        errors = [e for e in errors
                  if not (e.split(":")[0] in (sweep or {}) and "required" in e)]
    return kind, norm, errors


# running -----------------------------------------------------------------------

def _atomic_json(path, obj):
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".manifest-", suffix=".json")
    with os.fdopen(fd, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")
    os.replace(tmp, path)


def run_scenario(meta, params, out_dir, tol_scale=1.0):
    kind, norm, errors = validate({k: v for k, v in meta.items() if k != "sweep"}, params)
    if errors:
        raise ConfigurationError("\n".join(errors))
    os.makedirs(out_dir, exist_ok=True)
    t0 = time.perf_counter()
    files, checks, notes = RUNNERS[kind](norm, out_dir, tol_scale)
    manifest = {
        "scenario": meta.get("name", kind),
        "kind": kind,
        "parameters": norm,
        "code_version": __version__,
        "environment": {"python": platform.python_version(), "numpy": np.__version__,
                        "scipy": scipy.__version__},
        "tolerance_scale": tol_scale,
        "checks": checks,
        "files": sorted(files),
        "notes": notes,
        "passed": all(c["passed"] for c in checks),
        "elapsed_seconds": round(time.perf_counter() - t0, 3),
    }
    _atomic_json(os.path.join(out_dir, "manifest.json"), manifest)
    return RunArtifact(out_dir, manifest)


def _sweep_points(meta, params):
    sweep = meta["sweep"]
    keys = sorted(sweep)
    for combo in itertools.product(*(sweep[k] for k in keys)):
        yield {**params, **dict(zip(keys, combo))}


def _run_point(args):
    meta, params, out_dir, tol_scale = args
    try:
        art = run_scenario(meta, params, out_dir, tol_scale)
        return out_dir, art.passed, None
    except NLSDeltaError as exc:
        return out_dir, False, str(exc)


def run_sweep(meta, params, out_dir, tol_scale=1.0, jobs=1):
    kind, _, errors = validate(meta, params)
    if errors:
        raise ConfigurationError("\n".join(errors))
    if "sweep" not in meta:
        raise ConfigurationError("sweep: missing (a sweep config needs a `sweep` table)")
    base = {k: v for k, v in meta.items() if k != "sweep"}
    points = list(_sweep_points(meta, params))
    tasks = [(base, pt, os.path.join(out_dir, f"point_{i:03d}"), tol_scale) for i, pt in enumerate(points)]
    os.makedirs(out_dir, exist_ok=True)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_run_point, tasks))
    else:
        results = [_run_point(t) for t in tasks]
    summary = {
        "scenario": meta.get("name", kind),
        "kind": kind,
        "points": [{"directory": os.path.basename(d), "parameters": t[1], "passed": ok, "error": err}
                   for (d, ok, err), t in zip(results, tasks)],
        "passed": all(ok for _, ok, _ in results),
    }
    _atomic_json(os.path.join(out_dir, "sweep_manifest.json"), summary)
    return summary


# command line ---------------------------------------------------------------------

def _print_checks(manifest, out):
    for c in manifest["checks"]:
        flag = "PASS" if c["passed"] else "FAIL"
        print(f"[{flag}] {c['name']}: measured={c['measured']!r} expected={c['expected']!r} "
              f"tol={c['tolerance']!r}", file=out)


def cmd_list(args):
    for kind, schema in SCHEMAS.items():
        print(f"{kind}: {DESCRIPTIONS[kind]}")
        for key, p in schema.items():
            default = "required" if p.default is REQUIRED else f"default {p.default!r}"
            print(f"    {key} ({p.kind.__name__}, {default}): {p.doc}")
    return 0


def cmd_validate(args):
    meta, params = read_config(args.config)
    kind, norm, errors = validate(meta, params)
    if errors:
        for e in errors:
            print(e, file=sys.stderr)
        return 1
    print("ok")
    print(json.dumps({"kind": kind, "parameters": norm}, indent=2, sort_keys=True))
    return 0


def _default_out(meta, config):
    base = os.path.splitext(os.path.basename(config))[0]
    return meta.get("output_dir") or os.path.join("runs", meta.get("name", base))


def cmd_run(args):
    meta, params = read_config(args.config)
    out = args.out or _default_out(meta, args.config)
    art = run_scenario(meta, params, out, args.tol_scale)
    if not args.quiet:
        _print_checks(art.manifest, sys.stdout)
        print(f"outputs in {out}")
    return 0 if art.passed else 1


def cmd_sweep(args):
    meta, params = read_config(args.config)
    out = args.out or _default_out(meta, args.config)
    summary = run_sweep(meta, params, out, args.tol_scale, args.jobs)
    if not args.quiet:
        for pt in summary["points"]:
            flag = "PASS" if pt["passed"] else "FAIL"
            extra = f" ({pt['error']})" if pt["error"] else ""
            print(f"[{flag}] {pt['directory']}{extra}")
        print(f"outputs in {out}")
    return 0 if summary["passed"] else 1


def build_parser():
    p = argparse.ArgumentParser(prog="nlsdelta", description="NLS delta-impurity scenario runner")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list scenario kinds and parameters").set_defaults(func=cmd_list)
    v = sub.add_parser("validate", help="check a config without running it")
    v.add_argument("config")
    v.set_defaults(func=cmd_validate)
    for name, func, helptext in (("run", cmd_run, "run one scenario"),
                                 ("sweep", cmd_sweep, "run a parameter grid")):
        r = sub.add_parser(name, help=helptext)
        r.add_argument("config")
        r.add_argument("--out", help="output directory")
        r.add_argument("--quiet", action="store_true", help="suppress the check summary")
        r.add_argument("--tol-scale", type=float, default=1.0,
                       help="multiply every acceptance tolerance by this factor")
        if name == "sweep":
            r.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
        r.set_defaults(func=func)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "tol_scale", 1.0) <= 0:
        print("--tol-scale must be positive", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except InstabilityError as exc:
        print(f"solver instability at step {exc.step}: {exc}", file=sys.stderr)
        return 3
    except ConfigurationError as exc:
        for line in str(exc).splitlines():
            print(line, file=sys.stderr)
        return 2
    except NLSDeltaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
