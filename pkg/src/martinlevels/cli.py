"""Command-line surface: reproducible level-set, audit, and Green-ratio runs.

Subcommands: levelsets | audit | green | slice-scan | asymptotics.
Global flags: --config PATH, --out DIR, --seed N, --verbose.  Exit codes:
0 success, 1 runtime/solver failure, 2 invalid configuration.  The
environment variable MARTIN_THREADS caps internal parallelism (checks run
sequentially when it is 1 or unset).

All randomness used for sample placement comes from the seeded xorshift64*
generator, and all JSON/CSV outputs are deterministic for a fixed config and
seed; wall-clock timings go to a separate ``*.timings.json`` sidecar so the
main reports stay byte-reproducible.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
import zlib
from dataclasses import dataclass

import numpy as np

from . import export, fields, geometry, greenratio, levelset, slices
from ._rng import XorShift64Star


class ConfigError(ValueError):
    pass


def thread_cap():
    raw = os.environ.get("MARTIN_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    """One JSON file describing a reproducible experiment."""

    raw: dict
    seed: int = 0
    out_dir: str = "."

    @classmethod
    def load(cls, path, out_dir=None, seed=None):
        try:
            with open(path) as f:
                raw = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}")
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
        cfg = cls(raw=raw,
                  seed=int(raw.get("seed", 0)) if seed is None else seed,
                  out_dir=out_dir or raw.get("out", "."))
        return cfg

    def field(self):
        name = self.raw.get("field")
        if not name:
            raise ConfigError("config needs a 'field' registry name")
        try:
            return fields.field_from_name(name)
        except fields.FieldError as e:
            raise ConfigError(str(e))

    def window(self, key="window", default=None):
        w = self.raw.get(key)
        if w is None:
            if default is not None:
                return default
            raise ConfigError(f"config needs '{key}' [[x0, y0], [x1, y1]]")
        try:
            return geometry.WindowBox(tuple(w[0]), tuple(w[1]))
        except (geometry.GeometryError, TypeError, IndexError) as e:
            raise ConfigError(f"bad window {w!r}: {e}")

    def levels(self):
        levels = self.raw.get("levels", [])
        if not levels:
            raise ConfigError("config needs a nonempty 'levels' grid")
        try:
            out = [float(c) for c in levels]
        except (TypeError, ValueError):
            raise ConfigError(f"bad level grid {levels!r}")
        if any(c <= 0.0 for c in out):
            raise ConfigError("levels must be positive")
        return out


@dataclass
class RunReport:
    command: str
    config: dict
    verdicts: dict
    seed: int
    tool_version: str = export.TOOL_VERSION

    def as_json(self):
        return {"command": self.command, "config": self.config, "seed": self.seed,
                "tool_version": self.tool_version, "verdicts": self.verdicts}


def _write_report(out_dir, name, report: RunReport, timings):
    path = os.path.join(out_dir, name)
    export.write_json(path, report.as_json())
    export.write_json(path.replace(".json", ".timings.json"), timings)
    return path


# ---------------------------------------------------------------------------
# levelsets
# ---------------------------------------------------------------------------

def cmd_levelsets(args):
    cfg = ExperimentConfig.load(args.config, out_dir=args.out, seed=args.seed)
    fld = cfg.field()
    window = cfg.window(default=fld.default_window)
    levels = cfg.levels()
    h = float(cfg.raw.get("h", 0.02))
    t0 = time.perf_counter()
    curves = []
    for c in levels:
        curves.extend(levelset.extract_level_curve(fld, c, window, h))
    if not curves:
        print("no level curve found in the window", file=sys.stderr)
        return 1
    out = cfg.out_dir
    payload = {"field": fld.name, "h": h,
               "window": [list(window.lower), list(window.upper)],
               "curves": [{"level": c.level, "closed": c.closed,
                           "points": [[round(float(x), 12), round(float(y), 12)]
                                      for x, y in c.vertices]}
                          for c in curves]}
    export.write_json(os.path.join(out, "levels.json"), payload)
    export.write_csv(os.path.join(out, "levels.csv"),
                     ["curve", "level", "x", "y"],
                     [(k, c.level, repr(float(x)), repr(float(y)))
                      for k, c in enumerate(curves) for x, y in c.vertices])
    export.write_svg_levels(os.path.join(out, "levels.svg"), curves, window,
                            title=f"level sets of {fld.name}")
    if args.verbose:
        print(f"levelsets: {len(curves)} curves in {time.perf_counter() - t0:.1f}s -> {out}")
    return 0


# ---------------------------------------------------------------------------
# audit
# ---------------------------------------------------------------------------

def _check_harmonicity(fld, rng, params):
    window = fld.default_window
    n = int(params.get("n_points", 30))
    pts = []
    while len(pts) < n:
        p = np.asarray(rng.point_in_box(window.lower, window.upper))
        try:
            if fld.domain.contains(p) and fld.domain.boundary_distance(p) > 0.05:
                pts.append(p)
        except geometry.GeometryError:
            continue
    hs = [1e-2, 1e-3, 1e-4]
    maxres = []
    for h in hs:
        worst = 0.0
        for p in pts:
            try:
                worst = max(worst, abs(fields.harmonicity_residual(fld, p, h)))
            except fields.FieldError:
                continue
        maxres.append(worst)
    order = float(np.polyfit(np.log(hs), np.log(maxres), 1)[0])
    return order >= 1.9, {"fitted_order": order, "max_residuals": maxres}


def _check_boundary(fld, rng, params):
    rep = fields.boundary_vanishing(fld, n_samples=int(params.get("n_samples", 200)),
                                    tol=float(params.get("tol", 1e-8)))
    return rep.passed, {"max_abs": rep.max_abs, "worst_point": list(rep.worst_point)}


def _check_convexity(fld, rng, params):
    window = fld.default_window
    h = float(params.get("h", 0.02))
    levels = [float(c) for c in params.get("levels", [0.5, 1.0, 2.0])]
    verdicts = {}
    ok = True
    for c in levels:
        curves = levelset.extract_level_curve(fld, c, window, h)
        if not curves:
            verdicts[str(c)] = "level not attained"
            ok = False
            continue
        closure = levelset.window_closure_points(curves, window, fld, c)
        rep = levelset.convexity_test(curves, closure=closure, tol=2.0 * h, fld=fld, level=c)
        verdicts[str(c)] = rep.verdict
        ok = ok and rep.verdict == "convex"
    return ok, {"levels": verdicts}


def _check_slice_maxima(fld, rng, params):
    ts = [float(t) for t in params.get("t", [1.0, 2.0])]
    span = params.get("span")
    details = {}
    ok = True
    for t in ts:
        rep = slices.slice_scan(fld, t, span=span)
        on_axis = abs(rep.argmax[1]) <= 1e-6
        details[str(t)] = {"argmax_y": rep.argmax[1], "max": rep.max_value}
        ok = ok and on_axis
    return ok, details


def _check_strictness(fld, rng, params):
    levels = [float(c) for c in params.get("levels", [0.5, 1.0, 2.0])]
    cls = levelset.classify_strictness(fld, levels, window=fld.default_window,
                                       h=float(params.get("h", 0.02)))
    want = params.get("expect_tag", "strictly_convex_everywhere")
    ok = all(tag == want for tag in cls.tags.values())
    return ok, {"tags": {str(k): v for k, v in cls.tags.items()}}


AUDIT_CHECKS = {
    "harmonicity": _check_harmonicity,
    "boundary_vanishing": _check_boundary,
    "convexity": _check_convexity,
    "slice_maxima": _check_slice_maxima,
    "strictness": _check_strictness,
}


def cmd_audit(args):
    cfg = ExperimentConfig.load(args.config, out_dir=args.out, seed=args.seed)
    fld = cfg.field()
    spec_list = cfg.raw.get("checks")
    if not spec_list:
        raise ConfigError("audit config needs a nonempty 'checks' list")
    jobs = []
    for item in spec_list:
        if isinstance(item, str):
            item = {"name": item}
        name = item.get("name")
        if name not in AUDIT_CHECKS:
            raise ConfigError(f"unknown check {name!r}; known: {sorted(AUDIT_CHECKS)}")
        jobs.append((name, item))

    verdicts = {}
    timings = {}
    failed_required = False
    cap = thread_cap()

    def run_one(entry):
        name, item = entry
        # process-independent per-check seed (hash() is salted per process)
        rng = XorShift64Star(cfg.seed ^ zlib.crc32(name.encode()))
        t0 = time.perf_counter()
        try:
            passed, details = AUDIT_CHECKS[name](fld, rng, item.get("params", {}))
            err = None
        except Exception as e:   # a failing check must not kill the audit
            passed, details, err = False, {}, f"{type(e).__name__}: {e}"
        return name, item, passed, details, err, time.perf_counter() - t0

    if cap > 1 and len(jobs) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=min(cap, len(jobs))) as pool:
            results = list(pool.map(run_one, jobs))
    else:
        results = [run_one(j) for j in jobs]

    for name, item, passed, details, err, dt in results:
        expected = bool(item.get("expected", True))
        required = bool(item.get("required", True))
        ok = (passed == expected)
        verdicts[name] = {"passed": passed, "expected": expected, "ok": ok,
                          "required": required, "details": details}
        if err:
            verdicts[name]["error"] = err
        timings[name] = dt
        if required and not ok:
            failed_required = True
        if args.verbose:
            flag = "ok" if ok else "FAIL"
            print(f"[{flag}] {name}: passed={passed} expected={expected} ({dt:.1f}s)")

    report = RunReport(command="audit", config=cfg.raw, verdicts=verdicts, seed=cfg.seed)
    path = _write_report(cfg.out_dir, "report.json", report, timings)
    if args.verbose:
        print(f"audit report -> {path}")
    return 1 if failed_required else 0


# ---------------------------------------------------------------------------
# green
# ---------------------------------------------------------------------------

_RATIO_ORACLES = {
    "strip": "strip",
    "halfplane_minus_disk": "exterior",
}


def _parse_floats(text):
    try:
        return [float(v) for v in str(text).split(",") if v != ""]
    except ValueError:
        raise ConfigError(f"cannot parse float list {text!r}")


def _green_ring_mode(cfg, domain, raw, args):
    """Theorem-style ring run: direct solve plus per-level convexity verdicts."""
    h = float(args.h or raw.get("h", 0.05))
    levels = [float(c) for c in raw.get("levels", [0.25, 0.5, 0.75])]
    lo = domain.outer.vertices.min(axis=0)
    hi = domain.outer.vertices.max(axis=0)
    grid = greenratio.build_grid(domain, geometry.WindowBox(tuple(lo), tuple(hi)), h)
    sol = greenratio.solve_dirichlet(grid, boundary_values=greenratio.ring_dirichlet_data(grid))
    interior = grid.mask == greenratio.INTERIOR
    inner = greenratio.inner_body_nodes(grid)
    verdicts = {}
    for c in levels:
        cloud = greenratio.superlevel_boundary_nodes(sol, c, extra_member=inner)
        rep = levelset.convexity_test(cloud, tol=2 * grid.h)
        verdicts[f"{c:g}"] = {"verdict": rep.verdict, "hull_deviation": rep.hull_deviation}
    payload = {
        "mode": "ring",
        "h": h,
        "levels": levels,
        "interior_nodes": grid.interior_count(),
        "value_range": [float(sol.values[interior].min()), float(sol.values[interior].max())],
        "max_principle": bool(sol.values[interior].min() >= 0.0
                              and sol.values[interior].max() <= 1.0),
        "convexity": verdicts,
    }
    out_path = os.path.join(cfg.out_dir, args.ratio_out or raw.get("ratio_out", "ring.json"))
    export.write_json(out_path, payload)
    if args.verbose:
        print(f"green (ring mode): {verdicts} -> {out_path}")
    return 0


def cmd_green(args):
    if args.config:
        cfg = ExperimentConfig.load(args.config, out_dir=args.out, seed=args.seed)
        raw = cfg.raw
    else:
        raw = {}
        cfg = ExperimentConfig(raw=raw, seed=args.seed or 0, out_dir=args.out or ".")
    domain_name = args.domain or raw.get("domain")
    if not domain_name:
        raise ConfigError("green needs --domain or a config 'domain'")
    try:
        domain = geometry.domain_from_config(domain_name)
    except geometry.GeometryError as e:
        raise ConfigError(str(e))
    if isinstance(domain, geometry.ConvexRing):
        return _green_ring_mode(cfg, domain, raw, args)
    x0 = _parse_floats(args.x0 or ",".join(map(str, raw.get("x0", []))))
    poles = _parse_floats(args.poles or ",".join(map(str, raw.get("poles", []))))
    if len(x0) != 2 or not poles:
        raise ConfigError("green needs --x0 x,y and --poles s1,s2,...")
    h = float(args.h or raw.get("h", 0.05))
    probe_vals = _parse_floats(args.probe) if args.probe else raw.get("probe")
    if probe_vals is None:
        raise ConfigError("green needs --probe x0,x1[,y0,y1]")
    if len(probe_vals) == 2:
        half = (domain.truncation_window(poles[0]).upper[1]) * 0.8
        probe = geometry.WindowBox((probe_vals[0], -half), (probe_vals[1], half))
    elif len(probe_vals) == 4:
        probe = geometry.WindowBox((probe_vals[0], probe_vals[2]), (probe_vals[1], probe_vals[3]))
    else:
        raise ConfigError("--probe takes 2 or 4 comma-separated values")

    try:
        mcfg = greenratio.MartinApproxConfig(x0=tuple(x0), poles=tuple(poles), probe_window=probe)
    except geometry.GeometryError as e:
        raise ConfigError(str(e))

    t0 = time.perf_counter()
    try:
        result = greenratio.martin_ratio(domain, mcfg, h)
    except geometry.GeometryError as e:
        raise ConfigError(str(e))
    probe_vals_final = np.asarray([result.final.value(p) for p in result.probe_points])

    payload = {
        "domain": domain.kind,
        "h": h,
        "x0": list(mcfg.x0),
        "poles": list(mcfg.poles),
        "cauchy": result.cauchy,
        "probe_window": [list(probe.lower), list(probe.upper)],
        "probe_shape": list(mcfg.probe_shape),
        "probe_order": "row-major over (x, y): x varies slowest, y fastest",
        "probe_values": [float(v) for v in probe_vals_final],
        "iterates": [{"pole": it.pole,
                      "window": [list(it.grid.window.lower), list(it.grid.window.upper)],
                      "interior_nodes": it.grid.interior_count()}
                     for it in result.iterates],
    }
    oracle = _RATIO_ORACLES.get(domain.kind)
    if oracle:
        fld = fields.field_from_name(oracle)
        exact = np.asarray([fld.value(p) / fld.value(np.asarray(mcfg.x0))
                            for p in result.probe_points])
        rel = np.abs(probe_vals_final - exact) / np.abs(exact)
        payload["closed_form"] = {"field": oracle, "max_rel_error": float(rel.max())}
    out_path = os.path.join(cfg.out_dir, args.ratio_out or raw.get("ratio_out", "ratio.json"))
    export.write_json(out_path, payload)
    export.write_json(out_path.replace(".json", ".timings.json"),
                      {"total": time.perf_counter() - t0})
    if args.verbose:
        print(f"green: {len(poles)} poles, cauchy={result.cauchy} -> {out_path}")
    return 0


# ---------------------------------------------------------------------------
# slice-scan
# ---------------------------------------------------------------------------

def cmd_slice_scan(args):
    try:
        fld = fields.field_from_name(args.field)
    except fields.FieldError as e:
        raise ConfigError(str(e))
    ts = _parse_floats(args.t)
    if not ts:
        raise ConfigError("slice-scan needs --t t1,t2,...")
    span = float(args.span) if args.span else None
    out = {}
    for t in ts:
        rep = slices.slice_scan(fld, t, span=span)
        rays = []
        for direction in (+1.0, -1.0):
            try:
                ray = slices.ray_monotonicity(fld, t, direction, length=span)
                rays.append({"direction": direction, "decreasing": ray.decreasing,
                             "first_violation": list(ray.first_violation) if ray.first_violation else None})
            except geometry.GeometryError:
                rays.append({"direction": direction, "decreasing": None,
                             "first_violation": None})
        out[f"{t:g}"] = {"argmax": list(rep.argmax), "max": rep.max_value,
                         "center": rep.center_value, "rays": rays}
    path = args.out_file or "slices.json"
    export.write_json(os.path.join(args.out or ".", path), {"field": fld.name, "slices": out})
    return 0


# ---------------------------------------------------------------------------
# asymptotics
# ---------------------------------------------------------------------------

def _parse_radii(text):
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ConfigError("--radii takes lo:hi:count")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    return np.geomspace(lo, hi, n)


def cmd_asymptotics(args):
    checks = [c.strip() for c in (args.check or "f-decay,hess-residual").split(",") if c.strip()]
    radii = _parse_radii(args.radii or "5:80:12")
    payload = {}
    u = fields.slit_sector_martin()
    v = fields.halfplane_v()
    for check in checks:
        if check == "f-decay":
            def fprime_mag(r):
                z = complex(r)
                w = np.sqrt(z ** 4 - 1.0)
                return abs(2.0 * z - 2.0 * z ** 3 / w)

            def fsecond_mag(r):
                z = complex(r)
                w = np.sqrt(z ** 4 - 1.0)
                return abs(2.0 - 6.0 * z ** 2 / w + 4.0 * z ** 6 / w ** 3)

            f1 = slices.decay_fit(fprime_mag, radii)
            f2 = slices.decay_fit(fsecond_mag, radii)
            payload["f-decay"] = {"fprime_slope": f1.slope, "fsecond_slope": f2.slope,
                                  "radii": [float(r) for r in radii]}
        elif check == "hess-residual":
            fit, largest = slices.tangent_form_asymptotic(u, v, radii)
            payload["hess-residual"] = {"slope": fit.slope,
                                        "largest_nonnegative_radius": largest,
                                        "radii": [float(r) for r in radii]}
        else:
            raise ConfigError(f"unknown asymptotics check {check!r}")
    path = os.path.join(args.out or ".", args.out_file or "decay.json")
    export.write_json(path, payload)
    return 0


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="martin",
                                description="level-set convexity and Green-ratio experiments")
    p.add_argument("--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", default=None)
        sp.add_argument("--out", default=".")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--verbose", action="store_true")

    sp = sub.add_parser("levelsets", help="extract contours and emit JSON/CSV/SVG")
    common(sp)
    sp.set_defaults(func=cmd_levelsets, needs_config=True)

    sp = sub.add_parser("audit", help="run a configured check suite")
    common(sp)
    sp.set_defaults(func=cmd_audit, needs_config=True)

    sp = sub.add_parser("green", help="Green-ratio pipeline")
    common(sp)
    sp.add_argument("--domain")
    sp.add_argument("--x0")
    sp.add_argument("--poles")
    sp.add_argument("--h")
    sp.add_argument("--probe")
    sp.add_argument("--ratio-out", dest="ratio_out")
    sp.set_defaults(func=cmd_green, needs_config=False)

    sp = sub.add_parser("slice-scan", help="slice maxima and ray monotonicity")
    common(sp)
    sp.add_argument("--field", required=True)
    sp.add_argument("--t", required=True)
    sp.add_argument("--span")
    sp.add_argument("--out-file", dest="out_file")
    sp.set_defaults(func=cmd_slice_scan, needs_config=False)

    sp = sub.add_parser("asymptotics", help="decay and residual slope fits")
    common(sp)
    sp.add_argument("--check")
    sp.add_argument("--radii")
    sp.add_argument("--out-file", dest="out_file")
    sp.set_defaults(func=cmd_asymptotics, needs_config=False)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "needs_config", False) and not args.config:
        print("error: this command needs --config PATH", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (greenratio.SolverError, fields.FieldError, levelset.LevelSetError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def green_martin_main(argv=None):
    """Alias entry point: `green-martin ...` == `martin green ...`."""
    return main(["green"] + list(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    sys.exit(main())
