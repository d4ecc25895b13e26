"""Command line driver.

Usage::

    lcqft --suite clifford [--config FILE] [--seed N] [--out PATH] [--format json|csv]
    lcqft cone-check CONFIGS.json [--null-geodesic] [--loops]
    lcqft wf-scan --dist step [--x 0 0 0 0]
    lcqft deform SCENARIO.json [--out PATH]

Exit codes: 0 when no check fails, 1 when some check fails, 2 for usage or
configuration errors. The config path may also come from ``LCQFT_CONFIG``.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .suites import DEFAULTS, SUITES, SuiteReport, UnknownSuite, metric_preset, run_suite, suite_names

__all__ = ["ConfigParse", "load_config", "export", "report_to_csv", "report_to_json", "main", "load_scenario"]

ENV_CONFIG = "LCQFT_CONFIG"

# keys accepted in addition to the defaults of each suite
_EXTRA_KEYS = {"geometry": {"metrics"}, "lattice-kg": {"cfl"}}


class ConfigParse(ValueError):
    """Malformed configuration file; the message names the offending line."""

    def __init__(self, path: str, line: Optional[int], msg: str) -> None:
        self.path, self.line = path, line
        where = f"{path}:{line}" if line is not None else path
        super().__init__(f"{where}: {msg}")


def _line_of(text: str, section: str, key: Optional[str] = None) -> Optional[int]:
    current = None
    for no, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
            if key is None and current == section:
                return no
        elif key is not None and current == section:
            name = s.split("=", 1)[0].split(":", 1)[0].strip()
            if name == key:
                return no
    return None


def _value(raw: str):
    try:
        return float(raw)
    except ValueError:
        return raw.strip()


def load_config(path: str | os.PathLike) -> tuple[dict[str, dict], Optional[int]]:
    """Parse a per-suite key-value config.

    Returns the parameter overrides per suite and the seed from an optional
    ``[run]`` section.

    Raises
    ------
    ConfigParse
        With the line number of the first problem found.
    """
    path = str(path)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigParse(path, None, f"cannot read config: {exc.strerror}") from exc
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keys are case sensitive (``N`` is the Fock truncation)
    try:
        cp.read_string(text, source=path)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigParse(path, exc.lineno, "key outside of any [section]") from exc
    except configparser.ParsingError as exc:
        line = exc.errors[0][0]
        src = text.splitlines()[line - 1].strip()
        raise ConfigParse(path, line, f"expected 'key = value' or '[section]', got {src!r}") from exc
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigParse(path, exc.lineno, exc.message.split(":", 1)[-1].strip()) from exc

    params: dict[str, dict] = {}
    seed = None
    for section in cp.sections():
        if section == "run":
            for key, raw in cp.items(section):
                if key != "seed":
                    raise ConfigParse(path, _line_of(text, section, key), f"unknown key {key!r} in [run]")
                try:
                    seed = int(raw)
                except ValueError:
                    raise ConfigParse(path, _line_of(text, section, key), f"seed must be an integer, got {raw!r}")
            continue
        if section not in SUITES:
            raise ConfigParse(path, _line_of(text, section), f"unknown suite section [{section}]")
        allowed = set(DEFAULTS[section]) | _EXTRA_KEYS.get(section, set())
        out = {}
        for key, raw in cp.items(section):
            line = _line_of(text, section, key)
            val = _value(raw)
            if key.startswith("tol."):
                if not isinstance(val, float):
                    raise ConfigParse(path, line, f"tolerance {key!r} must be numeric")
            elif key not in allowed:
                raise ConfigParse(path, line, f"unknown key {key!r} for suite {section!r}")
            elif key == "metrics":
                try:
                    for t in raw.split(";"):
                        if t.strip():
                            metric_preset(t)
                except ValueError as exc:
                    raise ConfigParse(path, line, str(exc)) from exc
            elif not isinstance(val, float):
                raise ConfigParse(path, line, f"value of {key!r} must be numeric, got {raw!r}")
            out[key] = val
        params[section] = out
    return params, seed


# ----------------------------------------------------------------------
# export
# ----------------------------------------------------------------------


def report_to_json(report: SuiteReport, timing: bool = True) -> str:
    d = report.to_dict()
    if not timing:
        d["wall_time_ms"] = 0.0
    return json.dumps(d, indent=2, sort_keys=True) + "\n"


def report_to_csv(report: SuiteReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["suite", "name", "status", "metric", "tolerance"])
    for c in report.checks:
        w.writerow([report.suite, c.name, c.status, repr(c.metric), repr(c.tolerance)])
    return buf.getvalue()


def export(report: SuiteReport, fmt: str, path: Optional[str], timing: bool = True) -> None:
    """Write ``report`` as JSON or CSV to ``path`` (stdout when ``None`` or ``-``)."""
    if fmt == "json":
        text = report_to_json(report, timing)
    elif fmt == "csv":
        text = report_to_csv(report)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------


def _cone_check(args) -> int:
    from .microlocal_cones import CovectorConfig, ZeroSection, in_gamma_n

    data = json.loads(Path(args.configs).read_text())
    results = []
    for entry in data:
        cfg = CovectorConfig.from_pairs([(p[0], p[1]) for p in entry])
        try:
            v = in_gamma_n(cfg, null_geodesic_variant=args.null_geodesic, loops=args.loops)
            results.append(
                {
                    "member": v.member,
                    "method": v.method,
                    "margin": v.margin,
                    "certificate": [[int(i), int(j), np.asarray(p).tolist()] for (i, j), p in sorted(v.certificate.items())],
                }
            )
        except ZeroSection:
            results.append({"member": False, "method": "zero-section", "margin": 0.0, "certificate": []})
    _write(json.dumps(results, indent=2) + "\n", args.out)
    return 0


_DISTRIBUTIONS = ("delta", "gaussian", "step", "plane-delta")


def _distribution(name: str):
    from .microlocal_cones import GaussianFunction, HeavisideGaussian, PlaneDelta, PointDelta

    if name == "delta":
        return PointDelta(np.zeros(4))
    if name == "gaussian":
        return GaussianFunction(np.eye(4))
    if name == "step":
        return HeavisideGaussian.time_step()
    return PlaneDelta(np.array([0.0, 1.0, 0.0, 0.0]))


def _wf_scan(args) -> int:
    from .microlocal_cones import wf_decay_scan

    r = wf_decay_scan(_distribution(args.dist), np.asarray(args.x, float), width=args.width, n_star=args.n_star)
    out = {
        "distribution": args.dist,
        "x": list(map(float, args.x)),
        "n_star": r.n_star,
        "directions": [
            {"xi": d.tolist(), "slope": float(s), "singular": bool(g)}
            for d, s, g in zip(r.directions, r.slopes, r.singular)
        ],
    }
    _write(json.dumps(out, indent=2) + "\n", args.out)
    return 0


def _profile(prof, nt: int, nx: int, dx: float) -> np.ndarray:
    """``1`` plus an optional cosine-squared bump, or an explicit table."""
    if isinstance(prof, (int, float)):
        return np.full((nt, nx), float(prof))
    if isinstance(prof, list):
        arr = np.asarray(prof, dtype=float)
        return np.broadcast_to(arr, (nt, nx)).copy()
    base = float(prof.get("value", 1.0))
    out = np.full((nt, nx), base)
    if "bump" in prof:
        b = prof["bump"]
        x = np.arange(nx) * dx
        c, w, hgt = float(b["center"]), float(b["half_width"]), float(b["height"])
        out += np.where(np.abs(x - c) < w, hgt * np.cos(np.pi * (x - c) / (2 * w)) ** 2, 0.0)[None, :]
    return out


def load_scenario(data: dict):
    """Build ``(DeformationSpec, K1, K2, floor)`` from a scenario dictionary.

    See the README for the format.
    """
    from .causal_lattice import DeformationSpec, LatticeSpacetime, Region

    g = data["grid"]
    nt, nx, dt, dx = int(g["nt"]), int(g["nx"]), float(g["dt"]), float(g["dx"])

    def metric(m):
        return LatticeSpacetime(_profile(m.get("beta", 1.0), nt, nx, dx), _profile(m.get("h", 1.0), nt, nx, dx), dt, dx)

    g1, g2 = metric(data.get("g1", {})), metric(data.get("g2", {}))
    deformation = DeformationSpec(g1, g2, tuple(int(r) for r in data["slab"]))

    def box(b):
        return Region.box(g1, tuple(b["rows"]), tuple(b["cols"]))

    return deformation, box(data["K1"]), box(data["K2"]), float(data.get("floor", 2.0**-20))


def _deform(args) -> int:
    from .causal_lattice import deform_and_certify

    deformation, K1, K2, floor = load_scenario(json.loads(Path(args.scenario).read_text()))
    res = deform_and_certify(deformation, K1, K2, floor=floor)
    out = {
        "certified": res.certified,
        "beta_scale": res.beta_scale,
        "halvings": res.halvings,
        "history": [{"beta_scale": float(s), "inner": bool(i), "outer": bool(o)} for s, i, o in res.history],
    }
    _write(json.dumps(out, indent=2) + "\n", args.out)
    return 0 if res.certified else 1


def _write(text: str, path: Optional[str]) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# ----------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lcqft", description="Run verification suites and tools.")
    p.add_argument("--suite", choices=suite_names(), help="suite to run")
    p.add_argument("--config", help=f"per-suite config file (default: ${ENV_CONFIG})")
    p.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--no-timing", action="store_true", help="zero wall_time_ms for byte-stable output")
    sub = p.add_subparsers(dest="command")

    c = sub.add_parser("cone-check", help="Gamma_n membership for configs in a JSON file")
    c.add_argument("configs", help="JSON list of configs, each a list of [x, xi] pairs")
    c.add_argument("--null-geodesic", action="store_true")
    c.add_argument("--loops", action="store_true", help="allow loop terms in the balance")
    c.add_argument("--out", default=None)

    w = sub.add_parser("wf-scan", help="scan a built-in distribution for singular directions")
    w.add_argument("--dist", choices=_DISTRIBUTIONS, required=True)
    w.add_argument("--x", type=float, nargs=4, default=[0.0, 0.0, 0.0, 0.0])
    w.add_argument("--width", type=float, default=1.0)
    w.add_argument("--n-star", type=float, default=6.0)
    w.add_argument("--out", default=None)

    d = sub.add_parser("deform", help="certify K1 within D(K2) for a scenario file")
    d.add_argument("scenario")
    d.add_argument("--out", default=None)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        if args.command == "cone-check":
            return _cone_check(args)
        if args.command == "wf-scan":
            return _wf_scan(args)
        if args.command == "deform":
            return _deform(args)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"lcqft: error: {exc}", file=sys.stderr)
        return 2
    if args.suite is None:
        parser.print_usage(sys.stderr)
        print("lcqft: error: --suite or a subcommand is required", file=sys.stderr)
        return 2

    params: dict = {}
    seed = None
    cfg_path = args.config or os.environ.get(ENV_CONFIG)
    if cfg_path:
        try:
            params, seed = load_config(cfg_path)
        except ConfigParse as exc:
            print(f"lcqft: config error: {exc}", file=sys.stderr)
            return 2
    if args.seed is not None:
        seed = args.seed
    try:
        report = run_suite(args.suite, params, seed or 0)
    except UnknownSuite as exc:
        print(f"lcqft: unknown suite {exc}", file=sys.stderr)
        return 2
    try:
        export(report, args.format, args.out, timing=not args.no_timing)
    except OSError as exc:
        print(f"lcqft: cannot write report: {exc}", file=sys.stderr)
        return 2
    return 1 if report.failed else 0


if __name__ == "__main__":
    sys.exit(main())
