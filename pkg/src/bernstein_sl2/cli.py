"""Command line entry point: ``bernstein-sl2 {tables,verify,ft,census}``.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration
error, 3 budget refusal.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import latticeft as lft
from .classes import ConvergenceError, Depth, depths_upto
from .projectors import supercuspidal_census
from .qfield import is_odd_prime
from .sl2fq import BudgetError
from .suites import SUITES, SuiteConfig, run_suite
from .tables import RENDERERS, build_tables

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    q_list: list[int] = field(default_factory=lambda: [3])
    p_list: list[int] = field(default_factory=list)
    depth_max: Depth = Depth(2)
    suites: list[str] = field(default_factory=list)
    ell_max: Optional[int] = None
    point_budget: Optional[int] = None
    fmt: str = "md"
    out: Optional[Path] = None
    kim_depths: list[Depth] = field(default_factory=lambda: [Depth(2)])

    def suite_config(self) -> SuiteConfig:
        return SuiteConfig(
            q_list=self.q_list,
            p_list=self.p_list,
            depth_max=self.depth_max,
            ell_max=self.ell_max,
            budget=self.point_budget,
            kim_depths=self.kim_depths,
        )


def _primes(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"not a list of integers: {text!r}")
    bad = [v for v in values if not is_odd_prime(v)]
    if bad or not values:
        raise UsageError(f"expected odd primes, got {text!r}")
    return values


def _depth(text: str) -> Depth:
    try:
        d = Depth.of(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a half-integral depth: {text!r}")
    return d


def _positive_int(text: str, name: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise UsageError(f"{name} must be an integer, got {text!r}")
    if value < 0 or (name == "budget" and value == 0):
        raise UsageError(f"{name} must be positive")
    return value


CONFIG_KEYS = {"q", "p", "depth_max", "suites", "ell_max", "budget", "format", "out", "kim_depths"}


def read_config_file(path: Path) -> dict[str, str]:
    """Flat ``key = value`` file; '#' starts a comment."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{n}: unknown key {key!r}")
        out[key] = value
    return out


def build_config(args: argparse.Namespace, environ_budget: Optional[str] = None) -> RunConfig:
    # precedence: command-line flags, then BERNSTEIN_BUDGET (budget only), then the config file
    raw: dict[str, str] = {}
    if getattr(args, "config", None):
        raw.update(read_config_file(Path(args.config)))
    if environ_budget:
        raw["budget"] = environ_budget
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = value if isinstance(value, str) else ",".join(value) if isinstance(value, list) else str(value)
    cfg = RunConfig()
    if "q" in raw:
        cfg.q_list = _primes(raw["q"])
    if "p" in raw:
        cfg.p_list = _primes(raw["p"])
    if "depth_max" in raw:
        cfg.depth_max = _depth(raw["depth_max"])
    if "suites" in raw:
        cfg.suites = [s.strip() for s in raw["suites"].split(",") if s.strip()]
        unknown = [s for s in cfg.suites if s not in SUITES]
        if unknown:
            raise UsageError(f"unknown suite(s) {', '.join(unknown)}; choose from {', '.join(SUITES)}")
    if "ell_max" in raw:
        cfg.ell_max = _positive_int(raw["ell_max"], "ell_max")
    if "budget" in raw:
        cfg.point_budget = _positive_int(raw["budget"], "budget")
    if "format" in raw:
        if raw["format"] not in RENDERERS:
            raise UsageError(f"format must be one of {', '.join(RENDERERS)}")
        cfg.fmt = raw["format"]
    if "out" in raw:
        cfg.out = Path(raw["out"])
    if "kim_depths" in raw:
        cfg.kim_depths = [_depth(x) for x in raw["kim_depths"].split(",") if x.strip()]
    return cfg


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {out}: {exc.strerror or exc}") from exc


# commands


def cmd_tables(cfg: RunConfig) -> int:
    tables = []
    for q in cfg.q_list:
        tables.extend(build_tables(q, cfg.depth_max))
    _emit(RENDERERS[cfg.fmt](tables), cfg.out)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    suites = cfg.suites or list(SUITES)
    reports = [run_suite(name, cfg.suite_config()) for name in suites]
    ok = all(r.passed for r in reports)
    if cfg.fmt == "json" or cfg.out is not None:
        doc = {"pass": ok, "suites": [r.to_json(include_cases=cfg.out is not None) for r in reports]}
        _emit(json.dumps(doc, indent=2) + "\n", cfg.out)
    if cfg.out is not None:
        # sigma fixtures next to the report, in the same layout as `tables --format csv`
        for r in reports:
            for q, text in r.extra.get("sigma_csv", {}).items():
                _emit(text, cfg.out.with_name(f"{cfg.out.stem}.sigma-q{q}.csv"))
    if cfg.fmt != "json" or cfg.out is not None:
        for r in reports:
            s = r.summary()
            status = "PASS" if r.passed else "FAIL"
            print(f"{r.suite}: {status} ({s['passed']}/{s['cases']} cases)")
            for key, value in sorted(r.extra.items()):
                if key in ("constants", "g_half_values"):
                    print(f"  {key}: {json.dumps(value, sort_keys=True)}")
                elif key == "inconclusive":
                    for case in value:
                        print(f"  inconclusive (budget): p={case['p']} d={case['d']} Y={case['Y']}")
            for f in r.failures[:10]:
                print(f"  failed: {json.dumps(f.inputs, default=str)} expected {f.expected} got {f.got}")
    return EXIT_OK if ok else EXIT_FAIL


_ENTRY_RE = re.compile(r"^(-?\d+)(?:/(\d+|p)(?:\^(\d+))?)?$")


def parse_entry(text: str, p: int) -> Fraction:
    """Parse '3', '-2/5', '1/p', '1/p^2' or '1/3^2'."""
    match = _ENTRY_RE.match(text.strip().replace(" ", ""))
    if not match:
        raise UsageError(f"cannot parse matrix entry {text!r}")
    num, base, exp = match.groups()
    value = Fraction(int(num))
    if base is None:
        return value
    base = p if base == "p" else int(base)
    if base == 0:
        raise UsageError("zero denominator")
    return value / Fraction(base) ** int(exp or 1)


def parse_target(spec: str, p: int) -> lft.LieTarget:
    parts = spec.split(",")
    if len(parts) != 4:
        raise UsageError("Y needs four comma-separated entries a,b,c,d")
    a, b, c, d = (parse_entry(x, p) for x in parts)
    try:
        Y = lft.LieTarget.from_entries(p, a, b, c, d)
    except ValueError as exc:
        raise UsageError(str(exc))
    if not Y.is_regular():
        raise UsageError("Y must be regular (det Y != 0)")
    return Y


def cmd_ft(cfg: RunConfig, y_spec: str, k: Depth) -> int:
    if len(cfg.p_list) != 1:
        raise UsageError("ft needs exactly one prime --p")
    p = cfg.p_list[0]
    Y = parse_target(y_spec, p)
    ell_max = 2 if cfg.ell_max is None else cfg.ell_max
    j, r = lft._scaling(k)
    Z = Y.scaled(Fraction(1, p**j))
    stab = lft.ft_stabilize(Z, ell_max, r, ell_min=0, budget=cfg.point_budget)
    ell, value = stab.values[-1]
    value = value * Fraction(p) ** (3 * j)
    rational = value.to_rational()
    doc = {
        "p": p,
        "k": str(k),
        "Y": [str(x) for x in Y.entries],
        "ell": ell,
        "histogram_order": value.order,
        "value_exact": {"counts": list(value.counts), "scale": str(value.scale)},
        "value_rational": None if rational is None else str(rational),
        "value_float": round(complex(value).real, 12) + 0.0,
        "stabilized": stab.stabilized,
        "stop_reason": None if stab.stabilized else stab.stop_reason,
        "levels": [{"ell": e, "value": str(v.to_rational()) if v.to_rational() is not None else None} for e, v in stab.values],
    }
    if k.twice:
        doc["scaling"] = f"p^{3 * j} * FT(1_g_{r})(p^-{j} Y)"
    _emit(json.dumps(doc, indent=2) + "\n", cfg.out)
    if not stab.stabilized and stab.budget_refusal is not None:
        print(f"budget refusal: {stab.budget_refusal}", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK


def cmd_census(cfg: RunConfig) -> int:
    rows = []
    for q in cfg.q_list:
        for d in depths_upto(cfg.depth_max):
            if d.twice == 0:
                continue
            rec = supercuspidal_census(d, q)
            rows.append(
                {
                    "q": q,
                    "depth": str(d),
                    "per_vertex_count": rec.per_vertex_count,
                    "total_count": rec.total_count,
                    "formal_degree": str(rec.formal_degree),
                    "multiplicity": str(rec.multiplicity),
                    "classes_per_orbit": rec.classes_per_orbit,
                    "orbit_count": rec.orbit_count,
                }
            )
    if cfg.fmt == "json":
        text = json.dumps(rows, indent=2) + "\n"
    else:
        cols = list(rows[0]) if rows else []
        sep = "," if cfg.fmt == "csv" else " | "
        lines = [sep.join(cols)]
        lines += [sep.join("" if r[c] is None else str(r[c]) for c in cols) for r in rows]
        text = "\n".join(lines) + "\n"
    _emit(text, cfg.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file (flags override it)")
    common.add_argument("--q", help="comma-separated odd primes")
    common.add_argument("--p", help="comma-separated odd primes for lattice computations")
    common.add_argument("--depth-max", dest="depth_max", help="largest depth, e.g. 2 or 3/2")
    common.add_argument("--ell-max", dest="ell_max", help="largest truncation level")
    common.add_argument("--budget", help="lattice point cap per evaluation")
    common.add_argument("--format", choices=sorted(RENDERERS), help="output format")
    common.add_argument("--out", help="write output to this file")

    parser = argparse.ArgumentParser(prog="bernstein-sl2", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("tables", parents=[common], help="emit projector tables")
    v = sub.add_parser("verify", parents=[common], help="run verification suites")
    v.add_argument("--suite", dest="suites", action="append", help=f"one of {', '.join(SUITES)} (repeatable, or comma-separated)")
    v.add_argument("--kim-depths", dest="kim_depths", help="depths for the kim suite, e.g. 1,1/2")
    f = sub.add_parser("ft", parents=[common], help="truncated-lattice Fourier transform of 1_{g_-k}")
    f.add_argument("--Y", required=True, help="entries a,b,c,d such as 0,1,1/p,0")
    f.add_argument("--k", default="0", help="depth k of g_-k (default 0)")
    sub.add_parser("census", parents=[common], help="supercuspidal counts and formal degrees")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = build_config(args, os.environ.get(lft.BUDGET_ENV))
        if args.command == "tables":
            return cmd_tables(cfg)
        if args.command == "verify":
            return cmd_verify(cfg)
        if args.command == "ft":
            return cmd_ft(cfg, args.Y, _depth(args.k))
        return cmd_census(cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (lft.BudgetExceeded, BudgetError) as exc:
        print(f"budget refusal: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ConvergenceError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
