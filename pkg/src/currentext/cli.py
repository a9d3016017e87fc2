"""Command-line runner for the verification suites.

Exit codes: 0 when every check passes, 1 when any check fails, 2 for a
configuration or I/O error.
"""

import argparse
import csv
import json
import sys
import time

from .fields import instanton, maurer_cartan
from .geometry import make_domain
from .suites import (
    LADDER_QUANTITIES, SUITE_FUNCTIONS, SUITES, ConfigError, SuiteConfig, _plain, convergence_study,
)

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def run_suite(config):
    """Run one suite and return its report as a JSON-compatible dictionary."""
    t0 = time.perf_counter()
    result = SUITE_FUNCTIONS[config.suite](config)
    report = {
        "suite": config.suite,
        "config": config.echo(),
        "checks": [c.to_dict() for c in result.checks],
        "audit": _plain(result.audit),
        "wall_time_s": time.perf_counter() - t0,
        "pass": result.passed,
    }
    return report, result


def write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["resolution", "residual", "fitted_order"])
        for n, r, o in rows:
            w.writerow([n, repr(float(r)), "" if o != o else repr(float(o))])


def _grid(text, parts):
    vals = tuple(int(v) for v in text.lower().split("x"))
    if len(vals) != parts:
        raise ConfigError(f"grid {text!r} needs {parts} resolutions separated by 'x'")
    return vals


def _tolerances(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"tolerance {item!r} is not of the form name=value")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError:
            raise ConfigError(f"tolerance {item!r} has a non-numeric value") from None
    return out


def read_config_file(path):
    """Plain-text ``key=value`` lines; ``#`` starts a comment.  ``tol.<name>`` sets a tolerance."""
    values = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{n}: expected key=value")
            k, v = line.split("=", 1)
            values[k.strip().replace("_", "-")] = v.strip()
    return values


def build_parser():
    p = argparse.ArgumentParser(
        prog="currentext",
        description="Run numerical verification suites for current-group extensions.",
    )
    p.add_argument("--suite", help=f"one of: {', '.join(SUITES)}")
    p.add_argument("--config", help="plain-text key=value file; flags override it")
    p.add_argument("--rank", type=int)
    p.add_argument("--grid", help="sphere grid NpsixNthetaxNphi")
    p.add_argument("--time-grid", type=int, help="resolution of the interval or circle")
    p.add_argument("--disk-grid", help="disk grid NrxNt")
    p.add_argument("--tol", action="append", metavar="NAME=VALUE", help="tolerance override (repeatable)")
    p.add_argument("--seed", type=int)
    p.add_argument("--json", help="write the JSON report here")
    p.add_argument("--csv", help="write a convergence table here")
    p.add_argument("--ladder", help=f"convergence ladder, e.g. 12,24,48 (quantities: {', '.join(LADDER_QUANTITIES)})")
    p.add_argument("--quantity", default="degree", help="quantity for --csv convergence studies")
    p.add_argument("--dump", help="write the suite's representative field in the dump format here")
    return p


def _default(value, fallback):
    return fallback if value is None else value


def config_from_args(args):
    """Merge the optional config file with the flags (flags win)."""
    file_vals = read_config_file(args.config) if args.config else {}
    tols = {k[4:]: float(v) for k, v in file_vals.items() if k.startswith("tol.")}
    tols.update(_tolerances(args.tol))

    def pick(flag, key, conv=str):
        if flag is not None:
            return flag
        return conv(file_vals[key]) if key in file_vals else None

    suite = pick(args.suite, "suite")
    if suite is None:
        raise ConfigError("no suite given (use --suite)")
    grid = pick(args.grid, "grid")
    disk = pick(args.disk_grid, "disk-grid")
    return SuiteConfig(
        suite=suite,
        rank=_default(pick(args.rank, "rank", int), 3),
        s3=_grid(grid, 3) if grid else None,
        nt=pick(args.time_grid, "time-grid", int),
        disk=_grid(disk, 2) if disk else None,
        tolerances=tols,
        seed=_default(pick(args.seed, "seed", int), 0),
        json_path=pick(args.json, "json"),
        csv_path=pick(args.csv, "csv"),
        dump_path=pick(args.dump, "dump"),
    )


def _dump_form(config, result):
    """The suite's representative field, or the Maurer-Cartan form of the unit instanton."""
    if result.dump is not None:
        return result.dump
    dom = make_domain("S3", s3=config.s3 or (16, 16, 32))
    return maurer_cartan(instanton(1), dom, "right")


def _summary(report):
    lines = []
    for c in report["checks"]:
        lines.append(f"[{'PASS' if c['pass'] else 'FAIL'}] {c['name']}: residual {c['residual']:.3e} "
                     f"(tol {c['tolerance']:.1e})")
    lines.append(f"{report['suite']}: {'PASS' if report['pass'] else 'FAIL'} in {report['wall_time_s']:.1f} s")
    return "\n".join(lines)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
        ladder = None
        if args.ladder:
            ladder = [int(v) for v in args.ladder.split(",")]
            if len(ladder) < 3 or min(ladder) < 8:
                raise ConfigError("a ladder needs at least three resolutions, each >= 8")
        if config.csv_path and args.quantity not in LADDER_QUANTITIES:
            raise ConfigError(f"no convergence ladder for {args.quantity!r}")
    except (ConfigError, ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    report, result = run_suite(config)
    try:
        if config.csv_path:
            rows, order = convergence_study(args.quantity, ladder or [12, 24, 48], config.seed)
            write_csv(config.csv_path, rows)
            report["convergence"] = {"quantity": args.quantity, "overall_order": order}
        if config.json_path:
            with open(config.json_path, "w") as fh:
                json.dump(report, fh, indent=2, allow_nan=True)
        if config.dump_path:
            with open(config.dump_path, "w") as fh:
                json.dump(_dump_form(config, result).to_record(), fh)
    except (ConfigError, OSError) as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(_summary(report))
    return EXIT_PASS if report["pass"] else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
