"""Command-line surface binding all modules.

Every run is a pure function of its flags: randomness is keyed by --seed
through splittable streams, output text is deterministic byte for byte, and
failures exit with a machine-readable JSON error record on stderr.  Exit
codes: 0 success, 2 usage error, 3 resource cap, 4 rejection budget
exhausted, 5 selfcheck failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .analysis import (
    mixing_report,
    moment_analytic,
    moment_curve,
    moment_empirical_stats,
    scaling_report,
)
from .errors import LevelCapError, RejectionBudgetError
from .generator import (
    ORACLE_MAX_LEVEL,
    build_generator,
    eigenvalues,
    kernel_row,
    transition_kernel_oracle,
    transition_kernel_spectral,
)
from .params import Params
from .serialize import (
    eigenvalues_csv,
    eigenvalues_payload,
    frequency_csv,
    frequency_payload,
    kernel_payload,
    matrix_csv,
    mixing_csv,
    mixing_payload,
    moment_csv,
    moment_payload,
    path_csv,
    path_payload,
)
from .simulate import empirical_kernel, simulate_confined, simulate_path
from .streams import SplitStream
from .words import Word, random_isometry

EXIT_SUCCESS = 0
EXIT_USAGE = 2
EXIT_RESOURCE = 3
EXIT_REJECTION = 4
EXIT_SELFCHECK = 5


def _parse_seed(text: str) -> int:
    return int(text, 0)


def _add_common(sp: argparse.ArgumentParser, formats: tuple[str, ...] = ("csv", "json")) -> None:
    sp.add_argument("--gamma", type=float, required=True, help="base jump-rate factor, >= 0")
    sp.add_argument("--theta", type=float, required=True, help="per-level rate growth factor, >= 0")
    sp.add_argument("--seed", type=_parse_seed, default=0, help="64-bit stream seed (default 0)")
    sp.add_argument("--out", default=None, help="output file path (default: stdout)")
    if formats:
        sp.add_argument(
            "--format", choices=formats, default=formats[0], help="output format"
        )


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cantorjump",
        description="Symmetric self-similar jump processes on the triadic Cantor set.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="generator eigenvalues up to a level")
    _add_common(sp)
    sp.add_argument("--level", type=int, required=True, help="resolution n >= 0")

    sp = sub.add_parser("kernel", help="dense transition kernel at one time")
    _add_common(sp)
    sp.add_argument("--level", type=int, required=True, help="resolution n >= 1")
    sp.add_argument("--t", required=True, help="single time value, >= 0")

    sp = sub.add_parser("simulate", help="sample a path, or an endpoint histogram")
    _add_common(sp)
    sp.add_argument("--depth", type=int, required=True, help="working depth >= 1")
    sp.add_argument("--t", required=True, help="horizon (single value, > 0)")
    sp.add_argument("--start", default=None, help="start word (default: all zeros)")
    sp.add_argument("--samples", type=int, default=None, help="histogram mode: number of paths")
    sp.add_argument("--level", type=int, default=None, help="histogram resolution (with --samples)")

    sp = sub.add_parser("confined", help="sample a path conditioned to stay in a cylinder")
    _add_common(sp)
    sp.add_argument("--cylinder", required=True, help="word string of the confining cylinder")
    sp.add_argument("--depth", type=int, required=True, help="working depth >= 1")
    sp.add_argument("--t", required=True, help="horizon (single value, > 0)")
    sp.add_argument("--start", default=None, help="start word (default: cylinder padded with zeros)")
    sp.add_argument("--max-attempts", type=int, default=None, help="rejection budget override")

    sp = sub.add_parser("mixing", help="TV-to-uniform curves with the proven bound")
    _add_common(sp)
    sp.add_argument("--level", type=int, required=True, help="largest resolution n_max")
    grid = sp.add_mutually_exclusive_group(required=True)
    grid.add_argument("--t", help="time or linear grid lo:hi:step")
    grid.add_argument("--t-log", help="log-spaced grid lo:hi:points")

    sp = sub.add_parser("moments", help="analytic displacement-moment curve")
    _add_common(sp)
    sp.add_argument("--r", type=float, required=True, help="moment order r > 0")
    sp.add_argument("--tol", type=float, default=1e-12, help="certified series tail bound")
    grid = sp.add_mutually_exclusive_group(required=True)
    grid.add_argument("--t", help="time or linear grid lo:hi:step")
    grid.add_argument("--t-log", help="log-spaced grid lo:hi:points")

    sp = sub.add_parser("scaling", help="fitted small-t moment growth exponent (JSON)")
    _add_common(sp, formats=("json",))
    sp.add_argument("--r", type=float, required=True, help="moment order r > 0")
    sp.add_argument("--t-log", required=True, help="log-spaced fit grid lo:hi:points")

    sp = sub.add_parser("selfcheck", help="run the oracle cross-check suite")
    _add_common(sp, formats=())
    sp.add_argument("--max-level", type=int, default=6, help="largest resolution checked")
    sp.add_argument("--samples", type=int, default=20000, help="Monte Carlo paths per empirical check")

    return p


def _parse_single_time(spec: str) -> float:
    if ":" in spec:
        raise ValueError("this command expects a single --t value, not a grid")
    t = float(spec)
    if not math.isfinite(t):
        raise ValueError(f"time must be finite, got {spec}")
    return t


def _parse_linear_grid(spec: str) -> list[float]:
    """Either a single time or lo:hi:step inclusive of both ends."""
    if ":" not in spec:
        return [_parse_single_time(spec)]
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"linear grid must be lo:hi:step, got {spec!r}")
    lo, hi, step = (float(x) for x in parts)
    if not (math.isfinite(lo) and math.isfinite(hi) and math.isfinite(step)):
        raise ValueError("grid endpoints and step must be finite")
    if not lo < hi:
        raise ValueError(f"grid needs lo < hi, got {spec!r}")
    if not step > 0.0:
        raise ValueError(f"grid step must be > 0, got {spec!r}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + i * step for i in range(count)]


def _parse_log_grid(spec: str) -> list[float]:
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"log grid must be lo:hi:points, got {spec!r}")
    lo, hi = float(parts[0]), float(parts[1])
    points = int(parts[2])
    if not 0.0 < lo < hi:
        raise ValueError(f"log grid needs 0 < lo < hi, got {spec!r}")
    if points < 2:
        raise ValueError("log grid needs at least 2 points")
    return [float(t) for t in np.geomspace(lo, hi, points)]


def _parse_grid(args: argparse.Namespace) -> list[float]:
    if getattr(args, "t_log", None):
        return _parse_log_grid(args.t_log)
    return _parse_linear_grid(args.t)


def _parse_word(text: str, flag: str) -> Word:
    try:
        return Word.from_string(text)
    except ValueError as e:
        raise ValueError(f"{flag}: {e}") from None


def _start_word(args: argparse.Namespace, depth: int, prefix: Word | None = None) -> Word:
    if args.start is not None:
        start = _parse_word(args.start, "--start")
        if start.level != depth:
            raise ValueError(f"--start must have exactly --depth={depth} digits")
        return start
    if prefix is not None:
        if prefix.level > depth:
            raise ValueError("--depth must be >= the cylinder length")
        return Word(prefix.pattern << (depth - prefix.level), depth)
    return Word(0, depth)


def _envelope(args: argparse.Namespace) -> dict:
    return {
        "command": args.command,
        "version": __version__,
        "gamma": args.gamma,
        "theta": args.theta,
        "seed": args.seed,
    }


def _render(args: argparse.Namespace, csv_text: str | None, payload: dict) -> str:
    if getattr(args, "format", "json") == "csv" and csv_text is not None:
        return csv_text
    return json.dumps(_envelope(args) | payload, indent=2) + "\n"


def _cmd_spectrum(args: argparse.Namespace, params: Params) -> str:
    lams = eigenvalues(args.level, params)
    return _render(
        args, eigenvalues_csv(lams), {"level": args.level} | eigenvalues_payload(lams)
    )


def _cmd_kernel(args: argparse.Namespace, params: Params) -> str:
    t = _parse_single_time(args.t)
    kernel = transition_kernel_spectral(args.level, t, params)
    return _render(args, matrix_csv(kernel.entries, args.level), kernel_payload(kernel))


def _cmd_simulate(args: argparse.Namespace, params: Params) -> str:
    t = _parse_single_time(args.t)
    rng = SplitStream.from_seed(args.seed)
    x0 = _start_word(args, args.depth)
    if args.samples is None:
        if args.level is not None:
            raise ValueError("--level applies only to histogram mode (--samples)")
        path = simulate_path(x0, t, params, rng)
        return _render(args, path_csv(path), path_payload(path))
    if args.level is None:
        raise ValueError("histogram mode needs --level alongside --samples")
    freq = empirical_kernel(x0, t, args.level, args.samples, params, rng)
    payload = {
        "start": str(x0),
        "t": t,
        "level": args.level,
        "samples": args.samples,
    } | frequency_payload(freq, args.level)
    return _render(args, frequency_csv(freq, args.level), payload)


def _cmd_confined(args: argparse.Namespace, params: Params) -> str:
    t = _parse_single_time(args.t)
    v = _parse_word(args.cylinder, "--cylinder")
    x0 = _start_word(args, args.depth, prefix=v)
    rng = SplitStream.from_seed(args.seed)
    path = simulate_confined(x0, v, t, params, rng, max_attempts=args.max_attempts)
    payload = {"cylinder": str(v)} | path_payload(path)
    return _render(args, path_csv(path), payload)


def _cmd_mixing(args: argparse.Namespace, params: Params) -> str:
    grid = _parse_grid(args)
    report = mixing_report(params, args.level, grid)
    return _render(args, mixing_csv(report), mixing_payload(report))


def _cmd_moments(args: argparse.Namespace, params: Params) -> str:
    grid = _parse_grid(args)
    curve = moment_curve(args.r, grid, params, tol=args.tol)
    return _render(args, moment_csv(curve), moment_payload(curve))


def _cmd_scaling(args: argparse.Namespace, params: Params) -> str:
    _parse_log_grid(args.t_log)  # validate the spec shape first
    lo, hi, points = args.t_log.split(":")
    report = scaling_report(args.r, params, float(lo), float(hi), int(points))
    return json.dumps(_envelope(args) | report, indent=2) + "\n"


def _selfcheck_lines(args: argparse.Namespace, params: Params) -> tuple[list[str], bool]:
    checks: list[tuple[str, bool, str]] = []
    rng = SplitStream.from_seed(args.seed)

    n_oracle = min(args.max_level, ORACLE_MAX_LEVEL)
    worst = 0.0
    for n in range(1, n_oracle + 1):
        for t in (0.01, 0.1, 1.0):
            spectral = transition_kernel_spectral(n, t, params)
            oracle = transition_kernel_oracle(n, t, params)
            worst = max(worst, float(np.max(np.abs(spectral.entries - oracle.entries))))
    checks.append(
        (
            "kernel-oracle-agreement",
            worst <= 1e-10,
            f"max |spectral - uniformization| = {worst:.3e} over n <= {n_oracle} (tol 1e-10)",
        )
    )

    lam = eigenvalues(30, params)
    worst = 0.0
    for k in range(1, 31):
        lhs = math.fsum(
            [lam[i + 1] * 2.0 ** (i - k) for i in range(k - 1)] + [-0.5 * lam[k]]
        )
        target = params.rate(k)
        err = abs(lhs - target) / (abs(target) if target != 0.0 else 1.0)
        worst = max(worst, err)
    checks.append(
        (
            "induction-identity",
            worst <= 1e-12,
            f"max relative error = {worst:.3e} over k <= 30 (tol 1e-12)",
        )
    )

    exact = True
    for depth in range(1, min(args.max_level, 8) + 1):
        q = build_generator(depth, params).entries
        for j in range(5):
            g = random_isometry(depth, rng.child(100 + depth).child(j).key)
            perm = np.array(g.permutation(depth))
            if not np.array_equal(q[np.ix_(perm, perm)], q):
                exact = False
    checks.append(
        (
            "isometry-invariance",
            exact,
            f"conjugation by random isometries preserves the generator exactly "
            f"(depths <= {min(args.max_level, 8)})",
        )
    )

    depth, n, t = 10, 3, 0.3
    if params.rate(depth) * t > 5e4:
        depth = 6
    freq = empirical_kernel(
        Word(0, depth), t, n, args.samples, params, rng.child(1)
    )
    row = kernel_row(Word(0, n), t, params)
    tv = 0.5 * math.fsum(abs(float(f) - float(p)) for f, p in zip(freq, row))
    checks.append(
        (
            "empirical-kernel-law",
            tv <= 0.03,
            f"TV(empirical, spectral) = {tv:.4f} at n={n}, t={t}, "
            f"{args.samples} paths (tol 0.03)",
        )
    )

    r, mt = 1.0, 0.2
    mean, se = moment_empirical_stats(r, mt, 12, args.samples, params, rng.child(2))
    target = moment_analytic(r, mt, params)
    bias = 3.0 ** (-r * 12) / (1.0 - 3.0**-r)
    ok = abs(mean - target) <= 3.0 * se + bias
    checks.append(
        (
            "empirical-moment",
            ok,
            f"|empirical - analytic| = {abs(mean - target):.2e} vs "
            f"3se+bias = {3.0 * se + bias:.2e} at r={r}, t={mt}",
        )
    )

    lines = [
        f"{'PASS' if ok else 'FAIL'} {name}: {detail}" for name, ok, detail in checks
    ]
    passed = sum(1 for _, ok, _ in checks if ok)
    lines.append(f"selfcheck: {passed}/{len(checks)} checks passed")
    return lines, passed == len(checks)


def _cmd_selfcheck(args: argparse.Namespace, params: Params) -> tuple[str, int]:
    lines, all_ok = _selfcheck_lines(args, params)
    return "\n".join(lines) + "\n", EXIT_SUCCESS if all_ok else EXIT_SELFCHECK


_HANDLERS = {
    "spectrum": _cmd_spectrum,
    "kernel": _cmd_kernel,
    "simulate": _cmd_simulate,
    "confined": _cmd_confined,
    "mixing": _cmd_mixing,
    "moments": _cmd_moments,
    "scaling": _cmd_scaling,
}


def _emit_error(args: argparse.Namespace, exc: Exception, code: int) -> None:
    record = {
        "error": {
            "command": getattr(args, "command", None),
            "type": type(exc).__name__,
            "message": str(exc),
            "exit_code": code,
        }
    }
    if isinstance(exc, RejectionBudgetError):
        record["error"]["acceptance_probability"] = exc.acceptance_probability
        record["error"]["attempts"] = exc.attempts
    sys.stderr.write(json.dumps(record) + "\n")


def _write_output(out: str | None, text: str) -> None:
    if out is None:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # Downstream consumer (e.g. `head`) closed the pipe; swallow the
            # remainder and point stdout at devnull so interpreter shutdown
            # does not raise again while flushing.
            os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_SUCCESS
    try:
        params = Params(gamma=args.gamma, theta=args.theta)
        if args.command == "selfcheck":
            text, code = _cmd_selfcheck(args, params)
        else:
            text = _HANDLERS[args.command](args, params)
            code = EXIT_SUCCESS
    except LevelCapError as e:
        _emit_error(args, e, EXIT_RESOURCE)
        return EXIT_RESOURCE
    except RejectionBudgetError as e:
        _emit_error(args, e, EXIT_REJECTION)
        return EXIT_REJECTION
    except (ValueError, OverflowError) as e:
        _emit_error(args, e, EXIT_USAGE)
        return EXIT_USAGE
    _write_output(args.out, text)
    return code


if __name__ == "__main__":
    sys.exit(main())
