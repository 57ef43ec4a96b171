"""Command-line front end: bound curves as CSV, validation runs, SVG plots.

Exit codes: 0 success, 2 usage or input error, 3 compute budget exceeded.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import bns, bss, gauss
from .ratedistortion import (
    BinaryNonSymmetricSource,
    BinarySymmetricSource,
    GaussianSource,
    solve,
)
from .simulate import (
    BudgetError,
    Codebook,
    ExperimentConfig,
    delta_residue,
    duality_error_prob,
    exact_distortion,
    mc_mean_distortion,
)
from .special import binary_entropy, inverse_binary_entropy

_ENUM_LIMIT = 24


def _fmt(v: float) -> str:
    return f"{v:.10g}"


def _parse_n_range(spec: str) -> list[int]:
    try:
        a, b, c = (int(s) for s in spec.split(":"))
    except ValueError as exc:
        raise ValueError(f"bad n range {spec!r}, expected start:stop:step") from exc
    if c < 1 or a < 1:
        raise ValueError(f"bad n range {spec!r}: need start >= 1 and step >= 1")
    return list(range(a, b + 1, c))


def _read_config(path: str) -> dict[str, str]:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {line!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            values[key.replace("-", "_")] = val
    return values


# ---------------------------------------------------------------------------
# curve
# ---------------------------------------------------------------------------

def _curve_columns(args) -> list[str]:
    cols = ["n", "asymptote"]
    if args.family == "gauss":
        tags = [f"a{a:g}" for a in (args.alpha or [])]
        if args.unbounded or not tags:
            tags.append("unbounded")
        for tag in tags:
            cols.append(f"lower_{tag}")
            for eps in args.eps or []:
                cols.append(f"upper_os_{eps:g}_{tag}")
    else:
        cols.append("lower")
        for eps in args.eps or []:
            cols.append(f"upper_os_{eps:g}")
        for r0 in args.ref_rate or []:
            cols.append(f"upper_rr_{r0:g}")
        if args.legacy_eps is not None:
            for r0 in args.ref_rate or []:
                cols.append(f"upper_legacy_{r0:g}")
    return cols


def _curve_row(task: dict) -> tuple[dict, list[str]]:
    """One CSV row; separated out so rows can run in worker processes."""
    n = task["n"]
    fam = task["family"]
    rate = task["rate"]
    row = {"n": n, "asymptote": task["dstar"]}
    flags: list[str] = []
    if fam == "gauss":
        for tag, rm in task["variants"]:
            inp = gauss.GaussBoundInput(n, rate, task["sigma2"], rm=rm, delta=task["delta"])
            lo = gauss.lower_bound(inp)
            row[f"lower_{tag}"] = lo
            for eps in task["eps"]:
                inp_e = gauss.GaussBoundInput(n, rate, task["sigma2"], rm=rm, eps=eps, delta=task["delta"])
                ub = gauss.upper_bound_bounded(inp_e) if rm is not None else gauss.upper_bound_unbounded(inp_e)
                key = f"upper_os_{eps:g}_{tag}"
                row[key] = ub.value
                if ub.degenerate:
                    flags.append(f"{key}_degenerate")
                elif lo > ub.value + 1e-9:
                    flags.append(f"cross_{key}")
        return row, flags
    if fam == "bss":
        lo = bss.lower_bound(n, rate)
    else:
        lo = bns.lower_bound(n, rate, task["p"])
    row["lower"] = lo
    for eps in task["eps"]:
        r = bss.upper_bound_os(n, rate, eps) if fam == "bss" else bns.upper_bound_os(n, rate, task["p"], eps)
        key = f"upper_os_{eps:g}"
        row[key] = r.value
        if r.degenerate:
            flags.append(f"{key}_degenerate")
        elif lo > r.value + 1e-9:
            flags.append(f"cross_{key}")
    for r0 in task["ref_rate"]:
        if fam == "bss":
            v = bss.upper_bound_rr(n, rate, r0)
        else:
            d0 = inverse_binary_entropy(binary_entropy(task["p"]) - r0)
            v = bns.upper_bound_rr(n, rate, task["p"], d0)
        key = f"upper_rr_{r0:g}"
        row[key] = v
        if lo > v + 1e-9:
            flags.append(f"cross_{key}")
    if task["legacy_eps"] is not None:
        for r0 in task["ref_rate"]:
            row[f"upper_legacy_{r0:g}"] = bss.upper_bound_legacy(n, rate, r0, task["legacy_eps"])
    return row, flags


def cmd_curve(args) -> int:
    try:
        ns = _parse_n_range(args.n)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not ns:
        print("error: empty n range", file=sys.stderr)
        return 2
    if args.family == "bns" and args.p is None:
        print("error: bns needs --p", file=sys.stderr)
        return 2
    if args.legacy_eps is not None and args.family != "bss":
        print("error: --legacy-eps applies to the bss family only", file=sys.stderr)
        return 2
    if args.family != "gauss" and (args.alpha or args.unbounded):
        print("error: --alpha/--unbounded apply to the gauss family only", file=sys.stderr)
        return 2

    if args.family == "bss":
        source = BinarySymmetricSource()
    elif args.family == "bns":
        source = BinaryNonSymmetricSource(args.p)
    else:
        source = GaussianSource(args.sigma2)
    try:
        dstar = solve(source, args.rate).dstar
        task_base = {
            "family": args.family,
            "rate": args.rate,
            "p": args.p,
            "sigma2": args.sigma2,
            "delta": args.delta,
            "eps": args.eps or [],
            "ref_rate": args.ref_rate or [],
            "legacy_eps": args.legacy_eps,
            "dstar": dstar,
        }
        if args.family == "gauss":
            variants = [(f"a{a:g}", math.sqrt(a * 1.0)) for a in (args.alpha or [])]
            task_base["variants"] = None  # per-n rm depends on n, fill in below
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    tasks = []
    for n in ns:
        t = dict(task_base, n=n)
        if args.family == "gauss":
            variants = [(f"a{a:g}", math.sqrt(a * n)) for a in (args.alpha or [])]
            if args.unbounded or not variants:
                variants.append(("unbounded", None))
            t["variants"] = variants
        tasks.append(t)

    jobs = args.jobs or os.cpu_count() or 1
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_curve_row, tasks))
    else:
        results = [_curve_row(t) for t in tasks]

    cols = _curve_columns(args)
    any_flags = any(flags for _, flags in results)
    params = (
        f"family={args.family} rate={args.rate} n={args.n} p={args.p} sigma2={args.sigma2} "
        f"eps={args.eps} ref_rate={args.ref_rate} alpha={args.alpha} unbounded={args.unbounded} "
        f"legacy_eps={args.legacy_eps} delta={args.delta}"
    )
    lines = [f"# params: {params}"]
    header = ",".join(cols + (["flags"] if any_flags else []))
    lines.append(header)
    for row, flags in results:
        vals = [_fmt(row[c]) if c != "n" else str(row["n"]) for c in cols]
        if any_flags:
            vals.append(";".join(flags))
        lines.append(",".join(vals))
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return 0


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    if args.family == "bss":
        source = BinarySymmetricSource()
    else:
        if args.p is None:
            print("error: bns needs --p", file=sys.stderr)
            return 2
        source = BinaryNonSymmetricSource(args.p)
    try:
        if args.n > _ENUM_LIMIT:
            raise BudgetError(f"n={args.n} exceeds the exact-enumeration budget ({_ENUM_LIMIT})")
        sol = solve(source, args.rate)
        eps = 0.01
        if args.family == "bss":
            lower = bss.lower_bound(args.n, args.rate)
            upper = bss.upper_bound_os(args.n, args.rate, eps).value
        else:
            lower = bns.lower_bound(args.n, args.rate, args.p)
            upper = bns.upper_bound_os(args.n, args.rate, args.p, eps).value
        cfg = ExperimentConfig(source, args.n, args.rate, args.trials, args.seed)
        mean, se = mc_mean_distortion(cfg)
        lines = [
            f"source={args.family}",
            f"n={args.n}",
            f"rate={_fmt(args.rate)}",
            f"trials={args.trials}",
            f"seed={args.seed}",
            f"eps={_fmt(eps)}",
            f"asymptote={_fmt(sol.dstar)}",
            f"lower={_fmt(lower)}",
            f"mc_mean={_fmt(mean)}",
            f"mc_stderr={_fmt(se)}",
            f"upper_os={_fmt(upper)}",
        ]
        sandwich = lower <= mean + 3.0 * se and mean <= upper + 3.0 * se
        lines.append(f"sandwich_pass={'true' if sandwich else 'false'}")
        ok = sandwich
        if args.family == "bss":
            import numpy as np

            q = cfg.codebook_size
            rng = np.random.Generator(np.random.Philox(key=np.array([args.seed, 2**32], dtype=np.uint64)))
            worst_id = 0.0
            worst_margin = math.inf
            for _ in range(args.codebooks):
                cb = Codebook(args.n, (rng.random((q, args.n)) < 0.5).astype(np.uint8))
                ed = exact_distortion(source, cb)
                dr = delta_residue(source, cb, args.rate)
                pe = duality_error_prob(source, cb, args.rate)
                worst_id = max(worst_id, abs(ed - sol.dstar - sol.lambda_hat_nats / args.n * dr))
                worst_margin = min(worst_margin, dr - pe)
            id_ok = worst_id <= 1e-10
            thm4_ok = worst_margin >= -1e-12
            lines.append(f"identity_max_residual={_fmt(worst_id)}")
            lines.append(f"thm4_margin={_fmt(worst_margin)}")
            lines.append(f"identity_pass={'true' if id_ok else 'false'}")
            lines.append(f"thm4_pass={'true' if thm4_ok else 'false'}")
            ok = ok and id_ok and thm4_ok
        lines.append(f"pass={'true' if ok else 'false'}")
        print("\n".join(lines))
        return 0 if ok else 1
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


# ---------------------------------------------------------------------------
# plot
# ---------------------------------------------------------------------------

def cmd_plot(args) -> int:
    from . import svg

    try:
        with open(args.csv, encoding="utf-8") as fh:
            rows = [line.rstrip("\n") for line in fh if not line.startswith("#")]
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rows = [r for r in rows if r.strip()]
    if len(rows) < 2:
        print("error: CSV has no data rows", file=sys.stderr)
        return 2
    header = rows[0].split(",")
    if header[0] != "n":
        print("error: first column must be n", file=sys.stderr)
        return 2
    data_cols = [c for c in header[1:] if c != "flags"]
    xs: list[float] = []
    series: dict[str, list[float]] = {c: [] for c in data_cols}
    try:
        for r in rows[1:]:
            parts = r.split(",")
            if len(parts) != len(header):
                raise ValueError(f"row has {len(parts)} fields, header has {len(header)}")
            xs.append(float(parts[0]))
            for c, v in zip(header[1:], parts[1:]):
                if c != "flags":
                    series[c].append(float(v))
    except ValueError as exc:
        print(f"error: malformed CSV: {exc}", file=sys.stderr)
        return 2
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg.render(xs, series))
    return 0


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------

# config keys accepted by `curve` and their parsers; lists are whitespace
# separated inside the value
_CONFIG_CONVERT = {
    "p": float,
    "sigma2": float,
    "rate": float,
    "delta": float,
    "legacy_eps": float,
    "jobs": int,
    "n": str,
    "out": str,
    "eps": lambda s: [float(v) for v in s.split()],
    "ref_rate": lambda s: [float(v) for v in s.split()],
    "alpha": lambda s: [float(v) for v in s.split()],
    "unbounded": lambda s: s.lower() in ("1", "true", "yes"),
}


def _build_parser() -> tuple[argparse.ArgumentParser, argparse.ArgumentParser]:
    parser = argparse.ArgumentParser(prog="rdflb", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    cur = sub.add_parser("curve", help="sweep bounds over n and write CSV")
    cur.add_argument("family", choices=["bss", "bns", "gauss"])
    cur.add_argument("--config", help="key = value defaults file (flags win)")
    cur.add_argument("--p", type=float, help="P(bit = 1) for the bns family")
    cur.add_argument("--sigma2", type=float, default=1.0, help="Gaussian variance")
    cur.add_argument("--rate", type=float, help="rate in bits/symbol")
    cur.add_argument("--n", help="blocklength range start:stop:step")
    cur.add_argument("--eps", type=float, nargs="+", help="ordered-statistics eps values")
    cur.add_argument("--ref-rate", type=float, nargs="+", help="reference rates R0")
    cur.add_argument("--alpha", type=float, nargs="+", help="codeword bound rm^2 = alpha n (gauss)")
    cur.add_argument("--unbounded", action="store_true", help="include the unbounded gauss curve")
    cur.add_argument("--legacy-eps", type=float, help="rate slack for the legacy bound (bss)")
    cur.add_argument("--delta", type=float, default=0.5, help="source ball margin (gauss)")
    cur.add_argument("--jobs", type=int, help="parallel row workers (default: cores)")
    cur.add_argument("--out", help="output CSV path")
    cur.set_defaults(func=cmd_curve)

    val = sub.add_parser("validate", help="run the MC sandwich / identity checks")
    val.add_argument("family", choices=["bss", "bns"])
    val.add_argument("--p", type=float, help="P(bit = 1) for the bns family")
    val.add_argument("--n", type=int, required=True)
    val.add_argument("--rate", type=float, required=True)
    val.add_argument("--trials", type=int, default=100_000)
    val.add_argument("--seed", type=int, default=0)
    val.add_argument("--codebooks", type=int, default=100, help="random codebooks for the identity check")
    val.set_defaults(func=cmd_validate)

    plo = sub.add_parser("plot", help="render a curve CSV as a single SVG")
    plo.add_argument("csv", help="input CSV from `rdflb curve`")
    plo.add_argument("--out", required=True, help="output SVG path")
    plo.set_defaults(func=cmd_plot)
    return parser, cur


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    cfg_path = None
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            cfg_path = argv[i + 1]
        elif a.startswith("--config="):
            cfg_path = a.split("=", 1)[1]
    parser, curve_parser = _build_parser()
    if cfg_path is not None:
        try:
            defaults = {}
            for key, raw in _read_config(cfg_path).items():
                if key not in _CONFIG_CONVERT:
                    raise ValueError(f"unknown config key: {key}")
                defaults[key] = _CONFIG_CONVERT[key](raw)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        curve_parser.set_defaults(**defaults)
    args = parser.parse_args(argv)
    if args.command == "curve":
        missing = [k for k in ("rate", "n", "out") if getattr(args, k) is None]
        if missing:
            print(f"error: missing required option(s): {', '.join('--' + m for m in missing)}", file=sys.stderr)
            return 2
    try:
        return args.func(args)
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
