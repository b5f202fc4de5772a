"""Command-line surface.

Subcommands: spectral | tensor | restrict | hof-check | simulate | freeconv.
Global flags: --seed, --out, --config (JSON file with ExperimentConfig-style
keys), --threads.  Exit codes: 0 success, 2 validation error, 3 guard refusal.

Every command is a pure function of (config, seed): identical inputs produce
byte-identical outputs.  CSV files are UTF-8 with a header row and RFC-4180
quoting; exact rationals are archived as "p/q" strings in JSON sidecars; SVG
histograms are static with the bin count fixed by the Sturges rule.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import experiments, rmt
from .errors import GuardError
from .freeprob import free_compress, free_convolve, moments_to_free_cumulants
from .repunitary import (
    ShiftedWeight,
    naive_spectral_measure,
    natural_spectral_measure,
    zelobenko_weights,
)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer "
                                         f"list: {text!r}") from exc


def _fraction_list(text: str) -> tuple[Fraction, ...]:
    return tuple(_fraction(part) for part in text.split(","))


def _rational_str(x) -> str:
    f = Fraction(x)
    return f"{f.numerator}/{f.denominator}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hofree",
        description="exact and Monte-Carlo checks for spectra of unitary-group "
                    "representations against free probability")
    parser.add_argument("--seed", type=int, default=1, help="master RNG seed")
    parser.add_argument("--out", type=Path, default=Path("."),
                        help="output directory for CSV/JSON/SVG files")
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON config file; command-line flags override it")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for replica generation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectral", help="exact spectral data of one irreducible")
    p.add_argument("--l", type=_int_list, required=True,
                   help="shifted weight, strictly decreasing, e.g. 2,0")
    p.add_argument("--eps", type=_fraction, default=Fraction(1))
    p.add_argument("--order", type=int, default=4)

    p = sub.add_parser("tensor", help="tensor decomposition vs free convolution")
    p.add_argument("--schedule", type=_int_list, default=None)
    p.add_argument("--max-order", type=int, default=None)
    p.add_argument("--amplitude", type=float, default=None)
    p.add_argument("--row-amplitude", type=float, default=None)
    p.add_argument("--eps-exponent", type=float, default=None)
    p.add_argument("--replicas", type=int, default=None)

    p = sub.add_parser("restrict", help="restriction vs corner vs compression")
    p.add_argument("--schedule", type=_int_list, default=None)
    p.add_argument("--alpha", type=_fraction, default=None)
    p.add_argument("--corner-sizes", type=_int_list, default=None)
    p.add_argument("--max-order", type=int, default=None)
    p.add_argument("--amplitude", type=float, default=None)
    p.add_argument("--eps-exponent", type=float, default=None)
    p.add_argument("--replicas", type=int, default=None)

    p = sub.add_parser("hof-check", help="exact trace-cumulant identity and "
                                         "triangle inequality report")
    p.add_argument("--n", type=_int_list, default=(3, 4),
                   help="matrix sizes; the exact path needs n >= total order")
    p.add_argument("--max-order", type=int, default=3)
    p.add_argument("--inequality-order", type=int, default=6)

    p = sub.add_parser("simulate", help="replica trace tables and cumulants")
    p.add_argument("--spectrum", type=_fraction_list, required=True,
                   help="eigenvalues, e.g. 1,0,-1")
    p.add_argument("--eps", type=_fraction, default=Fraction(1))
    p.add_argument("--powers", type=_int_list, default=(1, 2))
    p.add_argument("--replicas", type=int, default=None)
    p.add_argument("--svg", action="store_true",
                   help="also write an eigenvalue histogram")

    p = sub.add_parser("freeconv", help="free convolution / compression of "
                                        "moment sequences")
    p.add_argument("--a", type=_fraction_list, required=True)
    p.add_argument("--b", type=_fraction_list, default=None)
    p.add_argument("--compress", type=_fraction, default=None)
    return parser


def _load_config(args, **defaults) -> experiments.ExperimentConfig:
    raw = {}
    if args.config is not None:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    kwargs = dict(defaults)
    for key in ("schedule", "eps_exponent", "amplitude", "row_amplitude",
                "alpha", "corner_sizes", "replicas", "max_order"):
        flag = getattr(args, key, None)
        if flag is not None:
            kwargs[key] = flag
        elif key in raw:
            kwargs[key] = raw[key]
    if "schedule" in kwargs:
        kwargs["schedule"] = tuple(kwargs["schedule"])
    if "corner_sizes" in kwargs:
        kwargs["corner_sizes"] = tuple(kwargs["corner_sizes"])
    if "alpha" in kwargs:
        kwargs["alpha"] = Fraction(str(kwargs["alpha"]))
    kwargs["seed"] = args.seed if args.seed is not None else raw.get("seed", 1)
    kwargs["threads"] = args.threads
    return experiments.ExperimentConfig(**kwargs)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(row[h]) for h in header])


def _cell(value):
    # plain-float repr keeps CSV output byte-stable across numpy versions
    if isinstance(value, float):
        return repr(float(value))
    return value


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def write_histogram_svg(path: Path, samples, width=640, height=400) -> None:
    """Static SVG histogram; bin count by the Sturges rule."""
    samples = sorted(float(x) for x in samples)
    n = len(samples)
    bins = max(1, math.ceil(math.log2(n)) + 1) if n > 1 else 1
    lo, hi = samples[0], samples[-1]
    span = (hi - lo) or 1.0
    counts = [0] * bins
    for x in samples:
        idx = min(int((x - lo) / span * bins), bins - 1)
        counts[idx] += 1
    peak = max(counts)
    margin = 40
    bar_w = (width - 2 * margin) / bins
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}" viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>']
    for i, c in enumerate(counts):
        bar_h = (height - 2 * margin) * c / peak
        x = margin + i * bar_w
        y = height - margin - bar_h
        parts.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{bar_w:.2f}" '
                     f'height="{bar_h:.2f}" fill="#4878a8" stroke="white"/>')
    parts.append(f'<text x="{margin}" y="{height - 10}" font-size="12">'
                 f'{lo:.6g}</text>')
    parts.append(f'<text x="{width - margin}" y="{height - 10}" '
                 f'font-size="12" text-anchor="end">{hi:.6g}</text>')
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n", encoding="utf-8")


def cmd_spectral(args) -> int:
    entries = args.l
    if any(a <= b for a, b in zip(entries, entries[1:])):
        raise ValueError(f"shifted weight must be strictly decreasing: {entries}")
    l = ShiftedWeight(entries)
    gamma = zelobenko_weights(l)
    naive = naive_spectral_measure(l).dilate(args.eps)
    natural = natural_spectral_measure(l).dilate(args.eps)
    payload = {
        "l": list(entries),
        "eps": _rational_str(args.eps),
        "gamma": [_rational_str(g) for g in gamma],
        "gamma_decimal": [float(g) for g in gamma],
        "naive_moments": [_rational_str(naive.moment(k))
                          for k in range(1, args.order + 1)],
        "natural_moments": [_rational_str(natural.moment(k))
                            for k in range(1, args.order + 1)],
        "natural_moments_decimal": [float(natural.moment(k))
                                    for k in range(1, args.order + 1)],
    }
    print(json.dumps(payload, indent=2))
    return 0


def cmd_tensor(args) -> int:
    config = _load_config(args)
    rows = experiments.tensor_experiment(config)
    header = ["n", "k", "components", "rep_mean", "rep_var", "free_target",
              "mc_mean", "mc_se", "rel_gap"]
    args.out.mkdir(parents=True, exist_ok=True)
    _write_csv(args.out / "tensor.csv", header, rows)
    exact = [{
        "n": row["n"], "k": row["k"],
        "rep_mean": _rational_str(row["rep_mean_exact"]),
        "rep_var": _rational_str(row["rep_var_exact"]),
        "free_target": _rational_str(row["free_target_exact"]),
    } for row in rows]
    _write_json(args.out / "tensor_exact.json",
                {"eps_exponent": config.eps_exponent, "rows": exact})
    print(f"wrote {args.out / 'tensor.csv'} ({len(rows)} rows)")
    return 0


def cmd_restrict(args) -> int:
    config = _load_config(args, schedule=(4, 6, 8))
    rows = experiments.restriction_experiment(config)
    header = ["n", "m", "k", "branch_mean", "compress_target",
              "corner_mc_mean", "corner_mc_se", "rel_gap", "note"]
    args.out.mkdir(parents=True, exist_ok=True)
    _write_csv(args.out / "restrict.csv", header, rows)
    exact = [{
        "n": row["n"], "k": row["k"],
        "branch_mean": _rational_str(row["branch_mean_exact"]),
        "compress_target": _rational_str(row["compress_target_exact"]),
    } for row in rows if row["branch_mean_exact"] is not None]
    _write_json(args.out / "restrict_exact.json",
                {"eps_exponent": config.eps_exponent,
                 "alpha": _rational_str(config.alpha), "rows": exact})
    print(f"wrote {args.out / 'restrict.csv'} ({len(rows)} rows)")
    return 0


def cmd_hof_check(args) -> int:
    for n in args.n:
        if n < 1:
            raise ValueError("matrix sizes must be positive")
    report = experiments.hof_check(args.n, max_order=args.max_order,
                                   inequality_order=args.inequality_order)
    print(json.dumps(report, indent=2))
    return 0


def cmd_simulate(args) -> int:
    if args.replicas is None:
        args.replicas = 1000
    spec = rmt.EnsembleSpec.fixed(args.spectrum, eps=args.eps)
    table = rmt.trace_statistics(spec, args.powers, replicas=args.replicas,
                                 seed=args.seed, threads=args.threads)
    args.out.mkdir(parents=True, exist_ok=True)
    table.to_csv(args.out / "traces.csv")
    summary = {"n": spec.n, "eps": _rational_str(args.eps),
               "seed": args.seed, "replicas": args.replicas, "cumulants": []}
    for p in args.powers:
        est_mean = table.estimate_cumulant((p,), boot_seed=args.seed)
        est_var = table.estimate_cumulant((p, p), boot_seed=args.seed)
        est_third = table.estimate_cumulant((p, p, p), boot_seed=args.seed)
        summary["cumulants"].append({
            "p": p,
            "mean": float(est_mean.value.real), "mean_se": float(est_mean.stderr),
            "variance": float(est_var.value.real),
            "variance_se": float(est_var.stderr),
            "third": float(est_third.value.real),
            "third_se": float(est_third.stderr),
        })
    _write_json(args.out / "summary.json", summary)
    if args.svg:
        eigs = []
        for r in range(min(args.replicas, 64)):
            x = rmt.sample_matrix(spec, rmt.replica_rng(args.seed, r))
            eigs.extend(rmt.eigenvalues(x).tolist())
        write_histogram_svg(args.out / "eigenvalues.svg", eigs)
    print(f"wrote {args.out / 'traces.csv'} ({args.replicas} replicas)")
    return 0


def cmd_freeconv(args) -> int:
    payload = {"a_moments": [_rational_str(x) for x in args.a],
               "a_free_cumulants": [_rational_str(x) for x in
                                    moments_to_free_cumulants(list(args.a))]}
    if args.b is not None:
        order = min(len(args.a), len(args.b))
        conv = free_convolve(list(args.a), list(args.b), order)
        payload["b_moments"] = [_rational_str(x) for x in args.b]
        payload["convolution_moments"] = [_rational_str(x) for x in conv]
    if args.compress is not None:
        comp = free_compress(list(args.a), args.compress)
        payload["compression_alpha"] = _rational_str(args.compress)
        payload["compression_moments"] = [_rational_str(x) for x in comp]
    print(json.dumps(payload, indent=2))
    return 0


_COMMANDS = {
    "spectral": cmd_spectral,
    "tensor": cmd_tensor,
    "restrict": cmd_restrict,
    "hof-check": cmd_hof_check,
    "simulate": cmd_simulate,
    "freeconv": cmd_freeconv,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except GuardError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
