"""Command-line surface: one binary, machine-readable output.

Exit codes are stable: 0 success, 1 runtime or numeric failure, 2 usage or
validation error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .matrices import (
    haar_unitary,
    load_matrix,
    load_unitary,
    save_matrix,
    unitarity_defect,
)
from .permanent import (
    permanent_glynn,
    permanent_naive,
    permanent_ryser,
    repeated_column_expansion,
)
from .portstats import occupied_ports_pmf, sampling_cost_bounds, solve_tail_crossings
from .sampler import (
    BRUTE_FORCE_LIMIT,
    brute_force_distribution,
    chi_square_fit,
    empirical_counts,
    sample_batch,
    total_variation_distance,
)

VERIFY_TVD_LIMIT = 0.02
VERIFY_P_LIMIT = 0.001


def _complex_str(value: complex) -> str:
    # adding 0.0 folds negative zeros so identity permanents print as 1+0j
    return f"{value.real + 0.0:.12g}{value.imag + 0.0:+.12g}j"


def _open_out(args):
    if getattr(args, "out", None):
        return open(args.out, "w", encoding="utf-8")
    return sys.stdout


def cmd_haar(args) -> int:
    u = haar_unitary(args.dim, args.seed)
    save_matrix(args.out, u)
    print(f"unitarity defect: {unitarity_defect(u.matrix):.3e}")
    return 0


def cmd_permanent(args) -> int:
    matrix = load_matrix(args.matrix)
    if args.method == "repeated":
        if not args.multiplicities:
            raise ValueError("--multiplicities is required for method 'repeated'")
        mult = [int(tok) for tok in args.multiplicities.split(",")]
        if sum(mult) != matrix.shape[0] or len(mult) != matrix.shape[1]:
            raise ValueError(
                f"multiplicities {mult} do not match a {matrix.shape[0]}x{matrix.shape[1]} column block"
            )
        value, steps = repeated_column_expansion(matrix, mult)
        print(_complex_str(value))
        print(f"gray_steps: {steps}")
        return 0
    evaluator = {
        "naive": permanent_naive,
        "ryser": permanent_ryser,
        "glynn": permanent_glynn,
    }[args.method]
    print(_complex_str(evaluator(matrix)))
    return 0


def cmd_sample(args) -> int:
    u = load_unitary(args.unitary)
    if args.count < 0:
        raise ValueError(f"--count must be >= 0, got {args.count}")
    batch = sample_batch(u, args.bosons, args.count, args.seed)
    out = _open_out(args)
    try:
        if args.format == "jsonl":
            batch.write_jsonl(out)
        elif args.format == "json":
            doc = batch.header()
            doc["samples"] = [
                {
                    "idx": i,
                    "ports": list(seq.ports),
                    "config": seq.configuration(batch.n_ports).tolist(),
                    "ops": batch.gray_steps[i],
                }
                for i, seq in enumerate(batch.samples)
            ]
            json.dump(doc, out)
            out.write("\n")
        else:  # csv
            out.write("idx,ports,config,ops\n")
            for i, seq in enumerate(batch.samples):
                ports = " ".join(map(str, seq.ports))
                config = " ".join(map(str, seq.configuration(batch.n_ports)))
                out.write(f"{i},{ports},{config},{batch.gray_steps[i]}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_dist(args) -> int:
    dist = occupied_ports_pmf(args.bosons, args.modes)
    out = _open_out(args)
    try:
        dist.write_csv(out)
    finally:
        if out is not sys.stdout:
            out.close()
    if args.plot_data:
        if not args.out:
            raise ValueError("--plot-data needs --out to derive the figure file path")
        delta_minus, delta_plus = solve_tail_crossings(args.bosons / args.modes)
        scale = args.bosons / (1.0 + args.bosons / args.modes)
        regions = ((1.0 - delta_minus) * scale, (1.0 + delta_plus) * scale)
        fig_path = args.out + ".fig.csv"
        with open(fig_path, "w", encoding="utf-8") as fig:
            dist.write_csv(fig, regions=regions)
        print(f"figure series written to {fig_path}", file=sys.stderr)
    return 0


def cmd_bounds(args) -> int:
    report = sampling_cost_bounds(args.bosons, args.modes, args.epsilon)
    print(json.dumps(report.as_dict(), indent=2))
    return 0


def cmd_verify(args) -> int:
    u = load_unitary(args.unitary)
    n_configs = math.comb(u.dim + args.bosons - 1, args.bosons)
    if n_configs > BRUTE_FORCE_LIMIT:
        raise ValueError(
            f"{n_configs} configurations exceed the enumeration limit {BRUTE_FORCE_LIMIT}"
        )
    exact = brute_force_distribution(u, args.bosons)
    batch = sample_batch(u, args.bosons, args.samples, args.seed)
    counts = empirical_counts(batch)
    tvd = total_variation_distance(counts, exact)
    _, pvalue = chi_square_fit(counts, exact)
    print(f"tvd: {tvd:.6f}")
    print(f"chi_square_p: {pvalue:.6g}")
    ok = tvd < VERIFY_TVD_LIMIT and pvalue > VERIFY_P_LIMIT
    print("verdict: " + ("pass" if ok else "fail"))
    return 0 if ok else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bosonbunch",
        description="Boson sampling in the collision regime: permanents, exact samples, port statistics, cost bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("haar", help="generate a Haar-random unitary as JSON")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_haar)

    p = sub.add_parser("permanent", help="evaluate a matrix permanent from a JSON matrix file")
    p.add_argument("--matrix", required=True)
    p.add_argument("--method", choices=("naive", "ryser", "glynn", "repeated"), default="glynn")
    p.add_argument(
        "--multiplicities",
        default=None,
        help="comma-separated column repetition counts (method 'repeated')",
    )
    p.set_defaults(handler=cmd_permanent)

    p = sub.add_parser("sample", help="draw configurations from the output distribution")
    p.add_argument("--unitary", required=True)
    p.add_argument("--bosons", "-n", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--format", choices=("jsonl", "json", "csv"), default="jsonl")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_sample)

    p = sub.add_parser("dist", help="occupied-port distribution table as CSV")
    p.add_argument("--bosons", "-n", type=int, required=True)
    p.add_argument("--modes", "-m", type=int, required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--plot-data", action="store_true")
    p.set_defaults(handler=cmd_dist)

    p = sub.add_parser("bounds", help="operation-count bound report as JSON")
    p.add_argument("--bosons", "-n", type=int, required=True)
    p.add_argument("--modes", "-m", type=int, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.set_defaults(handler=cmd_bounds)

    p = sub.add_parser("verify", help="validate sampler output against brute-force enumeration")
    p.add_argument("--unitary", required=True)
    p.add_argument("--bosons", "-n", type=int, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(handler=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with code 2
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"failure: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    run()
