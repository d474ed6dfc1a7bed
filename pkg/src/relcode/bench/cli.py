"""Command-line benchmark harness.

Subcommands: ``sweep`` (grid runs), ``unbias`` (KS tests), ``bias``
(depth-limited sampling bias), ``vector`` (dimensionwise coding), and
``plot`` (plot-data emission from a sweep CSV).  With ``--check``, exits
with status 2 when any acceptance-style threshold is violated.
"""

from __future__ import annotations

import argparse
import sys

from ..engine import SplitRule
from ..distributions import gaussian_pair_for_targets
from .config import MODES, SweepConfig
from .plots import emit_plots
from .sweep import check_thresholds, run_sweep
from .vector import encode_vector

__all__ = ["main", "build_parser"]

_VARIANTS = {r.value: r for r in SplitRule}


def _float_list(text: str) -> tuple[float, ...]:
    out: list[float] = []
    for token in text.split(","):
        token = token.strip()
        if ".." in token:
            a, b = token.split("..")
            out.extend(float(v) for v in range(int(a), int(b) + 1))
        elif token:
            out.append(float(token))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return tuple(out)


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in _float_list(text))


def _variant_list(text: str) -> tuple[SplitRule, ...]:
    out = []
    for token in text.split(","):
        token = token.strip().lower()
        if token not in _VARIANTS:
            raise argparse.ArgumentTypeError(
                f"unknown variant {token!r}; choose from {sorted(_VARIANTS)}"
            )
        out.append(_VARIANTS[token])
    return tuple(out)


def _dmax(text: str):
    if text.lower() in ("inf", "none", ""):
        return None
    return int(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bench",
        description="Relative-entropy-coding benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seeds", type=int, default=4000,
                       help="runs per grid point")
        p.add_argument("--seed-base", type=int, default=0)
        p.add_argument("--out", default=None, help="CSV output path")
        p.add_argument("--check", action="store_true",
                       help="exit 2 when thresholds are violated")
        p.add_argument("--workers", type=int, default=0)

    p = sub.add_parser("sweep", help="grid sweep over divergence targets")
    p.add_argument("--mode", choices=MODES, default="runtime_vs_dinf")
    p.add_argument("--dkl", type=_float_list, required=True)
    p.add_argument("--dinf", type=_float_list, required=True)
    p.add_argument("--variants", type=_variant_list,
                   default=tuple(SplitRule))
    p.add_argument("--dmax", type=_dmax, default=None)
    p.add_argument("--force-global", action="store_true",
                   help="run the global variant even at large dinf")
    common(p)

    p = sub.add_parser("unbias", help="KS unbiasedness test per variant")
    p.add_argument("--dkl", type=_float_list, required=True)
    p.add_argument("--dinf", type=_float_list, required=True)
    p.add_argument("--variants", type=_variant_list,
                   default=(SplitRule.SAMPLE, SplitRule.DYADIC))
    p.add_argument("--dmax", type=_dmax, default=None)
    p.add_argument("--force-global", action="store_true")
    common(p)

    p = sub.add_parser("bias", help="depth-limited sampling bias study")
    p.add_argument("--dkl", type=float, default=3.0)
    p.add_argument("--dinf", type=float, default=5.0)
    p.add_argument("--extra-bits", type=_int_list, default=tuple(range(1, 9)))
    p.add_argument("--samples", type=int, default=200,
                   help="samples per estimation group")
    p.add_argument("--groups", type=int, default=10)
    common(p)

    p = sub.add_parser("vector", help="dimensionwise vector coding")
    p.add_argument("--dims", type=int, default=50)
    p.add_argument("--kl-min", type=float, default=0.05)
    p.add_argument("--kl-max", type=float, default=0.5)
    p.add_argument("--dinf-offset", type=float, default=0.75)
    p.add_argument("--calib", type=int, default=256)
    p.add_argument("--repeats", type=int, default=10)
    common(p)

    p = sub.add_parser("plot", help="emit plot data from a sweep CSV")
    p.add_argument("csv")
    p.add_argument("--outdir", default="plots")
    return parser


def _print_rows(rows) -> None:
    if not rows:
        return
    cols = list(rows[0].keys())
    print("  ".join(cols))
    for r in rows:
        print("  ".join(
            format(v, ".4g") if isinstance(v, float) else str(v)
            for v in (r[c] for c in cols)
        ))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "plot":
        for path in emit_plots(args.csv, args.outdir):
            print(path)
        return 0

    if args.command == "vector":
        kls = [
            args.kl_min + (args.kl_max - args.kl_min) * d / max(args.dims - 1, 1)
            for d in range(args.dims)
        ]
        pairs = [
            gaussian_pair_for_targets(kl, kl + args.dinf_offset) for kl in kls
        ]
        report = encode_vector(
            pairs, args.seed_base, calibration_runs=args.calib,
            repeats=args.repeats,
        )
        print(f"dims={args.dims} repeats={report.repeats}")
        print(f"kl_total_bits={report.kl_total_bits:.3f}")
        print(f"log_overhead_total_bits={report.log_overhead_total_bits:.3f}")
        print(f"delta_total_bits={report.delta_total_bits:.3f}")
        print(f"zeta_total_bits={report.zeta_total_bits:.3f}")
        print(f"round_trip_ok={report.round_trip_ok}")
        if args.out:
            with open(args.out, "w", newline="") as fh:
                fh.write("dim,kl_bits,log_overhead_bits,fitted_exponent,"
                         "mean_log2_index,mean_delta_bits,mean_zeta_info_bits,"
                         "failure\n")
                for d in report.dims:
                    exp = "" if d.fitted_exponent is None else f"{d.fitted_exponent:.6g}"
                    fh.write(
                        f"{d.dim},{d.kl_bits:.10g},{d.log_overhead_bits:.10g},"
                        f"{exp},{d.mean_log2_index:.10g},"
                        f"{d.mean_delta_bits:.10g},{d.mean_zeta_info_bits:.10g},"
                        f"{d.failure}\n"
                    )
        ok = report.round_trip_ok and (
            report.zeta_total_bits <= report.delta_total_bits or not args.check
        )
        if args.check and not ok:
            print("CHECK FAILED: zeta totals exceed delta totals", file=sys.stderr)
            return 2
        return 0

    if args.command == "bias":
        config = SweepConfig(
            mode="bias_vs_extra_bits",
            dkl_grid=(args.dkl,),
            dinf_grid=(args.dinf,),
            seeds_per_point=max(args.samples * args.groups, 100),
            variants=(SplitRule.DYADIC,),
            seed_base=args.seed_base,
            out_path=args.out,
            workers=args.workers,
            extra_bits=args.extra_bits,
            samples_per_group=args.samples,
            n_groups=args.groups,
        )
    else:
        config = SweepConfig(
            mode="unbiasedness" if args.command == "unbias" else args.mode,
            dkl_grid=args.dkl,
            dinf_grid=args.dinf,
            seeds_per_point=args.seeds,
            variants=args.variants,
            d_max=args.dmax,
            seed_base=args.seed_base,
            out_path=args.out,
            workers=args.workers,
            force_global=args.force_global,
        )

    rows = run_sweep(config)
    _print_rows(rows)
    if args.check:
        violations = check_thresholds(config, rows)
        if violations:
            for v in violations:
                print(f"CHECK FAILED: {v}", file=sys.stderr)
            return 2
        print("all checks passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
