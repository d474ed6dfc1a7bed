"""Benchmark sweeps over divergence grids, with CSV output and checks.

Each grid point constructs a Gaussian pair hitting the requested
(KL, infinity) divergences, runs a batch of encodes per variant, and
measures steps (rejections before acceptance), serialized code bits
(actual codewords, no analytic shortcuts), the raw path cost
-log2 P(S_D), and a KS p-value of the samples against the target.

Points and variants fan out across worker threads; rows are merged in grid
order, so output bytes depend only on the config and base seed.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np
from scipy import stats as _sstats

from ..codecs import (
    encode_dyadic_payload,
    encode_global_payload,
    encode_sample_payload,
)
from ..distributions import DistributionPair, Unsatisfiable, gaussian_pair_for_targets
from ..engine import BatchResult, SplitRule, encode_batch
from ..randomness import derive_seeds
from .config import BIAS_CSV_HEADER, CSV_HEADER, GLOBAL_DINF_CUTOFF, RunStats, SweepConfig
from .stats import kl_bias_estimate

__all__ = ["run_sweep", "check_thresholds", "write_rows", "BETA_STEPS"]

_TAG_RULE = {SplitRule.GLOBAL: 1, SplitRule.SAMPLE: 2, SplitRule.DYADIC: 3}
_TAG_BIAS = 13

# step-bound slope for the sample-splitting variant, in steps per bit
BETA_STEPS = 2.0 / math.log2(4.0 / 3.0)
LOG2_E = math.log2(math.e)


def _payload_bits(rule: SplitRule, out: BatchResult, seeds: np.ndarray) -> np.ndarray:
    lens = np.empty(len(out.heap_indices))
    for i, idx in enumerate(out.heap_indices):
        d = int(out.depths[i])
        if rule is SplitRule.GLOBAL:
            lens[i] = len(encode_global_payload(d))
        elif rule is SplitRule.DYADIC:
            lens[i] = len(encode_dyadic_payload(d, idx))
        else:
            lens[i] = len(encode_sample_payload(d, idx, int(seeds[i])))
    return lens


def measure_point(
    pair: DistributionPair,
    rule: SplitRule,
    n: int,
    seed_base: int,
    block: int,
    d_max: Optional[int] = None,
) -> RunStats:
    """Encode ``n`` runs and collect the per-run measurements."""
    seeds = derive_seeds(seed_base, _TAG_RULE[rule], block, n)
    out = encode_batch(pair, rule, seeds, d_max=d_max)
    bits = _payload_bits(rule, out, seeds)
    with np.errstate(divide="ignore"):
        pathcost = -np.log2(np.maximum(out.proposal_mass, 1e-300))
    ks = _sstats.kstest(out.samples, pair.target.cdf)
    return RunStats(
        steps=out.depths.astype(np.float64),
        bits=bits,
        pathcost=pathcost,
        ks_p=float(ks.pvalue),
    )


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".10g")
    return str(x)


def _stats_row(dkl, dinf, rule, n, st: RunStats, reason="") -> dict:
    mean_steps, se_steps = RunStats.mean_se(st.steps)
    mean_bits, se_bits = RunStats.mean_se(st.bits)
    mean_pc, se_pc = RunStats.mean_se(st.pathcost)
    return {
        "dkl_target": dkl,
        "dinf_target": dinf,
        "variant": rule.value,
        "n": n,
        "mean_steps": mean_steps,
        "se_steps": se_steps,
        "mean_bits": mean_bits,
        "se_bits": se_bits,
        "mean_pathcost_bits": mean_pc,
        "se_pathcost_bits": se_pc,
        "ks_p": st.ks_p,
        "reason": reason,
    }


def _empty_row(dkl, dinf, rule, reason) -> dict:
    nan = float("nan")
    return {
        "dkl_target": dkl,
        "dinf_target": dinf,
        "variant": rule.value,
        "n": 0,
        "mean_steps": nan,
        "se_steps": nan,
        "mean_bits": nan,
        "se_bits": nan,
        "mean_pathcost_bits": nan,
        "se_pathcost_bits": nan,
        "ks_p": nan,
        "reason": reason,
    }


def _run_grid(config: SweepConfig) -> list[dict]:
    points = config.points()
    pairs: list = []
    for dkl, dinf in points:
        try:
            pairs.append(gaussian_pair_for_targets(dkl, dinf))
        except Unsatisfiable as err:
            pairs.append(str(err))

    tasks = []
    for pi, ((dkl, dinf), pair) in enumerate(zip(points, pairs)):
        for rule in config.variants:
            tasks.append((pi, dkl, dinf, pair, rule))

    def work(task):
        pi, dkl, dinf, pair, rule = task
        if isinstance(pair, str):
            return (pi, rule), _empty_row(dkl, dinf, rule, f"unsatisfiable: {pair}")
        if (
            rule is SplitRule.GLOBAL
            and dinf > GLOBAL_DINF_CUTOFF
            and not config.force_global
        ):
            return (pi, rule), _empty_row(
                dkl, dinf, rule,
                "skipped: expected steps ~2^dinf; rerun with force_global",
            )
        st = measure_point(
            pair, rule, config.seeds_per_point, config.seed_base, pi, config.d_max
        )
        return (pi, rule), _stats_row(dkl, dinf, rule, config.seeds_per_point, st)

    workers = config.workers or min(8, os.cpu_count() or 1)
    results: dict = {}
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for key, row in pool.map(work, tasks):
                results[key] = row
    else:
        for task in tasks:
            key, row = work(task)
            results[key] = row
    return [results[(pi, rule)]
            for pi in range(len(points))
            for rule in config.variants]


def _run_bias(config: SweepConfig) -> list[dict]:
    (dkl, dinf) = config.points()[0]
    pair = gaussian_pair_for_targets(dkl, dinf)
    n = config.samples_per_group * config.n_groups
    rows = []
    settings: list[tuple[str, Optional[int]]] = [
        (str(extra), int(round(dkl)) + extra) for extra in config.extra_bits
    ]
    settings.append(("exact", None))
    for label, d_max in settings:
        block = 1000 if d_max is None else d_max
        seeds = derive_seeds(config.seed_base, _TAG_BIAS, block, n)
        out = encode_batch(pair, SplitRule.DYADIC, seeds, d_max=d_max)
        ref_seed = int(derive_seeds(config.seed_base, _TAG_BIAS, 5000 + block, 1)[0])
        bias, se, _ = kl_bias_estimate(
            out.samples, pair.target, n_groups=config.n_groups, seed=ref_seed
        )
        rows.append({
            "dkl_target": dkl,
            "dinf_target": dinf,
            "variant": SplitRule.DYADIC.value,
            "extra_bits": label,
            "d_max": "inf" if d_max is None else d_max,
            "samples_per_group": config.samples_per_group,
            "n_groups": config.n_groups,
            "bias_bits": bias,
            "se_bias_bits": se,
        })
    return rows


def run_sweep(config: SweepConfig) -> list[dict]:
    """Run the configured sweep; returns rows and writes CSV when asked."""
    if config.mode == "bias_vs_extra_bits":
        rows = _run_bias(config)
        header = BIAS_CSV_HEADER
    else:
        rows = _run_grid(config)
        header = CSV_HEADER
    if config.out_path:
        write_rows(rows, config.out_path, header)
    return rows


def write_rows(rows: list[dict], path: str, header: str = CSV_HEADER) -> None:
    columns = header.split(",")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


def _slope(xs: list[float], ys: list[float]) -> float:
    x = np.asarray(xs)
    y = np.asarray(ys)
    x = x - x.mean()
    return float((x @ y) / (x @ x))


def check_thresholds(config: SweepConfig, rows: list[dict]) -> list[str]:
    """Acceptance-style threshold checks; returns violation messages."""
    bad: list[str] = []
    if config.mode == "bias_vs_extra_bits":
        numbered = [r for r in rows if r["extra_bits"] != "exact"]
        exact = [r for r in rows if r["extra_bits"] == "exact"][0]
        for a, b in zip(numbered, numbered[1:]):
            tol = 2.0 * math.hypot(a["se_bias_bits"], b["se_bias_bits"])
            if b["bias_bits"] > a["bias_bits"] + tol:
                bad.append(
                    f"bias rose from extra={a['extra_bits']} to {b['extra_bits']}"
                )
        last = numbered[-1]
        tol = 3.0 * math.hypot(last["se_bias_bits"], exact["se_bias_bits"])
        if abs(last["bias_bits"] - exact["bias_bits"]) > tol:
            bad.append("bias at the largest budget is not within 3 SE of exact")
        return bad

    good = [r for r in rows if not r["reason"]]
    if config.mode == "unbiasedness":
        for r in good:
            if not r["ks_p"] > 1e-3:
                bad.append(
                    f"KS rejects at dkl={r['dkl_target']} variant={r['variant']}"
                )
        return bad

    by_variant: dict = {}
    for r in good:
        by_variant.setdefault(r["variant"], []).append(r)

    for variant in (SplitRule.SAMPLE.value, SplitRule.DYADIC.value):
        rs = by_variant.get(variant, [])
        if config.mode == "runtime_vs_dinf" and len(rs) >= 2:
            m = _slope([r["dinf_target"] for r in rs], [r["mean_steps"] for r in rs])
            if abs(m) >= 0.1:
                bad.append(f"{variant}: runtime slope {m:.3f} steps/bit >= 0.1")
        if config.mode == "codelength_vs_dkl":
            for r in rs:
                dkl = r["dkl_target"]
                bound = dkl + 2.0 * math.log2(dkl + 1.0) + 11.0
                if r["mean_bits"] > bound:
                    bad.append(
                        f"{variant}: mean bits {r['mean_bits']:.2f} > {bound:.2f} "
                        f"at dkl={dkl}"
                    )
                pc_bound = dkl + LOG2_E + 3.0 * r["se_pathcost_bits"]
                if r["mean_pathcost_bits"] > pc_bound:
                    bad.append(
                        f"{variant}: path cost {r['mean_pathcost_bits']:.2f} > "
                        f"{pc_bound:.2f} at dkl={dkl}"
                    )

    for r in by_variant.get(SplitRule.SAMPLE.value, []):
        bound = BETA_STEPS * r["dkl_target"] + 4.0 + 3.0 * r["se_steps"]
        if r["mean_steps"] > bound:
            bad.append(
                f"sample: mean steps {r['mean_steps']:.2f} > {bound:.2f} "
                f"at dkl={r['dkl_target']}"
            )

    if config.mode == "runtime_vs_dinf":
        rs = [
            r for r in by_variant.get(SplitRule.GLOBAL.value, [])
            if 4.0 <= r["dinf_target"] <= 9.0
        ]
        if len(rs) >= 2:
            m = _slope(
                [r["dinf_target"] for r in rs],
                [math.log2(r["mean_steps"]) for r in rs],
            )
            if m < math.log2(1.8):
                bad.append(
                    f"global: runtime grows x{2**m:.2f}/bit, below x1.8"
                )
    return bad
