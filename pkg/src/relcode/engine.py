"""Greedy rejection encoder/decoder over partition trees.

The encoder walks the partition tree: at each node it draws a sample from
the proposal restricted to the active interval, accepts it with a clipped
density-ratio probability, and on rejection descends into one child,
raising a running acceptance level so that already-ruled-out target mass is
never counted twice.  The code for an accepted sample is the node's heap
index.  The decoder never sees the target distribution: it replays the
root-to-node path from the heap index and the shared per-node random
stream, reconstructing the same restricted-quantile draw bit for bit.

State bookkeeping follows the level formulation: with level ``L_d`` and
ruled-out mass ``T_d`` (``L_0 = T_0 = 0``),

    accept prob at x:  clip(P(S_d) * (r(x) - L_d) / (1 - T_d), 0, 1)
    L_{d+1} = L_d + (1 - T_d) / P(S_d)
    T_{d+1} = 1 - [Q - L_{d+1} P](S_{d+1} intersected with {r >= L_{d+1}})

which keeps ``1 - T_d`` equal to the residual mass of the active interval
at the current level for any split rule.

Interval endpoints are tracked in CDF coordinates (``f_lo``, ``f_hi``) by
the exact same float expressions on both encoder and decoder, which is what
makes the replay bit-exact.  All heavy paths are vectorized across runs;
``encode`` is the single-run wrapper around the same loop.
"""

from __future__ import annotations

import array
import enum
import math
import threading
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .distributions import DistributionPair, Distribution1D, NoFiniteMode
from .partition import Interval, REAL_LINE, path_bits
from .randomness import node_uniforms, node_randoms

__all__ = [
    "SplitRule",
    "EncoderState",
    "RecResult",
    "BatchResult",
    "NonTermination",
    "InvalidIndex",
    "DegenerateBranch",
    "initial_state",
    "accept_prob",
    "advance_level",
    "branch_choice",
    "encode",
    "encode_batch",
    "decode",
    "simulate_bound_masses",
]

HARD_STEP_CAP = 10**6
# the global rule's step distribution has a polynomial tail (hazard ~ 3/d),
# so very deep legitimate runs occur in large batches; its cap is wider
GLOBAL_STEP_CAP = 10**8
_DEGENERATE_EPS = 1e-12


class SplitRule(str, enum.Enum):
    """How the active interval is split after a rejection."""

    GLOBAL = "global"
    SAMPLE = "sample"
    DYADIC = "dyadic"


class NonTermination(RuntimeError):
    """The encoder exceeded the hard step cap (contract violation upstream)."""


class InvalidIndex(ValueError):
    """A decoded path bit leads into an empty or zero-mass interval."""


class DegenerateBranch(ArithmeticError):
    """Both children carry zero residual mass (numerical exhaustion)."""


@dataclass(frozen=True)
class EncoderState:
    """Snapshot of the recursion after ``step`` rejections."""

    step: int
    index: int
    interval: Interval
    level: float
    ruled_out: float
    proposal_mass: float
    f_lo: float
    f_hi: float


@dataclass(frozen=True)
class RecResult:
    """Output of one encode: the accepted sample and its tree address.

    ``accepted`` is False only for depth-limited runs that hit the step
    budget.  ``bound_trace`` holds the active intervals S_0 .. S_depth.
    """

    sample: float
    heap_index: int
    depth: int
    accepted: bool
    rule: SplitRule
    seed: int
    proposal_mass: float
    bound_trace: tuple[Interval, ...]


@dataclass(frozen=True)
class BatchResult:
    """Vectorized encode outputs, aligned with the input seed order."""

    samples: np.ndarray
    depths: np.ndarray
    heap_indices: list
    accepted: np.ndarray
    proposal_mass: np.ndarray


def initial_state(pair: DistributionPair) -> EncoderState:
    return EncoderState(
        step=0,
        index=1,
        interval=REAL_LINE,
        level=0.0,
        ruled_out=0.0,
        proposal_mass=1.0,
        f_lo=0.0,
        f_hi=1.0,
    )


def accept_prob(pair: DistributionPair, state: EncoderState, x: float) -> float:
    """Clipped acceptance probability at ``x``.

    Returns 1.0 outright in the degenerate regime (all mass ruled out to
    machine precision), implementing the accept-immediately convention.
    """
    resid = 1.0 - state.ruled_out
    if resid <= _DEGENERATE_EPS:
        return 1.0
    r = np.exp(pair.log_ratio_nats(x))
    beta = state.proposal_mass * (r - state.level) / resid
    return float(np.clip(beta, 0.0, 1.0))


def advance_level(pair: DistributionPair, state: EncoderState) -> tuple[float, float]:
    """Next (level, ruled-out mass) for the state's interval."""
    level_next = state.level + (1.0 - state.ruled_out) / state.proposal_mass
    resid = pair.residual_above(state.interval.lo, state.interval.hi, level_next)
    return level_next, float(np.clip(1.0 - resid, 0.0, 1.0))


def branch_choice(
    pair: DistributionPair,
    rule: SplitRule,
    state: EncoderState,
    x_rejected: float,
    u_branch: Optional[float] = None,
) -> tuple[int, EncoderState]:
    """Child choice and advanced state after a rejection at ``x_rejected``.

    Global keeps the whole interval (bit 0); sample splitting keeps the side
    containing the ratio mode; dyadic splitting picks a child with
    probability proportional to its residual mass at the next level (this is
    the only rule that consumes ``u_branch``).

    This is the readable scalar route; it tracks interval endpoints through
    the proposal CDF, so its states may differ from the replay-exact encoder
    loop in the last ulp.
    """
    level_next = state.level + (1.0 - state.ruled_out) / state.proposal_mass
    s = state.interval
    if rule is SplitRule.GLOBAL:
        bit = 0
        lo, hi = s.lo, s.hi
        f_lo, f_hi = state.f_lo, state.f_hi
    elif rule is SplitRule.SAMPLE:
        bit = 0 if x_rejected > pair.ratio_mode else 1
        f_mid = float(pair.proposal.cdf(x_rejected))
        if bit == 0:
            lo, hi, f_lo, f_hi = s.lo, x_rejected, state.f_lo, f_mid
        else:
            lo, hi, f_lo, f_hi = x_rejected, s.hi, f_mid, state.f_hi
    elif rule is SplitRule.DYADIC:
        if u_branch is None:
            raise ValueError("dyadic branching needs u_branch")
        f_mid = 0.5 * (state.f_lo + state.f_hi)
        c = float(pair.proposal.quantile(f_mid))
        res_left = float(pair.residual_above(s.lo, c, level_next))
        res_right = float(pair.residual_above(c, s.hi, level_next))
        total = res_left + res_right
        if total <= 0.0:
            raise DegenerateBranch("both children have zero residual mass")
        bit = 1 if u_branch < res_right / total else 0
        if bit == 0:
            lo, hi, f_lo, f_hi = s.lo, c, state.f_lo, f_mid
        else:
            lo, hi, f_lo, f_hi = c, s.hi, f_mid, state.f_hi
    else:  # pragma: no cover
        raise ValueError(f"unknown rule {rule}")
    resid = float(pair.residual_above(lo, hi, level_next))
    next_state = EncoderState(
        step=state.step + 1,
        index=2 * state.index + bit,
        interval=Interval(lo, hi),
        level=level_next,
        ruled_out=float(np.clip(1.0 - resid, 0.0, 1.0)),
        proposal_mass=f_hi - f_lo,
        f_lo=f_lo,
        f_hi=f_hi,
    )
    return bit, next_state


def _check_rule(pair: DistributionPair, rule: SplitRule) -> None:
    if rule is SplitRule.SAMPLE and not pair.has_finite_mode:
        raise NoFiniteMode("sample splitting needs a finite ratio mode")


class _BatchState:
    """Per-run arrays for the alive subset of a vectorized encode."""

    def __init__(self, n: int, seeds: np.ndarray):
        self.seeds = seeds.astype(np.uint64)
        self.lo = np.full(n, -np.inf)
        self.hi = np.full(n, np.inf)
        self.f_lo = np.zeros(n)
        self.f_hi = np.ones(n)
        self.level = np.zeros(n)
        self.ruled = np.zeros(n)
        self.k_lo = np.zeros(n, np.uint64)
        self.k_mid = np.zeros(n, np.uint64)
        self.k_hi = np.zeros(n, np.uint64)

    def take(self, mask: np.ndarray) -> None:
        for name in ("seeds", "lo", "hi", "f_lo", "f_hi", "level", "ruled",
                     "k_lo", "k_mid", "k_hi"):
            setattr(self, name, getattr(self, name)[mask])

    def heap_index(self, i: int, depth: int) -> int:
        offset = (
            (int(self.k_hi[i]) << 128)
            | (int(self.k_mid[i]) << 64)
            | int(self.k_lo[i])
        )
        return (1 << depth) + offset


def _branch_arrays(pair, rule, st: _BatchState, x, t, u_branch, level_next):
    """Split and descend for every (rejected) run in ``st``; returns residuals."""
    one = np.uint64(1)
    s63 = np.uint64(63)
    if rule is SplitRule.GLOBAL:
        bit = np.zeros(x.shape, np.uint64)
        res_child = pair.residual_above(st.lo, st.hi, level_next)
    elif rule is SplitRule.SAMPLE:
        mode = pair.ratio_mode
        keep_low = x > mode
        bit = np.where(keep_low, 0, 1).astype(np.uint64)
        st.hi = np.where(keep_low, x, st.hi)
        st.f_hi = np.where(keep_low, t, st.f_hi)
        st.lo = np.where(keep_low, st.lo, x)
        st.f_lo = np.where(keep_low, st.f_lo, t)
        res_child = pair.residual_above(st.lo, st.hi, level_next)
    elif rule is SplitRule.DYADIC:
        f_mid = 0.5 * (st.f_lo + st.f_hi)
        c = pair.proposal.quantile(f_mid)
        res_left = pair.residual_above(st.lo, c, level_next)
        res_right = pair.residual_above(c, st.hi, level_next)
        total = res_left + res_right
        exhausted = total <= 0.0
        with np.errstate(invalid="ignore", divide="ignore"):
            p_right = np.where(exhausted, 0.0, res_right / np.where(exhausted, 1.0, total))
        go_right = u_branch < p_right
        bit = np.where(go_right, 1, 0).astype(np.uint64)
        st.lo = np.where(go_right, c, st.lo)
        st.f_lo = np.where(go_right, f_mid, st.f_lo)
        st.hi = np.where(go_right, st.hi, c)
        st.f_hi = np.where(go_right, st.f_hi, f_mid)
        res_child = np.where(go_right, res_right, res_left)
        res_child = np.where(exhausted, np.nan, res_child)
    else:  # pragma: no cover
        raise ValueError(f"unknown rule {rule}")
    carry0 = st.k_lo >> s63
    st.k_lo = (st.k_lo << one) | bit
    carry1 = st.k_mid >> s63
    st.k_mid = (st.k_mid << one) | carry0
    overflow = st.k_hi >> s63
    st.k_hi = (st.k_hi << one) | carry1
    if overflow.any():
        raise NonTermination("tree offset exceeded 192 bits")
    st.level = level_next
    st.ruled = np.clip(1.0 - res_child, 0.0, 1.0)  # NaN marks exhausted runs
    return res_child


class _GlobalSchedule:
    """Lazily grown (level, residual) sequence for the global rule.

    With the whole line active, the level recurrence does not depend on the
    run at all: L_{d+1} = L_d + res(L_d) with res the residual mass of the
    real line.  ``res[d] <= eps`` marks the step from which the degenerate
    accept-everything convention applies.
    """

    def __init__(self, pair: DistributionPair):
        self.pair = pair
        self.levels = array.array("d", [0.0])
        self.resid = array.array("d", [1.0])
        self.exhausted_at: Optional[int] = None
        self._lock = threading.Lock()

    def window(self, start: int, width: int) -> tuple[np.ndarray, np.ndarray]:
        with self._lock:
            levels, resid = self.levels, self.resid
            residual = self.pair.residual_real_line
            while len(levels) < start + width and self.exhausted_at is None:
                level = levels[-1] + resid[-1]
                res = residual(level)
                levels.append(level)
                resid.append(res)
                if res <= _DEGENERATE_EPS:
                    self.exhausted_at = len(levels) - 1
                if len(levels) > GLOBAL_STEP_CAP:
                    raise NonTermination("global level schedule exceeds step cap")
            stop = min(start + width, len(levels))
            return (
                np.asarray(levels[start:stop]),
                np.asarray(resid[start:stop]),
            )


_schedule_cache: dict[DistributionPair, _GlobalSchedule] = {}
_schedule_cache_lock = threading.Lock()


def _global_schedule(pair: DistributionPair) -> _GlobalSchedule:
    with _schedule_cache_lock:
        sched = _schedule_cache.get(pair)
        if sched is None:
            if len(_schedule_cache) > 64:
                _schedule_cache.clear()
            sched = _schedule_cache.setdefault(pair, _GlobalSchedule(pair))
        return sched


def _run_global(pair, seeds, d_max, trace):
    """Global-rule encode, vectorized across runs and steps.

    The active interval never shrinks, so every step draws from the full
    proposal and the acceptance threshold sequence is shared by all runs;
    steps are processed in windows to keep the straggler tail cheap.
    """
    seeds = np.atleast_1d(np.asarray(seeds, dtype=np.uint64))
    n = seeds.shape[0]
    sched = _global_schedule(pair)
    limit = math.inf if d_max is None else d_max
    out_sample = np.empty(n)
    out_depth = np.zeros(n, np.int64)
    out_accepted = np.zeros(n, bool)
    alive = np.arange(n)
    alive_seeds = seeds
    d0 = 0
    target_elems = 1 << 20  # per-window work cap keeps memory flat
    while alive.size:
        if d0 > GLOBAL_STEP_CAP:
            raise NonTermination(f"no acceptance within {GLOBAL_STEP_CAP} steps")
        width = int(np.clip(target_elems // alive.size, 16, 1 << 16))
        levels, resid = sched.window(d0, width)
        w = levels.shape[0]
        if w == 0:  # pragma: no cover - schedule always covers live depths
            raise NonTermination("global schedule exhausted with live runs")
        depths = np.arange(d0, d0 + w, dtype=np.uint64)
        zeros = np.uint64(0)
        u_s, u_a, _ = node_uniforms(
            alive_seeds[:, None], depths[None, :], zeros, zeros, zeros
        )
        x = pair.proposal.quantile(u_s)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            r = np.exp(pair.log_ratio_nats(x))
            beta = np.clip((r - levels[None, :]) / resid[None, :], 0.0, 1.0)
        # degenerate exhaustion accepts unconditionally from that step on
        beta = np.where(resid[None, :] <= _DEGENERATE_EPS, 1.0, beta)
        stop = u_a <= beta
        if d0 <= limit < d0 + w:
            # the depth budget forces a return at that column
            stop[:, int(limit) - d0] = True
        hit = stop.any(axis=1)
        if hit.any():
            rows = np.nonzero(hit)[0]
            first = np.argmax(stop[rows], axis=1)
            ids = alive[rows]
            out_sample[ids] = x[rows, first]
            out_depth[ids] = d0 + first
            out_accepted[ids] = u_a[rows, first] <= beta[rows, first]
            keep = ~hit
            alive = alive[keep]
            alive_seeds = alive_seeds[keep]
        d0 += w
    heap_indices = [1 << int(dd) for dd in out_depth]
    if trace is not None:
        trace.extend([REAL_LINE] * (int(out_depth[0]) + 1))
    return BatchResult(
        samples=out_sample,
        depths=out_depth,
        heap_indices=heap_indices,
        accepted=out_accepted,
        proposal_mass=np.ones(n),
    )


def _run_batch(pair, rule, seeds, d_max, trace):
    _check_rule(pair, rule)
    seeds = np.atleast_1d(np.asarray(seeds, dtype=np.uint64))
    n = seeds.shape[0]
    if trace is not None and n != 1:
        raise ValueError("trace capture only supported for single runs")
    if rule is SplitRule.GLOBAL:
        return _run_global(pair, seeds, d_max, trace)
    st = _BatchState(n, seeds)
    alive_ids = np.arange(n)
    out_sample = np.empty(n)
    out_depth = np.zeros(n, np.int64)
    out_accepted = np.zeros(n, bool)
    out_mass = np.ones(n)
    out_index = [0] * n
    limit = math.inf if d_max is None else d_max
    d = 0
    proposal = pair.proposal
    while alive_ids.size:
        if d > HARD_STEP_CAP:
            raise NonTermination(f"no acceptance within {HARD_STEP_CAP} steps")
        if trace is not None:
            trace.append(Interval(float(st.lo[0]), float(st.hi[0])))
        u_s, u_a, u_b = node_uniforms(
            st.seeds, np.uint64(d), st.k_lo, st.k_mid, st.k_hi
        )
        mass = st.f_hi - st.f_lo
        t = st.f_lo + u_s * mass
        x = proposal.quantile(t)
        resid = 1.0 - st.ruled
        degenerate = resid <= _DEGENERATE_EPS
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            r = np.exp(pair.log_ratio_nats(x))
            beta = np.clip(mass * (r - st.level) / resid, 0.0, 1.0)
        beta = np.where(degenerate, 1.0, beta)
        accepted_now = u_a <= beta
        stop = accepted_now | (d >= limit)
        rejected = ~stop
        if rejected.any():
            with np.errstate(divide="ignore", invalid="ignore"):
                # stopped runs are sliced away below; only rejected rows matter
                level_next = st.level + resid / mass
            keep = _finalize_then_take(
                st, alive_ids, stop, accepted_now,
                out_sample, out_depth, out_accepted, out_mass, out_index,
                x, mass, d,
            )
            alive_ids = keep
            res_child = _branch_arrays(
                pair, rule,
                st,
                x[rejected], t[rejected], u_b[rejected],
                level_next[rejected],
            )
            exhausted = np.isnan(res_child)
            if exhausted.any():
                # numerical exhaustion: terminate accepting the current draw
                ids = alive_ids[exhausted]
                out_sample[ids] = x[rejected][exhausted]
                out_depth[ids] = d
                out_accepted[ids] = True
                out_mass[ids] = mass[rejected][exhausted]
                for j_local, j_global in zip(np.nonzero(exhausted)[0], ids):
                    # undo the bit appended by the descent (it was 0)
                    out_index[j_global] = st.heap_index(j_local, d + 1) >> 1
                st.take(~exhausted)
                alive_ids = alive_ids[~exhausted]
        else:
            alive_ids = _finalize_then_take(
                st, alive_ids, stop, accepted_now,
                out_sample, out_depth, out_accepted, out_mass, out_index,
                x, mass, d,
            )
        d += 1
    return BatchResult(
        samples=out_sample,
        depths=out_depth,
        heap_indices=out_index,
        accepted=out_accepted,
        proposal_mass=out_mass,
    )


def _finalize_then_take(
    st, alive_ids, stop, accepted_now,
    out_sample, out_depth, out_accepted, out_mass, out_index,
    x, mass, d,
):
    """Write outputs for stopping runs, then shrink ``st`` to the rest."""
    if stop.any():
        ids = alive_ids[stop]
        out_sample[ids] = x[stop]
        out_depth[ids] = d
        out_accepted[ids] = accepted_now[stop]
        out_mass[ids] = mass[stop]
        for j_local, j_global in zip(np.nonzero(stop)[0], ids):
            out_index[j_global] = st.heap_index(j_local, d)
    keep = ~stop
    st.take(keep)
    return alive_ids[keep]


def encode_batch(
    pair: DistributionPair,
    rule: SplitRule,
    seeds: Sequence[int],
    d_max: Optional[int] = None,
) -> BatchResult:
    """Encode one sample per seed; heavy lifting is vectorized across runs."""
    return _run_batch(pair, rule, seeds, d_max, trace=None)


def encode(
    pair: DistributionPair,
    rule: SplitRule,
    seed: int,
    d_max: Optional[int] = None,
) -> RecResult:
    """Encode a single sample from the target using the shared random stream."""
    trace: list[Interval] = []
    out = _run_batch(pair, rule, [seed], d_max, trace=trace)
    depth = int(out.depths[0])
    return RecResult(
        sample=float(out.samples[0]),
        heap_index=out.heap_indices[0],
        depth=depth,
        accepted=bool(out.accepted[0]),
        rule=rule,
        seed=seed,
        proposal_mass=float(out.proposal_mass[0]),
        bound_trace=tuple(trace[: depth + 1]),
    )


def decode(
    proposal: Distribution1D,
    rule: SplitRule,
    seed: int,
    heap_index: int,
) -> float:
    """Reconstruct the encoder's accepted sample from its heap index.

    Only the proposal is needed: the path bits come from the index and the
    split points from the shared per-node random stream.
    """
    if heap_index < 1:
        raise InvalidIndex("heap indices start at 1")
    bits = path_bits(heap_index)
    f_lo, f_hi = 0.0, 1.0
    node = 1
    if rule is SplitRule.GLOBAL:
        if any(bits):
            raise InvalidIndex("global-rule indices never take a right branch")
        node = heap_index
    else:
        for b in bits:
            if not f_hi - f_lo > 0.0:
                raise InvalidIndex("path leads into a zero-mass interval")
            if rule is SplitRule.SAMPLE:
                u = node_randoms(seed, node).u_sample
                f_mid = f_lo + u * (f_hi - f_lo)
            else:
                f_mid = 0.5 * (f_lo + f_hi)
            if b == 0:
                f_hi = f_mid
            else:
                f_lo = f_mid
            node = 2 * node + b
    if not f_hi - f_lo > 0.0:
        raise InvalidIndex("path leads into a zero-mass interval")
    u = node_randoms(seed, node).u_sample
    return float(proposal.quantile(f_lo + u * (f_hi - f_lo)))


def simulate_bound_masses(
    pair: DistributionPair,
    rule: SplitRule,
    seeds: Sequence[int],
    max_depth: int,
) -> np.ndarray:
    """Proposal mass of the active interval at depths 0..max_depth.

    Runs the splitting recursion with acceptance disabled (the bound process
    is autonomous), one row per seed.  Used for contraction-rate checks.
    """
    _check_rule(pair, rule)
    seeds = np.atleast_1d(np.asarray(seeds, dtype=np.uint64))
    n = seeds.shape[0]
    st = _BatchState(n, seeds)
    masses = np.empty((n, max_depth + 1))
    masses[:, 0] = 1.0
    proposal = pair.proposal
    for d in range(max_depth):
        u_s, _, u_b = node_uniforms(st.seeds, np.uint64(d), st.k_lo, st.k_mid, st.k_hi)
        mass = st.f_hi - st.f_lo
        t = st.f_lo + u_s * mass
        x = proposal.quantile(t)
        resid = 1.0 - st.ruled
        level_next = st.level + resid / mass
        res_child = _branch_arrays(pair, rule, st, x, t, u_b, level_next)
        if np.isnan(res_child).any():
            # exhausted runs keep their interval frozen from here on
            st.ruled = np.where(np.isnan(res_child), 1.0, st.ruled)
        masses[:, d + 1] = st.f_hi - st.f_lo
    return masses
