"""One-dimensional target/proposal distribution pairs and density-ratio services.

The coding engine never touches densities directly: everything it needs is
expressed through the operations here (log density ratio, ratio mode,
superlevel sets of the ratio, residual mass above a level, divergences).
Only the Gaussian family is implemented; ``Distribution1D`` is the extension
point for further families.

All divergences and codelengths are in bits (base-2 logarithms).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np
from scipy.special import ndtr, ndtri

if TYPE_CHECKING:
    from .partition import Interval

LN2 = math.log(2.0)

__all__ = [
    "Distribution1D",
    "DistributionPair",
    "LevelSet",
    "NoFiniteMode",
    "NotUnimodal",
    "Unsatisfiable",
    "log_density_ratio",
    "ratio_mode",
    "level_set",
    "residual_mass",
    "kl_divergence",
    "renyi_inf_divergence",
    "gaussian_pair_for_targets",
]


class NoFiniteMode(ValueError):
    """The density ratio has no finite argmax (sup log-ratio is infinite)."""


class NotUnimodal(ValueError):
    """The density ratio is not unimodal, so superlevel sets are not intervals."""


class Unsatisfiable(ValueError):
    """No Gaussian pair attains the requested divergence targets."""


@dataclass(frozen=True)
class Distribution1D:
    """A univariate distribution described by a family tag, location and scale.

    Currently only ``family="gaussian"`` is supported, in which case ``loc``
    and ``scale`` are the mean and standard deviation.
    """

    loc: float
    scale: float
    family: str = "gaussian"

    def __post_init__(self) -> None:
        if self.family != "gaussian":
            raise ValueError(f"unsupported family: {self.family!r}")
        if not (math.isfinite(self.loc) and math.isfinite(self.scale)):
            raise ValueError("loc and scale must be finite")
        if self.scale <= 0.0:
            raise ValueError("scale must be strictly positive")

    def pdf(self, x):
        z = (x - self.loc) / self.scale
        return np.exp(-0.5 * z * z) / (self.scale * math.sqrt(2.0 * math.pi))

    def logpdf(self, x):
        z = (x - self.loc) / self.scale
        return -0.5 * z * z - math.log(self.scale * math.sqrt(2.0 * math.pi))

    def cdf(self, x):
        return ndtr((x - self.loc) / self.scale)

    def quantile(self, u):
        return self.loc + self.scale * ndtri(u)


@dataclass(frozen=True)
class LevelSet:
    """The superlevel set {x : dQ/dP(x) >= level} of a pair's density ratio.

    For unimodal ratios this is an interval; ``empty`` is True when the level
    exceeds the ratio's maximum.  ``lo``/``hi`` may be infinite.
    """

    level: float
    lo: float
    hi: float

    @property
    def empty(self) -> bool:
        return self.lo > self.hi


@dataclass(frozen=True)
class DistributionPair:
    """Target Q and proposal P with cached density-ratio functionals.

    The log density ratio of two Gaussians is the quadratic
    ``ln r(x) = c2*x^2 + c1*x + c0``; all ratio services (mode, level sets,
    residual masses, divergences) are closed forms in these coefficients.
    The ratio is unimodal with a finite mode iff ``c2 < 0``, i.e. iff the
    target is strictly narrower than the proposal.
    """

    target: Distribution1D
    proposal: Distribution1D

    @cached_property
    def _coeffs(self) -> tuple[float, float, float]:
        mq, sq = self.target.loc, self.target.scale
        mp, sp = self.proposal.loc, self.proposal.scale
        c2 = 0.5 / (sp * sp) - 0.5 / (sq * sq)
        c1 = mq / (sq * sq) - mp / (sp * sp)
        c0 = math.log(sp / sq) - mq * mq / (2 * sq * sq) + mp * mp / (2 * sp * sp)
        return c2, c1, c0

    def log_ratio_nats(self, x):
        """Natural log of dQ/dP at x (scalar or array)."""
        c2, c1, c0 = self._coeffs
        return (c2 * x + c1) * x + c0

    @property
    def identical(self) -> bool:
        c2, c1, _ = self._coeffs
        return c2 == 0.0 and c1 == 0.0

    @property
    def has_finite_mode(self) -> bool:
        return self._coeffs[0] < 0.0 or self.identical

    @cached_property
    def ratio_mode(self) -> float:
        """Argmax of the density ratio; raises NoFiniteMode when unbounded."""
        c2, c1, _ = self._coeffs
        if self.identical:
            # constant ratio: any point qualifies; use the proposal location
            return self.proposal.loc
        if c2 >= 0.0:
            raise NoFiniteMode(
                "density ratio is unbounded (target scale >= proposal scale)"
            )
        return -c1 / (2.0 * c2)

    @cached_property
    def dkl_bits(self) -> float:
        mq, sq = self.target.loc, self.target.scale
        mp, sp = self.proposal.loc, self.proposal.scale
        nats = (
            math.log(sp / sq)
            + (sq * sq + (mq - mp) ** 2) / (2.0 * sp * sp)
            - 0.5
        )
        return nats / LN2

    @cached_property
    def dinf_bits(self) -> float:
        if self.identical:
            return 0.0
        c2, _, _ = self._coeffs
        if c2 >= 0.0:
            return math.inf
        return self.log_ratio_nats(self.ratio_mode) / LN2

    def level_bounds(self, level):
        """Superlevel-set endpoints for an array (or scalar) of levels.

        Returns ``(lo, hi)`` with ``lo > hi`` encoding the empty set.  Raises
        NotUnimodal when the ratio opens upward and the set is not an interval.
        """
        c2, c1, c0 = self._coeffs
        level = np.asarray(level, dtype=np.float64)
        if c2 > 0.0:
            raise NotUnimodal(
                "superlevel sets are not intervals (target wider than proposal)"
            )
        with np.errstate(divide="ignore"):
            lnl = np.log(level)
        if c2 == 0.0:
            if c1 == 0.0:
                # identical distributions: r == 1 everywhere
                full = lnl <= 0.0
                lo = np.where(full, -np.inf, np.inf)
                hi = np.where(full, np.inf, -np.inf)
            elif c1 > 0.0:
                lo = np.where(lnl == -np.inf, -np.inf, (lnl - c0) / c1)
                hi = np.full_like(lo, np.inf)
            else:
                hi = np.where(lnl == -np.inf, np.inf, (lnl - c0) / c1)
                lo = np.full_like(hi, -np.inf)
            return lo, hi
        disc = c1 * c1 - 4.0 * c2 * (c0 - lnl)
        with np.errstate(invalid="ignore"):
            root = np.sqrt(np.maximum(disc, 0.0))
            x_a = (-c1 - root) / (2.0 * c2)
            x_b = (-c1 + root) / (2.0 * c2)
        lo = np.where(disc < 0.0, np.inf, np.minimum(x_a, x_b))
        hi = np.where(disc < 0.0, -np.inf, np.maximum(x_a, x_b))
        lo = np.where(lnl == -np.inf, -np.inf, lo)
        hi = np.where(lnl == -np.inf, np.inf, hi)
        return lo, hi

    def residual_real_line(self, level: float) -> float:
        """Scalar residual mass of the whole line above ``level``.

        Pure ``math`` implementation used by tight per-step recurrences; may
        differ from :meth:`residual_above` in the last ulp.
        """
        if level <= 0.0:
            return 1.0
        c2, c1, c0 = self._coeffs
        lnl = math.log(level)
        if c2 > 0.0:
            raise NotUnimodal(
                "superlevel sets are not intervals (target wider than proposal)"
            )
        if c2 == 0.0:
            if c1 == 0.0:
                return 0.0 if lnl > 0.0 else 1.0 - level
            x0 = (lnl - c0) / c1
            lo, hi = (x0, math.inf) if c1 > 0.0 else (-math.inf, x0)
        else:
            disc = c1 * c1 - 4.0 * c2 * (c0 - lnl)
            if disc <= 0.0:
                return 0.0
            root = math.sqrt(disc)
            x_a = (-c1 - root) / (2.0 * c2)
            x_b = (-c1 + root) / (2.0 * c2)
            lo, hi = min(x_a, x_b), max(x_a, x_b)
        sqrt2 = math.sqrt(2.0)

        def _cdf(x: float, m: float, s: float) -> float:
            if x == math.inf:
                return 1.0
            if x == -math.inf:
                return 0.0
            return 0.5 * math.erfc(-(x - m) / (s * sqrt2))

        q = _cdf(hi, self.target.loc, self.target.scale) - _cdf(
            lo, self.target.loc, self.target.scale
        )
        p = _cdf(hi, self.proposal.loc, self.proposal.scale) - _cdf(
            lo, self.proposal.loc, self.proposal.scale
        )
        return min(max(q - level * p, 0.0), 1.0)

    def residual_above(self, lo, hi, level):
        """Residual mass of ``[lo, hi]`` above ``level``, vectorized.

        Computes Q(A) - level * P(A) where A is [lo, hi] intersected with
        {r >= level}, clamped to [0, 1].
        """
        ls_lo, ls_hi = self.level_bounds(level)
        a = np.maximum(np.asarray(lo, dtype=np.float64), ls_lo)
        b = np.minimum(np.asarray(hi, dtype=np.float64), ls_hi)
        nonempty = a < b
        a = np.where(nonempty, a, 0.0)
        b = np.where(nonempty, b, 0.0)
        qmass = ndtr((b - self.target.loc) / self.target.scale) - ndtr(
            (a - self.target.loc) / self.target.scale
        )
        pmass = ndtr((b - self.proposal.loc) / self.proposal.scale) - ndtr(
            (a - self.proposal.loc) / self.proposal.scale
        )
        out = np.where(nonempty, qmass - level * pmass, 0.0)
        return np.clip(out, 0.0, 1.0)


def log_density_ratio(pair: DistributionPair, x: float):
    """Base-2 log of dQ/dP at x."""
    return pair.log_ratio_nats(x) / LN2


def ratio_mode(pair: DistributionPair) -> float:
    """Argmax of the density ratio (closed form for Gaussian pairs)."""
    return pair.ratio_mode


def level_set(pair: DistributionPair, level: float) -> LevelSet:
    """The interval {x : dQ/dP(x) >= level}; empty when level > max ratio."""
    if level < 0.0:
        raise ValueError("level must be nonnegative")
    lo, hi = pair.level_bounds(level)
    return LevelSet(level=level, lo=float(lo), hi=float(hi))


def residual_mass(pair: DistributionPair, interval: "Interval", level: float) -> float:
    """Mass of ``interval`` not yet accounted for at ``level``.

    Equals Q(A) - level * P(A) with A = interval intersected with the
    superlevel set of the ratio at ``level``, clamped to [0, 1].
    """
    return float(pair.residual_above(interval.lo, interval.hi, level))


def kl_divergence(pair: DistributionPair) -> float:
    """Kullback-Leibler divergence of target from proposal, in bits."""
    return pair.dkl_bits


def renyi_inf_divergence(pair: DistributionPair) -> float:
    """Renyi infinity-divergence (sup of the base-2 log ratio), in bits."""
    return pair.dinf_bits


def _kl_gap_nats(s: float) -> float:
    # g(s) = s^2 - 1 - 2 ln s: twice the KL (nats) of N(0, s^2) from N(0, 1)
    return s * s - 1.0 - 2.0 * math.log(s)


def _dinf_nats_at(s: float, dkl_nats2: float) -> float:
    # sup log-ratio (nats) of the pair N(m(s), s^2) || N(0,1) whose KL matches
    # dkl_nats2 / 2; m^2 follows from the KL closed form.
    m2 = dkl_nats2 - _kl_gap_nats(s)
    return -math.log(s) + m2 / (2.0 * (1.0 - s * s))


def gaussian_pair_for_targets(dkl_bits: float, dinf_bits: float) -> DistributionPair:
    """Construct Q = N(m, s^2), P = N(0, 1) with the requested divergences.

    Solves the two divergence equations by bisection on s in (0, 1): for any
    feasible s the mean offset m follows in closed form from the KL target,
    and the resulting sup log-ratio is strictly increasing in s.  Raises
    Unsatisfiable when the infinity-divergence target is below the feasible
    floor for the given KL (the floor is attained at m = 0).
    """
    if not (dinf_bits > dkl_bits > 0.0):
        raise Unsatisfiable("targets must satisfy dinf > dkl > 0")
    c = 2.0 * LN2 * dkl_bits  # = g(s0) at the m = 0 boundary
    lo, hi = 1e-12, 1.0 - 1e-15
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _kl_gap_nats(mid) > c:
            lo = mid
        else:
            hi = mid
    s0 = hi  # smallest feasible scale (m = 0)
    dinf_floor = _dinf_nats_at(s0, c) / LN2
    target_nats = dinf_bits * LN2
    if dinf_bits <= dinf_floor:
        raise Unsatisfiable(
            f"dinf={dinf_bits} not attainable at dkl={dkl_bits}; "
            f"feasible range is ({dinf_floor:.6f}, inf)"
        )
    lo, hi = s0, 1.0 - 1e-15
    if _dinf_nats_at(hi, c) < target_nats:
        raise Unsatisfiable(
            f"dinf={dinf_bits} too large to resolve at dkl={dkl_bits}"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _dinf_nats_at(mid, c) < target_nats:
            lo = mid
        else:
            hi = mid
    s = 0.5 * (lo + hi)
    m = math.sqrt(max(c - _kl_gap_nats(s), 0.0))
    pair = DistributionPair(
        target=Distribution1D(loc=m, scale=s),
        proposal=Distribution1D(loc=0.0, scale=1.0),
    )
    if (
        abs(pair.dkl_bits - dkl_bits) > 1e-6
        or abs(pair.dinf_bits - dinf_bits) > 1e-6
    ):
        raise Unsatisfiable(
            f"solver failed to meet targets ({dkl_bits}, {dinf_bits}); "
            f"got ({pair.dkl_bits}, {pair.dinf_bits})"
        )
    return pair
