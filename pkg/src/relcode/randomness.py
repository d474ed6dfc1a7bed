"""Deterministic per-node random streams shared by encoder and decoder.

Every node of the partition tree gets three independent uniforms (sample,
accept, branch) as a pure function of ``(seed, heap index)``.  The stream is
counter based: the heap index is decomposed into ``(depth, offset)`` with
``index = 2**depth + offset``, packed into a Philox4x64-10 counter block

    counter = (depth, offset[0:64], offset[64:128], offset[128:192])
    key     = (seed mod 2**64, domain constant)

and the first three 64-bit output words are mapped to [0, 1) by taking their
top 53 bits.  This is bit-exact across platforms, needs no per-node state,
and lets a decoder replay exactly the draws it needs without simulating
rejected branches.  The same primitive (under a different domain constant)
fans a benchmark base seed out into per-run seeds.

Offsets of 192 bits cover any node reachable in practice: non-global runs
terminate at depths far below 192, and global runs only ever visit offset 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["NodeRandoms", "node_randoms", "node_uniforms", "derive_seeds", "philox4x64_10"]

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_M32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S11 = np.uint64(11)
_U53_INV = float(2.0**-53)
_MASK64 = (1 << 64) - 1

# domain constants (second key word) keeping node streams and seed
# derivation statistically independent
_DOMAIN_NODE = np.uint64(0x6E6F64652D726E67)
_DOMAIN_SEED = np.uint64(0x736565642D726E67)

_MAX_OFFSET_BITS = 192


@dataclass(frozen=True)
class NodeRandoms:
    """The three uniforms attached to one (seed, heap index) pair."""

    u_sample: float
    u_accept: float
    u_branch: float


def _mulhilo(a, b):
    lo = a * b
    ah, al = a >> _S32, a & _M32
    bh, bl = b >> _S32, b & _M32
    ll = al * bl
    lh = al * bh
    hl = ah * bl
    carry = ((ll >> _S32) + (lh & _M32) + (hl & _M32)) >> _S32
    hi = ah * bh + (lh >> _S32) + (hl >> _S32) + carry
    return hi, lo


def philox4x64_10(c0, c1, c2, c3, k0, k1):
    """Philox4x64 with 10 rounds; inputs are uint64 scalars or arrays."""
    with np.errstate(over="ignore"):
        for _ in range(10):
            hi0, lo0 = _mulhilo(_M0, c0)
            hi1, lo1 = _mulhilo(_M1, c2)
            c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
            k0 = k0 + _W0
            k1 = k1 + _W1
    return c0, c1, c2, c3


def _to_unit(word):
    return (word >> _S11) * _U53_INV


def node_uniforms(seeds, depths, off_lo, off_mid, off_hi):
    """Vectorized node uniforms from pre-split heap indices.

    ``seeds``, ``depths`` and the three offset words are uint64 arrays (or
    scalars) broadcasting together; returns (u_sample, u_accept, u_branch).
    """
    k0 = np.asarray(seeds, dtype=np.uint64)
    w0, w1, w2, _ = philox4x64_10(
        np.asarray(depths, dtype=np.uint64),
        np.asarray(off_lo, dtype=np.uint64),
        np.asarray(off_mid, dtype=np.uint64),
        np.asarray(off_hi, dtype=np.uint64),
        k0,
        _DOMAIN_NODE,
    )
    return _to_unit(w0), _to_unit(w1), _to_unit(w2)


def node_randoms(seed: int, index: int) -> NodeRandoms:
    """The uniforms for a single tree node."""
    if index < 1:
        raise ValueError("heap indices start at 1")
    d = index.bit_length() - 1
    offset = index - (1 << d)
    if offset >> _MAX_OFFSET_BITS:
        raise ValueError(f"node offset exceeds {_MAX_OFFSET_BITS} bits")
    u0, u1, u2 = node_uniforms(
        np.uint64(seed & _MASK64),
        np.uint64(d),
        np.uint64(offset & _MASK64),
        np.uint64((offset >> 64) & _MASK64),
        np.uint64(offset >> 128),
    )
    return NodeRandoms(float(u0), float(u1), float(u2))


def derive_seeds(base_seed: int, tag: int, block: int, n: int) -> np.ndarray:
    """``n`` decorrelated 64-bit run seeds for one benchmark block."""
    k0 = np.uint64(base_seed & _MASK64)
    w0, _, _, _ = philox4x64_10(
        np.uint64(tag & _MASK64),
        np.uint64(block & _MASK64),
        np.arange(n, dtype=np.uint64),
        np.uint64(0),
        k0,
        _DOMAIN_SEED,
    )
    return np.atleast_1d(w0)
