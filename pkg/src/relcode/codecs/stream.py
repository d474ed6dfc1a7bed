"""Rule-specific code payloads and the tagged container (format v1).

Payload per rule (depth D, heap index I):

* global:  gamma(D+1); the index is always 2**D.
* dyadic:  gamma(D+1) then the D raw path bits; with equal-mass splits the
  path bits are already at their entropy, so no modelling helps.
* sample:  gamma(D+1) then the path bits under arithmetic coding, where the
  0-branch probability at each node is that node's sample uniform (the mass
  fraction of the left child).  Both sides replay the uniform from the
  shared stream, so no side information is transmitted.

The container prepends a 4-bit magic and a 2-bit rule tag and is byte-packed
MSB-first; see docs/FORMAT.md for the exact bit-level contract.
"""

from __future__ import annotations

from typing import Optional

from ..engine import RecResult, SplitRule
from ..partition import path_bits
from ..randomness import node_randoms
from .arith import ArithmeticDecoder, ArithmeticEncoder, quantize_p0
from .bits import BitReader, Bits, DecodeError
from .elias import elias_gamma_decode, elias_gamma_encode

__all__ = [
    "MAGIC",
    "serialize",
    "deserialize",
    "encode_payload",
    "decode_payload",
    "encode_global_payload",
    "decode_global_payload",
    "encode_dyadic_payload",
    "decode_dyadic_payload",
    "encode_sample_payload",
    "decode_sample_payload",
    "payload_length",
]

MAGIC = (1, 0, 1, 0)
_RULE_TAG = {SplitRule.GLOBAL: (0, 0), SplitRule.SAMPLE: (0, 1), SplitRule.DYADIC: (1, 0)}
_TAG_RULE = {bits: rule for rule, bits in _RULE_TAG.items()}


def encode_global_payload(depth: int) -> Bits:
    return elias_gamma_encode(depth + 1)


def decode_global_payload(reader: BitReader) -> tuple[int, int]:
    depth = elias_gamma_decode(reader) - 1
    return depth, 1 << depth


def encode_dyadic_payload(depth: int, heap_index: int) -> Bits:
    bits = path_bits(heap_index)
    if len(bits) != depth:
        raise ValueError("depth does not match the heap index")
    return elias_gamma_encode(depth + 1) + Bits(bits)


def decode_dyadic_payload(reader: BitReader) -> tuple[int, int]:
    depth = elias_gamma_decode(reader) - 1
    index = 1
    for _ in range(depth):
        index = (index << 1) | reader.read_bit()
    return depth, index


def encode_sample_payload(depth: int, heap_index: int, seed: int) -> Bits:
    bits = path_bits(heap_index)
    if len(bits) != depth:
        raise ValueError("depth does not match the heap index")
    out = elias_gamma_encode(depth + 1)
    if depth == 0:
        return out
    enc = ArithmeticEncoder()
    node = 1
    for b in bits:
        c_zero = quantize_p0(node_randoms(seed, node).u_sample)
        enc.encode_bit(b, c_zero)
        node = 2 * node + b
    return out + enc.finish()


def decode_sample_payload(reader: BitReader, seed: int) -> tuple[int, int]:
    depth = elias_gamma_decode(reader) - 1
    if depth == 0:
        return 0, 1
    dec = ArithmeticDecoder(reader)
    node = 1
    for _ in range(depth):
        c_zero = quantize_p0(node_randoms(seed, node).u_sample)
        node = 2 * node + dec.decode_bit(c_zero)
    consumed = dec.bits_consumed()
    if consumed > reader.remaining:
        raise DecodeError("bit stream exhausted")
    reader.advance(consumed)
    return depth, node


def encode_payload(result: RecResult) -> Bits:
    if result.rule is SplitRule.GLOBAL:
        return encode_global_payload(result.depth)
    if result.rule is SplitRule.DYADIC:
        return encode_dyadic_payload(result.depth, result.heap_index)
    return encode_sample_payload(result.depth, result.heap_index, result.seed)


def decode_payload(
    reader: BitReader, rule: SplitRule, seed: Optional[int] = None
) -> tuple[int, int]:
    """Read one payload; returns (depth, heap index)."""
    if rule is SplitRule.GLOBAL:
        return decode_global_payload(reader)
    if rule is SplitRule.DYADIC:
        return decode_dyadic_payload(reader)
    if seed is None:
        raise ValueError("sample-rule payloads need the shared seed")
    return decode_sample_payload(reader, seed)


def payload_length(result: RecResult) -> int:
    return len(encode_payload(result))


def serialize(result: RecResult) -> Bits:
    """Container: magic nibble, 2-bit rule tag, then the rule payload."""
    return Bits(MAGIC) + Bits(_RULE_TAG[result.rule]) + encode_payload(result)


def deserialize(
    bits: Bits, seed: Optional[int] = None, pos: int = 0
) -> tuple[SplitRule, int, int, int]:
    """Parse one container; returns (rule, depth, heap index, end position)."""
    reader = BitReader(bits, pos)
    magic = tuple(reader.read_bit() for _ in range(4))
    if magic != MAGIC:
        raise DecodeError("bad magic")
    tag = (reader.read_bit(), reader.read_bit())
    rule = _TAG_RULE.get(tag)
    if rule is None:
        raise DecodeError(f"unknown rule tag {tag}")
    depth, index = decode_payload(reader, rule, seed)
    return rule, depth, index, reader.pos
