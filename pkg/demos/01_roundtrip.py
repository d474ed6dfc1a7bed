"""Encode one sample, serialize it, and decode it bit-for-bit.

The sender knows the target Q and the proposal P; the receiver knows only
P and the shared seed.  What crosses the wire is a handful of bits.
"""

from relcode import SplitRule, decode, encode, gaussian_pair_for_targets
from relcode.codecs import deserialize, serialize

pair = gaussian_pair_for_targets(3.0, 5.0)
print(f"target   Q = N({pair.target.loc:.4f}, {pair.target.scale:.4f}^2)")
print(f"proposal P = N(0, 1)")
print(f"D_KL = {pair.dkl_bits:.3f} bits, D_inf = {pair.dinf_bits:.3f} bits")

seed = 77  # shared out of band, like the proposal itself

for rule in (SplitRule.DYADIC, SplitRule.SAMPLE, SplitRule.GLOBAL):
    result = encode(pair, rule, seed)
    blob = serialize(result)
    print(f"\n[{rule.value}]")
    print(f"  accepted sample : {result.sample:+.6f}")
    print(f"  tree node       : index {result.heap_index} at depth {result.depth}")
    print(f"  code            : {blob.to01()}  ({len(blob)} bits, "
          f"{len(blob.to_bytes())} bytes on the wire)")

    # receiver side: P, the seed, and the bits; never Q
    got_rule, got_depth, got_index, _ = deserialize(blob, seed=seed)
    reconstructed = decode(pair.proposal, got_rule, seed, got_index)
    assert reconstructed == result.sample
    print(f"  decoded         : {reconstructed:+.6f}  (bit-identical)")
