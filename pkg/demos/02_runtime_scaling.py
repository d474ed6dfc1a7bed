"""How the split rules scale as the proposal gets worse.

Holding the KL divergence at 3 bits while pushing the sup log-ratio up,
the plain rejection baseline doubles its work per extra bit; the
partitioned variants do not care.
"""

import numpy as np

from relcode import SplitRule, encode_batch, gaussian_pair_for_targets
from relcode.randomness import derive_seeds

N = 2000
print(f"{N} runs per cell; mean rejections before acceptance\n")
print(f"{'dinf':>5} | {'global':>9} | {'sample':>7} | {'dyadic':>7}")
print("-" * 38)
for dinf in (4.0, 5.0, 6.0, 7.0):
    pair = gaussian_pair_for_targets(3.0, dinf)
    cells = []
    for i, rule in enumerate((SplitRule.GLOBAL, SplitRule.SAMPLE, SplitRule.DYADIC)):
        seeds = derive_seeds(5, i, int(dinf), N)
        out = encode_batch(pair, rule, seeds)
        cells.append(out.depths.mean())
    print(f"{dinf:5.0f} | {cells[0]:9.1f} | {cells[1]:7.2f} | {cells[2]:7.2f}")

print(
    "\nThe global column tracks 2^dinf; the partitioned columns sit near the"
    "\nKL divergence (3 bits) no matter how large the worst-case ratio gets."
)
