"""Trading sample quality for a hard bit budget.

Capping the tree depth bounds the codelength but biases the sampler: runs
that would have needed more steps return their last draw instead.  The
bias (estimated as a divergence in bits, nearest-neighbor method) decays
as the budget grows beyond the KL divergence.
"""

from relcode import SplitRule, encode_batch, gaussian_pair_for_targets
from relcode.bench import kl_bias_estimate
from relcode.randomness import derive_seeds

pair = gaussian_pair_for_targets(3.0, 5.0)
n = 2000  # 10 estimation groups of 200

print("dyadic splits, dkl = 3 bits; budget = 3 + extra bits\n")
print(f"{'extra':>6} | {'bias (bits)':>12} | {'se':>6}")
print("-" * 32)
for extra in (1, 2, 3, 4, 6, 8, None):
    d_max = None if extra is None else 3 + extra
    seeds = derive_seeds(9, 0 if extra is None else extra, 0, n)
    out = encode_batch(pair, SplitRule.DYADIC, seeds, d_max=d_max)
    bias, se, _ = kl_bias_estimate(out.samples, pair.target, seed=extra or 99)
    label = "exact" if extra is None else f"{extra}"
    print(f"{label:>6} | {bias:+12.3f} | {se:6.3f}")

print(
    "\nOne extra bit of budget already cuts the bias well under a quarter"
    "\nbit; by eight extra bits it is indistinguishable from the exact"
    "\nsampler at this sample size."
)
