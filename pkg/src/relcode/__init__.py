"""Relative entropy coding via greedy rejection sampling over partition trees.

Encode a single sample from a target distribution Q using only a proposal P
and shared randomness, at a bit cost close to the KL divergence between
them.  The decoder reconstructs the exact sample from the code and the
shared seed without ever seeing Q.

Layers:

* :mod:`relcode.distributions` - Gaussian target/proposal pairs and their
  density-ratio services.
* :mod:`relcode.partition` - binary-tree interval bookkeeping.
* :mod:`relcode.randomness` - the shared counter-based per-node stream.
* :mod:`relcode.engine` - the encoder/decoder recursion.
* :mod:`relcode.codecs` - bitstream serialization (universal integer codes,
  arithmetic coding, power-law index models).
* :mod:`relcode.bench` - the benchmark harness and ``bench`` CLI.
"""

from .distributions import (
    Distribution1D,
    DistributionPair,
    LevelSet,
    NoFiniteMode,
    NotUnimodal,
    Unsatisfiable,
    gaussian_pair_for_targets,
    kl_divergence,
    level_set,
    log_density_ratio,
    ratio_mode,
    renyi_inf_divergence,
    residual_mass,
)
from .engine import (
    BatchResult,
    EncoderState,
    InvalidIndex,
    NonTermination,
    RecResult,
    SplitRule,
    accept_prob,
    advance_level,
    branch_choice,
    decode,
    encode,
    encode_batch,
    initial_state,
    simulate_bound_masses,
)
from .partition import Interval, child, depth, parent, path_bits, split_dyadic, split_global, split_sample
from .randomness import NodeRandoms, derive_seeds, node_randoms

__version__ = "0.1.0"

__all__ = [
    "Distribution1D",
    "DistributionPair",
    "LevelSet",
    "NoFiniteMode",
    "NotUnimodal",
    "Unsatisfiable",
    "gaussian_pair_for_targets",
    "kl_divergence",
    "level_set",
    "log_density_ratio",
    "ratio_mode",
    "renyi_inf_divergence",
    "residual_mass",
    "BatchResult",
    "EncoderState",
    "InvalidIndex",
    "NonTermination",
    "RecResult",
    "SplitRule",
    "accept_prob",
    "advance_level",
    "branch_choice",
    "decode",
    "encode",
    "encode_batch",
    "initial_state",
    "simulate_bound_masses",
    "Interval",
    "child",
    "depth",
    "parent",
    "path_bits",
    "split_dyadic",
    "split_global",
    "split_sample",
    "NodeRandoms",
    "derive_seeds",
    "node_randoms",
    "__version__",
]
