"""Rate regions and locally decodable coding for approximate function computation.

The library computes, for a pair of correlated finite sources and a target
function with a distortion tolerance:

* the single-encoder rate when the decoder observes the second source, and
* the two-encoder achievable rate region,

both via covers of the source alphabets by symbol groups that admit a shared
reconstruction within tolerance, followed by an alternating-minimization rate
optimization.  A companion simulator realizes the rates with a three-layer
code whose decoder reconstructs any one symbol by probing a constant number
of stored bits, independent of the block length.
"""

__version__ = "0.1.0"

from .catalog import binary_and_gate, card_game, uniform_grid_pair
from .codec import (AuxChannel, CodebookError, CodecConfig, CodecReport,
                    CodecWitness, EncodedMessage, build_typicality_codebook,
                    decode_message, distributed_witness, encode_side,
                    local_decode, make_decode_context, run_experiment,
                    si_witness)
from .expander import (BitprobeGraph, EncodingError, ProbeCounter, SparseVector,
                       StoredBits, build_graph, decode_all, decode_bit, encode,
                       exhaustive_encode, graph_params, stored_from_bytes,
                       stored_to_bytes)
from .graphs import (CapacityError, CharGraph, DistributedCharGraph,
                     ball_feasible, build_si_graph,
                     enumerate_maximal_distributed_graphs, maximal_elements,
                     pair_feasible, restrict_to_maximal, verify_distributed_graph,
                     verify_si_graph)
from .meb import min_enclosing_ball
from .optimizer import (RateResult, brute_force_min_mi, grid_size,
                        min_mutual_information, mutual_information_bits)
from .regions import (RatePoint, RateRegion, RegionWitness, SiRateResult,
                      StepFunction, pareto_prune, rate_si, region_contains,
                      region_distributed, sweep_epsilon)
from .sources import (Alphabet, ComputeTask, JointSource, ProblemSpecError,
                      ReconstructionSpace, ValidationReport, confusable,
                      full_support, make_task, parse_problem, s1_regular,
                      validate)

__all__ = [
    "__version__",
    "Alphabet", "JointSource", "ReconstructionSpace", "ComputeTask",
    "ValidationReport", "ProblemSpecError", "validate", "full_support",
    "s1_regular", "confusable", "make_task", "parse_problem",
    "min_enclosing_ball",
    "CharGraph", "DistributedCharGraph", "CapacityError", "ball_feasible",
    "build_si_graph", "restrict_to_maximal", "maximal_elements",
    "pair_feasible", "enumerate_maximal_distributed_graphs",
    "verify_si_graph", "verify_distributed_graph",
    "RateResult", "mutual_information_bits", "min_mutual_information",
    "brute_force_min_mi", "grid_size",
    "RatePoint", "RateRegion", "RegionWitness", "SiRateResult", "StepFunction",
    "rate_si", "pareto_prune", "region_distributed", "region_contains",
    "sweep_epsilon",
    "BitprobeGraph", "SparseVector", "StoredBits", "ProbeCounter",
    "EncodingError", "graph_params", "build_graph", "decode_bit", "decode_all",
    "encode", "exhaustive_encode", "stored_to_bytes", "stored_from_bytes",
    "AuxChannel", "CodecWitness", "CodecConfig", "CodecReport", "CodebookError",
    "EncodedMessage", "build_typicality_codebook", "distributed_witness",
    "si_witness", "encode_side", "decode_message", "local_decode",
    "make_decode_context", "run_experiment",
    "card_game", "binary_and_gate", "uniform_grid_pair",
]
