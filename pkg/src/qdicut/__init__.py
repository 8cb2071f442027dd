"""Classical simulation and verification of a quantum streaming Max-DiCut estimator."""

from .graph import EdgeStream, degrees, bias, gen_random, max_dicut_bruteforce, parse_stream, read_stream
from .snapshot import BiasClassConfig, classify, load_config, oblivious_value, snapshot, validate_config
from .pseudosnapshot import DegreeGrid, pseudobias, pseudosnapshot_exact, pseudosnapshot_restricted, bias_bound_count
from .hashing import HashOracle, derive_seed
from .quantum import CopySimulator, PairSampler, check_state_invariant, single_copy_run
from .dense import dense_reference_run
from .estimator import EstimatorParams, RunReport, full_estimate, qubit_accounting, run_pair

__all__ = [
    "EdgeStream", "degrees", "bias", "gen_random", "max_dicut_bruteforce", "parse_stream", "read_stream",
    "BiasClassConfig", "classify", "load_config", "oblivious_value", "snapshot", "validate_config",
    "DegreeGrid", "pseudobias", "pseudosnapshot_exact", "pseudosnapshot_restricted", "bias_bound_count",
    "HashOracle", "derive_seed", "CopySimulator", "PairSampler", "check_state_invariant", "single_copy_run",
    "dense_reference_run", "EstimatorParams", "RunReport", "full_estimate", "qubit_accounting", "run_pair",
]
