"""Stagnation detection with heavy-tailed mutation (SD-FEA) and comparators."""
from .algorithms import (ALGORITHM_NAMES, AlgorithmSpec, OptimizerState, RunOutcome, SdFeaParams,
                         compiled_available, run_optimizer, sd_fea_step)
from .core import RandomSource, flip_random_bits, hamming_distance, log_binomial, standard_bit_mutation
from .fitness import Jump, LeadingOnes, OneMax, make_function
from .sampling import (PowerLawDist, StrengthDist, phase_length, sample_power_law, sample_strength,
                       strength_distribution)

__all__ = [
    "ALGORITHM_NAMES", "AlgorithmSpec", "Jump", "LeadingOnes", "OneMax", "OptimizerState",
    "PowerLawDist", "RandomSource", "RunOutcome", "SdFeaParams", "StrengthDist",
    "compiled_available", "flip_random_bits", "hamming_distance", "log_binomial",
    "make_function", "phase_length", "run_optimizer", "sample_power_law", "sample_strength",
    "sd_fea_step", "standard_bit_mutation", "strength_distribution",
]
