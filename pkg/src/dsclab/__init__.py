"""Desk-scale laboratory for distributed source coding with hash-constrained
random-number-generator codes."""

__version__ = "0.1.0"

from .blocks import all_blocks, index_to_symbols, symbols_to_index
from .codec import (CodeConfig, CodePlan, DecodeResult, EncoderCode,
                    TrialOutcome, crng_sample, decode_crng, decode_map,
                    decode_typical, draw_code, encode, exact_error, mc_error,
                    stochastic_decision_gap, telescoping_identity_check)
from .fields import AffineSolver, FieldSpec, SparseMatrix, field_ops
from .hashes import (HashEnsembleSpec, HashParamEstimate,
                     balanced_coloring_bound, collision_probability,
                     collision_resistance_bound, draw, estimate_hash_params,
                     join)
from .regions import (LinearSystem, RatePoint, build_rcrng_with_aux, build_rit,
                      contains, fourier_motzkin, region_equivalence_probe,
                      specialize_example)
from .sources import (BlockDistribution, ProblemSpec, block_distortion,
                      memoryless_extend, reproduce, sample_block)
from .spectrum import (LemmaReport, SpectralEstimate, entropy_quantities,
                       estimate_spectral_rate, self_information_spectrum,
                       verify_spectrum_lemmas)

__all__ = [
    "AffineSolver", "BlockDistribution", "CodeConfig", "CodePlan",
    "DecodeResult", "EncoderCode", "FieldSpec", "HashEnsembleSpec",
    "HashParamEstimate", "LemmaReport", "LinearSystem", "ProblemSpec",
    "RatePoint", "SparseMatrix", "SpectralEstimate", "TrialOutcome",
    "all_blocks", "balanced_coloring_bound", "block_distortion",
    "build_rcrng_with_aux", "build_rit", "collision_probability",
    "collision_resistance_bound", "contains", "crng_sample", "decode_crng",
    "decode_map", "decode_typical", "draw", "draw_code", "encode",
    "entropy_quantities", "estimate_hash_params", "estimate_spectral_rate",
    "exact_error", "field_ops", "fourier_motzkin", "index_to_symbols",
    "join", "mc_error", "memoryless_extend", "region_equivalence_probe",
    "reproduce", "sample_block", "self_information_spectrum",
    "specialize_example", "stochastic_decision_gap", "symbols_to_index",
    "telescoping_identity_check", "verify_spectrum_lemmas",
]
