"""Next-bit predictability and normality tests for pseudo-random 0-1 sequences."""

from ._pseudodice import (
    BitSequence,
    CapacityError,
    ConfigError,
    DigitStream,
    DivergenceError,
    Error,
    Mt19937,
    ValidationError,
    binarize_digits,
    gen_digits,
    gen_digits_alt,
    ideal_predictor_rate,
    majority_label,
    mt_binary_sequence,
    normality_bound,
    normality_test,
    null_sigma,
    pattern_census,
    run_experiment,
    sigma_exceeds,
    subgroup_lcl,
    train_and_score,
)

__all__ = [
    "BitSequence",
    "CapacityError",
    "ConfigError",
    "DigitStream",
    "DivergenceError",
    "Error",
    "Mt19937",
    "ValidationError",
    "binarize_digits",
    "gen_digits",
    "gen_digits_alt",
    "ideal_predictor_rate",
    "majority_label",
    "mt_binary_sequence",
    "normality_bound",
    "normality_test",
    "null_sigma",
    "pattern_census",
    "run_experiment",
    "sigma_exceeds",
    "subgroup_lcl",
    "train_and_score",
]
