"""Python bindings for the pgsgan order-generation core."""

from ._pgsgan import (
    BY_CHANCE_ENTROPY,
    BY_CHANCE_NLL,
    NUM_CLASSES,
    NUM_VALUE_CLASSES,
    POLICY_LOGITS,
    Order,
    Policy,
    discretize,
    empirical_distribution,
    entropy_bits,
    kld_bits,
    mse,
    round_to_discrete,
    run_cli,
    synth_ground_truth,
    synth_orders,
)

__all__ = [
    "BY_CHANCE_ENTROPY",
    "BY_CHANCE_NLL",
    "NUM_CLASSES",
    "NUM_VALUE_CLASSES",
    "POLICY_LOGITS",
    "Order",
    "Policy",
    "discretize",
    "empirical_distribution",
    "entropy_bits",
    "kld_bits",
    "mse",
    "round_to_discrete",
    "run_cli",
    "synth_ground_truth",
    "synth_orders",
]
