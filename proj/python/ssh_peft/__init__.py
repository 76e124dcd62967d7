"""Sparse spectral adapters over the 2D discrete Hartley transform."""

from ._core import (
    HARTLEY_SINE_SIGN,
    CapacityError,
    CheckpointDigestError,
    CheckpointError,
    CheckpointMagicError,
    CheckpointTruncatedError,
    ContractError,
    DimensionError,
    DivergenceError,
    Error,
    NumericError,
    ParseError,
    SshLayer,
    budgets,
    cas,
    dft2_oracle,
    dht1,
    dht2,
    energy_map,
    idht2,
    presets,
    profile_spectrum,
    run_experiment,
    run_gradcheck,
    select_frequencies,
    table1,
)

__version__ = "0.1.0"


def run_planted_recovery(config=None, **overrides):
    """Planted-spectrum recovery; keyword overrides are merged into config."""
    cfg = dict(config or {})
    cfg.update(overrides)
    cfg["task"] = "planted-recovery"
    return run_experiment(cfg)
