"""Conical Radon transform on regular grids.

Fields are sampled on a Grid whose last axis is t. ``Field.numpy()`` returns the
samples with shape ``grid.shape``; ``Field(grid, array)`` goes the other way.
"""

from ._core import (
    DomainError,
    Error,
    Field,
    FormatError,
    Grid,
    ShapeMismatch,
    alpha,
    beta,
    box,
    bump,
    bump_dt,
    check_range,
    cumulative_t_integral,
    even_constant,
    forward,
    forward_spectral,
    forward_weighted,
    invert,
    l2_norm,
    linf_norm,
    odd_constant,
    oracle_symbol,
    partial_t,
    read_crtf,
    relative_l2_error,
    set_threads,
    symbol_D,
    write_crtf,
)

__all__ = [name for name in dir() if not name.startswith("_")]
