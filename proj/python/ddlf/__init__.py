"""Doubly dispersive link-level simulation."""

from ._ddlf import (  # noqa: F401
    Error,
    GaborGrid,
    accordion_placement,
    analyze,
    conv_code_decode_hard,
    conv_code_encode,
    cross_ambiguity,
    default_config,
    default_pulse,
    dsft2d,
    fwht,
    lattice_min_distance_sq,
    optimal_shift,
    precode,
    relaxation_delta,
    run_sweep,
    synthesize,
)
