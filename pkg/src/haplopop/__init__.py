"""Haplotype copying models and population assignment.

Core pieces: a single-population copying model, a two-group extension
with a cross-population copying weight, a pseudo-Gibbs classifier that
assigns haplotypes to subpopulations, and a coalescent simulator that
generates labelled panels for validation.
"""
from .errors import (
    DegenerateModelError,
    HaplopopError,
    ModelError,
    ParameterError,
    ParseError,
    ShapeError,
)
from .model import (
    GeneticMap,
    Haplotype,
    HaplotypePanel,
    ModelParams,
    RegionLayout,
    TransitionSchedule,
    ls_emission,
    ls_forward_loglik,
    ls_theta,
    ls_transition,
    per_locus_rho,
    simulate_next_haplotype,
    transition_schedule,
)
from .structured import (
    ForwardState,
    SplitPanel,
    structured_emission,
    structured_forward_init,
    structured_forward_step,
    structured_loglik,
    structured_theta,
    structured_transition,
)

__version__ = "0.1.0"
