"""Two-group copying model with cross-population copying weight alpha.

The reference panel is split into a focal group and an other group.
Copying paths enter other-group templates with their weight scaled by
alpha, so alpha 0 isolates the focal group and alpha 1 pools the two
groups into one panel.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateModelError, ParameterError, ShapeError
from .model import (
    HaplotypePanel,
    emission_pair,
    harmonic_prefix,
    transition_schedule,
)


@dataclass
class SplitPanel:
    """Panel plus a boolean focal-membership flag per haplotype."""

    panel: HaplotypePanel
    focal: np.ndarray

    def __post_init__(self):
        focal = np.asarray(self.focal, dtype=bool)
        if focal.shape != (self.panel.size,):
            raise ShapeError(
                f"membership flags cover {focal.shape[0]} haplotypes, "
                f"panel holds {self.panel.size}"
            )
        self.focal = focal

    @classmethod
    def from_ids(cls, panel, focal_ids):
        focal_ids = set(focal_ids)
        unknown = focal_ids.difference(panel.ids)
        if unknown:
            raise ParameterError(f"unknown focal ids: {sorted(unknown)}")
        return cls(panel, np.array([i in focal_ids for i in panel.ids]))

    @property
    def n1(self):
        return int(self.focal.sum())

    @property
    def n2(self):
        return self.panel.size - self.n1

    def effective_size(self, alpha):
        n_eff = self.n1 + alpha * self.n2
        if not n_eff > 0:
            raise DegenerateModelError(
                f"empty focal group with alpha={alpha} leaves no copying mass"
            )
        return n_eff

    def weights(self, alpha):
        """Initial-state and switch-target weight of each template."""
        n_eff = self.effective_size(alpha)
        return np.where(self.focal, 1.0 / n_eff, alpha / n_eff)


def theta_from_harmonics(prefix, n1, n2, alpha):
    """Mutation rate from precomputed harmonic partial sums.

    The own-group part sums 1/z over z = 1..n1-1 and the other-group
    part alpha/z over z = n1..n1+n2-1. An empty focal group would start
    the second sum at z = 0; it is started at z = 1 instead so that the
    model stays defined for singleton and emptied groups under alpha > 0.
    """
    if n1 + n2 < 2:
        raise ParameterError(f"need at least 2 haplotypes, got {n1} + {n2}")
    own = prefix[n1 - 1] if n1 >= 1 else 0.0
    lo = max(n1, 1) - 1
    denom = own + alpha * (prefix[n1 + n2 - 1] - prefix[lo])
    if not denom > 0:
        raise DegenerateModelError(
            f"mutation rate undefined for n1={n1}, n2={n2}, alpha={alpha}"
        )
    return 1.0 / denom


def structured_theta(n1, n2, alpha):
    """Mutation rate for a split panel; the sample size is n1 + alpha*n2."""
    if n1 < 0 or n2 < 0:
        raise ParameterError(f"group sizes must be non-negative, got {n1}, {n2}")
    return theta_from_harmonics(harmonic_prefix(max(n1 + n2 - 1, 0)), n1, n2, alpha)


def structured_transition(j, k, rho_s, split, alpha):
    """Transition probability between template states of a split panel.

    States are numbered 1..n over the pooled panel; entering an
    other-group template carries the extra factor alpha.
    """
    n = split.panel.size
    if not 1 <= j <= n or not 1 <= k <= n:
        raise ParameterError(f"states must lie in 1..{n}, got ({j}, {k})")
    if not 0.0 <= rho_s <= 1.0:
        raise ParameterError(f"rho must lie in [0, 1], got {rho_s}")
    n_eff = split.effective_size(alpha)
    switch = rho_s / n_eff
    if not split.focal[k - 1]:
        switch *= alpha
    if j == k:
        return 1.0 - rho_s + switch
    return switch


def structured_emission(h_allele, c_allele, n1, n2, alpha, theta):
    """Copying emission probability with effective sample size n1 + alpha*n2."""
    if h_allele not in (0, 1) or c_allele not in (0, 1):
        raise ParameterError("alleles must be 0 or 1")
    if not theta > 0:
        raise ParameterError(f"theta must be positive, got {theta}")
    n_eff = n1 + alpha * n2
    if not n_eff > 0:
        raise DegenerateModelError(
            f"empty focal group with alpha={alpha} leaves no copying mass"
        )
    match, mismatch = emission_pair(n_eff, theta)
    return match if h_allele == c_allele else mismatch


@dataclass
class ForwardState:
    """Scaled forward vector after processing loci 1..cursor.

    ``f`` sums to 1 and ``log_scale`` accumulates the log of every
    rescaling constant, so after the final locus ``log_scale`` is the
    log likelihood.
    """

    f: np.ndarray
    log_scale: float
    cursor: int

    @property
    def loglik(self):
        return self.log_scale


def _emission_vector(h_allele, locus_alleles, e_match, e_mismatch):
    return np.where(locus_alleles == h_allele, e_match, e_mismatch)


def structured_forward_init(h, split, alpha, theta):
    """Forward state after the first locus."""
    weights = split.weights(alpha)
    e_match, e_mismatch = emission_pair(split.effective_size(alpha), theta)
    f = weights * _emission_vector(
        h.alleles[0], split.panel.alleles_by_locus[0], e_match, e_mismatch
    )
    c = f.sum()
    return ForwardState(f / c, math.log(c), 1)


def structured_forward_step(state, s, h, split, schedule, alpha, theta):
    """Advance the forward state from locus s-1 to locus s (1-based)."""
    if not 2 <= s <= h.alleles.shape[0]:
        raise ParameterError(f"locus {s} outside 2..{h.alleles.shape[0]}")
    if state.cursor != s - 1:
        raise ValueError(f"state is at locus {state.cursor}, cannot step to {s}")
    weights = split.weights(alpha)
    e_match, e_mismatch = emission_pair(split.effective_size(alpha), theta)
    rho = schedule.rho[s - 2]
    stay = (1.0 - rho) * state.f + rho * weights
    f = stay * _emission_vector(
        h.alleles[s - 1], split.panel.alleles_by_locus[s - 1], e_match, e_mismatch
    )
    c = f.sum()
    return ForwardState(f / c, state.log_scale + math.log(c), s)


def split_theta(split, alpha, params=None):
    if params is not None and params.theta_override is not None:
        return params.theta_override
    return structured_theta(split.n1, split.n2, alpha)


def structured_loglik(h, split, gmap, layout, params):
    """Log probability of sampling ``h`` next from the focal group.

    Sums over all copying paths through the split panel; region
    boundaries reset the path, which makes this the sum of independent
    per-region log likelihoods.
    """
    if h.alleles.shape[0] != split.panel.num_loci:
        raise ShapeError(
            f"haplotype has {h.alleles.shape[0]} loci, "
            f"panel has {split.panel.num_loci}"
        )
    alpha = params.alpha
    theta = split_theta(split, alpha, params)
    n_eff = split.effective_size(alpha)
    schedule = transition_schedule(gmap, layout, n_eff, params.n_e)
    weights = split.weights(alpha)
    e_match, e_mismatch = emission_pair(n_eff, theta)
    return kernels.forward_loglik(
        split.panel.alleles_by_locus,
        h.alleles,
        schedule.rho,
        weights,
        e_match,
        e_mismatch,
    )
