"""Single-population haplotype copying model.

A new haplotype is modelled as an imperfect mosaic of a reference panel:
a hidden copying path moves along the loci, switching templates with a
probability driven by the genetic map, and each copied allele may be
miscopied at a rate set by the population mutation rate. All alleles are
biallelic and coded 0/1.
"""
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .errors import ModelError, ParameterError, ShapeError


def _as_allele_array(values, what):
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ShapeError(f"{what} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ShapeError(f"{what} must contain at least one locus")
    if not np.isin(arr, (0, 1)).all():
        raise ParameterError(f"{what} may only contain alleles 0 and 1")
    return np.ascontiguousarray(arr, dtype=np.uint8)


@dataclass
class Haplotype:
    """One phased chromosome: an identifier plus a 0/1 allele vector."""

    id: str
    alleles: np.ndarray

    def __post_init__(self):
        self.alleles = _as_allele_array(self.alleles, f"haplotype {self.id!r}")

    @property
    def num_loci(self):
        return self.alleles.shape[0]


@dataclass
class HaplotypePanel:
    """Reference set of haplotypes, stored as an (n, L) 0/1 matrix.

    Panels are treated as immutable once constructed; the transposed
    locus-major view used by the numeric kernels is cached.
    """

    ids: list
    alleles: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.alleles)
        if arr.ndim != 2:
            raise ShapeError(f"panel alleles must be 2-d, got shape {arr.shape}")
        if arr.shape[0] == 0:
            raise ModelError("panel must contain at least one haplotype")
        if arr.shape[1] == 0:
            raise ShapeError("panel must contain at least one locus")
        if not np.isin(arr, (0, 1)).all():
            raise ParameterError("panel may only contain alleles 0 and 1")
        self.alleles = np.ascontiguousarray(arr, dtype=np.uint8)
        self.ids = list(self.ids)
        if len(self.ids) != self.alleles.shape[0]:
            raise ShapeError(
                f"{len(self.ids)} ids for {self.alleles.shape[0]} haplotype rows"
            )
        if len(set(self.ids)) != len(self.ids):
            raise ParameterError("haplotype ids must be unique")

    @classmethod
    def from_haplotypes(cls, haplotypes):
        return cls([h.id for h in haplotypes], np.stack([h.alleles for h in haplotypes]))

    @property
    def size(self):
        return self.alleles.shape[0]

    @property
    def num_loci(self):
        return self.alleles.shape[1]

    @cached_property
    def alleles_by_locus(self):
        """(L, n) C-contiguous view consumed by the forward kernels."""
        return np.ascontiguousarray(self.alleles.T)

    def haplotype(self, index):
        return Haplotype(self.ids[index], self.alleles[index])

    def index_of(self, hap_id):
        try:
            return self.ids.index(hap_id)
        except ValueError:
            raise ParameterError(f"unknown haplotype id {hap_id!r}") from None


@dataclass
class RegionLayout:
    """Assignment of loci to contiguous regions.

    ``region_of_locus`` holds integer region codes; ``names`` maps each
    code back to its external label.
    """

    region_of_locus: np.ndarray
    names: tuple

    def __post_init__(self):
        codes = np.asarray(self.region_of_locus, dtype=np.int64)
        if codes.ndim != 1 or codes.size == 0:
            raise ShapeError("region layout must cover at least one locus")
        starts = np.flatnonzero(np.diff(codes) != 0) + 1
        blocks = codes[np.concatenate(([0], starts))]
        if len(set(blocks.tolist())) != blocks.size:
            raise ParameterError("region blocks must be contiguous")
        if not np.array_equal(np.unique(codes), np.arange(len(self.names))):
            raise ParameterError("region codes must index the name table")
        self.region_of_locus = codes
        self.names = tuple(self.names)

    @classmethod
    def from_labels(cls, labels):
        names = []
        seen = set()
        codes = np.empty(len(labels), dtype=np.int64)
        for i, label in enumerate(labels):
            if not names or names[-1] != label:
                if label in seen:
                    raise ParameterError(
                        f"region {label!r} reappears; blocks must be contiguous"
                    )
                names.append(label)
                seen.add(label)
            codes[i] = len(names) - 1
        return cls(codes, tuple(names))

    @classmethod
    def single_region(cls, num_loci, name="r0"):
        return cls(np.zeros(num_loci, dtype=np.int64), (name,))

    @property
    def num_loci(self):
        return self.region_of_locus.shape[0]

    @property
    def num_regions(self):
        return len(self.names)

    def boundary_mask(self):
        """True for each inter-locus interval that straddles two regions."""
        return np.diff(self.region_of_locus) != 0

    def region_slices(self):
        codes = self.region_of_locus
        edges = np.flatnonzero(np.diff(codes) != 0) + 1
        bounds = np.concatenate(([0], edges, [codes.size]))
        return [slice(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)]

    def labels(self):
        return [self.names[c] for c in self.region_of_locus]


@dataclass
class GeneticMap:
    """Cumulative genetic positions in Morgans, restarting at 0 per region."""

    positions: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.float64)
        if pos.ndim != 1 or pos.size == 0:
            raise ShapeError("genetic map must cover at least one locus")
        if not np.isfinite(pos).all():
            raise ParameterError("genetic map positions must be finite")
        self.positions = pos

    @property
    def num_loci(self):
        return self.positions.shape[0]


def validate_map(gmap, layout):
    """Check map/layout consistency: per-region start at 0, non-decreasing."""
    if gmap.num_loci != layout.num_loci:
        raise ShapeError(
            f"map covers {gmap.num_loci} loci but layout covers {layout.num_loci}"
        )
    for sl, name in zip(layout.region_slices(), layout.names):
        block = gmap.positions[sl]
        if block[0] != 0.0:
            raise ParameterError(f"region {name!r} must start at position 0.0")
        if np.any(np.diff(block) < 0):
            raise ParameterError(f"positions decrease within region {name!r}")


@dataclass
class ModelParams:
    """Copying model parameters.

    ``n_e`` is the effective population size scaling map distances into
    switching rates, ``alpha`` the cross-population copying weight, and
    ``theta_override`` replaces the sample-size-derived mutation rate
    when set.
    """

    n_e: float = 15000.0
    alpha: float = 0.1
    theta_override: float = None

    def __post_init__(self):
        if not self.n_e > 0:
            raise ParameterError(f"n_e must be positive, got {self.n_e}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ParameterError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.theta_override is not None and not self.theta_override > 0:
            raise ParameterError("theta_override must be positive when given")


@dataclass
class TransitionSchedule:
    """Per-interval template switching probabilities, length L - 1."""

    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=np.float64)
        if rho.ndim != 1:
            raise ShapeError("rho schedule must be one-dimensional")
        if rho.size and (rho.min() < 0.0 or rho.max() > 1.0):
            raise ParameterError("rho values must lie in [0, 1]")
        self.rho = rho


_BELOW_ONE = np.nextafter(1.0, 0.0)


def per_locus_rho(delta_r, n_eff, n_e):
    """Switching probability for one map interval of ``delta_r`` Morgans.

    Equals 1 - exp(-4 * n_e * delta_r / n_eff) and is kept strictly
    below 1 so that within-region intervals never collide with the
    region-boundary sentinel value.
    """
    if not n_eff > 0:
        raise ParameterError(f"n_eff must be positive, got {n_eff}")
    if not n_e > 0:
        raise ParameterError(f"n_e must be positive, got {n_e}")
    if delta_r < 0:
        raise ParameterError(f"map interval must be non-negative, got {delta_r}")
    return min(-math.expm1(-4.0 * n_e * delta_r / n_eff), _BELOW_ONE)


def transition_schedule(gmap, layout, n_eff, n_e):
    """Build the switching schedule for a panel of effective size ``n_eff``.

    Intervals inside a region follow the map; intervals that cross a
    region boundary are forced to probability 1, which makes the chain
    forget its state and factorises the likelihood across regions.
    """
    if not n_eff > 0:
        raise ParameterError(f"n_eff must be positive, got {n_eff}")
    if layout is None:
        layout = RegionLayout.single_region(gmap.num_loci)
    validate_map(gmap, layout)
    delta = np.diff(gmap.positions)
    boundary = layout.boundary_mask()
    delta = np.where(boundary, 0.0, delta)
    if np.any(delta < 0):
        raise ParameterError("map positions decrease within a region")
    rho = np.minimum(-np.expm1(-4.0 * n_e * delta / n_eff), _BELOW_ONE)
    rho[boundary] = 1.0
    return TransitionSchedule(rho)


def harmonic_prefix(m):
    """Partial sums H[0..m] of the harmonic series, H[0] = 0."""
    if m < 0:
        raise ParameterError(f"harmonic prefix needs m >= 0, got {m}")
    out = np.empty(m + 1)
    out[0] = 0.0
    np.cumsum(1.0 / np.arange(1, m + 1), out=out[1:])
    return out


def ls_theta(n):
    """Mutation rate for a panel of ``n``: inverse harmonic sum over 1..n-1."""
    if n < 2:
        raise ParameterError(f"theta needs a panel of at least 2, got {n}")
    return 1.0 / harmonic_prefix(n - 1)[n - 1]


def emission_pair(n_eff, theta):
    """(match, mismatch) copying probabilities for one locus."""
    denom = n_eff + theta
    mismatch = 0.5 * theta / denom
    return n_eff / denom + mismatch, mismatch


def ls_transition(j, k, rho_s, n):
    """Copying-path transition probability between template states.

    States are numbered 1..n. Staying on the same template costs
    1 - rho + rho/n, any specific switch costs rho/n.
    """
    if not 1 <= j <= n or not 1 <= k <= n:
        raise ParameterError(f"states must lie in 1..{n}, got ({j}, {k})")
    if not 0.0 <= rho_s <= 1.0:
        raise ParameterError(f"rho must lie in [0, 1], got {rho_s}")
    if j == k:
        return 1.0 - rho_s + rho_s / n
    return rho_s / n


def ls_emission(h_allele, c_allele, n, theta):
    """Probability of observing ``h_allele`` while copying ``c_allele``."""
    if h_allele not in (0, 1) or c_allele not in (0, 1):
        raise ParameterError("alleles must be 0 or 1")
    if n < 1:
        raise ParameterError(f"panel size must be at least 1, got {n}")
    if not theta > 0:
        raise ParameterError(f"theta must be positive, got {theta}")
    match, mismatch = emission_pair(float(n), theta)
    return match if h_allele == c_allele else mismatch


def _check_query(h, panel):
    if h.alleles.shape[0] != panel.num_loci:
        raise ShapeError(
            f"haplotype has {h.alleles.shape[0]} loci, panel has {panel.num_loci}"
        )


def _default_theta(params, n):
    if params.theta_override is not None:
        return params.theta_override
    return ls_theta(n)


def ls_forward_loglik(h, panel, gmap, params, layout=None):
    """Log probability that the panel would emit ``h`` as its next haplotype.

    Sums over every copying path with the forward algorithm; the forward
    vector is rescaled at every locus and the log scale factors
    accumulate into the returned value.
    """
    _check_query(h, panel)
    n = panel.size
    theta = _default_theta(params, n)
    schedule = transition_schedule(gmap, layout, float(n), params.n_e)
    weights = np.full(n, 1.0 / n)
    e_match, e_mismatch = emission_pair(float(n), theta)
    return kernels.forward_loglik(
        panel.alleles_by_locus, h.alleles, schedule.rho, weights, e_match, e_mismatch
    )


def simulate_next_haplotype(
    panel, gmap, params, rng, layout=None, hap_id="sim", return_path=False
):
    """Draw one haplotype from the copying model conditional on the panel.

    The first template is uniform over the panel, templates switch
    according to the map-driven schedule, and each copied allele is
    flipped with the model mismatch probability.
    """
    n = panel.size
    L = panel.num_loci
    theta = _default_theta(params, n)
    schedule = transition_schedule(gmap, layout, float(n), params.n_e)
    _, mismatch = emission_pair(float(n), theta)

    path = np.empty(L, dtype=np.int64)
    path[0] = rng.integers(n)
    switch = rng.random(L - 1) < schedule.rho
    for s in range(1, L):
        path[s] = rng.integers(n) if switch[s - 1] else path[s - 1]
    alleles = panel.alleles[path, np.arange(L)].copy()
    flip = rng.random(L) < mismatch
    alleles[flip] ^= 1
    hap = Haplotype(hap_id, alleles)
    if return_path:
        return hap, path
    return hap
