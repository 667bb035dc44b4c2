"""Pseudo-Gibbs assignment of haplotypes to subpopulations.

Each sweep removes one haplotype at a time from its cluster, scores how
well it copies from every cluster (the remaining clusters pooled into
the cross-population group), and redraws its assignment from the
normalised scores. The conditionals need not come from a joint
distribution, hence pseudo-Gibbs. Diagnostics are label invariant:
kept assignment snapshots and the pairwise co-assignment count matrix.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateModelError, ParameterError, ShapeError
from .model import emission_pair, harmonic_prefix, validate_map
from .structured import theta_from_harmonics


@dataclass
class AssignmentState:
    """Current cluster of every haplotype; clusters are numbered 1..k."""

    z: np.ndarray
    k: int

    def __post_init__(self):
        z = np.asarray(self.z, dtype=np.int64)
        if z.ndim != 1:
            raise ShapeError("assignment vector must be one-dimensional")
        if self.k < 1:
            raise ParameterError(f"cluster count must be at least 1, got {self.k}")
        if z.size and (z.min() < 1 or z.max() > self.k):
            raise ParameterError(f"assignments must lie in 1..{self.k}")
        self.z = z


@dataclass
class RunConfig:
    """Classifier settings; defaults follow the standard run protocol."""

    k: int = 2
    alpha: float = 0.1
    n_e: float = 15000.0
    burnin: int = 200
    kept: int = 1000
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError(f"cluster count must be at least 1, got {self.k}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ParameterError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.n_e > 0:
            raise ParameterError(f"n_e must be positive, got {self.n_e}")
        if self.burnin < 0 or self.kept < 1:
            raise ParameterError("need burnin >= 0 and kept >= 1")
        if self.threads < 1:
            raise ParameterError(f"threads must be at least 1, got {self.threads}")


@dataclass
class GibbsTrace:
    """Kept assignment snapshots plus label-invariant pair diagnostics."""

    kept_assignments: np.ndarray
    coassign: np.ndarray
    burnin: int
    kept: int
    seed: int
    k: int


class _RunContext:
    """Precomputed panel quantities shared by every update in a run."""

    def __init__(self, panel, config, gmap, layout):
        if panel.size < 2:
            raise ParameterError("classification needs at least 2 haplotypes")
        if gmap.num_loci != panel.num_loci or layout.num_loci != panel.num_loci:
            raise ShapeError("panel, map and layout must cover the same loci")
        validate_map(gmap, layout)
        self.panel = panel
        self.config = config
        delta = np.diff(gmap.positions)
        boundary = layout.boundary_mask()
        delta = np.where(boundary, 0.0, delta)
        if np.any(delta < 0):
            raise ParameterError("map positions decrease within a region")
        self.scaled_delta = 4.0 * config.n_e * delta
        self.scaled_delta[boundary] = np.inf
        self.harmonics = harmonic_prefix(panel.size)
        self.pool = None
        if config.threads > 1 and kernels.HAVE_COMPILED:
            self.pool = ThreadPoolExecutor(max_workers=config.threads)

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()
            self.pool = None

    def cluster_loglik(self, z, counts, i, cluster):
        """Copy likelihood of haplotype i out of ``cluster``, leave-one-out."""
        alpha = self.config.alpha
        n1 = int(counts[cluster])
        n2 = self.panel.size - 1 - n1
        try:
            theta = theta_from_harmonics(self.harmonics, n1, n2, alpha)
        except DegenerateModelError as exc:
            raise DegenerateModelError(
                f"cannot update haplotype {self.panel.ids[i]!r}: cluster "
                f"{cluster} holds {n1} other haplotypes and alpha={alpha} ({exc})"
            ) from exc
        n_eff = n1 + alpha * n2
        e_match, e_mismatch = emission_pair(n_eff, theta)
        return kernels.leave_one_out_loglik(
            self.panel.alleles_by_locus,
            i,
            z,
            cluster,
            1.0 / n_eff,
            alpha / n_eff,
            self.scaled_delta,
            1.0 / n_eff,
            e_match,
            e_mismatch,
        )

    def assignment_logliks(self, z, counts, i):
        clusters = range(1, self.config.k + 1)
        if self.pool is not None:
            return np.fromiter(
                self.pool.map(lambda c: self.cluster_loglik(z, counts, i, c), clusters),
                dtype=np.float64,
                count=self.config.k,
            )
        return np.array([self.cluster_loglik(z, counts, i, c) for c in clusters])


def _normalise(logliks):
    p = np.exp(logliks - logliks.max())
    return p / p.sum()


def _counts(z, k):
    return np.bincount(z, minlength=k + 1)


def _sweep(ctx, z, counts, rng):
    k = ctx.config.k
    for i in range(z.shape[0]):
        counts[z[i]] -= 1
        p = _normalise(ctx.assignment_logliks(z, counts, i))
        draw = min(int(np.searchsorted(np.cumsum(p), rng.random(), side="right")), k - 1)
        z[i] = draw + 1
        counts[z[i]] += 1


def conditional_assignment_probs(i, panel, state, config, gmap, layout):
    """Normalised probability of each cluster for haplotype ``i``.

    Entry c is proportional to the likelihood that haplotype i is the
    next sample from cluster c (everything else pooled as the
    cross-population group, with haplotype i left out everywhere). The
    assignment prior is uniform, so no reweighting is applied.
    """
    if not 0 <= i < panel.size:
        raise ParameterError(f"haplotype index {i} outside panel of {panel.size}")
    ctx = _RunContext(panel, config, gmap, layout)
    try:
        counts = _counts(state.z, config.k)
        counts[state.z[i]] -= 1
        return _normalise(ctx.assignment_logliks(state.z, counts, i))
    finally:
        ctx.close()


def gibbs_sweep(state, panel, config, gmap, layout, rng):
    """One full update pass over all haplotypes, in index order."""
    if state.z.shape[0] != panel.size:
        raise ShapeError("assignment vector does not match panel size")
    if config.k == 1:
        return AssignmentState(state.z.copy(), 1)
    ctx = _RunContext(panel, config, gmap, layout)
    try:
        z = state.z.copy()
        counts = _counts(z, config.k)
        _sweep(ctx, z, counts, rng)
        return AssignmentState(z, config.k)
    finally:
        ctx.close()


def run_classifier(panel, config, gmap, layout):
    """Burn in, then collect kept sweeps from a uniform random start."""
    rng = np.random.default_rng(config.seed)
    ctx = _RunContext(panel, config, gmap, layout)
    try:
        n = panel.size
        z = rng.integers(1, config.k + 1, size=n)
        counts = _counts(z, config.k)
        snapshots = np.empty((config.kept, n), dtype=np.int64)
        coassign = np.zeros((n, n), dtype=np.int64)
        if config.k > 1:
            for _ in range(config.burnin):
                _sweep(ctx, z, counts, rng)
        for it in range(config.kept):
            if config.k > 1:
                _sweep(ctx, z, counts, rng)
            snapshots[it] = z
            coassign += z[:, None] == z[None, :]
        return GibbsTrace(
            snapshots, coassign, config.burnin, config.kept, config.seed, config.k
        )
    finally:
        ctx.close()


def majority_assignment(trace):
    """Cluster in which each haplotype spent the most kept iterations.

    Ties break towards the lowest cluster index.
    """
    n = trace.kept_assignments.shape[1]
    z = np.empty(n, dtype=np.int64)
    for j in range(n):
        counts = np.bincount(trace.kept_assignments[:, j], minlength=trace.k + 1)
        z[j] = counts[1:].argmax() + 1
    return AssignmentState(z, trace.k)


@dataclass
class AccuracyReport:
    """Agreement between an assignment and known population labels."""

    cluster_labels: dict
    per_population: dict
    n_correct: int
    n_total: int

    @property
    def total(self):
        return self.n_correct / self.n_total


def accuracy_report(assignment, truth):
    """Score an assignment against truth labels.

    Clusters are named after the population contributing the majority of
    their members (ties towards the alphabetically first label); the
    report carries the share of correctly assigned haplotypes per
    population and overall.
    """
    truth = list(truth)
    if len(truth) != assignment.z.shape[0]:
        raise ShapeError(
            f"{len(truth)} truth labels for {assignment.z.shape[0]} haplotypes"
        )
    if any(label is None for label in truth):
        raise ParameterError("every haplotype needs a truth label")
    labels = sorted(set(truth))
    label_index = {label: idx for idx, label in enumerate(labels)}
    truth_codes = np.array([label_index[t] for t in truth])

    cluster_labels = {}
    for cluster in range(1, assignment.k + 1):
        members = truth_codes[assignment.z == cluster]
        if members.size == 0:
            continue
        counts = np.bincount(members, minlength=len(labels))
        cluster_labels[cluster] = labels[int(counts.argmax())]

    called = np.array([cluster_labels.get(c, "") for c in assignment.z])
    correct = called == np.array(truth)
    per_population = {}
    for label in labels:
        mask = np.array(truth) == label
        per_population[label] = (
            int(mask.sum()),
            int(correct[mask].sum()),
            float(correct[mask].mean()),
        )
    return AccuracyReport(
        cluster_labels, per_population, int(correct.sum()), int(correct.size)
    )
