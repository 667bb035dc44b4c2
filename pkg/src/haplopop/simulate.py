"""Coalescent simulation of labelled haplotype panels.

Trees follow the standard genealogy of a neutral sample: with k
lineages the waiting time to the next merge is exponential with mean
1/C(k,2) (time in units of N generations) and the merging pair is
uniform. A population-split variant coalesces lineages only within
their own population until the split time, then pools the survivors.
Mutations are dropped one per SNP onto a branch chosen with probability
proportional to its length, so every SNP is polymorphic. One tree per
region gives full linkage within regions and independence between them.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .model import GeneticMap, HaplotypePanel, RegionLayout


@dataclass
class CoalescentTree:
    """Binary genealogy over ``n_leaves`` sampled chromosomes.

    Nodes 0..n-1 are leaves at time 0; internal nodes are appended in
    merge order, so a parent always has a larger id than its children.
    """

    parent: np.ndarray
    node_time: np.ndarray
    n_leaves: int

    @property
    def num_nodes(self):
        return 2 * self.n_leaves - 1

    @property
    def root(self):
        return self.num_nodes - 1

    @property
    def depth(self):
        return float(self.node_time[self.root])

    def inter_coalescence_times(self):
        """Waiting times T_k between merges, ordered k = n down to 2."""
        merge_times = np.sort(self.node_time[self.n_leaves :])
        return np.diff(merge_times, prepend=0.0)

    def branch_lengths(self):
        """Length of the edge above each non-root node."""
        nodes = np.arange(self.num_nodes - 1)
        return self.node_time[self.parent[nodes]] - self.node_time[nodes]

    def leaf_matrix(self):
        """(num_nodes, n_leaves) bool: which leaves each node subtends."""
        m = np.zeros((self.num_nodes, self.n_leaves), dtype=bool)
        m[np.arange(self.n_leaves), np.arange(self.n_leaves)] = True
        for u in range(self.num_nodes - 1):
            m[self.parent[u]] |= m[u]
        return m

    def is_clade(self, leaves):
        """True if some node subtends exactly the given leaf set."""
        target = np.zeros(self.n_leaves, dtype=bool)
        target[list(leaves)] = True
        return any(np.array_equal(row, target) for row in self.leaf_matrix())


def _pair(rng, k):
    i = int(rng.integers(k))
    j = int(rng.integers(k - 1))
    if j >= i:
        j += 1
    return i, j


def sample_coalescent_tree(n, rng):
    """Genealogy of ``n`` chromosomes from one randomly mating population."""
    if n < 2:
        raise ParameterError(f"need at least 2 leaves, got {n}")
    parent = np.full(2 * n - 1, -1, dtype=np.int64)
    node_time = np.zeros(2 * n - 1)
    active = list(range(n))
    t = 0.0
    nxt = n
    for k in range(n, 1, -1):
        t += rng.exponential(2.0 / (k * (k - 1)))
        i, j = _pair(rng, k)
        parent[active[i]] = nxt
        parent[active[j]] = nxt
        node_time[nxt] = t
        active[min(i, j)] = nxt
        active.pop(max(i, j))
        nxt += 1
    return CoalescentTree(parent, node_time, n)


def sample_structured_tree(pop_sizes, split_time, rng):
    """Genealogy under a clean population split.

    Leaves are laid out population by population. Before ``split_time``
    each population coalesces independently; at the split every
    surviving lineage joins a single ancestral pool.
    """
    pop_sizes = [int(s) for s in pop_sizes]
    if any(s < 2 for s in pop_sizes):
        raise ParameterError(f"each population needs at least 2 samples: {pop_sizes}")
    if split_time < 0:
        raise ParameterError(f"split time must be non-negative, got {split_time}")
    n = sum(pop_sizes)
    parent = np.full(2 * n - 1, -1, dtype=np.int64)
    node_time = np.zeros(2 * n - 1)
    nxt = n

    survivors = []
    offset = 0
    for size in pop_sizes:
        active = list(range(offset, offset + size))
        offset += size
        t = 0.0
        while len(active) > 1:
            k = len(active)
            dt = rng.exponential(2.0 / (k * (k - 1)))
            if t + dt >= split_time:
                break
            t += dt
            i, j = _pair(rng, k)
            parent[active[i]] = nxt
            parent[active[j]] = nxt
            node_time[nxt] = t
            active[min(i, j)] = nxt
            active.pop(max(i, j))
            nxt += 1
        survivors.extend(active)

    t = split_time
    active = survivors
    while len(active) > 1:
        k = len(active)
        t += rng.exponential(2.0 / (k * (k - 1)))
        i, j = _pair(rng, k)
        parent[active[i]] = nxt
        parent[active[j]] = nxt
        node_time[nxt] = t
        active[min(i, j)] = nxt
        active.pop(max(i, j))
        nxt += 1
    return CoalescentTree(parent, node_time, n)


def overlay_mutations(tree, num_snps, rng, eligible=None):
    """Drop one mutation per SNP onto the tree; returns (n, num_snps) 0/1.

    The branch carrying each mutation is chosen with probability
    proportional to its length (restricted to ``eligible`` node ids when
    given); the leaves below it carry allele 1.
    """
    if num_snps < 1:
        raise ParameterError(f"need at least one SNP, got {num_snps}")
    lengths = tree.branch_lengths()
    nodes = np.arange(tree.num_nodes - 1)
    if eligible is not None:
        nodes = nodes[eligible[: tree.num_nodes - 1]]
        lengths = lengths[eligible[: tree.num_nodes - 1]]
    total = lengths.sum()
    if nodes.size == 0 or total <= 0:
        raise ParameterError("no branch is eligible to carry a mutation")
    picks = rng.choice(nodes, size=num_snps, p=lengths / total)
    return np.ascontiguousarray(tree.leaf_matrix()[picks].T, dtype=np.uint8)


def wright_fisher_pair_coalescence(pop_size, rng):
    """Generations until two chromosomes share an ancestor, discrete model.

    Geometric with success probability 1/pop_size, support {1, 2, ...};
    scaled by 1/pop_size it converges to a unit exponential.
    """
    if pop_size < 1:
        raise ParameterError(f"population size must be at least 1, got {pop_size}")
    return int(rng.geometric(1.0 / pop_size))


@dataclass
class SimPanel:
    """Simulated labelled panel plus its map and region layout."""

    panel: HaplotypePanel
    truth: list
    gmap: GeneticMap
    layout: RegionLayout
    locus_ids: list


def _eligible_branches(tree, pop_slices, maf, scope):
    leaf = tree.leaf_matrix()[: tree.num_nodes - 1]
    if scope == "combined":
        pop_slices = [slice(0, tree.n_leaves)]
    ok = np.ones(tree.num_nodes - 1, dtype=bool)
    for sl in pop_slices:
        size = sl.stop - sl.start
        derived = leaf[:, sl].sum(axis=1)
        minor = np.minimum(derived, size - derived)
        ok &= minor >= maf * size - 1e-9
    return ok


def simulate_structured_panel(
    pop_sizes=(40, 40, 40),
    split_time=0.5,
    regions=10,
    snps_per_region=50,
    rng=None,
    maf=None,
    maf_scope="per-population",
    region_morgans=1e-3,
    max_tree_retries=1000,
):
    """Labelled multi-region panel under the population-split model.

    Each region gets an independent tree carrying all of its SNPs and a
    uniform synthetic map spanning ``region_morgans``. With ``maf`` set,
    mutations are restricted to branches whose derived allele keeps a
    minor allele frequency of at least ``maf``, evaluated either within
    every population or in the combined sample depending on
    ``maf_scope`` (trees admitting no such branch are redrawn). Note
    that under a clean split the per-population scope confines SNPs to
    the shared ancestral part of each genealogy, which strips most of
    the population signal out of the panel.
    """
    if rng is None:
        rng = np.random.default_rng()
    if regions < 1 or snps_per_region < 1:
        raise ParameterError("need at least one region and one SNP per region")
    if maf is not None and not 0.0 <= maf < 0.5:
        raise ParameterError(f"maf threshold must lie in [0, 0.5), got {maf}")
    if maf_scope not in ("per-population", "combined"):
        raise ParameterError(f"unknown maf scope {maf_scope!r}")
    if region_morgans < 0:
        raise ParameterError(f"region length must be non-negative: {region_morgans}")

    pop_sizes = [int(s) for s in pop_sizes]
    bounds = np.concatenate(([0], np.cumsum(pop_sizes)))
    pop_slices = [slice(bounds[p], bounds[p + 1]) for p in range(len(pop_sizes))]
    truth = []
    ids = []
    for p, size in enumerate(pop_sizes):
        truth.extend([f"pop{p + 1}"] * size)
        ids.extend(f"pop{p + 1}_h{i:03d}" for i in range(size))

    blocks = []
    positions = []
    region_labels = []
    locus_ids = []
    for r in range(regions):
        region = f"r{r:02d}"
        for attempt in range(max_tree_retries):
            tree = sample_structured_tree(pop_sizes, split_time, rng)
            eligible = None
            if maf is not None and maf > 0:
                eligible = _eligible_branches(tree, pop_slices, maf, maf_scope)
                if not eligible.any():
                    continue
            blocks.append(overlay_mutations(tree, snps_per_region, rng, eligible))
            break
        else:
            raise ParameterError(
                f"no tree with branches at maf >= {maf} found for region {region} "
                f"after {max_tree_retries} draws"
            )
        if snps_per_region == 1:
            positions.append(np.zeros(1))
        else:
            positions.append(np.linspace(0.0, region_morgans, snps_per_region))
        region_labels.extend([region] * snps_per_region)
        locus_ids.extend(f"{region}.s{i:02d}" for i in range(snps_per_region))

    panel = HaplotypePanel(ids, np.concatenate(blocks, axis=1))
    gmap = GeneticMap(np.concatenate(positions))
    layout = RegionLayout.from_labels(region_labels)
    return SimPanel(panel, truth, gmap, layout, locus_ids)
