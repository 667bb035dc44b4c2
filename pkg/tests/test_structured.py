"""Two-group model: closed forms, reductions to the single-population
model, forward stepping, multi-region factorisation, oracle agreement."""

import numpy as np
import pytest

import oracles
from haplopop import (
    DegenerateModelError,
    GeneticMap,
    Haplotype,
    HaplotypePanel,
    ModelParams,
    ParameterError,
    RegionLayout,
    SplitPanel,
    ls_emission,
    ls_forward_loglik,
    ls_theta,
    ls_transition,
    structured_emission,
    structured_forward_init,
    structured_forward_step,
    structured_loglik,
    structured_theta,
    structured_transition,
)
from haplopop.model import TransitionSchedule, transition_schedule
from test_model import map_for_rho


def transition_row_sum(split, j, rho, alpha):
    """Row sum of the dense transition matrix, folded by multiplicity so the
    result carries only a handful of rounding operations."""
    n1, n2 = split.n1, split.n2
    j_focal = j <= n1
    total = structured_transition(j, j, rho, split, alpha)
    other_focal = n1 - (1 if j_focal else 0)
    if other_focal:
        k = 2 if j == 1 else 1
        total += other_focal * structured_transition(j, k, rho, split, alpha)
    other_rest = n2 - (0 if j_focal else 1)
    if other_rest:
        k = n1 + 2 if j == n1 + 1 else n1 + 1
        total += other_rest * structured_transition(j, k, rho, split, alpha)
    return total


def random_split(rng, max_n=5, max_loci=6, min_n1=1):
    n = int(rng.integers(max(2, min_n1 + 1), max_n + 1))
    L = int(rng.integers(1, max_loci + 1))
    panel = HaplotypePanel(
        [f"c{j}" for j in range(n)], rng.integers(0, 2, (n, L)).astype(np.uint8)
    )
    n1 = int(rng.integers(min_n1, n))
    focal = np.zeros(n, dtype=bool)
    focal[rng.choice(n, size=n1, replace=False)] = True
    h = Haplotype("h", rng.integers(0, 2, L).astype(np.uint8))
    rho = rng.uniform(0.0, 0.95, L - 1)
    theta = float(rng.uniform(0.05, 3.0))
    return SplitPanel(panel, focal), h, rho, theta


class TestStructuredTheta:
    def test_reduces_to_single_population(self):
        assert structured_theta(2, 0, 0.7) == 1.0
        assert structured_theta(2, 3, 1.0) == pytest.approx(ls_theta(5), rel=1e-14)
        for n1 in (2, 5, 9):
            assert structured_theta(n1, 4, 0.0) == ls_theta(n1)

    def test_mixed_value(self):
        assert structured_theta(2, 2, 0.5) == pytest.approx(12 / 17, rel=1e-14)

    def test_empty_focal_continuation(self):
        # second sum started at z=1: theta = 1 / (alpha * H(n2 - 1))
        alpha = 0.25
        h3 = 1 + 1 / 2 + 1 / 3
        assert structured_theta(0, 4, alpha) == pytest.approx(
            1.0 / (alpha * h3), rel=1e-14
        )

    @pytest.mark.parametrize("n1,n2,alpha", [(0, 4, 0.0), (1, 3, 0.0)])
    def test_degenerate(self, n1, n2, alpha):
        with pytest.raises(DegenerateModelError):
            structured_theta(n1, n2, alpha)

    @pytest.mark.parametrize("n1,n2", [(1, 0), (0, 1)])
    def test_too_few_haplotypes(self, n1, n2):
        with pytest.raises(ParameterError):
            structured_theta(n1, n2, 0.5)


class TestStructuredTransition:
    def split(self, n1, n2):
        panel = HaplotypePanel(
            [f"c{j}" for j in range(n1 + n2)],
            np.zeros((n1 + n2, 1), dtype=np.uint8),
        )
        return SplitPanel(panel, np.arange(n1 + n2) < n1)

    def test_example_values(self):
        split = self.split(2, 2)
        assert structured_transition(1, 1, 0.1, split, 0.5) == pytest.approx(
            1 - 0.1 + 0.1 / 3, rel=1e-14
        )
        assert structured_transition(1, 3, 0.1, split, 0.5) == pytest.approx(
            0.05 / 3, rel=1e-14
        )

    def test_alpha_one_pools_the_panel(self):
        split = self.split(2, 3)
        for j in range(1, 6):
            for k in range(1, 6):
                assert structured_transition(j, k, 0.3, split, 1.0) == pytest.approx(
                    ls_transition(j, k, 0.3, 5), rel=1e-13
                )

    def test_alpha_zero_isolates_focal(self):
        split = self.split(3, 2)
        for j in range(1, 4):
            for k in range(1, 4):
                assert structured_transition(j, k, 0.3, split, 0.0) == pytest.approx(
                    ls_transition(j, k, 0.3, 3), rel=1e-13
                )
            for k in (4, 5):
                assert structured_transition(j, k, 0.3, split, 0.0) == 0.0

    @pytest.mark.parametrize("n1,n2", [(1, 1), (3, 2), (10, 40), (50, 50)])
    @pytest.mark.parametrize("alpha", [0.0, 0.01, 0.1, 0.5, 1.0])
    @pytest.mark.parametrize("rho", [0.0, 0.3, 1.0])
    def test_rows_sum_to_one(self, n1, n2, alpha, rho):
        split = self.split(n1, n2)
        for j in (1, n1 + 1):
            assert abs(transition_row_sum(split, j, rho, alpha) - 1.0) <= 1e-14


class TestStructuredEmission:
    def test_example_value(self):
        theta = structured_theta(2, 2, 0.5)
        assert structured_emission(1, 1, 2, 2, 0.5, theta) == pytest.approx(
            19 / 21, rel=1e-13
        )
        assert structured_emission(1, 0, 2, 2, 0.5, theta) == pytest.approx(
            2 / 21, rel=1e-13
        )

    def test_reductions(self):
        assert structured_emission(1, 1, 2, 3, 1.0, 0.8) == pytest.approx(
            ls_emission(1, 1, 5, 0.8), rel=1e-14
        )
        assert structured_emission(1, 1, 2, 3, 0.0, 0.8) == pytest.approx(
            ls_emission(1, 1, 2, 0.8), rel=1e-14
        )

    def test_pair_sums_to_one(self):
        for n1, n2 in [(1, 1), (4, 7), (30, 20)]:
            for alpha in (0.0, 0.01, 0.1, 0.5, 1.0):
                for theta in (0.05, 1.0, 10.0):
                    total = structured_emission(
                        0, 0, n1, n2, alpha, theta
                    ) + structured_emission(0, 1, n1, n2, alpha, theta)
                    assert abs(total - 1.0) <= 1e-14


class TestForwardStepping:
    def test_init_alpha_zero_zeroes_other_group(self):
        rng = np.random.default_rng(0)
        split, h, _, theta = random_split(rng, min_n1=2)
        state = structured_forward_init(h, split, 0.0, theta)
        assert np.all(state.f[~split.focal] == 0.0)
        assert state.f.sum() == pytest.approx(1.0, rel=1e-14)
        assert state.cursor == 1

    def test_init_symmetric_match(self):
        panel = HaplotypePanel(list("abcd"), np.ones((4, 2), dtype=np.uint8))
        split = SplitPanel(panel, np.ones(4, dtype=bool))
        h = Haplotype("h", [1, 1])
        state = structured_forward_init(h, split, 1.0, 0.7)
        assert np.allclose(state.f, 0.25)

    def test_init_weight_ratio(self):
        panel = HaplotypePanel(["a", "b"], np.ones((2, 1), dtype=np.uint8))
        split = SplitPanel(panel, np.array([True, False]))
        state = structured_forward_init(Haplotype("h", [1]), split, 0.5, 0.7)
        assert state.f[0] / state.f[1] == pytest.approx(2.0, rel=1e-14)

    def test_step_rho_zero_is_diagonal(self):
        rng = np.random.default_rng(1)
        split, h, _, theta = random_split(rng, max_loci=4)
        while h.num_loci < 2:
            split, h, _, theta = random_split(rng, max_loci=4)
        schedule = TransitionSchedule(np.zeros(h.num_loci - 1))
        state = structured_forward_init(h, split, 0.5, theta)
        stepped = structured_forward_step(state, 2, h, split, schedule, 0.5, theta)
        locus = split.panel.alleles_by_locus[1]
        match, mismatch = (
            structured_emission(h.alleles[1], a, split.n1, split.n2, 0.5, theta)
            for a in (h.alleles[1], 1 - h.alleles[1])
        )
        expected = state.f * np.where(locus == h.alleles[1], match, mismatch)
        expected /= expected.sum()
        assert np.allclose(stepped.f, expected, rtol=1e-13)

    def test_step_rho_one_forgets_the_past(self):
        rng = np.random.default_rng(2)
        split, h, _, theta = random_split(rng, max_loci=5)
        while h.num_loci < 2:
            split, h, _, theta = random_split(rng, max_loci=5)
        schedule = TransitionSchedule(np.ones(h.num_loci - 1))
        s1 = structured_forward_init(h, split, 0.3, theta)
        stepped = structured_forward_step(s1, 2, h, split, schedule, 0.3, theta)
        # with total forgetting the new vector is a fresh initialisation
        fresh = structured_forward_init(
            Haplotype("h2", h.alleles[1:]), split_at_locus(split, 1), 0.3, theta
        )
        assert np.allclose(stepped.f, fresh.f, rtol=1e-12)

    def test_cursor_misuse(self):
        rng = np.random.default_rng(3)
        split, h, rho, theta = random_split(rng, max_loci=5)
        while h.num_loci < 3:
            split, h, rho, theta = random_split(rng, max_loci=5)
        schedule = TransitionSchedule(rho)
        state = structured_forward_init(h, split, 0.5, theta)
        with pytest.raises(ValueError):
            structured_forward_step(state, 3, h, split, schedule, 0.5, theta)

    def test_stepping_reproduces_loglik(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            split, h, rho, theta = random_split(rng)
            params = ModelParams(n_e=12000.0, alpha=0.4, theta_override=theta)
            n_eff = split.n1 + params.alpha * split.n2
            gmap = map_for_rho(rho, n_eff, params.n_e)
            schedule = transition_schedule(gmap, None, n_eff, params.n_e)
            state = structured_forward_init(h, split, params.alpha, theta)
            for s in range(2, h.num_loci + 1):
                state = structured_forward_step(
                    state, s, h, split, schedule, params.alpha, theta
                )
            direct = structured_loglik(h, split, gmap, None, params)
            assert state.loglik == pytest.approx(direct, rel=1e-12)

    def test_collapsed_matches_dense_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            split, h, rho, theta = random_split(rng)
            alpha = float(rng.choice([0.0, 0.2, 0.7, 1.0]))
            if split.n1 == 0 and alpha == 0.0:
                continue
            params = ModelParams(alpha=alpha, theta_override=theta)
            n_eff = split.n1 + alpha * split.n2
            gmap = map_for_rho(rho, n_eff, params.n_e)
            got = structured_loglik(h, split, gmap, None, params)
            expected = oracles.dense_forward_loglik(
                h.alleles, split.panel.alleles, rho, split.focal, alpha, theta
            )
            assert got == pytest.approx(expected, rel=1e-12)


def split_at_locus(split, start):
    panel = HaplotypePanel(split.panel.ids, split.panel.alleles[:, start:])
    return SplitPanel(panel, split.focal)


class TestStructuredLoglik:
    def test_alpha_one_equals_pooled_single_population(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            split, h, rho, theta = random_split(rng)
            params = ModelParams(alpha=1.0, theta_override=theta)
            gmap = map_for_rho(rho, split.panel.size, params.n_e)
            pooled = ls_forward_loglik(h, split.panel, gmap, params)
            got = structured_loglik(h, split, gmap, None, params)
            assert got == pytest.approx(pooled, rel=1e-12)

    def test_alpha_zero_equals_focal_only(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            split, h, rho, theta = random_split(rng, min_n1=2)
            params = ModelParams(alpha=0.0, theta_override=theta)
            gmap = map_for_rho(rho, split.n1, params.n_e)
            focal_panel = HaplotypePanel(
                [i for i, f in zip(split.panel.ids, split.focal) if f],
                split.panel.alleles[split.focal],
            )
            focal_only = ls_forward_loglik(h, focal_panel, gmap, params)
            got = structured_loglik(h, split, gmap, None, params)
            assert got == pytest.approx(focal_only, rel=1e-12)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(8)
        for _ in range(30):
            split, h, rho, theta = random_split(rng)
            alpha = float(rng.choice([0.0, 0.1, 0.5, 1.0]))
            if split.n1 == 0 and alpha == 0.0:
                continue
            params = ModelParams(alpha=alpha, theta_override=theta)
            n_eff = split.n1 + alpha * split.n2
            gmap = map_for_rho(rho, n_eff, params.n_e)
            got = structured_loglik(h, split, gmap, None, params)
            expected = oracles.brute_force_loglik(
                h.alleles, split.panel.alleles, rho, split.focal, alpha, theta
            )
            assert got == pytest.approx(expected, rel=1e-10)

    def test_two_identical_regions_double_the_loglik(self):
        rng = np.random.default_rng(9)
        block = rng.integers(0, 2, (4, 5)).astype(np.uint8)
        halleles = rng.integers(0, 2, 5).astype(np.uint8)
        panel1 = HaplotypePanel(list("abcd"), block)
        panel2 = HaplotypePanel(list("abcd"), np.hstack([block, block]))
        focal = np.array([True, True, False, False])
        h1 = Haplotype("h", halleles)
        h2 = Haplotype("h", np.concatenate([halleles, halleles]))
        params = ModelParams(alpha=0.3, theta_override=0.9)
        pos = np.linspace(0.0, 1e-3, 5)
        single = structured_loglik(
            h1, SplitPanel(panel1, focal), GeneticMap(pos), None, params
        )
        double = structured_loglik(
            h2,
            SplitPanel(panel2, focal),
            GeneticMap(np.concatenate([pos, pos])),
            RegionLayout.from_labels(["r1"] * 5 + ["r2"] * 5),
            params,
        )
        assert double == pytest.approx(2 * single, rel=1e-13)

    def test_multi_region_factorisation(self):
        rng = np.random.default_rng(10)
        for _ in range(10):
            n = int(rng.integers(2, 6))
            lengths = rng.integers(1, 5, size=3)
            L = int(lengths.sum())
            panel = HaplotypePanel(
                [f"c{j}" for j in range(n)],
                rng.integers(0, 2, (n, L)).astype(np.uint8),
            )
            focal = rng.random(n) < 0.5
            focal[0] = True
            h = Haplotype("h", rng.integers(0, 2, L).astype(np.uint8))
            params = ModelParams(alpha=0.3, theta_override=0.8)
            labels = []
            positions = []
            for r, size in enumerate(lengths):
                labels.extend([f"r{r}"] * int(size))
                positions.append(np.linspace(0.0, rng.uniform(0, 2e-3), int(size)))
            gmap = GeneticMap(np.concatenate(positions))
            layout = RegionLayout.from_labels(labels)
            split = SplitPanel(panel, focal)
            whole = structured_loglik(h, split, gmap, layout, params)
            start = 0
            parts = 0.0
            for r, size in enumerate(lengths):
                size = int(size)
                sub_panel = HaplotypePanel(
                    panel.ids, panel.alleles[:, start : start + size]
                )
                sub_h = Haplotype("h", h.alleles[start : start + size])
                sub_map = GeneticMap(gmap.positions[start : start + size])
                parts += structured_loglik(
                    sub_h, SplitPanel(sub_panel, focal), sub_map, None, params
                )
                start += size
            assert whole == pytest.approx(parts, rel=1e-12)

    def test_permutation_within_membership_class(self):
        rng = np.random.default_rng(11)
        split, h, rho, theta = random_split(rng, max_n=5, max_loci=5, min_n1=2)
        params = ModelParams(alpha=0.4, theta_override=theta)
        n_eff = split.n1 + params.alpha * split.n2
        gmap = map_for_rho(rho, n_eff, params.n_e)
        base = structured_loglik(h, split, gmap, None, params)
        focal_idx = np.flatnonzero(split.focal)
        other_idx = np.flatnonzero(~split.focal)
        for _ in range(5):
            order = np.concatenate(
                [rng.permutation(focal_idx), rng.permutation(other_idx)]
            )
            shuffled = SplitPanel(
                HaplotypePanel(
                    [split.panel.ids[i] for i in order], split.panel.alleles[order]
                ),
                split.focal[order],
            )
            assert structured_loglik(h, shuffled, gmap, None, params) == pytest.approx(
                base, rel=1e-12
            )

    def test_degenerate_split(self):
        panel = HaplotypePanel(["a", "b"], np.zeros((2, 2), dtype=np.uint8))
        split = SplitPanel(panel, np.array([False, False]))
        params = ModelParams(alpha=0.0)
        with pytest.raises(DegenerateModelError):
            structured_loglik(
                Haplotype("h", [0, 0]), split, GeneticMap([0.0, 1e-4]), None, params
            )
