"""File formats: round trips and line-numbered validation errors."""
import numpy as np
import pytest

from haplopop import ParseError
from haplopop.panelio import (
    parse_haplotype_file,
    parse_inputs,
    parse_map_file,
    write_haplotype_file,
    write_map_file,
)
from haplopop.simulate import simulate_structured_panel


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n")


class TestRoundTrip:
    def test_simulated_panel_survives_io(self, tmp_path):
        sim = simulate_structured_panel(
            (6, 6), 0.7, regions=3, snps_per_region=7, rng=np.random.default_rng(3)
        )
        haps = tmp_path / "p.haps.tsv"
        gmap = tmp_path / "p.map.tsv"
        write_haplotype_file(haps, sim.panel, sim.locus_ids, truth=sim.truth)
        write_map_file(gmap, sim.gmap, sim.layout, sim.locus_ids)
        panel, rmap, layout, labels = parse_inputs(haps, gmap)
        assert panel.ids == sim.panel.ids
        assert np.array_equal(panel.alleles, sim.panel.alleles)
        assert np.array_equal(rmap.positions, sim.gmap.positions)
        assert np.array_equal(layout.region_of_locus, sim.layout.region_of_locus)
        assert layout.names == sim.layout.names
        assert labels == sim.truth

    def test_minimal_file(self, tmp_path):
        haps = tmp_path / "m.haps.tsv"
        write_lines(
            haps,
            ["id\tlabel\tx\ty", "a\t-\t0\t1", "b\t-\t1\t1"],
        )
        panel, labels, loci = parse_haplotype_file(haps)
        assert panel.size == 2 and panel.num_loci == 2
        assert labels == [None, None]
        assert loci == ["x", "y"]


class TestHaplotypeParsing:
    def test_bad_allele_names_line_and_column(self, tmp_path):
        haps = tmp_path / "bad.haps.tsv"
        write_lines(haps, ["id\tlabel\tx\ty", "a\t-\t0\tA"])
        with pytest.raises(ParseError) as err:
            parse_haplotype_file(haps)
        assert err.value.line == 2
        assert "column 4" in str(err.value)

    def test_ragged_row(self, tmp_path):
        haps = tmp_path / "ragged.haps.tsv"
        write_lines(haps, ["id\tlabel\tx\ty", "a\t-\t0"])
        with pytest.raises(ParseError) as err:
            parse_haplotype_file(haps)
        assert err.value.line == 2

    def test_duplicate_ids(self, tmp_path):
        haps = tmp_path / "dup.haps.tsv"
        write_lines(haps, ["id\tlabel\tx", "a\t-\t0", "a\t-\t1"])
        with pytest.raises(ParseError):
            parse_haplotype_file(haps)

    def test_bad_header(self, tmp_path):
        haps = tmp_path / "hdr.haps.tsv"
        write_lines(haps, ["name\tx\ty", "a\t0\t1"])
        with pytest.raises(ParseError) as err:
            parse_haplotype_file(haps)
        assert err.value.line == 1


class TestMapParsing:
    def test_decreasing_position_names_line(self, tmp_path):
        path = tmp_path / "bad.map.tsv"
        write_lines(
            path,
            [
                "locus\tregion\tposition",
                "x\tr0\t0",
                "y\tr0\t0.002",
                "z\tr0\t0.001",
            ],
        )
        with pytest.raises(ParseError) as err:
            parse_map_file(path)
        assert err.value.line == 4
        assert "decrease" in str(err.value)

    def test_region_must_start_at_zero(self, tmp_path):
        path = tmp_path / "off.map.tsv"
        write_lines(
            path,
            ["locus\tregion\tposition", "x\tr0\t0", "y\tr1\t0.001"],
        )
        with pytest.raises(ParseError) as err:
            parse_map_file(path)
        assert "start" in str(err.value) or "0.0" in str(err.value)

    def test_noncontiguous_region(self, tmp_path):
        path = tmp_path / "nc.map.tsv"
        write_lines(
            path,
            [
                "locus\tregion\tposition",
                "x\tr0\t0",
                "y\tr1\t0",
                "z\tr0\t0",
            ],
        )
        with pytest.raises(ParseError) as err:
            parse_map_file(path)
        assert err.value.line == 4

    def test_non_numeric_position(self, tmp_path):
        path = tmp_path / "nan.map.tsv"
        write_lines(path, ["locus\tregion\tposition", "x\tr0\tzero"])
        with pytest.raises(ParseError) as err:
            parse_map_file(path)
        assert err.value.line == 2


class TestCrossValidation:
    def test_locus_count_mismatch(self, tmp_path):
        haps = tmp_path / "a.haps.tsv"
        gmap = tmp_path / "a.map.tsv"
        write_lines(haps, ["id\tlabel\tx\ty", "a\t-\t0\t1", "b\t-\t1\t0"])
        write_lines(gmap, ["locus\tregion\tposition", "x\tr0\t0"])
        with pytest.raises(ParseError):
            parse_inputs(haps, gmap)

    def test_locus_id_mismatch_names_line(self, tmp_path):
        haps = tmp_path / "b.haps.tsv"
        gmap = tmp_path / "b.map.tsv"
        write_lines(haps, ["id\tlabel\tx\ty", "a\t-\t0\t1", "b\t-\t1\t0"])
        write_lines(
            gmap,
            ["locus\tregion\tposition", "x\tr0\t0", "q\tr0\t0.001"],
        )
        with pytest.raises(ParseError) as err:
            parse_inputs(haps, gmap)
        assert err.value.line == 3
