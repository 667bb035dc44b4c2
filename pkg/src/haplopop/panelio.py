"""Tab-separated panel and map file formats.

Haplotype file: header row naming the loci, then one row per haplotype
with its id, a truth label (``-`` when unknown) and one 0/1 column per
locus. Map file: one row per locus with locus id, region id and the
cumulative genetic position in Morgans, restarting at 0.0 at the first
locus of each region. Both formats are plain text on purpose; they are
meant for desk-scale data.
"""
import warnings

import numpy as np

from .errors import ParseError, ShapeError
from .model import GeneticMap, HaplotypePanel, RegionLayout, validate_map

SIZE_GUARD = 10_000


def write_haplotype_file(path, panel, locus_ids, truth=None):
    if len(locus_ids) != panel.num_loci:
        raise ShapeError(f"{len(locus_ids)} locus ids for {panel.num_loci} loci")
    if truth is not None and len(truth) != panel.size:
        raise ShapeError(f"{len(truth)} labels for {panel.size} haplotypes")
    with open(path, "w") as fh:
        fh.write("id\tlabel\t" + "\t".join(locus_ids) + "\n")
        for row, hap_id in enumerate(panel.ids):
            label = truth[row] if truth is not None else "-"
            alleles = "\t".join(chr(48 + a) for a in panel.alleles[row])
            fh.write(f"{hap_id}\t{label}\t{alleles}\n")


def write_map_file(path, gmap, layout, locus_ids):
    if len(locus_ids) != gmap.num_loci:
        raise ShapeError(f"{len(locus_ids)} locus ids for {gmap.num_loci} loci")
    labels = layout.labels()
    with open(path, "w") as fh:
        fh.write("locus\tregion\tposition\n")
        for i, locus in enumerate(locus_ids):
            # repr round-trips doubles exactly
            fh.write(f"{locus}\t{labels[i]}\t{float(gmap.positions[i])!r}\n")


def parse_haplotype_file(path):
    """Returns (panel, truth labels, locus ids); labels are None when '-'."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError(path, 1, "empty haplotype file")
    header = lines[0].split("\t")
    if len(header) < 3 or header[0] != "id" or header[1] != "label":
        raise ParseError(path, 1, "header must start with 'id\\tlabel' plus loci")
    locus_ids = header[2:]
    num_loci = len(locus_ids)

    ids = []
    labels = []
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != num_loci + 2:
            raise ParseError(
                path, lineno, f"expected {num_loci + 2} columns, found {len(fields)}"
            )
        ids.append(fields[0])
        labels.append(None if fields[1] == "-" else fields[1])
        row = np.empty(num_loci, dtype=np.uint8)
        for col, token in enumerate(fields[2:]):
            if token == "0":
                row[col] = 0
            elif token == "1":
                row[col] = 1
            else:
                raise ParseError(
                    path, lineno, f"allele column {col + 3} is {token!r}, not 0/1"
                )
        rows.append(row)
    if not rows:
        raise ParseError(path, len(lines), "no haplotype rows")
    if len(set(ids)) != len(ids):
        raise ParseError(path, len(lines), "duplicate haplotype ids")
    if len(rows) > SIZE_GUARD:
        warnings.warn(
            f"{path}: {len(rows)} haplotypes; this text format is meant "
            f"for desk-scale data (<= {SIZE_GUARD})"
        )
    return HaplotypePanel(ids, np.stack(rows)), labels, locus_ids


def parse_map_file(path):
    """Returns (gmap, layout, locus ids)."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError(path, 1, "empty map file")
    if lines[0].split("\t") != ["locus", "region", "position"]:
        raise ParseError(path, 1, "header must be 'locus\\tregion\\tposition'")

    locus_ids = []
    regions = []
    positions = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(path, lineno, f"expected 3 columns, found {len(fields)}")
        locus_ids.append(fields[0])
        regions.append(fields[1])
        try:
            positions.append(float(fields[2]))
        except ValueError:
            raise ParseError(
                path, lineno, f"position {fields[2]!r} is not a number"
            ) from None
    if not locus_ids:
        raise ParseError(path, len(lines), "no map rows")

    seen = {}
    for i, region in enumerate(regions):
        if region in seen and regions[i - 1] != region:
            raise ParseError(
                path, i + 2, f"region {region!r} reappears; blocks must be contiguous"
            )
        seen[region] = True
    layout = RegionLayout.from_labels(regions)
    gmap = GeneticMap(np.array(positions))
    for sl, name in zip(layout.region_slices(), layout.names):
        block = gmap.positions[sl]
        if block[0] != 0.0:
            raise ParseError(
                path, sl.start + 2, f"first locus of region {name!r} must sit at 0.0"
            )
        bad = np.flatnonzero(np.diff(block) < 0)
        if bad.size:
            raise ParseError(
                path,
                sl.start + int(bad[0]) + 3,
                f"positions decrease within region {name!r}",
            )
    return gmap, layout, locus_ids


def parse_inputs(haplotype_path, map_path):
    """Load and cross-validate a haplotype file and its map file."""
    panel, labels, hap_loci = parse_haplotype_file(haplotype_path)
    gmap, layout, map_loci = parse_map_file(map_path)
    if hap_loci != map_loci:
        if len(hap_loci) != len(map_loci):
            raise ParseError(
                map_path,
                1,
                f"map lists {len(map_loci)} loci, haplotype file has {len(hap_loci)}",
            )
        first = next(i for i, (a, b) in enumerate(zip(hap_loci, map_loci)) if a != b)
        raise ParseError(
            map_path,
            first + 2,
            f"locus id {map_loci[first]!r} does not match haplotype "
            f"column {hap_loci[first]!r}",
        )
    validate_map(gmap, layout)
    return panel, gmap, layout, labels
