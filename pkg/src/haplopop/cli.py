"""Command line front end.

Subcommands: ``simulate`` writes a labelled synthetic panel,
``classify`` runs the pseudo-Gibbs classifier, ``evaluate`` scores an
assignments table against truth labels, and ``loglik`` prints one
copying log likelihood. Exit codes: 0 success, 1 usage or parse error,
2 model degeneracy. All outputs are byte-stable for a fixed seed.
"""
import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__, panelio, sampler
from .errors import DegenerateModelError, HaplopopError
from .model import HaplotypePanel, ModelParams
from .simulate import simulate_structured_panel
from .structured import SplitPanel, structured_loglik


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _int_list(text):
    try:
        values = [int(tok) for tok in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a comma-separated int list")
    if not values:
        raise argparse.ArgumentTypeError("population list is empty")
    return values


def build_parser():
    parser = _Parser(prog="haplopop", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="write a labelled synthetic panel")
    sim.add_argument("--pops", type=_int_list, default=[40, 40, 40],
                     help="haplotypes per population, e.g. 40,40,40")
    sim.add_argument("--tau", type=float, default=0.5,
                     help="population split time in coalescent units")
    sim.add_argument("--regions", type=int, default=10)
    sim.add_argument("--snps", type=int, default=50, help="SNPs per region")
    sim.add_argument("--maf", type=float, default=None,
                     help="keep only SNPs with at least this minor allele "
                          "frequency in every population")
    sim.add_argument("--maf-scope", choices=["per-population", "combined"],
                     default="per-population",
                     help="population-wise or combined-sample frequency test")
    sim.add_argument("--region-morgans", type=float, default=1e-3,
                     help="genetic length of each region")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out-prefix", required=True)

    cls = sub.add_parser("classify", help="assign haplotypes to clusters")
    cls.add_argument("--haps", required=True)
    cls.add_argument("--map", dest="map_path", required=True)
    cls.add_argument("--k", type=int, required=True, help="number of clusters")
    cls.add_argument("--alpha", type=float, default=0.1)
    cls.add_argument("--ne", type=float, default=15000.0)
    cls.add_argument("--burnin", type=int, default=200)
    cls.add_argument("--samples", type=int, default=1000,
                     help="kept iterations after burn-in")
    cls.add_argument("--seed", type=int, default=0)
    cls.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    cls.add_argument("--out-prefix", required=True)

    ev = sub.add_parser("evaluate", help="score assignments against truth labels")
    ev.add_argument("--assignments", required=True)
    ev.add_argument("--haps", required=True, help="haplotype file carrying labels")
    ev.add_argument("--out", default=None, help="write the report here, not stdout")

    ll = sub.add_parser("loglik", help="print one copying log likelihood")
    ll.add_argument("--haps", required=True)
    ll.add_argument("--map", dest="map_path", required=True)
    ll.add_argument("--target-id", required=True)
    ll.add_argument("--focal-ids", required=True,
                    help="comma-separated ids forming the focal group")
    ll.add_argument("--alpha", type=float, default=0.1)
    ll.add_argument("--ne", type=float, default=15000.0)
    return parser


def _cmd_simulate(args):
    rng = np.random.default_rng(args.seed)
    sim = simulate_structured_panel(
        args.pops,
        args.tau,
        regions=args.regions,
        snps_per_region=args.snps,
        rng=rng,
        maf=args.maf,
        maf_scope=args.maf_scope,
        region_morgans=args.region_morgans,
    )
    panelio.write_haplotype_file(
        f"{args.out_prefix}.haps.tsv", sim.panel, sim.locus_ids, truth=sim.truth
    )
    panelio.write_map_file(
        f"{args.out_prefix}.map.tsv", sim.gmap, sim.layout, sim.locus_ids
    )
    print(
        f"wrote {sim.panel.size} haplotypes x {sim.panel.num_loci} loci "
        f"to {args.out_prefix}.haps.tsv / .map.tsv",
        file=sys.stderr,
    )
    return 0


def _write_accuracy(path, report):
    with open(path, "w") as fh:
        fh.write("scope\tn\tcorrect\tproportion\n")
        for label, (n, correct, prop) in sorted(report.per_population.items()):
            fh.write(f"{label}\t{n}\t{correct}\t{prop:.6f}\n")
        fh.write(f"total\t{report.n_total}\t{report.n_correct}\t{report.total:.6f}\n")


def _cmd_classify(args):
    panel, gmap, layout, labels = panelio.parse_inputs(args.haps, args.map_path)
    config = sampler.RunConfig(
        k=args.k,
        alpha=args.alpha,
        n_e=args.ne,
        burnin=args.burnin,
        kept=args.samples,
        seed=args.seed,
        threads=args.threads,
    )
    started = time.perf_counter()
    trace = sampler.run_classifier(panel, config, gmap, layout)
    elapsed = time.perf_counter() - started
    majority = sampler.majority_assignment(trace)

    frac = np.empty((panel.size, config.k))
    for c in range(1, config.k + 1):
        frac[:, c - 1] = (trace.kept_assignments == c).mean(axis=0)
    with open(f"{args.out_prefix}.assignments.tsv", "w") as fh:
        head = "\t".join(f"frac_c{c}" for c in range(1, config.k + 1))
        fh.write(f"id\tcluster\t{head}\n")
        for i, hap_id in enumerate(panel.ids):
            cols = "\t".join(f"{frac[i, c]:.6f}" for c in range(config.k))
            fh.write(f"{hap_id}\t{majority.z[i]}\t{cols}\n")

    with open(f"{args.out_prefix}.coassign.csv", "w") as fh:
        for row in trace.coassign:
            fh.write(",".join(str(v) for v in row) + "\n")

    meta = {
        "command": "classify",
        "haps": args.haps,
        "map": args.map_path,
        "k": config.k,
        "alpha": config.alpha,
        "ne": config.n_e,
        "burnin": config.burnin,
        "samples": config.kept,
        "seed": config.seed,
        "threads": config.threads,
        "n_haplotypes": panel.size,
        "n_loci": panel.num_loci,
        "version": __version__,
    }
    with open(f"{args.out_prefix}.meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")

    if any(label is not None for label in labels):
        report = sampler.accuracy_report(majority, labels)
        _write_accuracy(f"{args.out_prefix}.accuracy.tsv", report)
    print(f"classify finished in {elapsed:.1f}s", file=sys.stderr)
    return 0


def _cmd_evaluate(args):
    panel, labels, _ = panelio.parse_haplotype_file(args.haps)
    with open(args.assignments) as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("id\tcluster"):
        raise HaplopopError(f"{args.assignments} is not an assignments table")
    by_id = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = line.split("\t")
        try:
            by_id[fields[0]] = int(fields[1])
        except (IndexError, ValueError):
            raise HaplopopError(
                f"{args.assignments}:{lineno}: malformed assignments row"
            ) from None
    try:
        z = np.array([by_id[hap_id] for hap_id in panel.ids])
    except KeyError as exc:
        raise HaplopopError(f"assignments table misses haplotype {exc}") from None
    assignment = sampler.AssignmentState(z, int(z.max()))
    report = sampler.accuracy_report(assignment, labels)
    if args.out:
        _write_accuracy(args.out, report)
    else:
        for label, (n, correct, prop) in sorted(report.per_population.items()):
            print(f"{label}\t{n}\t{correct}\t{prop:.6f}")
        print(f"total\t{report.n_total}\t{report.n_correct}\t{report.total:.6f}")
    return 0


def _cmd_loglik(args):
    panel, gmap, layout, _ = panelio.parse_inputs(args.haps, args.map_path)
    focal_ids = [tok for tok in args.focal_ids.split(",") if tok]
    if args.target_id in focal_ids:
        raise HaplopopError(f"target {args.target_id!r} cannot be in the focal set")
    target = panel.index_of(args.target_id)
    rest = [i for i in range(panel.size) if i != target]
    reference = HaplotypePanel([panel.ids[i] for i in rest], panel.alleles[rest])
    split = SplitPanel.from_ids(reference, focal_ids)
    params = ModelParams(n_e=args.ne, alpha=args.alpha)
    value = structured_loglik(panel.haplotype(target), split, gmap, layout, params)
    print(f"{value:.12g}")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "classify": _cmd_classify,
    "evaluate": _cmd_evaluate,
    "loglik": _cmd_loglik,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except DegenerateModelError as exc:
        print(f"haplopop: model degeneracy: {exc}", file=sys.stderr)
        return 2
    except HaplopopError as exc:
        print(f"haplopop: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"haplopop: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
