"""Pure numpy implementations of the forward kernels.

Selected at import time when the compiled extension is unavailable.
Same contracts as ``haplopop._copying``; roughly 50x slower on
panel-sized inputs (see benchmarks/bench_forward.py).
"""
import math

import numpy as np


def forward_loglik(alleles_by_locus, h, rho, weights, e_match, e_mismatch):
    """Collapsed forward pass over the copying states.

    ``alleles_by_locus`` is (L, n) uint8, ``h`` length L, ``rho`` the
    L - 1 switch probabilities and ``weights`` the per-template switch
    target mass. The forward vector is rescaled at every locus; the sum
    of log scale factors is the log likelihood.
    """
    L = alleles_by_locus.shape[0]
    f = weights * np.where(alleles_by_locus[0] == h[0], e_match, e_mismatch)
    c = f.sum()
    loglik = math.log(c)
    for s in range(1, L):
        stay = (1.0 - rho[s - 1]) / c
        f = (stay * f + rho[s - 1] * weights) * np.where(
            alleles_by_locus[s] == h[s], e_match, e_mismatch
        )
        c = f.sum()
        loglik += math.log(c)
    return loglik


def leave_one_out_loglik(
    alleles_by_locus,
    target,
    assignment,
    cluster,
    w_in,
    w_out,
    scaled_delta,
    inv_n_eff,
    e_match,
    e_mismatch,
):
    """Forward likelihood of panel row ``target`` against the rest.

    Weights come from cluster membership (``w_in`` inside ``cluster``,
    ``w_out`` elsewhere, 0 for the target row, which keeps the excluded
    haplotype out of every path). ``scaled_delta`` holds 4 * Ne * dr per
    interval with +inf marking region boundaries, so the switch
    probability 1 - exp(-scaled_delta * inv_n_eff) is 1 exactly there.
    """
    weights = np.where(assignment == cluster, w_in, w_out)
    weights[target] = 0.0
    rho = -np.expm1(-scaled_delta * inv_n_eff)
    return forward_loglik(
        alleles_by_locus,
        alleles_by_locus[:, target],
        rho,
        weights,
        e_match,
        e_mismatch,
    )
