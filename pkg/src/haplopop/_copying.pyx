# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled forward kernels for the copying model.

Hot path of the Gibbs classifier: one call per (haplotype, cluster)
evaluation, so the whole recursion stays in C. Contracts match
``haplopop._pykernels``.
"""
from libc.math cimport expm1, log

import numpy as np

cimport numpy as cnp


cdef double _forward(const unsigned char[:, ::1] alleles_by_locus,
                     const unsigned char[:] h,
                     const double[::1] rho,
                     const double[::1] weights,
                     double e_match, double e_mismatch,
                     double[::1] f) nogil:
    cdef Py_ssize_t L = alleles_by_locus.shape[0]
    cdef Py_ssize_t n = alleles_by_locus.shape[1]
    cdef Py_ssize_t s, j
    cdef double c0, c1, c2, c3, c, stay, r, loglik
    cdef unsigned char hs

    hs = h[0]
    for j in range(n):
        f[j] = weights[j] * (e_match if alleles_by_locus[0, j] == hs else e_mismatch)
    c0 = c1 = c2 = c3 = 0.0
    j = 0
    while j + 4 <= n:
        c0 += f[j]
        c1 += f[j + 1]
        c2 += f[j + 2]
        c3 += f[j + 3]
        j += 4
    while j < n:
        c0 += f[j]
        j += 1
    c = (c0 + c1) + (c2 + c3)
    loglik = log(c)

    for s in range(1, L):
        r = rho[s - 1]
        stay = (1.0 - r) / c
        hs = h[s]
        for j in range(n):
            f[j] = (stay * f[j] + r * weights[j]) * (
                e_match if alleles_by_locus[s, j] == hs else e_mismatch)
        c0 = c1 = c2 = c3 = 0.0
        j = 0
        while j + 4 <= n:
            c0 += f[j]
            c1 += f[j + 1]
            c2 += f[j + 2]
            c3 += f[j + 3]
            j += 4
        while j < n:
            c0 += f[j]
            j += 1
        c = (c0 + c1) + (c2 + c3)
        loglik += log(c)
    return loglik


def forward_loglik(const unsigned char[:, ::1] alleles_by_locus,
                   const unsigned char[:] h,
                   const double[::1] rho,
                   const double[::1] weights,
                   double e_match, double e_mismatch):
    """Collapsed forward pass; see the numpy twin for the contract."""
    cdef Py_ssize_t L = alleles_by_locus.shape[0]
    cdef Py_ssize_t n = alleles_by_locus.shape[1]
    if h.shape[0] != L or rho.shape[0] != L - 1 or weights.shape[0] != n:
        raise ValueError("kernel input shapes disagree")
    cdef double[::1] f = np.empty(n)
    cdef double loglik
    with nogil:
        loglik = _forward(alleles_by_locus, h, rho, weights,
                          e_match, e_mismatch, f)
    return loglik


def leave_one_out_loglik(const unsigned char[:, ::1] alleles_by_locus,
                         Py_ssize_t target,
                         const cnp.int64_t[::1] assignment,
                         cnp.int64_t cluster,
                         double w_in, double w_out,
                         const double[::1] scaled_delta,
                         double inv_n_eff,
                         double e_match, double e_mismatch):
    """Forward likelihood of panel row ``target`` against the rest."""
    cdef Py_ssize_t L = alleles_by_locus.shape[0]
    cdef Py_ssize_t n = alleles_by_locus.shape[1]
    if assignment.shape[0] != n or scaled_delta.shape[0] != L - 1:
        raise ValueError("kernel input shapes disagree")
    if not 0 <= target < n:
        raise ValueError(f"target {target} outside panel of {n}")
    cdef double[::1] weights = np.empty(n)
    cdef double[::1] rho = np.empty(L - 1)
    cdef double[::1] f = np.empty(n)
    cdef Py_ssize_t j, s
    cdef double loglik
    with nogil:
        for j in range(n):
            weights[j] = w_in if assignment[j] == cluster else w_out
        weights[target] = 0.0
        for s in range(L - 1):
            rho[s] = -expm1(-scaled_delta[s] * inv_n_eff)
        loglik = _forward(alleles_by_locus, alleles_by_locus[:, target], rho,
                          weights, e_match, e_mismatch, f)
    return loglik
