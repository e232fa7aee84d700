"""Suzuki-Trotter engine: Gibbs states as classical chain contractions.

exp(-beta H) for H = sum_k h_k is approximated by the n-th power of one
Trotter slice W = prod_k exp(-(beta/n) h_k), the product taken in ascending
bond order.  Matrix element (a, b) of the unnormalized density matrix is
then the two-end contraction of an open chain of n identical pairwise
weights W over 2^N-state slice variables; the chain is never materialized,
only per-end-state message vectors of length 2^N (see cbp.chain_end_marginal).

W is a product of positive-definite factors but is not symmetric when the
bond terms fail to commute, so the n-slice density matrix carries an
O(beta^2/n) non-Hermitian residue, on the same order as its Trotter error.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from . import cbp, linalg
from .spinchain import SpinChainModel, embed_term

# Transfer weights must be real to this relative residue.
IMAG_RTOL = 1e-12


class ComplexResidueError(ValueError):
    """Transfer weights have an imaginary part; the model is not real-symmetric."""


@dataclass(frozen=True)
class TrotterPlan:
    """A model, a slice count n, and the per-bond factors exp(-(beta/n) h_k)."""

    model: SpinChainModel
    n_slices: int
    slice_factors: tuple


def trotter_plan(model: SpinChainModel, n_slices: int) -> TrotterPlan:
    """Precompute the slice factors for an n-slice decomposition."""
    n_slices = int(n_slices)
    if n_slices < 1:
        raise ValueError(f"n_slices must be positive, got {n_slices}")
    step = model.beta / n_slices
    factors = tuple(
        linalg.herm_exp(-step * embed_term(term, (k, k + 1), model.n_sites))
        for k, term in enumerate(model.terms)
    )
    return TrotterPlan(model, n_slices, factors)


@dataclass(frozen=True)
class TransferWeights:
    """One Trotter slice as a real 2^N x 2^N weight matrix."""

    matrix: np.ndarray


def build_weights(plan: TrotterPlan) -> TransferWeights:
    """Multiply the slice factors in bond order and strip the imaginary part."""
    dim = 2**plan.model.n_sites
    w = reduce(np.matmul, plan.slice_factors, np.eye(dim, dtype=np.complex128))
    scale = np.abs(w).max()
    residue = np.abs(w.imag).max()
    if residue > IMAG_RTOL * scale:
        raise ComplexResidueError(
            f"imaginary residue {residue:.3e} exceeds {IMAG_RTOL:g} * max|W|; "
            "transfer weights are only real for real-symmetric bond terms"
        )
    return TransferWeights(np.ascontiguousarray(w.real))


def st_density(plan: TrotterPlan) -> np.ndarray:
    """Density matrix from the two-end marginal of the n-slice weight chain.

    Algebraically equal to W^n / tr(W^n); computed by the per-end-state
    message recursion, which keeps only length-2^N vectors alive.
    """
    w = build_weights(plan).matrix
    p = cbp.chain_end_marginal([w] * plan.n_slices)
    return p.astype(np.complex128) / np.trace(p)


def st_reduced(plan: TrotterPlan, keep) -> np.ndarray:
    """Reduced density matrix of the Trotterized Gibbs state on ``keep``."""
    rho = st_density(plan)
    return linalg.partial_trace(rho, [2] * plan.model.n_sites, keep)


def st_opcount_middle(n_spins_exponent: int) -> int:
    """Elementary operations for one interior weight evaluation, 2^m states."""
    m = _check_exponent(n_spins_exponent)
    return 2**m * (2 ** (m + 1) + 1)


def st_opcount_ends(n_spins_exponent: int) -> int:
    """Elementary operations for the first-and-last weight evaluations combined."""
    m = _check_exponent(n_spins_exponent)
    return 2 ** (m + 1) * (2**m + 1)


def st_opcount(n_slices: int, n_spins_exponent: int) -> int:
    """Closed-form operation count of the n-slice chain contraction."""
    n = int(n_slices)
    if n < 3:
        raise ValueError(f"the closed form needs n_slices >= 3, got {n}")
    m = _check_exponent(n_spins_exponent)
    return 2**m * (2 ** (m + 2) + 2 + (2 ** (m + 1) + 1) * (n - 3))


def _check_exponent(n_spins_exponent: int) -> int:
    m = int(n_spins_exponent)
    if m < 1:
        raise ValueError(f"spin-count exponent must be >= 1, got {m}")
    return m
