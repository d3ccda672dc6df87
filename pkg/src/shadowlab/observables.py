"""Observables with unit operator norm and bounded squared Frobenius norm.

Random rank-r projectors saturate the norm constraints exactly, and the
eigenprojector construction gives the optimal distinguishing observable
between two states (gap equal to the trace distance).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensembles import RngStream
from .linalg import hermitize, is_hermitian

EIGENVALUE_CUTOFF = 1e-10


@dataclass(frozen=True)
class Observable:
    """Hermitian O with ||O|| = 1 and Tr(O^2) <= b_budget."""

    matrix: np.ndarray
    b_budget: float

    def __post_init__(self):
        if not is_hermitian(self.matrix):
            raise ValueError("observable must be Hermitian")
        evals = np.linalg.eigvalsh(self.matrix)
        if abs(np.abs(evals).max() - 1.0) > 1e-9:
            raise ValueError("operator norm must equal 1")
        if (evals**2).sum() > self.b_budget + 1e-9:
            raise ValueError("Tr(O^2) exceeds budget")


def random_projector_observable(d: int, r: int, rng: RngStream) -> Observable:
    """Rank-r projector onto a Haar-random r-dimensional subspace.

    Eigenvalues are exactly 0/1, so ||O|| = 1 and Tr(O^2) = r.
    """
    if not 1 <= r <= d:
        raise ValueError(f"rank r={r} out of range [1, {d}]")
    z = rng.gen.standard_normal((d, r)) + 1j * rng.gen.standard_normal((d, r))
    q, _ = np.linalg.qr(z)
    return Observable(matrix=hermitize(q @ q.conj().T), b_budget=float(r))


def random_observable(d: int, B: float, rng: RngStream) -> Observable:
    """Random member of the budget-B class: a rank-floor(B) projector."""
    return random_projector_observable(d, max(1, min(d, math.floor(B))), rng)


def random_signature_observable(d: int, B: float, rng: RngStream) -> Observable:
    """Haar-random O with eigenvalues +1/-1 split over floor(B) dimensions.

    Tr(O^2) = floor(B) exactly and Tr(O) ∈ {0, 1}, so for even B this is a
    traceless budget-saturating observable — the worst case for the variance
    of the plain linear estimator, unlike projectors whose traceless part
    can be tiny.
    """
    r = max(1, min(d, math.floor(B)))
    z = rng.gen.standard_normal((d, r)) + 1j * rng.gen.standard_normal((d, r))
    q, _ = np.linalg.qr(z)
    evals = np.where(np.arange(r) % 2 == 0, 1.0, -1.0)
    return Observable(matrix=hermitize((q * evals) @ q.conj().T), b_budget=float(r))


def traceless_part(O: np.ndarray) -> np.ndarray:
    """O - Tr(O) I/d; satisfies Tr(result^2) = Tr(O^2) - Tr(O)^2/d."""
    d = O.shape[0]
    return O - (np.trace(O).real / d) * np.eye(d)


def distinguishing_observable(
    rho: np.ndarray, sigma: np.ndarray, pick_low_rank: bool = False
) -> tuple[Observable, float]:
    """Optimal 0 <= O <= I separating rho from sigma, and its gap.

    Returns the positive or negative eigenprojector of rho - sigma; the gap
    Tr(O (rho - sigma)) equals half the trace norm of rho - sigma for both
    choices.  With pick_low_rank, the projector of smaller rank is returned
    (ties go to the positive one, for determinism).
    """
    diff = hermitize(rho - sigma)
    evals, evecs = np.linalg.eigh(diff)
    if np.abs(evals).max() <= EIGENVALUE_CUTOFF:
        raise ValueError("states are equal; no distinguishing observable")
    pos = evals > EIGENVALUE_CUTOFF
    neg = evals < -EIGENVALUE_CUTOFF
    o_pos = hermitize(evecs[:, pos] @ evecs[:, pos].conj().T)
    o_neg = hermitize(evecs[:, neg] @ evecs[:, neg].conj().T)
    gap = float(evals[pos].sum())  # = half the trace norm of the difference
    use_neg = pick_low_rank and neg.sum() < pos.sum()
    mat = o_neg if use_neg else o_pos
    if mat.size == 0 or np.abs(mat).max() == 0:
        mat = o_pos if use_neg else o_neg
    rank = int(np.round(np.trace(mat).real))
    return Observable(matrix=mat, b_budget=float(rank)), gap


def helstrom_success(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Success probability 1/2 + ||rho - sigma||_1 / 4 of the optimal discriminator."""
    evals = np.linalg.eigvalsh(hermitize(rho - sigma))
    return float(0.5 + np.abs(evals).sum() / 4)
