"""Exact moment and covariance formulas with brute-force cross-checks.

Closed forms for the first and second moments of the joint-measurement
outcome, the second moment of a single-copy shadow, and the four covariance
patterns arising in the quadratic estimator's variance.  Each closed form is
paired with an independent evaluation: a permutation-sum enumeration (cost
(s+2)! * poly(d), driven by cycle decomposition rather than d^s storage) or
a Monte Carlo sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensembles import RngStream, sample_posterior_states
from .linalg import (
    Permutation,
    all_permutations,
    hermitize,
    kappa,
    perm_operator,
    sym_projector,
)

# Brute-force enumeration cap; these oracles are test-only.
ENUM_BUDGET = 1_000_000

COV_PATTERNS = ("ij_jk", "ij_kj", "ij_ji", "ij_ij", "distinct")


@dataclass(frozen=True)
class MomentReport:
    """Closed-form value vs. independently computed value for one check."""

    name: str
    formula_value: object
    brute_value: object
    max_abs_deviation: float

    @classmethod
    def compare(cls, name: str, formula, brute) -> "MomentReport":
        dev = float(np.abs(np.asarray(formula) - np.asarray(brute)).max())
        return cls(name, formula, brute, dev)


def _check_pure(rho: np.ndarray, tol: float = 1e-8):
    if np.abs(rho @ rho - rho).max() > tol:
        raise ValueError("rho must be a pure density matrix")


def exact_first_moment(rho: np.ndarray, s: int, d: int) -> np.ndarray:
    """E[Psi] = (I + s rho)/(d + s) for the joint measurement on s copies."""
    _check_pure(rho)
    return (np.eye(d) + s * rho) / (d + s)


def _cycle_product(pi: Permutation, mats, cycle) -> np.ndarray:
    """Product of mats along one cycle, in reverse traversal order."""
    d = mats[0].shape[0]
    prod = np.eye(d, dtype=complex)
    for p in cycle:
        prod = mats[p] @ prod
    return prod


def _perm_trace_keep(pi: Permutation, mats, keep: tuple[int, ...]):
    """Tr over all factors except keep of W_pi (A_0 x ... x A_{n-1}).

    Requires every kept position to lie in its own cycle of pi.  Returns
    (list of per-kept-position matrices in keep order, scalar from the fully
    traced cycles).
    """
    kept_mats = {}
    scalar = 1.0 + 0j
    for cycle in pi.cycles():
        hits = [p for p in keep if p in cycle]
        if len(hits) > 1:
            raise ValueError("kept positions share a cycle; factorization invalid")
        # traverse from the kept position if there is one
        if hits:
            start = hits[0]
            order = [start]
            j = pi(start)
            while j != start:
                order.append(j)
                j = pi(j)
            kept_mats[start] = _cycle_product(pi, mats, order)
        else:
            scalar *= np.trace(_cycle_product(pi, mats, cycle))
    return [kept_mats[p] for p in keep], scalar


def brute_first_moment(rho: np.ndarray, s: int, d: int) -> np.ndarray:
    """Permutation-sum evaluation of E[Psi] over all of S_{s+1}."""
    _check_pure(rho)
    if math.factorial(s + 1) > ENUM_BUDGET:
        raise ValueError("enumeration budget exceeded")
    mats = [np.eye(d, dtype=complex)] + [rho.astype(complex)] * s
    total = np.zeros((d, d), dtype=complex)
    for pi in all_permutations(s + 1):
        (m0,), scalar = _perm_trace_keep(pi, mats, (0,))
        total += scalar * m0
    total *= kappa(s, d) / kappa(s + 1, d) / math.factorial(s + 1)
    return hermitize(total)


def exact_second_moment(rho: np.ndarray, s: int, d: int) -> np.ndarray:
    """E[Psi x Psi] on C^(d^2) for the joint measurement on s copies."""
    _check_pure(rho)
    I = np.eye(d)
    a = I + s * rho
    M = np.kron(a, a) - (s * (s + 1) / 2) * np.kron(rho, rho)
    out = (2 / ((d + s) * (d + s + 1))) * (M @ sym_projector(2, d))
    return hermitize(out)


def brute_second_moment(rho: np.ndarray, s: int, d: int) -> np.ndarray:
    """Permutation-sum evaluation of E[Psi x Psi] over all of S_{s+2}.

    Permutations with positions 0 and 1 in distinct cycles factorize
    directly; the others are handled by pulling a swap of the two kept
    factors out of the partial trace.
    """
    _check_pure(rho)
    if math.factorial(s + 2) > ENUM_BUDGET:
        raise ValueError("enumeration budget exceeded")
    mats = [np.eye(d, dtype=complex)] * 2 + [rho.astype(complex)] * s
    swap = perm_operator(Permutation.transposition(2, 0, 1), d)
    tau = Permutation.transposition(s + 2, 0, 1)
    total = np.zeros((d * d, d * d), dtype=complex)
    for pi in all_permutations(s + 2):
        if pi.same_cycle(0, 1):
            # W_pi = W_(01) W_pi' with pi' = (01) pi having 0, 1 in
            # distinct cycles; the swap acts only on the kept factors.
            pi2 = tau.compose(pi)
            (m0, m1), scalar = _perm_trace_keep(pi2, mats, (0, 1))
            total += scalar * (swap @ np.kron(m0, m1))
        else:
            (m0, m1), scalar = _perm_trace_keep(pi, mats, (0, 1))
            total += scalar * np.kron(m0, m1)
    total *= kappa(s, d) / kappa(s + 2, d) / math.factorial(s + 2)
    return hermitize(total)


def ab_bijection_check(n: int) -> bool:
    """Whether left-multiplying by the transposition (0 1) swaps the classes
    {0,1 in distinct cycles} and {0,1 in the same cycle} bijectively on S_n."""
    if math.factorial(n) > ENUM_BUDGET:
        raise ValueError("enumeration budget exceeded")
    tau = Permutation.transposition(n, 0, 1)
    type_a = 0
    for pi in all_permutations(n):
        a = not pi.same_cycle(0, 1)
        if a:
            type_a += 1
        if a == (not tau.compose(pi).same_cycle(0, 1)):
            return False
    return type_a * 2 == math.factorial(n)


def single_shadow_second_moment(rho: np.ndarray, d: int) -> np.ndarray:
    """E[rhohat x rhohat] for one single-copy shadow rhohat = (d+1) Psi - I."""
    _check_pure(rho)
    I = np.eye(d)
    pre = np.kron(I, I) + np.kron(I, rho) + np.kron(rho, I)
    swap = perm_operator(Permutation.transposition(2, 0, 1), d)
    post = swap - (2 / (d + 2)) * sym_projector(2, d)
    return hermitize(pre @ post)  # Hermitian in exact arithmetic


def exact_joint_variance(rho: np.ndarray, O: np.ndarray, s: int, d: int) -> float:
    """Exact Var(Tr(O rhohat)) for the affine joint shadow, in dimension d.

    Contracting the second-moment closed form against O x O reduces to
    traces of d x d products, so this stays cheap even when d^2 matrices
    would not.
    """
    _check_pure(rho)
    a = O @ (np.eye(d) + s * rho)
    o_rho = np.trace(O @ rho).real
    cross = np.trace(O @ rho @ O @ rho).real  # = Tr(O rho)^2 for pure rho
    term_plain = np.trace(a).real ** 2 - (s * (s + 1) / 2) * o_rho**2
    term_swap = np.trace(a @ a).real - (s * (s + 1) / 2) * cross
    e2 = (term_plain + term_swap) / ((d + s) * (d + s + 1))
    e1 = (np.trace(O).real + s * o_rho) / (d + s)
    return float(((d + s) / s) ** 2 * (e2 - e1**2))


def _pattern_indices(pattern: str) -> tuple[tuple[int, int], tuple[int, int]]:
    """Shadow indices (first trace, second trace) for each covariance pattern."""
    table = {
        "ij_jk": ((0, 1), (1, 2)),
        "ij_kj": ((0, 1), (2, 1)),
        "ij_ji": ((0, 1), (1, 0)),
        "ij_ij": ((0, 1), (0, 1)),
        "distinct": ((0, 1), (2, 3)),
    }
    if pattern not in table:
        raise ValueError(f"unknown pattern {pattern!r}; one of {COV_PATTERNS}")
    return table[pattern]


def exact_covariance(pattern: str, rho: np.ndarray, O: np.ndarray, d: int) -> float:
    """Exact Cov(Tr(O rhohat_i rhohat_j), Tr(O rhohat_k rhohat_l)) per pattern.

    Assembled from the single-shadow second moment and first moments; the
    fully-repeated pattern uses a three-factor swap identity to decouple the
    two second moments.
    """
    _check_pure(rho)
    if pattern == "distinct":
        return 0.0
    _pattern_indices(pattern)
    I = np.eye(d)
    OO = np.kron(O, O)
    m2 = single_shadow_second_moment(rho, d)
    o_rho2 = np.trace(O @ rho).real ** 2
    if pattern == "ij_jk":
        val = np.trace(OO @ np.kron(rho, rho) @ m2)
    elif pattern == "ij_kj":
        val = np.trace(OO @ np.kron(rho, I) @ m2 @ np.kron(I, rho))
    elif pattern == "ij_ji":
        val = np.trace(OO @ m2 @ m2)
    else:  # ij_ij
        w13 = perm_operator(Permutation((2, 1, 0)), d)
        big = np.kron(np.kron(O, O), I) @ np.kron(I, m2) @ np.kron(m2, I) @ w13
        val = np.trace(big)
    assert abs(val.imag) < 1e-8 * max(abs(val), 1.0)
    return float(val.real - o_rho2)


def covariance_bound(pattern: str, rho: np.ndarray, O: np.ndarray, d: int) -> float:
    """Closed-form upper bound on the covariance for each pattern."""
    o_norm2 = float(np.abs(np.linalg.eigvalsh(O)).max() ** 2)
    tr_o2 = float(np.trace(O @ O).real)
    if pattern == "ij_jk":
        return 2 * float(np.trace(O @ rho).real ** 2)
    if pattern == "ij_kj":
        return 2 * float(np.trace(O @ O @ rho).real)
    if pattern == "ij_ji":
        return d * tr_o2 + 6 * math.sqrt(d * tr_o2) + o_norm2
    if pattern == "ij_ij":
        return (d + 2) * tr_o2 + (3 * d - 2) * o_norm2
    if pattern == "distinct":
        return 0.0
    raise ValueError(f"unknown pattern {pattern!r}")


def shadow_pair_traces(O: np.ndarray, psi_i: np.ndarray, psi_j: np.ndarray) -> np.ndarray:
    """Vectorized Tr(O rhohat_i rhohat_j) from single-copy outcome vectors.

    psi_i, psi_j have shape (n, d); expanding the shadows (d+1)|psi><psi| - I
    reduces each trace to inner products, avoiding per-sample matrices.
    """
    d = O.shape[0]
    o_ii = np.einsum("ni,ij,nj->n", psi_i.conj(), O, psi_i)
    o_jj = np.einsum("ni,ij,nj->n", psi_j.conj(), O, psi_j)
    o_ji = np.einsum("ni,ij,nj->n", psi_j.conj(), O, psi_i)
    ov_ij = np.einsum("ni,ni->n", psi_i.conj(), psi_j)
    tr_o = np.trace(O)
    return (d + 1) ** 2 * o_ji * ov_ij - (d + 1) * (o_ii + o_jj) + tr_o


def mc_covariance(
    pattern: str, rho: np.ndarray, O: np.ndarray, d: int, N: int, rng: RngStream
) -> tuple[float, float]:
    """Monte Carlo covariance for a pattern, with its standard error.

    Independent cross-check of exact_covariance: draws fresh single-copy
    outcomes and forms the two trace variables directly.
    """
    if N < 1000:
        raise ValueError("need N >= 1000 for a stable covariance estimate")
    _check_pure(rho)
    (a, b), (c, e) = _pattern_indices(pattern)
    n_shadows = max(a, b, c, e) + 1
    evals, evecs = np.linalg.eigh(rho)
    phi = evecs[:, -1]
    psis = sample_posterior_states(phi, 1, rng, N * n_shadows).reshape(N, n_shadows, d)
    x = shadow_pair_traces(O, psis[:, a], psis[:, b])
    y = shadow_pair_traces(O, psis[:, c], psis[:, e])
    prods = (x - x.mean()) * (y - y.mean()).conj()
    cov = prods.mean().real
    stderr = float(prods.real.std(ddof=1) / math.sqrt(N))
    return float(cov), stderr
