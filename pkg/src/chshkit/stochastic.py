"""Column-stochastic dynamics: evolution, division tests, unistochastic
matrices, a unitary-dilation search, and interference-correction matrices.

Convention used project-wide: ``gamma[i, j]`` is the conditional probability
of landing in configuration ``i`` given start configuration ``j``, so columns
sum to one and distributions evolve by plain matrix-vector products.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import UNITARY_TOL, assert_unitary

COLUMN_SUM_TOL = 1e-10
ENTRY_SLACK = 1e-12

#: Division events are only ever defined up to a working precision; callers
#: may widen or tighten this.
DIVISION_TOL = 1e-8

_UINT64_MASK = (1 << 64) - 1


def as_stochastic_matrix(gamma, name: str = "gamma", col_tol: float = COLUMN_SUM_TOL) -> np.ndarray:
    """Validate a column-stochastic matrix and return a cleaned float copy.

    Entries may undershoot zero by at most ``ENTRY_SLACK`` (round-off); such
    entries are clipped to zero.  Larger violations are errors.
    """
    a = np.asarray(gamma, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must be a 2-d matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError(f"{name} contains non-finite entries")
    if a.min() < -ENTRY_SLACK or a.max() > 1 + ENTRY_SLACK:
        raise ValueError(f"{name} entries must be probabilities in [0, 1]")
    sums = a.sum(axis=0)
    dev = float(np.max(np.abs(sums - 1.0)))
    if dev > col_tol:
        raise ValueError(f"{name} columns must sum to 1 within {col_tol:g} (deviation {dev:.3e})")
    return np.clip(a, 0.0, None)


def as_distribution(p, name: str = "p", sum_tol: float = COLUMN_SUM_TOL) -> np.ndarray:
    """Validate a probability distribution and return a cleaned float copy."""
    a = np.asarray(p, dtype=float)
    if a.ndim != 1 or a.shape[0] < 1:
        raise ValueError(f"{name} must be a 1-d vector, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError(f"{name} contains non-finite entries")
    if a.min() < -ENTRY_SLACK:
        raise ValueError(f"{name} has negative entries")
    total = float(a.sum())
    if abs(total - 1.0) > sum_tol:
        raise ValueError(f"{name} must sum to 1 within {sum_tol:g}, got {total!r}")
    return np.clip(a, 0.0, None)


def evolve(gamma, p0) -> np.ndarray:
    """Push a distribution through one stochastic evolution step."""
    g = as_stochastic_matrix(gamma)
    d = as_distribution(p0, "p0")
    if g.shape[1] != d.shape[0]:
        raise ValueError(
            f"dimension mismatch: gamma conditions on {g.shape[1]} configurations, p0 has {d.shape[0]}"
        )
    return g @ d


def is_doubly_stochastic(gamma, tol: float = COLUMN_SUM_TOL) -> bool:
    """True iff ``gamma`` is square with unit row and column sums within ``tol``."""
    a = np.asarray(gamma, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    if not np.isfinite(a).all() or a.min() < -tol:
        return False
    return bool(
        np.max(np.abs(a.sum(axis=0) - 1.0)) <= tol
        and np.max(np.abs(a.sum(axis=1) - 1.0)) <= tol
    )


@dataclass
class DivisionReport:
    """Outcome of a division attempt: the quotient (if any) plus its residual."""

    quotient: np.ndarray | None
    residual: float


def divide_report(gamma_total, gamma_first, tol: float = DIVISION_TOL) -> DivisionReport:
    """Try to factor ``gamma_total = quotient @ gamma_first`` through a stochastic quotient.

    The candidate is the least-squares solution of the linear system (so a
    singular ``gamma_first`` is handled); negligible negatives are projected
    to zero and columns renormalized.  The candidate is accepted only when it
    is stochastic within ``tol`` and reconstructs ``gamma_total`` with
    max-entry error at most ``tol``.  When several quotients exist, whichever
    the least-squares solve lands on is returned (the output is not
    canonical).
    """
    gt = as_stochastic_matrix(gamma_total, "gamma_total")
    gf = as_stochastic_matrix(gamma_first, "gamma_first")
    if gt.shape[1] != gf.shape[1]:
        raise ValueError(
            "dimension mismatch: gamma_total and gamma_first must condition on the same "
            f"initial configurations, got {gt.shape[1]} and {gf.shape[1]}"
        )
    x, *_ = np.linalg.lstsq(gf.T, gt.T, rcond=None)
    raw = x.T
    raw_residual = float(np.max(np.abs(raw @ gf - gt)))
    if raw.min() < -tol:
        return DivisionReport(None, raw_residual)
    candidate = np.clip(raw, 0.0, None)
    sums = candidate.sum(axis=0)
    if np.max(np.abs(sums - 1.0)) > tol:
        return DivisionReport(None, raw_residual)
    candidate = candidate / sums
    residual = float(np.max(np.abs(candidate @ gf - gt)))
    if residual > tol:
        return DivisionReport(None, residual)
    return DivisionReport(candidate, residual)


def divide(gamma_total, gamma_first, tol: float = DIVISION_TOL) -> np.ndarray | None:
    """Stochastic quotient with ``gamma_total = quotient @ gamma_first``, or None."""
    return divide_report(gamma_total, gamma_first, tol).quotient


def unistochastic_of(u, tol: float = UNITARY_TOL) -> np.ndarray:
    """Entrywise squared moduli of a unitary matrix; always doubly stochastic."""
    a = assert_unitary(u, tol, "u")
    return np.abs(a) ** 2


@dataclass
class DilationReport:
    """Outcome of a dilation search: the unitary (if found) plus the best residual."""

    unitary: np.ndarray | None
    residual: float


def dilation_report(
    gamma,
    tol: float = DIVISION_TOL,
    max_restarts: int = 64,
    max_iterations: int = 10_000,
    seed: int = 0,
) -> DilationReport:
    """Search for a unitary whose entrywise squared moduli reproduce ``gamma``.

    Alternating projection between the set of matrices with prescribed entry
    moduli ``sqrt(gamma)`` and the set of unitary matrices (via the polar
    factor of an SVD), restarted from fresh random phases.  Restart ``k``
    draws its phases from a counter-based substream keyed by ``(seed, k)``,
    so the result is deterministic however restarts are scheduled.  A restart
    is abandoned early when its residual stops improving, since such a run
    cannot reach ``tol`` within the iteration budget anyway.

    An empty result is a search failure, never a proof that no dilation
    exists.
    """
    g = np.asarray(gamma, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValueError(f"gamma must be square, got shape {g.shape}")
    if not is_doubly_stochastic(g, tol=max(tol, COLUMN_SUM_TOL)):
        raise ValueError(
            "gamma must be doubly stochastic: only doubly stochastic matrices can equal "
            "the squared moduli of a unitary"
        )
    if max_restarts < 1 or max_iterations < 1:
        raise ValueError("max_restarts and max_iterations must be positive")
    roots = np.sqrt(np.clip(g, 0.0, None))
    best_overall = np.inf
    for restart in range(max_restarts):
        rng = np.random.Generator(
            np.random.Philox(key=np.array([seed & _UINT64_MASK, restart], dtype=np.uint64))
        )
        m = roots * np.exp(2j * np.pi * rng.random(g.shape))
        best = np.inf
        checkpoint = np.inf
        for iteration in range(max_iterations):
            w, _, vh = np.linalg.svd(m)
            u = w @ vh
            residual = float(np.max(np.abs(np.abs(u) ** 2 - g)))
            if residual <= tol:
                return DilationReport(u, residual)
            best = min(best, residual)
            if iteration % 100 == 99:
                if best > 0.9 * checkpoint:
                    break  # stalled; cannot reach tol within the budget
                checkpoint = best
            m = roots * np.exp(1j * np.angle(u))
        best_overall = min(best_overall, best)
    return DilationReport(None, best_overall)


def find_unitary_dilation(
    gamma,
    tol: float = DIVISION_TOL,
    max_restarts: int = 64,
    max_iterations: int = 10_000,
    seed: int = 0,
) -> np.ndarray | None:
    """Unitary with ``|u|**2 == gamma`` within ``tol``, or None if the search fails."""
    return dilation_report(gamma, tol, max_restarts, max_iterations, seed).unitary


def qcor(u_total, u_first, tol: float = UNITARY_TOL) -> np.ndarray:
    """Interference-correction matrix for a fictitious division at an intermediate time.

    Given unitary evolutions over the whole interval and over its first leg,
    returns the gap between the exact transition probabilities and the
    two-step composition through the intermediate time.  Every column sums to
    zero: both sides of the comparison are normalized probabilities.
    """
    ut = assert_unitary(u_total, tol, "u_total")
    uf = assert_unitary(u_first, tol, "u_first")
    if ut.shape != uf.shape:
        raise ValueError(f"dimension mismatch: {ut.shape} vs {uf.shape}")
    gamma_total = np.abs(ut) ** 2
    gamma_first = np.abs(uf) ** 2
    gamma_second = np.abs(ut @ uf.conj().T) ** 2
    return gamma_total - gamma_second @ gamma_first
