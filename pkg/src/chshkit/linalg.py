"""Dense complex linear algebra for small configuration spaces.

All operations are pure functions on plain numpy arrays: complex matrices,
normalized state vectors, and real phase matrices.  Matrices are dense and
deliberately tiny (dimension capped at ``MAX_DIM``); everything runs in
double precision.
"""

from __future__ import annotations

import numpy as np

#: Practical cap on matrix dimensions; every object in this package is tiny.
MAX_DIM = 64

#: Default tolerance for unitarity checks.  Composed rotations accumulate
#: round-off well below this.
UNITARY_TOL = 1e-10

HERMITIAN_TOL = 1e-10
STATE_NORM_TOL = 1e-12


def as_complex_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce ``m`` to a dense complex matrix, checking shape and finiteness."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must be a 2-d matrix, got shape {a.shape}")
    if max(a.shape) > MAX_DIM:
        raise ValueError(
            f"{name} is {a.shape[0]}x{a.shape[1]}; dimensions above {MAX_DIM} are not supported"
        )
    if not np.isfinite(a).all():
        raise ValueError(f"{name} contains non-finite entries")
    return a


def as_state_vector(v, name: str = "state", norm_tol: float = STATE_NORM_TOL) -> np.ndarray:
    """Coerce ``v`` to a normalized complex state vector."""
    a = np.asarray(v, dtype=complex)
    if a.ndim != 1 or a.shape[0] < 1:
        raise ValueError(f"{name} must be a 1-d vector, got shape {a.shape}")
    if a.shape[0] > MAX_DIM:
        raise ValueError(f"{name} has dimension {a.shape[0]}; above {MAX_DIM} is not supported")
    if not np.isfinite(a).all():
        raise ValueError(f"{name} contains non-finite entries")
    norm_sq = float(np.sum(np.abs(a) ** 2))
    if abs(norm_sq - 1.0) > norm_tol:
        raise ValueError(f"{name} is not normalized: sum of squared moduli is {norm_sq!r}")
    return a


def tensor(a, b) -> np.ndarray:
    """Kronecker product of two matrices; dimensions multiply.

    Composite indices are row-major throughout the package: the configuration
    pair ``(i, j)`` maps to the flat index ``i * dim_b + j``.
    """
    am = as_complex_matrix(a, "a")
    bm = as_complex_matrix(b, "b")
    if am.shape[0] * bm.shape[0] > MAX_DIM or am.shape[1] * bm.shape[1] > MAX_DIM:
        raise ValueError(f"tensor product would exceed the dimension cap {MAX_DIM}")
    return np.kron(am, bm)


def rotation(theta: float) -> np.ndarray:
    """Real 2x2 rotation by ``theta`` (orthogonal, hence unitary)."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    """True iff ``u.conj().T @ u`` deviates from the identity by at most ``tol``."""
    a = as_complex_matrix(u, "u")
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"u must be square to test unitarity, got shape {a.shape}")
    gram = a.conj().T @ a
    return bool(np.max(np.abs(gram - np.eye(a.shape[0]))) <= tol)


def assert_unitary(u, tol: float = UNITARY_TOL, name: str = "matrix") -> np.ndarray:
    """Validate unitarity and return the coerced matrix; raise otherwise."""
    a = as_complex_matrix(u, name)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    dev = float(np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0]))))
    if dev > tol:
        raise ValueError(f"{name} is not unitary within {tol:g} (deviation {dev:.3e})")
    return a


def projector(dim: int, index: int) -> np.ndarray:
    """Rank-1 diagonal projector onto one configuration-basis vector."""
    if dim < 1 or dim > MAX_DIM:
        raise ValueError(f"dim must be in [1, {MAX_DIM}], got {dim}")
    if not 0 <= index < dim:
        raise ValueError(f"index {index} out of range for dimension {dim}")
    p = np.zeros((dim, dim), dtype=complex)
    p[index, index] = 1.0
    return p


def basis_state(dim: int, index: int) -> np.ndarray:
    """Configuration-basis vector of the given dimension."""
    if not 0 <= index < dim:
        raise ValueError(f"index {index} out of range for dimension {dim}")
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def dictionary_prob(u, q_t: int, q_0: int, tol: float = UNITARY_TOL) -> float:
    """Transition probability read off a unitary evolution matrix.

    Equals the projector-sandwich trace ``Tr[P_qt u P_q0 u^dag]``; for unitary
    ``u`` that trace collapses to the squared entry modulus, which is what is
    computed here.
    """
    a = assert_unitary(u, tol, "u")
    d = a.shape[0]
    if not (0 <= q_t < d and 0 <= q_0 < d):
        raise ValueError(f"configuration indices ({q_t}, {q_0}) out of range for dimension {d}")
    return float(min(abs(a[q_t, q_0]) ** 2, 1.0))


def amplitude_representation(gamma, phases) -> np.ndarray:
    """Entrywise ``exp(i*phase) * sqrt(prob)`` matrix over a probability table.

    The squared modulus of the result reproduces ``gamma`` entrywise.  Phases
    are an explicit input: the representation is not unique and no canonical
    gauge is imposed.
    """
    g = np.asarray(gamma, dtype=float)
    th = np.asarray(phases, dtype=float)
    if g.ndim != 2 or th.shape != g.shape:
        raise ValueError(
            f"gamma and phases must be matrices of equal shape, got {g.shape} and {th.shape}"
        )
    if not (np.isfinite(g).all() and np.isfinite(th).all()):
        raise ValueError("gamma and phases must be finite")
    if g.min() < -1e-12 or g.max() > 1 + 1e-12:
        raise ValueError("gamma entries must be probabilities in [0, 1]")
    return np.exp(1j * th) * np.sqrt(np.clip(g, 0.0, None))


def dephase(rho, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Zero all off-diagonal entries of a density matrix in the configuration basis.

    This is the division channel: it wipes coherences while preserving the
    trace, and maps positive-semidefinite inputs to positive-semidefinite
    outputs.
    """
    a = as_complex_matrix(rho, "rho")
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"rho must be square, got shape {a.shape}")
    herm_dev = float(np.max(np.abs(a - a.conj().T)))
    if herm_dev > tol:
        raise ValueError(f"rho is not Hermitian within {tol:g} (deviation {herm_dev:.3e})")
    tr = complex(np.trace(a))
    if abs(tr - 1.0) > tol:
        raise ValueError(f"rho must have unit trace, got trace {tr!r}")
    return np.diag(np.diag(a))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed random unitary via QR of a complex Gaussian matrix."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def spectral_norm(h, tol: float = HERMITIAN_TOL) -> float:
    """Spectral norm of a Hermitian matrix via dense eigendecomposition."""
    a = as_complex_matrix(h, "h")
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"h must be square, got shape {a.shape}")
    if float(np.max(np.abs(a - a.conj().T))) > tol:
        raise ValueError("h must be Hermitian")
    return float(np.max(np.abs(np.linalg.eigvalsh(a))))
