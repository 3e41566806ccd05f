"""Small complex linear-algebra helpers shared by every other module.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Nothing here
is meant for large problems; every operator in the package is at most 8x8.
"""

from functools import reduce

import numpy as np

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
# eigenvalues below ROUNDOFF * max(1, largest eigenvalue) count as round-off
ROUNDOFF = 1e-14

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)

#: Pauli basis in the fixed order (I, X, Y, Z).
PAULIS = (I2, SX, SY, SZ)
PAULI_LABELS = ("I", "X", "Y", "Z")


class NotHermitianError(ValueError):
    pass


class NotPSDError(ValueError):
    pass


def as_matrix(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    return a


def dag(a):
    return np.conj(np.asarray(a)).T


def kron(*mats):
    """Tensor product of one or more matrices, left to right."""
    return reduce(np.kron, (as_matrix(m) for m in mats))


def ket(vec):
    """Column vector from a sequence of amplitudes."""
    return np.asarray(vec, dtype=complex).reshape(-1, 1)


def projector(vec):
    v = ket(vec)
    return v @ dag(v)


def hermiticity_error(h):
    h = as_matrix(h)
    return float(np.max(np.abs(h - dag(h)))) if h.size else 0.0


def check_hermitian(h, tol=HERMITIAN_TOL):
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise NotHermitianError(f"matrix is not square: {h.shape}")
    err = hermiticity_error(h)
    if err > tol:
        raise NotHermitianError(f"max|A - A^dag| = {err:.3e} exceeds {tol:.0e}")
    return h


def hermitian_eig(h, tol=HERMITIAN_TOL):
    """Eigen-decomposition of a Hermitian matrix.

    Args:
        h: square Hermitian matrix.
        tol: allowed ``max|h - h^dag|`` before the input is rejected.

    Returns:
        ``(eigenvalues, eigenvectors)`` with real eigenvalues sorted in
        descending order and orthonormal eigenvectors as columns.
    """
    h = check_hermitian(h, tol)
    hs = 0.5 * (h + dag(h))
    w, v = np.linalg.eigh(hs)
    order = np.argsort(w)[::-1]
    return w[order], v[:, order]


def psd_sqrt(rho, tol=PSD_TOL):
    """Hermitian square root of a positive semidefinite matrix.

    Eigenvalues in ``[-tol, 0)`` are treated as numerical zeros; anything
    more negative raises :class:`NotPSDError`. Positive eigenvalues at the
    round-off level are zeroed as well, since their square roots (~1e-8)
    would otherwise dominate the error for low-rank input.
    """
    w, v = hermitian_eig(rho, tol=max(tol, HERMITIAN_TOL))
    if w.size and w.min() < -tol:
        raise NotPSDError(f"smallest eigenvalue {w.min():.3e} < -{tol:.0e}")
    w = np.where(w > ROUNDOFF * max(w.max(initial=0.0), 1.0), w, 0.0)
    return (v * np.sqrt(w)) @ dag(v)


def pauli_product(labels):
    """Tensor product of Paulis named by a string such as ``"XZ"``."""
    return kron(*(PAULIS[PAULI_LABELS.index(c)] for c in labels))


def pauli_strings(n_qubits):
    """All ``4**n`` Pauli labels for ``n`` qubits in lexicographic (I, X, Y, Z) order."""
    labels = [""]
    for _ in range(n_qubits):
        labels = [s + c for s in labels for c in PAULI_LABELS]
    return labels


def bloch_operator(n):
    """``n . sigma`` for a real 3-vector ``n``."""
    n = np.asarray(n, dtype=float)
    return n[0] * SX + n[1] * SY + n[2] * SZ


def random_unitary(dim, rng):
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density(dim, rng, rank=None):
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ dag(g)
    return rho / np.trace(rho).real
