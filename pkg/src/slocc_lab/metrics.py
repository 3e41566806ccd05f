"""Entanglement and nonlocality figures of merit for one- and two-qubit states."""

from dataclasses import dataclass

import numpy as np

from .qmath import PAULIS, ROUNDOFF, SY, hermitian_eig, kron, psd_sqrt
from .particles import binary_entropy

DENSITY_TOL = 1e-10
EIG_TOL = 1e-8


class DimensionError(ValueError):
    pass


def density(rho, dim=None, tol=DENSITY_TOL):
    """Validate and return ``rho`` as a density matrix.

    A 1-D input is read as a pure state and turned into its projector.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj()) / np.vdot(rho, rho).real
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"not a square matrix: {rho.shape}")
    if dim is not None and rho.shape[0] != dim:
        raise DimensionError(f"expected {dim}x{dim}, got {rho.shape}")
    if rho.shape[0] not in (2, 4):
        raise DimensionError(f"only 2x2 and 4x4 density matrices are supported, got {rho.shape}")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ValueError(f"trace {np.trace(rho)!r} differs from 1")
    w, _ = hermitian_eig(rho, tol=tol)
    if w[-1] < -EIG_TOL:
        raise ValueError(f"negative eigenvalue {w[-1]:.3e}")
    return rho


@dataclass(frozen=True)
class EntanglementReport:
    concurrence: float
    e_formation: float


@dataclass(frozen=True)
class ChshResult:
    """Maximal CHSH value and Bloch vectors ``(a, a_p, b, b_p)`` reaching it."""

    s_value: float
    a: np.ndarray
    a_p: np.ndarray
    b: np.ndarray
    b_p: np.ndarray

    @property
    def violates(self):
        return self.s_value > 2.0


def concurrence(rho):
    """Wootters concurrence of a two-qubit state.

    ``rho = X X^dag`` with columns ``sqrt(w_k) v_k`` from its eigenvectors;
    the ``lambda_k`` are the singular values of ``X^T (Y (x) Y) X``. They equal
    the square roots of the eigenvalues of ``sqrt(rho) rho_tilde sqrt(rho)``
    but avoid square roots of round-off-level eigenvalues, which would
    otherwise leak ~1e-8 into the concurrence of pure states.
    """
    rho = density(rho, dim=4)
    w, v = hermitian_eig(rho, tol=DENSITY_TOL)
    keep = w > ROUNDOFF
    x = v[:, keep] * np.sqrt(w[keep])
    tau = x.T @ kron(SY, SY) @ x
    lam = np.zeros(4)
    sv = np.linalg.svd(tau, compute_uv=False)
    lam[: sv.size] = np.sort(sv)[::-1]
    return float(min(1.0, max(0.0, lam[0] - lam[1] - lam[2] - lam[3])))


def entanglement_of_formation(c):
    c = float(np.clip(c, 0.0, 1.0))
    return binary_entropy((1.0 + np.sqrt(1.0 - c * c)) / 2.0)


def entanglement(rho):
    c = concurrence(rho)
    return EntanglementReport(c, entanglement_of_formation(c))


def fidelity(rho, target):
    """State fidelity.

    For a pure ``target`` (1-D amplitude vector) this is ``<phi|rho|phi>``;
    for two density matrices it is the Uhlmann form ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``.
    """
    rho = density(rho)
    target = np.asarray(target, dtype=complex)
    if target.shape[0] != rho.shape[0]:
        raise DimensionError(f"dimension mismatch: {rho.shape} vs {target.shape}")
    if target.ndim == 1:
        phi = target / np.linalg.norm(target)
        return float(np.real(np.vdot(phi, rho @ phi)))
    sigma = density(target)
    # Tr sqrt(sqrt(rho) sigma sqrt(rho)) is the trace norm of sqrt(rho) sqrt(sigma);
    # singular values avoid square roots of round-off eigenvalues
    prod = psd_sqrt(rho, tol=EIG_TOL) @ psd_sqrt(sigma, tol=EIG_TOL)
    return float(min(1.0, np.sum(np.linalg.svd(prod, compute_uv=False)) ** 2))


def correlation_matrix(rho):
    """``T[i, j] = Tr[rho sigma_i (x) sigma_j]`` for i, j in x, y, z."""
    rho = density(rho, dim=4)
    return np.array([[np.real(np.trace(rho @ kron(PAULIS[i], PAULIS[j]))) for j in (1, 2, 3)]
                     for i in (1, 2, 3)])


def correlator(t, a, b):
    """``E(a, b) = a^T T b`` for Bloch vectors ``a`` (first qubit) and ``b``."""
    return float(np.asarray(a) @ t @ np.asarray(b))


def chsh_value(t, a, a_p, b, b_p):
    return (correlator(t, a, b) + correlator(t, a, b_p)
            + correlator(t, a_p, b) - correlator(t, a_p, b_p))


def _unit(v, fallback):
    n = np.linalg.norm(v)
    return v / n if n > 1e-12 else fallback


def chsh_max(rho):
    """Largest CHSH value over projective settings and the settings achieving it.

    ``S = 2 sqrt(u1 + u2)`` with ``u1 >= u2`` the two largest eigenvalues of
    ``T^T T``. Bob's settings straddle the top two eigenvectors at the angle
    ``tan theta = sqrt(u2 / u1)``; Alice's follow ``T (b +- b')``.
    """
    t = correlation_matrix(rho)
    u, vecs = np.linalg.eigh(t.T @ t)
    order = np.argsort(u)[::-1]
    u = np.clip(u[order], 0.0, None)
    vecs = vecs[:, order]
    e1, e2, e3 = vecs[:, 0], vecs[:, 1], vecs[:, 2]
    theta = np.arctan2(np.sqrt(u[1]), np.sqrt(u[0]))
    b = np.cos(theta) * e1 + np.sin(theta) * e2
    b_p = np.cos(theta) * e1 - np.sin(theta) * e2
    a = _unit(t @ (b + b_p), np.array([0.0, 0.0, 1.0]))
    # a' is irrelevant when T (b - b') vanishes; any unit vector orthogonal to a will do
    ortho = np.cross(a, e3 if abs(a @ e3) < 0.9 else e1)
    a_p = _unit(t @ (b - b_p), _unit(ortho, np.array([1.0, 0.0, 0.0])))
    s = 2.0 * np.sqrt(u[0] + u[1])
    return ChshResult(float(s), a, a_p, b, b_p)
