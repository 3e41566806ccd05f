"""State and process reconstruction from counts."""

import json
import logging
from dataclasses import dataclass

import numpy as np

from .measurement import MeasurementSetting
from .metrics import fidelity as state_fidelity
from .qmath import PAULIS, dag, hermitian_eig, pauli_product, pauli_strings

log = logging.getLogger(__name__)

RANK_TOL = 1e-9


class IncompleteDataError(ValueError):
    """The measured settings do not determine every unknown."""


@dataclass(frozen=True)
class TomographyResult:
    rho: np.ndarray
    n_settings: int
    fidelity_vs_target: float | None = None
    error_bar: float | None = None
    clipped_mass: float = 0.0
    rho_linear: np.ndarray | None = None


@dataclass(frozen=True)
class ProcessMatrix:
    """Process matrix in the (I, X, Y, Z) basis: ``E(rho) = sum chi_ij s_i rho s_j``."""

    chi: np.ndarray

    @property
    def process_fidelity(self):
        return float(self.chi[0, 0].real)

    def apply(self, rho):
        return sum(self.chi[i, j] * PAULIS[i] @ rho @ PAULIS[j] for i in range(4) for j in range(4))

    def trace_condition(self):
        """``sum chi_ij s_j s_i``; the identity for a trace-preserving map."""
        return sum(self.chi[i, j] * PAULIS[j] @ PAULIS[i] for i in range(4) for j in range(4))


def pauli_settings(n_qubits):
    """The ``3**n`` Pauli-basis settings (Z, X, Y per side)."""
    labels = [""]
    for _ in range(n_qubits):
        labels = [s + c for s in labels for c in "ZXY"]
    return [MeasurementSetting.pauli(s) for s in labels]


def projector_settings_16():
    """Sixteen single-outcome joint projectors built from H, V, D, R on each side.

    Returned as ``(setting, outcome)`` pairs: each side's analyzer is chosen
    so that outcome ``+`` is the wanted polarization.
    """
    sides = [("Z", 0), ("Z", 1), ("X", 0), ("Y", 0)]
    pairs = []
    for a, ka in sides:
        for b, kb in sides:
            pairs.append((MeasurementSetting.pauli(a + b), 2 * ka + kb))
    return pairs


def _design(records, dim):
    labels = pauli_strings(int(np.log2(dim)))
    basis = [pauli_product(s) for s in labels]
    rows = []
    for rec in records:
        for proj in rec.projectors():
            rows.append([np.real(np.trace(proj @ b)) / dim for b in basis])
    return np.array(rows), labels, basis


def _missing_directions(a, labels):
    _, s, vt = np.linalg.svd(a)
    rank = int(np.sum(s > RANK_TOL * s[0]))
    missing = []
    for v in vt[rank:]:
        missing.append(labels[int(np.argmax(np.abs(v)))])
    return rank, sorted(set(missing))


def linear_inversion(records, dim):
    """Unconstrained least-squares estimate (may have negative eigenvalues).

    Complete records are normalized per setting to frequencies; records
    with a subset of outcomes contribute raw counts and the estimate is
    normalized by its trace afterwards.
    """
    a, labels, basis = _design(records, dim)
    rank, missing = _missing_directions(a, labels)
    if rank < a.shape[1]:
        raise IncompleteDataError(f"settings do not span the Pauli basis; missing {missing}")
    if all(r.complete for r in records):
        y = np.concatenate([np.asarray(r.counts, float) / max(sum(r.counts), 1e-300) for r in records])
    else:
        y = np.concatenate([np.asarray(r.counts, float) for r in records])
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    rho = sum(c * b for c, b in zip(coef, basis)) / dim
    rho = 0.5 * (rho + dag(rho))
    tr = np.trace(rho).real
    if tr <= 0:
        raise ValueError("estimate has non-positive trace (no counts?)")
    return rho / tr


def project_psd(rho):
    """Clip negative eigenvalues to zero and renormalize the trace.

    Returns the projected matrix and the clipped eigenvalue mass.
    """
    w, v = hermitian_eig(rho, tol=1e-9)
    clipped = float(-np.sum(w[w < 0]))
    w = np.clip(w, 0.0, None)
    out = (v * w) @ dag(v)
    return out / np.trace(out).real, clipped


def _rrho(records, dim, rho0, max_iter=500, tol=1e-10):
    projs = np.array([p for r in records for p in r.projectors()])
    if all(r.complete for r in records):
        freqs = np.concatenate([np.asarray(r.counts, float) / sum(r.counts) for r in records])
    else:
        c = np.concatenate([np.asarray(r.counts, float) for r in records])
        freqs = c / c.sum()
    rho = 0.9 * rho0 + 0.1 * np.eye(dim) / dim
    step = np.inf
    for _ in range(max_iter):
        probs = np.maximum(np.einsum("kij,ji->k", projs, rho).real, 1e-300)
        r_op = np.einsum("k,kij->ij", freqs / probs, projs)
        new = r_op @ rho @ r_op
        new = new / np.trace(new).real
        new = 0.5 * (new + dag(new))
        step = np.max(np.abs(new - rho))
        rho = new
        if step < tol:
            break
    else:
        log.debug("R-rho-R iteration stopped after %d iterations (step %.2e)", max_iter, step)
    return rho


def state_tomography(records, dim, target=None, method="linear"):
    """Reconstruct a one- or two-qubit density matrix.

    Args:
        records: list of :class:`CountRecord`; the 3-setting (one qubit) and
            9-setting (two qubit) Pauli layouts, 36-projector layouts and
            16 single-outcome projector layouts are all accepted.
        dim: 2 or 4.
        target: optional pure state or density matrix for the fidelity.
        method: ``"linear"`` (inversion plus eigenvalue clipping) or
            ``"mle"`` (R-rho-R fixed point started from the linear estimate).

    Raises:
        IncompleteDataError: the settings miss some Pauli direction.
    """
    if dim not in (2, 4):
        raise ValueError(f"dim must be 2 or 4, got {dim}")
    rho_lin = linear_inversion(records, dim)
    rho, clipped = project_psd(rho_lin)
    if method == "mle":
        rho = _rrho(records, dim, rho)
    elif method != "linear":
        raise ValueError(f"unknown method {method!r}")
    f = state_fidelity(rho, target) if target is not None else None
    return TomographyResult(rho, len(records), f, None, clipped, rho_lin)


def error_bars(records, estimator, n_resamples=100, rng=None):
    """Parametric-bootstrap standard deviation of a scalar functional.

    Each count is redrawn as ``Poisson(observed)``; ``estimator`` maps a list
    of records to a float. Resamples on which it raises are dropped.

    Returns:
        ``(std, n_used)``.
    """
    if n_resamples < 100:
        raise ValueError("n_resamples must be at least 100")
    rng = np.random.default_rng(rng)
    if all(r.exact for r in records):
        estimator(records)
        return 0.0, n_resamples
    values = []
    for _ in range(n_resamples):
        resampled = [r.with_counts(rng.poisson(np.asarray(r.counts, float))) for r in records]
        try:
            values.append(float(estimator(resampled)))
        except (ValueError, np.linalg.LinAlgError):
            continue
    dropped = n_resamples - len(values)
    if dropped:
        log.info("bootstrap dropped %d of %d resamples", dropped, n_resamples)
    if len(values) < 2:
        raise ValueError("too few successful resamples for an error bar")
    return float(np.std(values, ddof=1)), len(values)


def _hermitian_basis(n):
    """Real basis of ``n x n`` Hermitian matrices (``n**2`` elements)."""
    out = []
    for i in range(n):
        m = np.zeros((n, n), complex)
        m[i, i] = 1.0
        out.append(m)
    for i in range(n):
        for j in range(i + 1, n):
            m = np.zeros((n, n), complex)
            m[i, j] = m[j, i] = 1.0
            out.append(m)
            m = np.zeros((n, n), complex)
            m[i, j], m[j, i] = -1j, 1j
            out.append(m)
    return out


def process_tomography(pairs):
    """Least-squares process matrix from ``(rho_prep, rho_out)`` pairs.

    The 16 real parameters of a Hermitian ``chi`` are fitted to every
    output matrix element, so Hermiticity holds by construction.

    Raises:
        IncompleteDataError: the inputs do not span the qubit operator space.
    """
    preps = [np.asarray(p, complex) for p, _ in pairs]
    outs = [np.asarray(o, complex) for _, o in pairs]
    span = np.array([[np.real(np.trace(p @ s)) for s in PAULIS] for p in preps])
    if np.linalg.matrix_rank(span, tol=RANK_TOL) < 4:
        raise IncompleteDataError("input states are not informationally complete")
    basis = _hermitian_basis(4)
    cols = []
    for b in basis:
        col = []
        for p in preps:
            img = sum(b[i, j] * PAULIS[i] @ p @ PAULIS[j] for i in range(4) for j in range(4))
            col.append(np.concatenate([img.real.ravel(), img.imag.ravel()]))
        cols.append(np.concatenate(col))
    a = np.array(cols).T
    y = np.concatenate([np.concatenate([o.real.ravel(), o.imag.ravel()]) for o in outs])
    x, *_ = np.linalg.lstsq(a, y, rcond=None)
    chi = sum(c * b for c, b in zip(x, basis))
    return ProcessMatrix(0.5 * (chi + dag(chi)))


def matrix_to_json(m):
    """Row-major list of rows of ``{"re": .., "im": ..}`` objects."""
    m = np.asarray(m, complex)
    return [[{"re": float(z.real), "im": float(z.imag)} for z in row] for row in m]


def matrix_from_json(rows):
    return np.array([[complex(z["re"], z["im"]) for z in row] for row in rows])


def dumps_matrix(m, **extra):
    return json.dumps({"matrix": matrix_to_json(m), **extra}, indent=2, sort_keys=True)
