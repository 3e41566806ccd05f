"""Two identical particles distributed over two remote regions.

Single-particle modes are the four products of a region (L, R) and a
polarization (H, V), ordered ``LH, LV, RH, RV``. A two-particle state is
stored over the ten unordered occupation kets ``|m_i, m_j>`` with
``i <= j`` in that mode order.

The operational subspace (one particle in each region) uses the ordering
``(LH,RH), (LH,RV), (LV,RH), (LV,RV)``, which coincides with the usual
two-qubit ordering ``HH, HV, VH, VV`` once L is taken as the first qubit.
"""

from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np

NORM_TOL = 1e-12
MODES = ("LH", "LV", "RH", "RV")
POLARIZATIONS = ("H", "V")
REGIONS = ("L", "R")
PAIRS = tuple(combinations_with_replacement(range(4), 2))
LR_PAIRS = ((0, 2), (0, 3), (1, 2), (1, 3))
LR_LABELS = ("LH,RH", "LH,RV", "LV,RH", "LV,RV")


class NullStateError(ValueError):
    """The symmetrized two-particle state has zero norm (Pauli exclusion)."""


class UndefinedMeasureError(ValueError):
    """Both particles sit in one region, so no L-R joint event exists."""


def mode_index(region, pol):
    return 2 * REGIONS.index(region) + POLARIZATIONS.index(pol)


@dataclass(frozen=True)
class SpatialAmplitudes:
    """Amplitudes of two wave packets over L and R plus the exchange sign.

    ``psi_D = l |L> + r |R>`` and ``psi_D' = l_p |L> + r_p |R>``.
    """

    l: complex
    r: complex
    l_p: complex
    r_p: complex
    eta: int = 1

    def __post_init__(self):
        if self.eta not in (1, -1):
            raise ValueError(f"eta must be +1 or -1, got {self.eta}")
        for name, a, b in (("(l, r)", self.l, self.r), ("(l_p, r_p)", self.l_p, self.r_p)):
            n = abs(a) ** 2 + abs(b) ** 2
            if abs(n - 1.0) > NORM_TOL:
                raise ValueError(f"{name} not normalized: |.|^2 sum = {n!r}")

    @classmethod
    def from_angles(cls, alpha, beta, eta=1):
        """Amplitudes produced by the wave-plate setup: ``l=cos a, r=sin a, l'=sin b, r'=cos b``."""
        return cls(np.cos(alpha), np.sin(alpha), np.sin(beta), np.cos(beta), eta)


@dataclass(frozen=True)
class TwoPhotonPureState:
    """Normalized amplitudes over the ten unordered occupation kets (see ``PAIRS``)."""

    amplitudes: np.ndarray
    eta: int = 1

    def amplitude(self, mode_a, mode_b):
        i, j = sorted((MODES.index(mode_a), MODES.index(mode_b)))
        return complex(self.amplitudes[PAIRS.index((i, j))])

    def as_dict(self):
        return {f"{MODES[i]},{MODES[j]}": complex(a) for (i, j), a in zip(PAIRS, self.amplitudes)}


@dataclass(frozen=True)
class IndistinguishabilityReport:
    p1: float
    p2: float
    i_value: float


@dataclass(frozen=True)
class SloccOutcome:
    """Conditional state in the operational basis and its success probability.

    ``state`` is ``None`` for a null outcome (``prob == 0``). ``direct`` and
    ``exchange`` hold the two unnormalized which-path histories whose
    coherent sum is the conditional state; they are what survives when the
    particles become distinguishable at detection.
    """

    state: np.ndarray | None
    prob: float
    direct: np.ndarray | None = field(default=None, repr=False)
    exchange: np.ndarray | None = field(default=None, repr=False)

    @property
    def is_null(self):
        return self.state is None

    def density(self):
        if self.state is None:
            raise NullStateError("null sLOCC outcome has no conditional state")
        return np.outer(self.state, self.state.conj())


def fix_global_phase(vec, tol=1e-14):
    """Rotate ``vec`` so its first non-negligible component is real and positive."""
    vec = np.asarray(vec, dtype=complex)
    for a in vec:
        if abs(a) > tol:
            return vec * (abs(a) / a)
    return vec


def single_particle_vector(a_left, a_right, pol):
    """Mode vector of ``(a_left |L> + a_right |R>) (x) |pol>``."""
    v = np.zeros(4, dtype=complex)
    v[mode_index("L", pol)] = a_left
    v[mode_index("R", pol)] = a_right
    return v


def _particle_vectors(amps, pol1, pol2):
    if pol1 not in POLARIZATIONS or pol2 not in POLARIZATIONS:
        raise ValueError(f"polarizations must be H or V, got {pol1!r}, {pol2!r}")
    u = single_particle_vector(amps.l, amps.r, pol1)
    v = single_particle_vector(amps.l_p, amps.r_p, pol2)
    return u, v


def prepared_state(amps, pol1="H", pol2="V"):
    """No-label state ``|psi_D pol1, psi_D' pol2>`` over the occupation basis.

    Raises:
        NullStateError: fermions with equal polarization and identical
            (up to phase) spatial distributions.
    """
    u, v = _particle_vectors(amps, pol1, pol2)
    eta = amps.eta
    norm2 = 2.0 * (1.0 + eta * abs(np.vdot(u, v)) ** 2)
    if norm2 < 1e-24:
        raise NullStateError("symmetrized two-particle state vanishes")
    n = 1.0 / np.sqrt(norm2)
    amp = np.empty(len(PAIRS), dtype=complex)
    for k, (i, j) in enumerate(PAIRS):
        if i == j:
            amp[k] = n * (1 + eta) * u[i] * v[i]
        else:
            amp[k] = n * np.sqrt(2.0) * (u[i] * v[j] + eta * u[j] * v[i])
    return TwoPhotonPureState(amp, eta)


def indistinguishability(amps):
    """Entropic remote spatial indistinguishability of the two wave packets.

    Raises:
        UndefinedMeasureError: when neither L-R joint event is possible.
    """
    j1 = abs(amps.l * amps.r_p) ** 2
    j2 = abs(amps.l_p * amps.r) ** 2
    z = j1 + j2
    if z <= 0.0:
        raise UndefinedMeasureError("|l r'|^2 + |l' r|^2 = 0: no particle pair spans L and R")
    p1 = j1 / z
    p2 = 1.0 - p1
    return IndistinguishabilityReport(p1, p2, binary_entropy(p1))


def binary_entropy(p):
    """``-p log2 p - (1-p) log2 (1-p)`` with ``0 log 0 = 0``."""
    h = 0.0
    for q in (p, 1.0 - p):
        if q > 0.0:
            h -= q * np.log2(q)
    return float(h)


def slocc_project(state):
    """Keep the one-particle-per-region sector and renormalize."""
    sector = np.array([state.amplitudes[PAIRS.index(p)] for p in LR_PAIRS])
    prob = float(np.sum(np.abs(sector) ** 2))
    if prob <= 0.0:
        return SloccOutcome(None, 0.0)
    return SloccOutcome(fix_global_phase(sector / np.sqrt(prob)), prob)


def slocc_outcome(amps, pol1="H", pol2="V"):
    """sLOCC outcome of a prepared state, with its two which-path histories attached."""
    out = slocc_project(prepared_state(amps, pol1, pol2))
    direct = np.zeros(4, dtype=complex)
    exchange = np.zeros(4, dtype=complex)
    direct[LR_PAIRS.index((mode_index("L", pol1), mode_index("R", pol2)))] = amps.l * amps.r_p
    exchange[LR_PAIRS.index((mode_index("L", pol2), mode_index("R", pol1)))] = amps.eta * amps.r * amps.l_p
    return SloccOutcome(out.state, out.prob, direct, exchange)


def nolabel_overlap(bra, ket, eta):
    """Overlap of two no-label two-particle states.

    ``bra`` and ``ket`` are pairs of single-particle mode vectors (length 4).
    Computes ``<a1|b1><a2|b2> + eta <a1|b2><a2|b1>``.
    """
    (a1, a2), (b1, b2) = bra, ket
    return complex(np.vdot(a1, b1) * np.vdot(a2, b2) + eta * np.vdot(a1, b2) * np.vdot(a2, b1))


def oracle_project(amps, pol1="H", pol2="V"):
    """sLOCC outcome evaluated directly from no-label overlaps.

    Independent of :func:`prepared_state`: each operational amplitude is
    ``<L s, R t | psi_D pol1, psi_D' pol2>`` divided by the norm of the ket.
    """
    u, v = _particle_vectors(amps, pol1, pol2)
    norm2 = nolabel_overlap((u, v), (u, v), amps.eta).real
    if norm2 < 1e-24:
        raise NullStateError("symmetrized two-particle state vanishes")
    eye = np.eye(4)
    comps = np.array([
        nolabel_overlap((eye[i], eye[j]), (u, v), amps.eta) for i, j in LR_PAIRS
    ]) / np.sqrt(norm2)
    prob = float(np.sum(np.abs(comps) ** 2))
    if prob <= 0.0:
        return SloccOutcome(None, 0.0)
    return SloccOutcome(fix_global_phase(comps / np.sqrt(prob)), prob)
