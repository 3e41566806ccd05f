"""Conditional teleportation from L' to R over the sLOCC-distributed resource."""

import json
from dataclasses import dataclass

import numpy as np

from .metrics import density
from .metrics import fidelity as state_fidelity
from .qmath import I2, SX, SZ, dag, kron

SQ2 = np.sqrt(2.0)
BELL_STATES = {
    "Phi+": np.array([1, 0, 0, 1], complex) / SQ2,
    "Phi-": np.array([1, 0, 0, -1], complex) / SQ2,
    "Psi+": np.array([0, 1, 1, 0], complex) / SQ2,
    "Psi-": np.array([0, 1, -1, 0], complex) / SQ2,
}
#: Corrections at R making every branch faithful for a Psi+ resource.
CORRECTIONS = {"Phi+": SX, "Phi-": SZ @ SX, "Psi+": I2, "Psi-": SZ}
ACCEPTED_BRANCH = "Phi+"
CLASSICAL_LIMIT = 2.0 / 3.0


@dataclass(frozen=True)
class InputQubit:
    a: complex
    b: complex
    label: str = ""

    def __post_init__(self):
        n = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(n - 1.0) > 1e-12:
            raise ValueError(f"input qubit not normalized: {n!r}")

    @property
    def vector(self):
        return np.array([self.a, self.b], complex)


s = 1 / SQ2
#: The six eigenstates of the Pauli operators used as teleportation inputs.
SIX_INPUTS = (
    InputQubit(1, 0, "H"),
    InputQubit(0, 1, "V"),
    InputQubit(s, s, "+"),
    InputQubit(s, -s, "-"),
    InputQubit(s, -1j * s, "phi-"),
    InputQubit(s, 1j * s, "phi+"),
)
del s


@dataclass(frozen=True)
class TeleportRun:
    input: InputQubit
    resource: np.ndarray
    bell_outcome: str
    outcome_prob: float
    output: np.ndarray
    fidelity: float
    slocc_prob: float = 1.0

    @property
    def success_prob(self):
        """Joint probability of the sLOCC post-selection and the accepted BSM branch."""
        return self.slocc_prob * self.outcome_prob

    def to_json(self):
        from .tomography import matrix_to_json
        return json.dumps({
            "input": {"label": self.input.label,
                      "a": {"re": float(np.real(self.input.a)), "im": float(np.imag(self.input.a))},
                      "b": {"re": float(np.real(self.input.b)), "im": float(np.imag(self.input.b))}},
            "branch": self.bell_outcome,
            "probability": self.outcome_prob,
            "slocc_probability": self.slocc_prob,
            "output": matrix_to_json(self.output),
            "fidelity": self.fidelity,
        }, indent=2, sort_keys=True)


def bsm_project(qubit, resource, outcome):
    """Bell measurement on (L', L) and the conditional state left at R.

    Qubit order of the joint state is ``(L', L, R)``; the resource is a
    two-qubit state on ``(L, R)``.

    Returns:
        ``(prob, rho_R)`` with ``rho_R`` uncorrected and ``None`` if the
        branch has zero probability.
    """
    rho_lr = density(resource, dim=4)
    phi = qubit.vector
    joint = kron(np.outer(phi, phi.conj()), rho_lr)
    bell = BELL_STATES[outcome]
    proj = kron(np.outer(bell, bell.conj()), I2)
    post = proj @ joint @ proj
    prob = float(np.real(np.trace(post)))
    if prob <= 1e-15:
        return 0.0, None
    rho_r = np.einsum("iaib->ab", post.reshape(4, 2, 4, 2)) / prob
    return prob, 0.5 * (rho_r + dag(rho_r))


def corrected_state(qubit, resource, outcome, correction=None):
    prob, rho_r = bsm_project(qubit, resource, outcome)
    if rho_r is None:
        return prob, None
    u = CORRECTIONS[outcome] if correction is None else correction
    return prob, u @ rho_r @ dag(u)


def teleport(qubit, resource, slocc_prob=1.0):
    """Run the protocol on the accepted Phi+ branch with the sigma_x correction."""
    prob, out = corrected_state(qubit, resource, ACCEPTED_BRANCH)
    if out is None:
        raise ValueError("accepted Bell branch has zero probability")
    f = state_fidelity(out, qubit.vector)
    return TeleportRun(qubit, np.asarray(resource), ACCEPTED_BRANCH, prob, out, f, slocc_prob)


def depolarized_resource(v, bell="Psi+"):
    """``v |B><B| + (1 - v) I/4``."""
    b = BELL_STATES[bell]
    return v * np.outer(b, b.conj()) + (1.0 - v) * np.eye(4) / 4.0


def average_fidelity(resource, inputs=SIX_INPUTS):
    return float(np.mean([teleport(q, resource).fidelity for q in inputs]))


def calibrate_depolarization(target, inputs=SIX_INPUTS, tol=1e-12, max_iter=200):
    """Depolarization ``v`` whose six-input average fidelity equals ``target``.

    Bisection on ``[0, 1]``; the average fidelity is checked to increase
    monotonically on a coarse grid before bisecting.
    """
    grid = np.linspace(0.0, 1.0, 11)
    values = [average_fidelity(depolarized_resource(v), inputs) for v in grid]
    if np.any(np.diff(values) <= 0):
        raise RuntimeError("average fidelity is not monotonic in v")
    if not values[0] <= target <= values[-1]:
        raise ValueError(f"target {target} outside reachable range [{values[0]}, {values[-1]}]")
    lo, hi = 0.0, 1.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if average_fidelity(depolarized_resource(mid), inputs) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class BoundReport:
    fidelities: tuple
    above: tuple
    margins_sigma: tuple | None

    @property
    def all_above(self):
        return all(self.above)


def classical_bound_check(fidelities, errors=None):
    """Compare fidelities with the 2/3 limit reachable without entanglement."""
    if len(fidelities) == 0:
        raise ValueError("no fidelities given")
    f = tuple(float(x) for x in fidelities)
    above = tuple(x > CLASSICAL_LIMIT for x in f)
    margins = None
    if errors is not None:
        margins = tuple((x - CLASSICAL_LIMIT) / e if e > 0 else float("inf") for x, e in zip(f, errors))
    return BoundReport(f, above, margins)
