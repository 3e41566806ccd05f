import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slocc_lab.particles import SpatialAmplitudes, slocc_outcome
from slocc_lab.qmath import SX, SY, SZ, projector, random_density
from slocc_lab.teleport import (
    BELL_STATES, CLASSICAL_LIMIT, CORRECTIONS, SIX_INPUTS, InputQubit, average_fidelity, bsm_project,
    calibrate_depolarization, classical_bound_check, corrected_state, depolarized_resource, teleport,
)
from conftest import PSI_PLUS

PI = np.pi
IDEAL = projector(PSI_PLUS)
TABLE = (0.900, 0.847, 0.831, 0.822, 0.843, 0.863)
MIXED = 0.5 * (projector([0, 1, 0, 0]) + projector([0, 0, 1, 0]))
PLUS = SIX_INPUTS[2]


def test_bsm_examples():
    prob, rho = bsm_project(PLUS, IDEAL, "Phi+")
    assert prob == pytest.approx(0.25)
    assert np.allclose(rho, projector(PLUS.vector))
    prob, rho = bsm_project(SIX_INPUTS[0], IDEAL, "Phi+")
    assert prob == pytest.approx(0.25)
    assert np.allclose(rho, np.diag([0, 1]))


def test_zero_probability_branch():
    # H at L' and H at L never overlap with Psi+
    prob, rho = bsm_project(SIX_INPUTS[0], projector([1, 0, 0, 0]), "Psi+")
    assert prob == 0.0 and rho is None


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_branch_probabilities_sum_to_one(seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    v /= np.linalg.norm(v)
    q = InputQubit(v[0], v[1])
    resource = random_density(4, rng)
    total = sum(bsm_project(q, resource, b)[0] for b in BELL_STATES)
    assert abs(total - 1.0) < 1e-12


@pytest.mark.parametrize("branch", list(BELL_STATES))
def test_correction_table(branch):
    for q in SIX_INPUTS:
        _, out = corrected_state(q, IDEAL, branch)
        assert np.real(q.vector.conj() @ out @ q.vector) == pytest.approx(1.0, abs=1e-12)


def test_phi_minus_correction_is_sigma_y_up_to_phase():
    assert np.allclose(CORRECTIONS["Phi-"], 1j * SY)
    assert np.allclose(CORRECTIONS["Phi+"], SX) and np.allclose(CORRECTIONS["Psi-"], SZ)


def test_ideal_six_inputs():
    for q in SIX_INPUTS:
        run = teleport(q, IDEAL)
        assert run.fidelity == pytest.approx(1.0, abs=1e-12)
        assert run.bell_outcome == "Phi+"


def test_input_normalization():
    with pytest.raises(ValueError):
        InputQubit(1, 1)


def test_end_to_end_success_probability():
    out = slocc_outcome(SpatialAmplitudes.from_angles(PI / 4, PI / 4))
    assert out.prob == pytest.approx(0.5)
    run = teleport(PLUS, out.density(), slocc_prob=out.prob)
    assert run.success_prob == pytest.approx(0.125)
    assert run.fidelity == pytest.approx(1.0)
    data = json.loads(run.to_json())
    assert data["branch"] == "Phi+" and data["probability"] == pytest.approx(0.25)


def test_fidelity_affine_in_v():
    for q in SIX_INPUTS:
        fs = [teleport(q, depolarized_resource(v)).fidelity for v in (0.0, 0.5, 1.0)]
        assert fs[1] == pytest.approx(0.5 * (fs[0] + fs[2]), abs=1e-12)
        assert fs == pytest.approx([0.5, 0.75, 1.0], abs=1e-12)


def test_calibration_matches_table_average():
    target = float(np.mean(TABLE))
    assert target == pytest.approx(0.851, abs=1e-12)
    v = calibrate_depolarization(target)
    assert v == pytest.approx(2 * target - 1, abs=1e-9)
    assert average_fidelity(depolarized_resource(v)) == pytest.approx(target, abs=1e-9)
    with pytest.raises(ValueError):
        calibrate_depolarization(0.2)


def test_classical_bound_examples():
    assert classical_bound_check(TABLE).all_above
    rep = classical_bound_check([2 / 3])
    assert rep.above == (False,)
    assert classical_bound_check([0.5]).above == (False,)
    rep = classical_bound_check([0.9, 0.7], errors=[0.02, 0.0])
    assert rep.margins_sigma[0] == pytest.approx((0.9 - CLASSICAL_LIMIT) / 0.02)
    assert rep.margins_sigma[1] == float("inf")
    with pytest.raises(ValueError):
        classical_bound_check([])


def test_distinguishable_resource_is_classical():
    outs = [corrected_state(q, MIXED, "Phi+")[1] for q in SIX_INPUTS[2:]]
    # equatorial inputs differ only in phase; the output does not see it
    for o in outs[1:]:
        assert np.allclose(o, outs[0], atol=1e-12)
    assert average_fidelity(MIXED) <= CLASSICAL_LIMIT + 1e-12
