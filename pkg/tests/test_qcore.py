import numpy as np
import pytest

from quantum.qcore import (
    InvalidInputError,
    NumericalGuardError,
    OperatorMatrix,
    PovmKind,
    PovmSet,
    RngStream,
    StateVector,
    StepTooLarge,
    check_povm,
    embed,
    evolve_step,
    expectation,
    random_state,
    tensor,
)


# ---------- StateVector / OperatorMatrix ----------
def test_state_vector_rejects_nan_and_label_mismatch():
    with pytest.raises(InvalidInputError):
        StateVector(np.array([1.0, np.nan]))
    with pytest.raises(InvalidInputError):
        StateVector(np.array([1.0, 0.0]), ("h",))
    with pytest.raises(InvalidInputError):
        StateVector(np.zeros((2, 2)))


def test_normalize_keeps_direction_and_refuses_zero():
    psi = StateVector.from_coefficients([3.0, 4.0j]).normalize()
    assert psi.is_normalized()
    assert np.allclose(psi.probabilities(), [0.36, 0.64])
    with pytest.raises(InvalidInputError):
        StateVector(np.zeros(3)).normalize()


def test_amplitudes_are_read_only():
    psi = StateVector.basis(2, 0)
    with pytest.raises(ValueError):
        psi.amplitudes[0] = 0.0


def test_operator_flagged_hermitian_is_checked():
    with pytest.raises(InvalidInputError):
        OperatorMatrix(np.array([[0.0, 1.0], [0.0, 0.0]]), hermitian=True)
    with pytest.raises(InvalidInputError):
        OperatorMatrix(np.ones((2, 3)))
    sigma_y = OperatorMatrix(np.array([[0.0, -1j], [1j, 0.0]]), hermitian=True)
    assert sigma_y.dim == 2


def test_invalid_input_is_a_value_error():
    assert issubclass(InvalidInputError, ValueError)
    assert StepTooLarge("x", p=2.0).guard == "step_too_large"
    assert isinstance(StepTooLarge("x"), NumericalGuardError)


# ---------- Unitary stepping ----------
def test_evolve_step_preserves_norm(hermitian3):
    psi = random_state(3, np.random.default_rng(1))
    out = evolve_step(hermitian3, psi, 0.37)
    assert abs(out.norm() - 1.0) < 1e-12


def test_evolve_step_zero_dt_and_inverse(hermitian3):
    psi = random_state(3, np.random.default_rng(2))
    assert evolve_step(hermitian3, psi, 0.0) is psi
    back = evolve_step(hermitian3, evolve_step(hermitian3, psi, 0.8), -0.8)
    assert np.allclose(back.amplitudes, psi.amplitudes, atol=1e-12)


def test_evolve_step_matches_rabi_oscillation():
    sigma_x = OperatorMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]), hermitian=True)
    t = 0.3
    out = evolve_step(sigma_x, StateVector.basis(2, 0), t)
    assert np.allclose(out.amplitudes, [np.cos(t), -1j * np.sin(t)], atol=1e-12)


def test_evolve_step_rejects_bad_arguments(hermitian3):
    with pytest.raises(InvalidInputError):
        evolve_step(hermitian3, StateVector.basis(2, 0), 0.1)
    with pytest.raises(InvalidInputError):
        evolve_step(hermitian3, StateVector.basis(3, 0), np.inf)


def test_embed_acts_on_one_factor():
    sigma_z = np.diag([1.0, -1.0])
    lifted = embed(sigma_z, 1, (3, 2))
    assert lifted.shape == (6, 6)
    state = tensor(np.array([0.0, 1.0, 0.0]), np.array([0.0, 1.0]))
    assert np.isclose(np.vdot(state, lifted @ state).real, -1.0)
    with pytest.raises(InvalidInputError):
        embed(sigma_z, 0, (3, 2))


def test_expectation_of_projector():
    psi = StateVector.from_coefficients([0.6, 0.8])
    proj = OperatorMatrix.projector(StateVector.basis(2, 1))
    assert np.isclose(expectation(proj, psi).real, 0.64)


# ---------- POVM validation ----------
def test_projective_pair_passes_and_commutes():
    report = check_povm(PovmSet.from_arrays([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]))
    assert report.passed
    assert report.is_projective
    assert report.max_commutator == 0.0


def test_incomplete_set_is_reported_not_raised():
    report = check_povm(PovmSet.from_arrays([np.diag([1.0, 0.0]), np.diag([0.0, 0.5])]))
    assert not report.is_complete
    assert report.completeness_residual == pytest.approx(0.5)
    assert not report.passed


def test_negative_effect_is_flagged():
    report = check_povm(PovmSet.from_arrays([np.diag([1.2, 0.0]), np.diag([-0.2, 1.0])]))
    assert report.is_complete
    assert report.positivity_violations == [1]


def test_kraus_effects_are_omega_dagger_omega():
    eps = 0.3
    keep = np.sqrt(1 - eps ** 2)
    povm = PovmSet.from_arrays([np.diag([keep, eps]), np.diag([eps, keep])], PovmKind.KRAUS)
    report = check_povm(povm)
    assert report.passed
    assert not report.is_projective
    assert np.allclose(povm.effects()[0], np.diag([1 - eps ** 2, eps ** 2]))


def test_povm_rejects_mixed_dimensions():
    with pytest.raises(InvalidInputError):
        PovmSet.from_arrays([np.eye(2), np.eye(3)])


# ---------- Random streams ----------
def test_streams_are_reproducible():
    a = RngStream(42, 3).uniforms(5)
    b = RngStream(42, 3).uniforms(5)
    assert np.array_equal(a, b)


def test_streams_differ_by_id_and_child():
    base = RngStream(42, 0)
    assert not np.array_equal(RngStream(42, 1).uniforms(4), RngStream(42, 0).uniforms(4))
    assert not np.array_equal(base.child(0).uniforms(4), base.child(1).uniforms(4))
    assert [s.stream_id for s in RngStream.family(42, 3, offset=5)] == [5, 6, 7]


def test_stream_accepts_full_64_bit_seed():
    stream = RngStream(2 ** 64 - 1, 0)
    assert 0.0 <= stream.uniform() < 1.0
    with pytest.raises(InvalidInputError):
        RngStream(1, -1)
