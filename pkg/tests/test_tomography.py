import math

import numpy as np
import pytest

from qmaps import linalg, maps
from qmaps.channels import (
    Dilation,
    fresh_environment_dilation,
    random_cptp_map,
    random_density_matrix,
    random_unitary,
    standard_channel,
    stinespring_dilate,
)
from qmaps.linalg import dagger, maximally_entangled
from qmaps.maps import check_cp, check_tp, identity_map, same_map, state_basis, to_bform
from qmaps.process_tensor import (
    apply_process_tensor,
    build_process_tensor,
    is_markov,
)
from qmaps.superchannel import identity_operation, random_control_operation
from qmaps.tomography import (
    ancilla_assisted,
    correlated_cnot_dilation,
    ncp_demo,
    operation_basis,
    reconstruct_map,
    reconstruct_process_tensor,
    simulate_sequence,
)

rng = np.random.default_rng(31415)

P0 = np.diag([1.0, 0.0]).astype(complex)
P1 = np.diag([0.0, 1.0]).astype(complex)
PLUS = 0.5 * np.ones((2, 2), dtype=complex)
PMINUS = np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=complex)
GOLDEN_MIN = (1 - math.sqrt(5)) / 2


def replacement_op(state):
    return standard_channel("measure_prepare", states=[state, state])


# ------------------------------------------------------------- operation basis

def test_operation_basis_structure():
    basis = operation_basis(2)
    assert len(basis.elements) == 16
    states = state_basis(2)
    # element (i=2, j=2) zero-based projects onto pi_0 and reprepares it
    op = basis.elements[2 * 4 + 2]
    np.testing.assert_allclose(op.bform, np.kron(states[2], states[2].T), atol=1e-12)
    for el in basis.elements:
        w, _ = linalg.herm_eig(el.bform)
        assert w[-1] >= -1e-12
        assert np.sum(w > 1e-10) == 1  # rank one
    # duals pair correctly
    for i, dual in enumerate(basis.duals):
        for j, el in enumerate(basis.elements):
            want = 1.0 if i == j else 0.0
            assert abs(np.trace(dagger(dual) @ el.bform) - want) < 1e-10


def test_operation_basis_well_conditioned():
    basis = operation_basis(2)
    stacked = np.column_stack([linalg.vec(el.bform) for el in basis.elements])
    s = linalg.svd(stacked).singular_values
    assert s[-1] > 1e-3 * s[0]


# ------------------------------------------------------------- simulation

def test_identity_sequence_trivial_dynamics():
    dil = Dilation(2, 2, np.kron(P0, PLUS), (np.eye(4, dtype=complex),))
    rec = simulate_sequence(dil, [identity_operation(2)], label="id")
    np.testing.assert_allclose(rec.output_state, P0, atol=1e-12)
    assert rec.success_probability == pytest.approx(1.0, abs=1e-12)
    assert rec.prepared == "id"


def test_cnot_demo_projective_preparation():
    from qmaps.superchannel import projection_instrument

    dil = correlated_cnot_dilation()
    rec = simulate_sequence(dil, [projection_instrument(np.array([1.0, 0.0]))])
    assert rec.success_probability == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_allclose(rec.output_state / rec.success_probability, P0, atol=1e-10)


def test_dual_path_oracle_against_process_tensor():
    for k in (1, 2):
        init = random_density_matrix(4, rng)
        dil = Dilation(2, 2, init, tuple(random_unitary(4, rng) for _ in range(k)))
        pt = build_process_tensor(dil)
        for _ in range(5):
            ops = [random_control_operation(2, rng) for _ in range(k)]
            rec = simulate_sequence(dil, ops)
            np.testing.assert_allclose(
                rec.output_state, apply_process_tensor(pt, ops), atol=1e-10
            )


def test_simulate_rejects_joint_sequences():
    from qmaps.process_tensor import OperationSequence

    dil = correlated_cnot_dilation()
    with pytest.raises(ValueError):
        simulate_sequence(dil, OperationSequence(joint=np.eye(4, dtype=complex)))


# ------------------------------------------------------------- channel tomography

def test_reconstruct_identity_channel():
    dil = stinespring_dilate(identity_map(2))
    basis = state_basis(2)
    records = [simulate_sequence(dil, [replacement_op(s)], label=str(i)) for i, s in enumerate(basis)]
    rec_map = reconstruct_map(records, basis)
    assert same_map(rec_map, identity_map(2), tol=1e-9)


def test_reconstruct_amplitude_damping():
    channel = standard_channel("amplitude_damping", gamma=0.37)
    dil = stinespring_dilate(channel)
    basis = state_basis(2)
    records = [simulate_sequence(dil, [replacement_op(s)]) for s in basis]
    rec_map = reconstruct_map(records, basis)
    assert same_map(rec_map, channel, tol=1e-10)


def test_reconstruction_soundness_random_channels():
    for _ in range(5):
        channel = random_cptp_map(2, rng)
        dil = stinespring_dilate(channel)
        basis = state_basis(2)
        records = [simulate_sequence(dil, [replacement_op(s)]) for s in basis]
        rec_map = reconstruct_map(records, basis)
        assert check_cp(rec_map)[0]
        assert check_tp(rec_map)[0]
        assert same_map(rec_map, channel, tol=1e-9)


def test_reconstruct_map_needs_matching_lengths():
    with pytest.raises(ValueError):
        reconstruct_map([], state_basis(2))


# ------------------------------------------------------------- ancilla assisted

def test_ancilla_assisted_identity():
    got = ancilla_assisted(stinespring_dilate(identity_map(2)))
    np.testing.assert_allclose(got.rep.matrix, maximally_entangled(2), atol=1e-10)


def test_ancilla_assisted_depolarizing():
    got = ancilla_assisted(stinespring_dilate(standard_channel("depolarizing", p=1.0)))
    np.testing.assert_allclose(got.rep.matrix, np.eye(4) / 2, atol=1e-10)


def test_ancilla_assisted_random_round_trip():
    for _ in range(5):
        channel = random_cptp_map(2, rng)
        got = ancilla_assisted(stinespring_dilate(channel))
        np.testing.assert_allclose(got.rep.matrix, to_bform(channel).matrix, atol=1e-10)


def test_ancilla_assisted_rejects_correlated_state():
    with pytest.raises(ValueError):
        ancilla_assisted(correlated_cnot_dilation())


# ------------------------------------------------------------- process tomography

def test_reconstruct_process_tensor_trivial_k1():
    dil = Dilation(2, 2, np.kron(P0, P0), (np.eye(4, dtype=complex),))
    direct = build_process_tensor(dil)
    recon = reconstruct_process_tensor(dil)
    np.testing.assert_allclose(recon.choi, direct.choi, atol=1e-9)


def test_reconstruct_process_tensor_fresh_k2():
    dil = fresh_environment_dilation(
        [random_unitary(4, rng) for _ in range(2)],
        [random_density_matrix(2, rng) for _ in range(2)],
        random_density_matrix(2, rng),
        2,
    )
    direct = build_process_tensor(dil)
    recon = reconstruct_process_tensor(dil)
    assert linalg.frobenius(recon.choi - direct.choi) < 1e-8
    assert is_markov(recon, tol=1e-8)


def test_reconstruction_basis_independent():
    alt_states = [P0, P1, PLUS, np.array([[0.5, -0.5j], [0.5j, 0.5]], dtype=complex)]
    dil = Dilation(2, 2, random_density_matrix(4, rng), (random_unitary(4, rng),))
    a = reconstruct_process_tensor(dil, operation_basis(2))
    b = reconstruct_process_tensor(dil, operation_basis(2, states=alt_states))
    assert linalg.frobenius(a.choi - b.choi) < 1e-8


# ------------------------------------------------------------- NCP demonstration

def test_ncp_demo_paper_values():
    report = ncp_demo(1.0, 1.0)
    outs = report["true_outputs"]
    np.testing.assert_allclose(outs["0"], P0, atol=1e-10)
    np.testing.assert_allclose(outs["1"], P0, atol=1e-10)
    np.testing.assert_allclose(outs["+"], PLUS, atol=1e-10)
    np.testing.assert_allclose(outs["-"], PMINUS, atol=1e-10)
    # linear prediction for the minus state: 2 pi_0 - pi_+
    np.testing.assert_allclose(report["predicted_pi_minus"], 2 * P0 - PLUS, atol=1e-9)
    assert report["predicted_pi_minus_min_eig"] == pytest.approx(GOLDEN_MIN, abs=1e-9)
    assert not report["verdicts"]["cp"]
    assert report["verdicts"]["hp"]
    assert report["verdicts"]["min_choi_eig"] < -0.5
    # the superchannel for the same process is fine
    assert report["verdicts"]["superchannel_cp"]
    assert report["verdicts"]["superchannel_min_eig"] >= -1e-9
    sc_minus = report["superchannel_pi_minus_output"]
    assert np.trace(sc_minus).real == pytest.approx(0.5, abs=1e-10)
    np.testing.assert_allclose(sc_minus / np.trace(sc_minus).real, PMINUS, atol=1e-9)


def test_ncp_demo_preparation_dependence():
    report = ncp_demo(1.0, 1.0)
    cond = report["conditional_env_states"]
    np.testing.assert_allclose(cond["0"], P0, atol=1e-12)
    np.testing.assert_allclose(cond["1"], P1, atol=1e-12)
    overlap = np.trace(cond["0"] @ cond["1"]).real
    assert abs(overlap) < 1e-12


def test_ncp_demo_min_choi_eig_pinned():
    # oracle: reconstruct the same linear map with plain numpy and diagonalise
    report = ncp_demo(1.0, 1.0)
    basis = [P0, P1, PLUS, np.array([[0.5, -0.5j], [0.5j, 0.5]], dtype=complex)]
    outs = [report["true_outputs"][t] for t in ("0", "1", "+", "y+")]
    stacked = np.column_stack([b.reshape(-1) for b in basis])
    duals = np.linalg.inv(stacked).conj().T
    choi = sum(np.kron(o, duals[:, i].reshape(2, 2).conj()) for i, o in enumerate(outs))
    w = np.linalg.eigvalsh(choi)
    assert report["verdicts"]["min_choi_eig"] == pytest.approx(w[0], abs=1e-10)
    assert w[0] == pytest.approx(-math.sqrt(3) / 2, abs=1e-9)


def test_ncp_demo_rotate_variant_differs():
    proj = ncp_demo(1.0, 1.0, preparation="projective")
    rot = ncp_demo(1.0, 1.0, preparation="rotate")
    # deterministic preparations: unit success probability everywhere
    assert all(r.success_probability == pytest.approx(1.0, abs=1e-9) for r in rot["records"])
    # the averaged environment washes out the correlation signature here
    diff = linalg.frobenius(
        maps.to_bform(rot["reconstruction"]).matrix - maps.to_bform(proj["reconstruction"]).matrix
    )
    assert diff > 0.1


def test_ncp_demo_rejects_bad_normalisation():
    with pytest.raises(ValueError):
        ncp_demo(1.0, 0.5)
    with pytest.raises(ValueError):
        ncp_demo(1.0, 1.0, preparation="sideways")


def test_ncp_demo_unbalanced_weights_still_give_cp_superchannel():
    report = ncp_demo(math.sqrt(1.5), math.sqrt(0.5))
    assert report["verdicts"]["superchannel_cp"]
