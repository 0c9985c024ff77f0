import math

import numpy as np
import pytest

from qmaps import linalg
from qmaps.channels import (
    Dilation,
    channel_from_dilation,
    fresh_environment_dilation,
    random_density_matrix,
    random_unitary,
)
from qmaps.linalg import dagger, kron_all, partial_trace, swap_gate, vec
from qmaps.maps import apply_map, check_cp, check_tp, to_bform
from qmaps.process_tensor import (
    OperationSequence,
    ProcessTensor,
    ResourceLimitError,
    aform,
    apply_process_tensor,
    bform,
    build_process_tensor,
    chi_decomposition,
    initial_state,
    is_markov,
    markov_product,
    non_markovianity,
    step_map,
    surprise,
)
from qmaps.superchannel import identity_operation, random_control_operation

rng = np.random.default_rng(1905)

P0 = np.diag([1.0, 0.0]).astype(complex)


def kraus_bform(ks):
    return sum(np.outer(vec(k), vec(k).conj()) for k in ks)


def op_kraus(op):
    """Kraus operators of a CP operation's B form, for the stepping oracle."""
    w, v = np.linalg.eigh(op.bform if hasattr(op, "bform") else op)
    d = round(math.isqrt(v.shape[0]))
    return [np.sqrt(max(lam, 0.0)) * v[:, i].reshape(d, d) for i, lam in enumerate(w) if lam > 1e-12]


def simulate_steps(dilation, ops):
    """Independent oracle: exact density-matrix stepping with numpy only."""
    d_s, d_e = dilation.d_s, dilation.d_e
    rho = dilation.initial_se.copy()
    for u, op in zip(dilation.unitaries, ops):
        rho = sum(
            np.kron(k, np.eye(d_e)) @ rho @ np.kron(k, np.eye(d_e)).conj().T
            for k in op_kraus(op)
        )
        rho = u @ rho @ u.conj().T
    return partial_trace(rho, [d_s, d_e], [0])


def random_dilation(k, d_s=2, d_e=2, product=False, seed_rng=rng):
    if product:
        init = np.kron(random_density_matrix(d_s, seed_rng), random_density_matrix(d_e, seed_rng))
    else:
        init = random_density_matrix(d_s * d_e, seed_rng)
    return Dilation(d_s, d_e, init, tuple(random_unitary(d_s * d_e, seed_rng) for _ in range(k)))


def random_fresh(k, d_e_step=2, seed_rng=rng):
    return fresh_environment_dilation(
        [random_unitary(2 * d_e_step, seed_rng) for _ in range(k)],
        [random_density_matrix(d_e_step, seed_rng) for _ in range(k)],
        random_density_matrix(2, seed_rng),
        d_e_step,
    )


def swap_dilation(k=2):
    return Dilation(2, 2, np.kron(P0, P0), tuple(swap_gate(2) for _ in range(k)))


# ------------------------------------------------------------- construction

def test_build_reduces_to_expected_on_trivial_dynamics():
    dil = Dilation(2, 2, np.kron(P0, P0), (np.eye(4, dtype=complex),))
    pt = build_process_tensor(dil)
    op = random_control_operation(2, rng)
    out = apply_process_tensor(pt, [op])
    want = sum(k @ P0 @ dagger(k) for k in op_kraus(op))
    np.testing.assert_allclose(out, want, atol=1e-12)


def test_fresh_environment_choi_factorizes():
    us = [random_unitary(4, rng) for _ in range(2)]
    taus = [random_density_matrix(2, rng) for _ in range(2)]
    rho0 = random_density_matrix(2, rng)
    pt = build_process_tensor(fresh_environment_dilation(us, taus, rho0, 2))
    steps = [to_bform(channel_from_dilation(t, u)).matrix for u, t in zip(us, taus)]
    want = kron_all([steps[1], steps[0], rho0])
    np.testing.assert_allclose(pt.choi, want, atol=1e-9)


def test_swap_process_does_not_factorize():
    pt = build_process_tensor(swap_dilation())
    mkv = markov_product(pt)
    assert linalg.frobenius(pt.choi - mkv.choi) > 0.5
    assert non_markovianity(pt) > 0.1


def test_choi_trace_and_positivity():
    for k in (1, 2):
        pt = build_process_tensor(random_dilation(k))
        assert np.trace(pt.choi).real == pytest.approx(2.0**k, abs=1e-9)
        w, _ = linalg.herm_eig(pt.choi)
        assert w[-1] >= -1e-9


def test_leg_order_string():
    pt = build_process_tensor(random_dilation(2))
    assert pt.leg_order == "out_2,in_1,out_1,in_0,out_0"


def test_resource_bound():
    with pytest.raises(ResourceLimitError):
        build_process_tensor(random_dilation(4))
    with pytest.raises(ResourceLimitError):
        ProcessTensor(2, 3, np.eye(3**5, dtype=complex))


# ------------------------------------------------------------- contraction

def test_identity_sequence_gives_free_evolution():
    dil = random_dilation(2)
    pt = build_process_tensor(dil)
    out = apply_process_tensor(pt, [identity_operation(2)] * 2)
    rho = dil.initial_se.copy()
    for u in dil.unitaries:
        rho = u @ rho @ dagger(u)
    np.testing.assert_allclose(out, partial_trace(rho, [2, 2], [0]), atol=1e-10)


def test_contraction_matches_stepwise_simulation():
    for k in (1, 2, 3):
        dil = random_dilation(k, d_e=2)
        pt = build_process_tensor(dil)
        ops = [random_control_operation(2, rng) for _ in range(k)]
        got = apply_process_tensor(pt, ops)
        want = simulate_steps(dil, ops)
        np.testing.assert_allclose(got, want, atol=1e-10)


def test_markov_tensor_contracts_to_channel_chain():
    dil = random_fresh(2)
    pt = build_process_tensor(dil)
    ops = [random_control_operation(2, rng) for _ in range(2)]
    got = apply_process_tensor(pt, ops)
    rho = initial_state(pt)
    for j, op in enumerate(ops):
        rho = sum(k @ rho @ dagger(k) for k in op_kraus(op))
        rho = apply_map(step_map(pt, j + 1), rho)
    np.testing.assert_allclose(got, rho, atol=1e-9)


def test_tp_sequences_give_unit_trace():
    pt = build_process_tensor(random_dilation(2))
    for _ in range(5):
        ops = [random_control_operation(2, rng, "tp") for _ in range(2)]
        out = apply_process_tensor(pt, ops)
        assert np.trace(out).real == pytest.approx(1.0, abs=1e-9)
        w, _ = linalg.herm_eig(out)
        assert w[-1] >= -1e-9


def test_classically_correlated_sequence():
    # measure in the z basis at step 0, apply X at step 1 only on outcome 1
    dil = random_dilation(2)
    pt = build_process_tensor(dil)
    x_gate = np.array([[0, 1], [1, 0]], dtype=complex)
    branches = [
        ([P0], [np.eye(2, dtype=complex)]),
        ([np.diag([0.0, 1.0]).astype(complex)], [x_gate]),
    ]
    joint = sum(
        np.kron(kraus_bform(step1), kraus_bform(step0)) for step0, step1 in branches
    )
    got = apply_process_tensor(pt, OperationSequence(joint=joint))
    want = sum(
        simulate_steps(dil, [kraus_bform(s0), kraus_bform(s1)]) for s0, s1 in branches
    )
    np.testing.assert_allclose(got, want, atol=1e-10)
    w, _ = linalg.herm_eig(got)
    assert w[-1] >= -1e-9


def test_entangled_ancilla_sequence():
    # two-step instrument: unitaries V0, V1 on system + ancilla qubit
    dil = random_dilation(2)
    pt = build_process_tensor(dil)
    v0, v1 = random_unitary(4, rng), random_unitary(4, rng)
    # joint B form legs (in_1, out_1, in_0, out_0); ancilla starts in |0>,
    # threads from V0 into V1 and is discarded at the end
    t0 = v0.reshape(2, 2, 2, 2)[:, :, :, 0]         # (i0, a1, o0)
    t1 = v1.reshape(2, 2, 2, 2)                     # (i1, a2, o1, a1)
    comb = np.einsum("IAOb,ibo->AIOio", t1, t0)     # (a2, i1, o1, i0, o0)
    mats = comb.reshape(2, 16)
    joint = sum(np.outer(mats[a], mats[a].conj()) for a in range(2))
    got = apply_process_tensor(pt, OperationSequence(joint=joint))
    # oracle: explicit (s, e, ancilla) circuit
    anc0 = np.zeros((2, 2), dtype=complex)
    anc0[0, 0] = 1.0
    rho = kron_all([dil.initial_se, anc0])      # (s, e, a)
    dims = [2, 2, 2]
    v0_full = linalg.permute_subsystems(np.kron(v0, np.eye(2)), [2, 2, 2], [0, 2, 1])
    v1_full = linalg.permute_subsystems(np.kron(v1, np.eye(2)), [2, 2, 2], [0, 2, 1])
    u1 = np.kron(dil.unitaries[0], np.eye(2, dtype=complex))
    u2 = np.kron(dil.unitaries[1], np.eye(2, dtype=complex))
    rho = v0_full @ rho @ dagger(v0_full)
    rho = u1 @ rho @ dagger(u1)
    rho = v1_full @ rho @ dagger(v1_full)
    rho = u2 @ rho @ dagger(u2)
    want = partial_trace(rho, dims, [0])
    np.testing.assert_allclose(got, want, atol=1e-10)


# ------------------------------------------------------------- forms

def test_aform_bform_relation():
    pt = build_process_tensor(random_dilation(2))
    np.testing.assert_allclose(linalg.reshuffle(aform(pt), 2, 16), bform(pt), atol=1e-10)
    ops = [random_control_operation(2, rng) for _ in range(2)]
    joint = kron_all([ops[1].bform, ops[0].bform])
    out = apply_process_tensor(pt, ops)
    np.testing.assert_allclose(aform(pt) @ vec(joint), vec(out), atol=1e-10)


# ------------------------------------------------------------- marginals

def test_step_maps_of_fresh_dilation_match_channels():
    us = [random_unitary(4, rng) for _ in range(2)]
    taus = [random_density_matrix(2, rng) for _ in range(2)]
    rho0 = random_density_matrix(2, rng)
    pt = build_process_tensor(fresh_environment_dilation(us, taus, rho0, 2))
    for j in (1, 2):
        want = to_bform(channel_from_dilation(taus[j - 1], us[j - 1])).matrix
        np.testing.assert_allclose(step_map(pt, j).rep.matrix, want, atol=1e-9)
    np.testing.assert_allclose(initial_state(pt), rho0, atol=1e-10)


def test_step_maps_are_cptp():
    pt = build_process_tensor(random_dilation(2))
    for j in (1, 2):
        m = step_map(pt, j)
        assert check_tp(m)[0]
        assert check_cp(m)[0]
    with pytest.raises(ValueError):
        step_map(pt, 3)


def test_initial_state_is_reduced_state():
    dil = random_dilation(2)
    pt = build_process_tensor(dil)
    np.testing.assert_allclose(
        initial_state(pt), partial_trace(dil.initial_se, [2, 2], [0]), atol=1e-10
    )


def test_markov_product_idempotent():
    pt = build_process_tensor(random_fresh(2))
    mkv = markov_product(pt)
    np.testing.assert_allclose(mkv.choi, pt.choi, atol=1e-9)
    again = markov_product(mkv)
    np.testing.assert_allclose(again.choi, mkv.choi, atol=1e-9)
    # k=1: always the product of its own step map and initial state
    pt1 = build_process_tensor(random_dilation(1))
    mkv1 = markov_product(pt1)
    want = np.kron(step_map(pt1, 1).rep.matrix, initial_state(pt1))
    np.testing.assert_allclose(mkv1.choi, want, atol=1e-10)


# ------------------------------------------------------------- correlations

def test_chi_vanishes_for_markov_process():
    pt = build_process_tensor(random_fresh(2))
    for term in chi_decomposition(pt):
        if len(term.slots) >= 2:
            assert term.norm < 1e-9, term.slots


def test_chi_detects_swap_correlations():
    pt = build_process_tensor(swap_dilation())
    pair_norms = {t.slots: t.norm for t in chi_decomposition(pt) if len(t.slots) == 2}
    assert max(pair_norms.values()) > 0.1


def test_chi_single_slot_terms_are_marginals():
    pt = build_process_tensor(random_dilation(2))
    terms = {t.slots: t.matrix for t in chi_decomposition(pt, order=1)}
    np.testing.assert_allclose(terms[(0,)], initial_state(pt), atol=1e-10)
    np.testing.assert_allclose(terms[(1,)], step_map(pt, 1).rep.matrix, atol=1e-10)
    np.testing.assert_allclose(terms[(2,)], step_map(pt, 2).rep.matrix, atol=1e-10)


def test_chi_terms_traceless_per_slot():
    pt = build_process_tensor(random_dilation(2))
    for term in chi_decomposition(pt):
        if len(term.slots) < 2:
            continue
        dims = []
        for j in sorted(term.slots, reverse=True):
            dims.extend([2] * len(pt.slot_legs(j)))
        pos = 0
        for j in sorted(term.slots, reverse=True):
            width = len(pt.slot_legs(j))
            keep = [i for i in range(len(dims)) if not pos <= i < pos + width]
            reduced = partial_trace(term.matrix, dims, keep)
            assert linalg.frobenius(reduced) < 1e-9, (term.slots, j)
            pos += width


def test_chi_expansion_reconstructs_choi_at_k2():
    pt = build_process_tensor(random_dilation(2))
    terms = {t.slots: t.matrix for t in chi_decomposition(pt)}
    marginals = {j: terms[(j,)] for j in (0, 1, 2)}
    total = kron_all([marginals[2], marginals[1], marginals[0]])
    for slots, chi in terms.items():
        if len(slots) < 2:
            continue
        blocks = []
        covered = set(slots)
        blocks.append((slots, chi))
        for j in (2, 1, 0):
            if j not in covered:
                blocks.append(((j,), marginals[j]))
        legs = []
        for s, _ in blocks:
            for j in sorted(s, reverse=True):
                legs.extend(pt.slot_legs(j))
        embedded = linalg.permute_subsystems(
            kron_all([m for _, m in blocks]), [2] * len(legs), list(np.argsort(legs))
        )
        total = total + embedded
    np.testing.assert_allclose(total, pt.choi, atol=1e-9)


def test_chi_order_bounds():
    pt = build_process_tensor(random_dilation(1))
    with pytest.raises(ValueError):
        chi_decomposition(pt, order=3)


# ------------------------------------------------------------- non-Markovianity

def test_markov_zero_for_fresh_dilations():
    for k in (2, 3):
        pt = build_process_tensor(random_fresh(k))
        assert non_markovianity(pt, "trace") < 1e-9
        assert non_markovianity(pt, "relative_entropy") < 1e-9
        assert is_markov(pt, tol=1e-8)


def test_swap_process_pinned_values():
    pt = build_process_tensor(swap_dilation())
    n_trace = non_markovianity(pt, "trace")
    assert n_trace > 0.1
    assert n_trace == pytest.approx(0.75, abs=1e-10)
    assert non_markovianity(pt, "relative_entropy") == pytest.approx(2 * math.log(2), abs=1e-9)
    assert not is_markov(pt, tol=1e-8)


def test_identity_dynamics_is_markov():
    dil = Dilation(2, 2, np.kron(P0, P0), (np.eye(4, dtype=complex),) * 2)
    assert is_markov(build_process_tensor(dil), tol=1e-8)


def test_chi_iff_markov_on_ensemble():
    for make, markov in ((lambda: random_fresh(2), True), (swap_dilation, False)):
        pt = build_process_tensor(make())
        nm = non_markovianity(pt, "trace")
        high = max(t.norm for t in chi_decomposition(pt) if len(t.slots) >= 2)
        if markov:
            assert nm < 1e-9 and high < 1e-8
        else:
            assert nm > 1e-9 and high > 1e-8


def test_surprise():
    assert surprise(5, 0.0) == 1.0
    assert surprise(1, math.log(2)) == 0.5
    assert surprise(10, 0.1) == pytest.approx(math.exp(-1.0), abs=1e-15)
    with pytest.raises(ValueError):
        surprise(0, 0.1)
    with pytest.raises(ValueError):
        surprise(1, -0.1)


def test_distance_name_validation():
    pt = build_process_tensor(random_dilation(1))
    with pytest.raises(ValueError):
        non_markovianity(pt, "fidelity")


# ------------------------------------------------------------- causality

@pytest.mark.parametrize("k,d_e", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_containment(k, d_e):
    dil = random_dilation(k, d_e=d_e)
    pt = build_process_tensor(dil)
    reduced = partial_trace(pt.choi, pt.leg_dims, list(range(1, 2 * k + 1)))
    truncated = build_process_tensor(
        Dilation(dil.d_s, dil.d_e, dil.initial_se, dil.unitaries[:-1])
    )
    want = np.kron(np.eye(2, dtype=complex), truncated.choi)
    np.testing.assert_allclose(reduced, want, atol=1e-9)
