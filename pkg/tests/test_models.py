import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import CNOT_PERM, basis_permutation, cnot_branch, cnot_nonselective, kron_loops
from simulmeas.catalog import (
    cnot_model,
    default_correspondence,
    embed_local_model,
    identity_model,
    plus_state,
    random_measurement_model,
    random_observable,
    sigma_x,
    sigma_z,
    singlet,
    swap_model,
)
from simulmeas.errors import (
    InvalidOperatorError,
    LocalityError,
    NotAMeasurementError,
    OwnershipError,
    PreconditionError,
)
from simulmeas.instruments import (
    choi_matrix,
    cp_check,
    dl_axioms_check,
    luders_instrument,
    measure_and_reset_instrument,
    theorem2_check,
)
from simulmeas.linalg import (
    CNOT,
    I2,
    SX,
    SZ,
    dag,
    ket,
    op_norm,
    projector,
    random_density,
    random_operator,
    tensor,
)
from simulmeas.models import (
    Bipartition,
    MeasurementModel,
    OutcomeCorrespondence,
    heisenberg_image,
    induced_instrument,
    joint_prob_consecutive,
    joint_prob_local_pair,
    locality_check,
    measures_observable_check,
    nondisturbance_check,
    nondisturbance_residual,
    nondisturbance_with_evolution,
    nonselective_change,
    pure_ancilla_condition,
    pure_ancilla_residual,
    theorem1_verify,
)
from simulmeas.observables import Observable, born_probability, spectral_projector

seeds = st.integers(min_value=0, max_value=2**31)
KET0 = np.diag([1.0, 0.0]).astype(complex)
KET1 = np.diag([0.0, 1.0]).astype(complex)


def cnot():
    m = cnot_model()
    return m, default_correspondence(m)


def controlled_shift_model(b: Observable) -> MeasurementModel:
    """Generalized CNOT: sum_j Q_j (x) S^j with Q_j the eigenprojectors of b.

    It measures b and commutes with every E^B(s) (x) I by construction.
    """
    n = len(b.spectrum)
    shift = np.roll(np.eye(n), 1, axis=0)
    u = sum(tensor(q, np.linalg.matrix_power(shift, j)) for j, q in enumerate(b.projectors))
    meter = Observable(np.diag(b.spectrum))
    return MeasurementModel(projector(ket(0, n)), u, meter, b, name="shift")


# -- oracle agreement ---------------------------------------------------------

def test_cnot_state_changes_match_oracle():
    m, _ = cnot()
    for rho in (KET0, plus_state(), random_density(2, 3)):
        oracle = np.array(cnot_nonselective(rho.tolist()))
        assert np.allclose(nonselective_change(m, rho), oracle, atol=1e-14)
    assert np.allclose(nonselective_change(m, KET0), KET0)
    assert np.allclose(nonselective_change(m, plus_state()), np.eye(2) / 2)


def test_cnot_matrix_is_the_oracle_permutation():
    assert np.array_equal(CNOT, np.array(basis_permutation(CNOT_PERM, 4)).real)


def test_identity_model_leaves_state_unchanged():
    m = identity_model(sigma_z(), sigma_z())
    rho = random_density(2, 8)
    assert np.allclose(nonselective_change(m, rho), rho)


def test_heisenberg_examples():
    m, _ = cnot()
    assert np.allclose(heisenberg_image(m, np.eye(2)), np.eye(2))
    assert np.allclose(heisenberg_image(m, SZ), SZ)
    assert np.allclose(heisenberg_image(m, SX), 0)


def test_non_unitary_coupling_is_rejected():
    with pytest.raises(InvalidOperatorError, match="bad"):
        MeasurementModel(KET0, 2 * np.eye(4), sigma_z(), sigma_z(), name="bad")


# -- induced instruments --------------------------------------------------------

def test_cnot_induces_luders_z():
    m, corr = cnot()
    t = induced_instrument(m, corr)
    ref = luders_instrument(m.measured)
    for got, want in zip(t.branches, ref.branches):
        assert op_norm(choi_matrix(got).matrix - choi_matrix(want).matrix) <= 1e-10
    for k, v in enumerate(m.measured.spectrum):
        branch = np.array(cnot_branch(plus_state().tolist(), 0 if v > 0 else 1))
        assert np.allclose(t.branches[k].apply(plus_state()), branch, atol=1e-14)


def test_swap_induces_measure_and_reset():
    for a in (sigma_x(), random_observable(3, 6)):
        m = swap_model(a)
        t = induced_instrument(m, default_correspondence(m))
        ref = measure_and_reset_instrument(a)
        for got, want in zip(t.branches, ref.branches):
            assert op_norm(choi_matrix(got).matrix - choi_matrix(want).matrix) <= 1e-10


def test_identity_coupling_is_not_a_measurement():
    m = identity_model(sigma_z(), sigma_z())
    with pytest.raises(NotAMeasurementError):
        induced_instrument(m, default_correspondence(m))


def test_measures_observable_examples():
    m, corr = cnot()
    assert measures_observable_check(m, corr)
    swapped = OutcomeCorrespondence.from_values(m.measured, m.meter, {1.0: -1.0, -1.0: 1.0})
    assert not measures_observable_check(m, swapped)

    lam = Observable(3.0 * np.eye(2))
    m = identity_model(lam, Observable(3.0 * np.eye(2)))
    assert measures_observable_check(m, default_correspondence(m))


def test_unmatched_meter_outcomes_must_stay_silent():
    m = random_measurement_model(sigma_z(), seed=4, pad=1)
    assert len(m.meter.spectrum) == 3
    assert measures_observable_check(m, default_correspondence(m))
    # a meter that can fire outside the correspondence
    leaky = MeasurementModel(KET0, CNOT, Observable(np.diag([1.0, 2.0])), Observable(np.eye(2)))
    corr = OutcomeCorrespondence.checked(((0, 0),), leaky.measured, leaky.meter)
    assert not measures_observable_check(leaky, corr)


# -- disturbance ----------------------------------------------------------------

def test_nondisturbance_examples():
    m, _ = cnot()
    assert nondisturbance_check(m, sigma_z())
    assert not nondisturbance_check(m, sigma_x())
    plus_x = sigma_x().projectors[1]
    assert np.allclose(heisenberg_image(m, plus_x), np.eye(2) / 2)
    for seed in range(3):
        rm = random_measurement_model(random_observable(3, seed), seed)
        assert nondisturbance_check(rm, Observable(-2.0 * np.eye(3)))


def test_nondisturbance_with_evolution_examples():
    m, _ = cnot()
    for b in (sigma_z(), sigma_x()):
        assert nondisturbance_with_evolution(m, b, sigma_x(), 0.0) == nondisturbance_check(m, b)
    for dt in (0.0, 0.3, 1.7, math.pi):
        assert nondisturbance_with_evolution(m, sigma_z(), sigma_z(), dt)
    assert not nondisturbance_with_evolution(m, sigma_z(), sigma_x(), math.pi / 4)


def test_joint_prob_consecutive_examples():
    m, corr = cnot()
    z, rho = m.measured, plus_state()
    b = sigma_z()
    assert joint_prob_consecutive(m, corr, z.outcomes([1.0]), b, b.outcomes([1.0]),
                                  rho) == pytest.approx(0.5, abs=1e-12)
    assert joint_prob_consecutive(m, corr, z.outcomes([1.0]), b, b.outcomes([-1.0]),
                                  rho) == pytest.approx(0.0, abs=1e-12)
    x = sigma_x()
    for s in z.singletons():
        for s2 in x.singletons():
            assert joint_prob_consecutive(m, corr, s, x, s2, rho) == pytest.approx(0.25, abs=1e-12)
    for seed in range(3):
        r = random_density(2, seed)
        for s2 in x.singletons():
            full = joint_prob_consecutive(m, corr, z.full(), x, s2, r)
            assert full == pytest.approx(born_probability(x, s2, nonselective_change(m, r)))
    with pytest.raises(OwnershipError):
        joint_prob_consecutive(m, corr, sigma_z().full(), x, x.full(), rho)


def test_theorem1_examples():
    m, corr = cnot()
    rep = theorem1_verify(m, corr, sigma_z())
    assert rep.nondisturbing and rep.consistent
    assert rep.joint_residual <= 1e-10 and rep.commutator_norm == 0.0

    rep = theorem1_verify(m, corr, sigma_x())
    assert not rep.nondisturbing and rep.consistent
    assert rep.joint_residual >= 0.2
    # consecutive 1/4 against formula 1/2 for (+1, +1) at |+><+|
    z, x = m.measured, sigma_x()
    consecutive = joint_prob_consecutive(m, corr, z.outcomes([1.0]), x, x.outcomes([1.0]),
                                         plus_state())
    formula = np.trace(spectral_projector(z, z.outcomes([1.0]))
                       @ spectral_projector(x, x.outcomes([1.0])) @ plus_state()).real
    assert consecutive == pytest.approx(0.25) and formula == pytest.approx(0.5)


@settings(max_examples=10)
@given(seeds)
def test_theorem1_local_model_on_two_qubits(seed):
    local = embed_local_model(random_measurement_model(sigma_z(), seed), 2, position=1)
    b = Observable(tensor(I2, random_observable(2, seed).op))
    rep = theorem1_verify(local, default_correspondence(local), b, trials=2, seed=seed)
    assert rep.nondisturbing and rep.joint_residual <= 1e-10


# -- invariants -----------------------------------------------------------------

@settings(max_examples=15)
@given(seeds, st.integers(min_value=2, max_value=3))
def test_duality_and_unitality(seed, dim):
    m = random_measurement_model(random_observable(dim, seed), seed, kraus_rank=2, env_dim=2)
    x, rho = random_operator(dim, seed), random_density(dim, seed + 1)
    lhs = np.trace(heisenberg_image(m, x) @ rho)
    rhs = np.trace(x @ nonselective_change(m, rho))
    assert abs(lhs - rhs) <= 1e-10
    assert op_norm(heisenberg_image(m, np.eye(dim)) - np.eye(dim)) <= 1e-10


@given(seeds, st.integers(min_value=2, max_value=4))
def test_commuting_coupling_is_sufficient(seed, dim):
    b = random_observable(dim, seed)
    m = controlled_shift_model(b)
    for s in b.all_outcome_sets():
        big = tensor(spectral_projector(b, s), np.eye(m.anc_dim))
        assert op_norm(m.u @ big - big @ m.u) <= 1e-10
    assert nondisturbance_check(m, b)
    assert measures_observable_check(m, default_correspondence(m))


@settings(max_examples=15)
@given(seeds, st.integers(min_value=2, max_value=3))
def test_induced_instruments_are_valid(seed, dim):
    a = random_observable(dim, seed)
    m = random_measurement_model(a, seed, kraus_rank=2)
    t = induced_instrument(m, default_correspondence(m))
    assert dl_axioms_check(t, trials=3, seed=seed).passed
    assert theorem2_check(t, trials=10, seed=seed).passed
    assert all(cp_check(br) for br in t.branches)


@settings(max_examples=15)
@given(seeds, st.integers(min_value=2, max_value=3))
def test_pure_ancilla_agrees_with_nondisturbance(seed, dim):
    a = random_observable(dim, seed)
    m = random_measurement_model(a, seed, preserve=a if seed % 2 else None)
    for b in (a, random_observable(dim, seed + 1)):
        nd = nondisturbance_residual(m, b) <= 1e-9
        pa = pure_ancilla_residual(m, b) <= 1e-9
        assert nd == pa


# -- pure ancilla -----------------------------------------------------------------

def test_pure_ancilla_examples():
    ident = identity_model(sigma_z(), sigma_z())
    for seed in range(3):
        psi = np.linalg.qr(random_operator(2, seed))[0][:, 0]
        assert pure_ancilla_condition(ident, sigma_x(), psi) == 0.0
    m, _ = cnot()
    plus = (ket(0, 2) + ket(1, 2)) / np.sqrt(2)
    for psi in (ket(0, 2), ket(1, 2), plus):
        assert pure_ancilla_condition(m, sigma_z(), psi) <= 1e-15
    # oracle: || [CNOT, (I + X)/2 (x) I] |00> ||
    u = basis_permutation(CNOT_PERM, 4)
    p = kron_loops([[0.5, 0.5], [0.5, 0.5]], [[1, 0], [0, 1]])
    v = [1, 0, 0, 0]
    up = [sum(u[i][k] * sum(p[k][j] * v[j] for j in range(4)) for k in range(4)) for i in range(4)]
    pu = [sum(p[i][k] * sum(u[k][j] * v[j] for j in range(4)) for k in range(4)) for i in range(4)]
    oracle = math.sqrt(sum(abs(x - y) ** 2 for x, y in zip(up, pu)))
    assert oracle == pytest.approx(1 / math.sqrt(2))
    assert pure_ancilla_condition(m, sigma_x(), ket(0, 2)) == pytest.approx(oracle, abs=1e-12)


def test_pure_ancilla_requires_pure_sigma():
    m = random_measurement_model(sigma_z(), seed=1, env_dim=2)
    with pytest.raises(PreconditionError):
        pure_ancilla_condition(m, sigma_x(), ket(0, 2))


# -- locality ---------------------------------------------------------------------

def test_locality_examples():
    split = Bipartition(2, 2, local_to=1)
    assert locality_check(embed_local_model(cnot_model(), 2, position=1), split)
    assert not locality_check(embed_local_model(cnot_model(), 2, position=2), split)
    global_swap = swap_model(random_observable(4, 2))
    assert not locality_check(global_swap, split)


def local_z_pair():
    m1 = embed_local_model(cnot_model(), 2, position=1)
    m2 = embed_local_model(cnot_model(), 2, position=2)
    return m1, default_correspondence(m1), m2, default_correspondence(m2)


def test_local_pair_on_singlet():
    m1, c1, m2, c2 = local_z_pair()
    split = Bipartition(2, 2)
    rho = singlet()
    a, b = m1.measured, m2.measured
    for order in ("first-then-second", "second-then-first"):
        p = joint_prob_local_pair(m1, c1, m2, c2, a.outcomes([1.0]), b.outcomes([1.0]),
                                  rho, split, order)
        q = joint_prob_local_pair(m1, c1, m2, c2, a.outcomes([1.0]), b.outcomes([-1.0]),
                                  rho, split, order)
        assert p == pytest.approx(0.0, abs=1e-12) and q == pytest.approx(0.5, abs=1e-12)


def test_local_pair_product_state_and_marginal():
    m1, c1, m2, c2 = local_z_pair()
    split = Bipartition(2, 2)
    r1, r2 = random_density(2, 1), random_density(2, 2)
    rho = tensor(r1, r2)
    a, b = m1.measured, m2.measured
    z = sigma_z()
    for s, zs in zip(a.singletons(), z.singletons()):
        for s2, zs2 in zip(b.singletons(), z.singletons()):
            p = joint_prob_local_pair(m1, c1, m2, c2, s, s2, rho, split)
            assert p == pytest.approx(born_probability(z, zs, r1) * born_probability(z, zs2, r2))
        marginal = joint_prob_local_pair(m1, c1, m2, c2, s, b.full(), singlet(), split)
        assert marginal == pytest.approx(born_probability(a, s, singlet()))


def test_local_pair_rejects_nonlocal_model():
    m1, c1, _, _ = local_z_pair()
    bad = embed_local_model(cnot_model(), 2, position=1)
    with pytest.raises(LocalityError):
        joint_prob_local_pair(m1, c1, bad, default_correspondence(bad), m1.measured.full(),
                              bad.measured.full(), singlet(), Bipartition(2, 2))


def test_embedding_preserves_state_change():
    m = cnot_model()
    emb = embed_local_model(m, 2, position=1)
    r1, r2 = random_density(2, 4), random_density(2, 5)
    out = nonselective_change(emb, tensor(r1, r2))
    assert op_norm(out - tensor(nonselective_change(m, r1), r2)) <= 1e-12
    assert op_norm(emb.u @ dag(emb.u) - np.eye(8)) <= 1e-12
