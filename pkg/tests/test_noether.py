import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad_vec

from noether_qds import harness
from noether_qds.errors import NonSemisimpleZeroEigenvalue, NotFaithful, NotHermitian, PostulateFailed
from noether_qds.harness import (gen_structured_lindblad, random_blocks, random_complex,
                                 random_density, random_hermitian)
from noether_qds.linops import OperatorSubspace, matrix_exp, subspace_distance, unvec, vec
from noether_qds.noether import (commutant, conditional_expectation, ergodic_projection,
                                 fixed_points, hat_map, heisenberg_drift, is_constant_quantum,
                                 modular_commutation_residuals, modular_flow, noether_check,
                                 pinching_superop, stationary_state, superop_commutator)
from noether_qds.qds import LindbladSpec, SuperOperator, lindblad_heisenberg, lindblad_schrodinger

from conftest import I2, SM, SX, SY, SZ

seeds = st.integers(0, 2**32 - 1)
GRID = (0.0, 0.1, 0.5, 1.0, 5.0)


def span(*mats):
    return OperatorSubspace.from_vectors(np.column_stack([vec(X) for X in mats]), mats[0].shape[0])


def structured(seed):
    rng = np.random.default_rng(seed)
    return gen_structured_lindblad(random_blocks(8, rng), rng), rng


# hat map -------------------------------------------------------------------

def test_hat_map_sigma_z_identity_input():
    h = hat_map(SZ)
    assert np.allclose(h(I2), SZ)


def test_hat_map_unit_weights_is_pinching(rng):
    h = hat_map(SZ, f=(1.0,))
    rho = random_density(rng, 2)
    out = h(rho)
    assert np.allclose(out, np.diag(np.diag(rho)))


def test_hat_map_degenerate_spectrum_pinches_jointly(rng):
    A = np.diag([1.0, 1.0, 2.0])
    out = hat_map(A, f=(1.0,))(np.ones((3, 3)))
    assert np.allclose(out, [[1, 1, 0], [1, 1, 0], [0, 0, 1]])


def test_hat_map_trace_identity_square(rng):
    A = random_hermitian(rng, 4)
    rho = random_density(rng, 4)
    h = hat_map(A, f=(0.0, 0.0, 1.0))
    assert abs(np.trace(h(rho)) - np.trace(A @ A @ rho)) <= 1e-11


def test_hat_map_callable_weights():
    h = hat_map(SZ, f=np.exp)
    assert np.allclose(h.observable(), np.diag([np.e, 1 / np.e]))


def test_hat_map_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        hat_map(SM)


@settings(max_examples=50, deadline=None)
@given(seed=seeds, d=st.integers(1, 6), deg=st.integers(0, 3))
def test_hat_trace_identity_property(seed, d, deg):
    rng = np.random.default_rng(seed)
    A = random_hermitian(rng, d)
    rho = random_density(rng, d)
    coeffs = rng.standard_normal(deg + 1)
    fA = sum(c * np.linalg.matrix_power(A, k) for k, c in enumerate(coeffs))
    assert abs(np.trace(hat_map(A, coeffs)(rho)) - np.trace(fA @ rho)) <= 1e-10 * max(
        1.0, np.linalg.norm(fA))


# superoperator commutation -------------------------------------------------

def test_superop_commutator_examples(deph):
    M = lindblad_schrodinger(deph)
    assert not superop_commutator(M, M).mat.any()
    pz = hat_map(SZ).superop
    px = hat_map(SX).superop
    assert np.linalg.norm(superop_commutator(pz, M).mat) == 0.0
    assert np.linalg.norm(superop_commutator(px, M).mat) > 0.1


def test_is_constant_quantum_examples(deph, amp, rng):
    M = lindblad_schrodinger(deph)
    assert is_constant_quantum(SZ, M).holds
    res = is_constant_quantum(SX, M)
    assert not res.holds and res.residual > 0.1
    M_rand = lindblad_schrodinger(LindbladSpec(random_hermitian(rng, 3),
                                               (random_complex(rng, (3, 3)),)))
    assert is_constant_quantum(np.eye(3), M_rand) == (True, 0.0)


# fixed points and commutant ----------------------------------------------

def test_fixed_points_named(deph, amp):
    F = fixed_points(lindblad_heisenberg(deph))
    assert F.dim == 2 and F.is_algebra
    assert subspace_distance(F, span(I2, SZ)) < 1e-12
    F = fixed_points(lindblad_heisenberg(amp))
    assert subspace_distance(F, span(I2)) < 1e-12
    F = fixed_points(lindblad_heisenberg(harness.unitary_only()))
    assert subspace_distance(F, span(I2, SZ)) < 1e-12


def test_amplitude_damping_pauli_action(amp):
    # hand computation: L(sx) = -sx/2, L(sy) = -sy/2, L(sz) = I - sz
    L = lindblad_heisenberg(amp)
    assert np.allclose(L(SX), -SX / 2)
    assert np.allclose(L(SY), -SY / 2)
    assert np.allclose(L(SZ), I2 - SZ)


def test_commutant_examples():
    assert subspace_distance(commutant([SZ]), span(I2, SZ)) < 1e-12
    assert subspace_distance(commutant([SX, SZ]), span(I2)) < 1e-12
    full = commutant([], d=3)
    assert full.dim == 9 and full.is_algebra


def test_commutant_appends_adjoints():
    # commutes with sigma_minus but not with its adjoint: excluded
    C = commutant([SM])
    assert C.dim == 1
    assert C.contains(I2)


@settings(max_examples=20, deadline=None)
@given(seed=seeds)
def test_commutant_is_algebra(seed):
    rng = np.random.default_rng(seed)
    spec = gen_structured_lindblad(random_blocks(6, rng), rng)
    C = commutant(spec.operators())
    assert C.is_algebra
    for X in C.basis:
        for Y in spec.operators():
            assert np.linalg.norm(X @ Y - Y @ X) <= 1e-8 * max(1, np.linalg.norm(Y))


# stationary state ----------------------------------------------------------

def time_average(gen, v, T):
    val, _ = quad_vec(lambda t: matrix_exp(gen.mat, t) @ v, 0.0, T, epsabs=1e-12, epsrel=1e-12)
    return val / T


def test_stationary_named(deph, amp):
    rep = stationary_state(lindblad_schrodinger(deph))
    assert rep.postulate_p_holds
    assert np.max(np.abs(rep.candidate - I2 / 2)) <= 1e-9
    assert rep.stationarity_residual <= 1e-12
    rep = stationary_state(lindblad_schrodinger(amp))
    assert not rep.postulate_p_holds
    assert abs(rep.min_eigenvalue) <= 1e-9
    assert np.max(np.abs(rep.candidate - np.diag([1, 0]))) <= 1e-9


def test_stationary_unitary_only(rng):
    H = random_hermitian(rng, 3)
    rep = stationary_state(lindblad_schrodinger(LindbladSpec(H, ())))
    assert rep.postulate_p_holds
    assert np.allclose(rep.candidate, np.eye(3) / 3, atol=1e-12)


def test_ergodic_projection_matches_time_average(rng):
    spec = gen_structured_lindblad([(2, 1), (1, 1)], rng)
    M = lindblad_schrodinger(spec)
    P0 = ergodic_projection(M)
    # Cesaro mean converges like 1/T, so compare the projected part exactly and
    # the remainder through its closed form M^D (e^{TM} - 1) / T, with M^D the
    # inverse of M on the complement of its kernel
    v = vec(random_density(rng, 3))
    T = 100.0
    avg = time_average(M, v, T)
    rest = v - P0 @ v
    transient = np.linalg.solve(M.mat + P0, (matrix_exp(M.mat, T) - np.eye(9)) @ rest) / T
    assert np.linalg.norm(avg - (P0 @ v + transient)) <= 1e-8
    assert np.allclose(P0 @ P0, P0, atol=1e-10)
    assert np.linalg.norm(M.mat @ P0) <= 1e-10


def test_ergodic_projection_jordan_block():
    mat = np.zeros((4, 4), dtype=complex)
    mat[0, 1] = 1.0
    with pytest.raises(NonSemisimpleZeroEigenvalue):
        ergodic_projection(SuperOperator(2, mat))


def test_stationary_faithfulness_decides_both_ways(rng):
    # structured instance: faithful; embedded one-way chain: transient state, not faithful
    spec = gen_structured_lindblad([(2, 1), (1, 2)], rng)
    assert stationary_state(lindblad_schrodinger(spec)).postulate_p_holds
    chain = harness.classical_embedding(np.array([[-1.0, 0.0], [1.0, 0.0]]))
    rep = stationary_state(lindblad_schrodinger(chain))
    assert not rep.postulate_p_holds
    assert np.allclose(rep.candidate, np.diag([0, 1]), atol=1e-12)


# conditional expectation ---------------------------------------------------

def test_conditional_expectation_dephasing(deph):
    L = lindblad_heisenberg(deph)
    assert np.max(np.abs(conditional_expectation(SX, L))) <= 1e-12
    assert np.allclose(conditional_expectation(np.diag([2.0, 5.0]), L), np.diag([2.0, 5.0]))
    A = np.array([[1.0, 2 - 1j], [3j, -4.0]])
    assert np.allclose(conditional_expectation(A, L), np.diag([1.0, -4.0]))


def test_conditional_expectation_fixes_its_range(rng):
    spec = gen_structured_lindblad([(2, 1), (1, 2)], rng)
    L = lindblad_heisenberg(spec)
    C = commutant(spec.operators())
    A = sum(c * X for c, X in zip(random_complex(rng, C.dim), C.basis))
    assert np.allclose(conditional_expectation(A, L), A, atol=1e-10)


def test_conditional_expectation_requires_postulate(amp):
    with pytest.raises(PostulateFailed):
        conditional_expectation(SX, lindblad_heisenberg(amp))


# modular flow ---------------------------------------------------------------

def test_modular_flow_maximally_mixed(rng):
    A = random_complex(rng, (3, 3))
    for t in (-1.0, 0.3, 7.0):
        assert np.allclose(modular_flow(np.eye(3) / 3, t, A), A)


def test_modular_flow_qubit_phases():
    p = 0.3
    rho = np.diag([p, 1 - p])
    for t in (0.5, 2.0):
        out = modular_flow(rho, t, SX)
        phase = (p / (1 - p)) ** (1j * t)
        assert np.isclose(out[0, 1], phase)
        assert np.isclose(out[1, 0], np.conj(phase))
        assert np.allclose(np.abs(out), np.abs(SX))


def test_modular_flow_fixes_commutant():
    rho = np.diag([0.2, 0.3, 0.5])
    A = np.diag([1.0, -2.0, 4.0])
    assert np.allclose(modular_flow(rho, 1.7, A), A)


def test_modular_flow_not_faithful():
    with pytest.raises(NotFaithful):
        modular_flow(np.diag([1.0, 0.0]), 1.0, SX)


def test_modular_commutation_diagnostic(rng):
    spec = gen_structured_lindblad([(2, 1), (1, 2)], rng)
    rho = stationary_state(lindblad_schrodinger(spec)).candidate
    res = modular_commutation_residuals(rho, lindblad_heisenberg(spec), GRID)
    assert set(res) == {(s, t) for s in GRID for t in GRID}
    assert all(np.isfinite(v) and v >= 0 for v in res.values())
    assert all(res[(0.0, t)] == 0.0 or res[(0.0, t)] < 1e-12 for t in GRID)


# noether_check -------------------------------------------------------------

def test_noether_check_named(deph, amp):
    rep = noether_check(SZ, deph)
    assert (rep.is_fixed_point, rep.hat_commutes, rep.in_commutant, rep.postulate_p_holds) == (
        True, True, True, True)
    rep = noether_check(SX, deph)
    assert (rep.is_fixed_point, rep.hat_commutes, rep.in_commutant) == (False, False, False)
    for spec in (deph, amp, harness.depolarizing(), harness.unitary_only()):
        rep = noether_check(I2, spec)
        assert rep.is_fixed_point and rep.hat_commutes and rep.in_commutant


def test_noether_check_non_hermitian(deph):
    rep = noether_check(I2 + 1j * SZ, deph)
    assert rep.is_fixed_point and rep.hat_commutes and rep.in_commutant
    rep = noether_check(SM.T, deph)
    assert not (rep.is_fixed_point or rep.hat_commutes or rep.in_commutant)


# theorem-level properties on structured instances --------------------------

@settings(max_examples=25, deadline=None)
@given(seed=seeds)
def test_fixed_points_equal_commutant(seed):
    spec, _ = structured(seed)
    M, L = lindblad_schrodinger(spec), lindblad_heisenberg(spec)
    assert stationary_state(M).postulate_p_holds
    F = fixed_points(L)
    assert subspace_distance(F, commutant(spec.operators())) <= 1e-8
    assert F.closure_residuals["adjoint"] <= 1e-8
    assert F.closure_residuals["product"] <= 1e-8


@settings(max_examples=25, deadline=None)
@given(seed=seeds)
def test_propositions_on_structured(seed):
    spec, rng = structured(seed)
    M, L = lindblad_schrodinger(spec), lindblad_heisenberg(spec)
    C = commutant(spec.operators())
    inside = sum(c * X for c, X in zip(rng.standard_normal(C.dim), C.basis))
    inside = 0.5 * (inside + inside.conj().T)
    for A in (inside, random_hermitian(rng, spec.dim)):
        hat = is_constant_quantum(A, M).holds
        drift = heisenberg_drift(A, L, GRID)
        assert hat == (drift <= 1e-9 * max(1, np.linalg.norm(A)))
        if hat:
            coeffs = rng.standard_normal(4)
            fA = sum(c * np.linalg.matrix_power(A, k) for k, c in enumerate(coeffs))
            rho = random_density(rng, spec.dim)
            for t in GRID:
                rt = unvec(matrix_exp(M.mat, t) @ vec(rho), spec.dim)
                assert abs(np.trace(fA @ rt) - np.trace(fA @ rho)) <= 1e-9 * max(
                    1, np.linalg.norm(fA))


@settings(max_examples=25, deadline=None)
@given(seed=seeds)
def test_dissipation_identity(seed):
    spec, rng = structured(seed)
    L = lindblad_heisenberg(spec)
    C = commutant(spec.operators())
    A = sum(c * X for c, X in zip(rng.standard_normal(C.dim), C.basis))
    A = 0.5 * (A + A.conj().T)
    assert np.linalg.norm(L(A @ A) - L(A) @ A - A @ L(A)) <= 1e-10 * max(1, np.linalg.norm(A)) ** 2 \
        * max(1, np.linalg.norm(L.mat))
    # for a generic A the defect equals sum_k [A, L_k]* [A, L_k]
    B = random_hermitian(rng, spec.dim)
    defect = L(B @ B) - L(B) @ B - B @ L(B)
    expected = sum((B @ Lk - Lk @ B).conj().T @ (B @ Lk - Lk @ B) for Lk in spec.lindblad_ops)
    assert np.allclose(defect, expected, atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(seed=seeds)
def test_conditional_expectation_properties(seed):
    spec, rng = structured(seed)
    M, L = lindblad_schrodinger(spec), lindblad_heisenberg(spec)
    rho = stationary_state(M).candidate
    F = fixed_points(L)
    A = random_complex(rng, (spec.dim, spec.dim))
    EA = conditional_expectation(A, L)
    assert F.residual(EA) <= 1e-8
    for X in F.basis:
        assert abs(np.trace(rho @ X @ EA) - np.trace(rho @ X @ A)) <= 1e-9 * max(1, np.linalg.norm(A))
    E = ergodic_projection(L)
    for t in GRID:
        J = matrix_exp(L.mat, t)
        assert np.linalg.norm(E @ J - J @ E) <= 1e-8


def test_constant_definition_uses_f_of_a(deph, rng):
    # constants keep tr{rho(t) f(A)} = tr{rho f(A)}, the f-consistent reading
    M = lindblad_schrodinger(deph)
    A = np.diag([0.5, 2.0])
    rho = random_density(rng, 2)
    for f in (np.exp, np.square, np.cos):
        fA = np.diag(f(np.diag(A)))
        for t in GRID:
            rt = unvec(matrix_exp(M.mat, t) @ vec(rho), 2)
            assert np.isclose(np.trace(rt @ fA), np.trace(rho @ fA), atol=1e-12)


def test_relaxation_with_trivial_commutant(rng):
    spec = harness.depolarizing()
    M = lindblad_schrodinger(spec)
    assert commutant(spec.operators()).dim == 1
    rho_hat = stationary_state(M).candidate
    lam = np.linalg.eigvals(M.mat)
    gap = np.min(np.abs(lam.real[np.abs(lam) > 1e-9]))
    for _ in range(5):
        rho = random_density(rng, 2)
        out = unvec(matrix_exp(M.mat, 50 / gap) @ vec(rho), 2)
        assert np.abs(np.linalg.eigvalsh(out - rho_hat)).sum() <= 1e-6


def test_pinching_superop_default_weights():
    P = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    assert np.allclose(pinching_superop(P)(np.ones((2, 2))), I2)
