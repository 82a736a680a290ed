"""Unit tests for the phase space, Hamiltonian, Lax pair and reductions."""

import cmath

import numpy as np
import pytest

from toplax import model as md
from toplax import rmatrix as rm
from toplax import specfun as sf
from toplax import tensor as tn
from toplax.errors import ConstraintViolation, ScaleExceeded


def test_spin_rank1_structure():
    spin = md.spin_rank1(3, 2, 0.8 + 0.1j, seed=4)
    assert spin.is_rank1()
    assert spin.on_constraints(0.8 + 0.1j)
    S = spin.assemble()
    svals = np.linalg.svd(S, compute_uv=False)
    assert svals[0] > 1e-3
    assert svals[1] < 1e-12 * svals[0]


def test_spin_rank1_rejects_zero_level():
    with pytest.raises(ValueError):
        md.spin_rank1(2, 2, 0.0, seed=0)


def test_spin_general_constraints():
    spin = md.spin_general(3, 2, 1.5, seed=5)
    assert not spin.is_rank1()
    assert spin.on_constraints(1.5)
    S = spin.assemble()
    svals = np.linalg.svd(S, compute_uv=False)
    assert svals[-1] > 1e-6  # generically full rank


def test_spin_roundtrip():
    spin = md.spin_general(2, 3, 1.0, seed=6)
    again = md.spin_from_matrix(spin.assemble(), 2, 3)
    for i in range(2):
        for j in range(2):
            assert np.array_equal(spin.block(i, j), again.block(i, j))


def test_random_state_is_constrained():
    fam = rm.make_family("bb", N=2, tau=1j)
    st = md.random_state(fam, 3, 0.7, seed=1)
    assert st.spin.on_constraints(0.7)
    for i in range(3):
        for j in range(3):
            if i != j:
                assert fam.pole_distance(st.qdiff(i, j)) > 0.05


def test_constraint_check_raises():
    fam = rm.make_family("xxx", N=2)
    st = md.random_state(fam, 2, 1.0, seed=2)
    blocks = [[st.spin.block(i, j) for j in range(2)] for i in range(2)]
    blocks[1][1] = blocks[1][1] + 0.5 * np.eye(2)
    bad = st.replace(spin=st.spin.replace_blocks(blocks))
    with pytest.raises(ConstraintViolation):
        md.eom_rhs(bad)
    with pytest.raises(ConstraintViolation):
        md.bracket_flow(bad)


def test_hamiltonian_two_particle_value():
    # N=1 rational, S_12 = S_21 = 1, S_ii = 0, q = (0, 2), p = 0:
    # H reduces to the single pair potential -1/4
    fam = rm.make_family("xxx", N=1)
    blocks = [[np.zeros((1, 1), dtype=complex) for _ in range(2)]
              for _ in range(2)]
    blocks[0][1][0, 0] = 1.0
    blocks[1][0][0, 0] = 1.0
    spin = md.SpinConfig(2, 1, blocks=tuple(tuple(r) for r in blocks))
    st = md.PhaseState((0.0, 2.0), (0.0, 0.0), spin, fam)
    assert abs(md.hamiltonian(st) + 0.25) < 1e-15


def test_hamiltonian_kinetic_term():
    fam = rm.make_family("xxx", N=1)
    blocks = ((np.zeros((1, 1), dtype=complex),),)
    spin = md.SpinConfig(1, 1, blocks=blocks)
    st = md.PhaseState((0.3,), (2.0 + 1.0j,), spin, fam)
    assert abs(md.hamiltonian(st) - 0.5 * (2.0 + 1.0j) ** 2) < 1e-14


def test_U_equals_V_for_rank1():
    for key, kwargs in (("xxx", {}), ("11v", {}), ("bb", {"tau": 1j})):
        fam = rm.make_family(key, N=2, **kwargs)
        st = md.random_state(fam, 2, 1.0, seed=7, spin_mode="rank1")
        q = st.qdiff(0, 1)
        U = md.potential_U(fam, st.spin.block(0, 1), st.spin.block(1, 0), q)
        V = md.potential_V(fam, st.spin.block(0, 0), st.spin.block(1, 1), q)
        assert abs(U - V) < 1e-12 * max(abs(U), 1.0), key


def test_lax_N1_entrywise():
    # scalar reduction: L_ij = d_ij (p_i + S_ii E1(z))
    #                        + (1 - d_ij) S_ij phi(z, q_i - q_j)
    for key, kwargs in (("xxx", {}), ("bb", {"tau": 0.8j})):
        fam = rm.make_family(key, N=1, **kwargs)
        fl = fam.flavor
        st = md.random_state(fam, 3, 0.7 + 0.2j, seed=8)
        z = 0.63 - 0.12j
        L = md.build_L(st, z)
        for i in range(3):
            for j in range(3):
                s = st.spin.block(i, j)[0, 0]
                if i == j:
                    expect = st.p[i] + s * sf.eisenstein_E1(fl, z)
                else:
                    expect = s * sf.kronecker_phi(fl, z, st.qdiff(i, j))
                assert abs(L[i, j] - expect) < 1e-12, key


def test_lax_M_matrix_N1_offdiagonal():
    # the accompanying matrix reduces off-diagonally to S_ij f(z, q_ij)
    fam = rm.make_family("bb", N=1, tau=0.8j)
    st = md.random_state(fam, 2, 0.5 + 0.1j, seed=11)
    z = 0.33 + 0.21j
    Mm = md.build_M(st, z)
    for i in range(2):
        for j in range(2):
            if i != j:
                expect = st.spin.block(i, j)[0, 0] * sf.phi_derivative_f(
                    fam.flavor, z, st.qdiff(i, j))
                assert abs(Mm[i, j] - expect) < 1e-12


def test_lax_M1_sector_form():
    # single top: L = p 1 + (1/N) sum_a tr(S T_-a) phi_a(z, w_a) T_a,
    # with the a = 0 coefficient E1(z)
    fam = rm.make_family("bb", N=2, tau=1j)
    fl = fam.flavor
    N = 2
    st = md.random_state(fam, 1, 1.0, seed=5)
    z = 0.27 + 0.41j
    S = st.spin.block(0, 0)
    acc = st.p[0] * np.eye(N, dtype=complex)
    for a1 in range(N):
        for a2 in range(N):
            Sa = np.trace(S @ tn.sin_basis_T_int(-a1, -a2, N)) / N
            if a1 == 0 and a2 == 0:
                coef = sf.eisenstein_E1(fl, z)
            else:
                om = (a1 + a2 * fl.tau) / N
                coef = cmath.exp(2j * cmath.pi * a2 * z / N) \
                    * sf.kronecker_phi(fl, z, om)
            acc += Sa * coef * tn.sin_basis_T_int(a1, a2, N)
    L = md.build_L(st, z)
    assert np.max(np.abs(L - acc)) < 1e-12


def test_elliptic_potential_sector_form():
    # U = -sum_a S^ij_a S^ji_-a E2(w_a + q/N) with S_a = tr(S T_-a)/N
    fam = rm.make_family("bb", N=2, tau=1j)
    fl = fam.flavor
    N = 2
    rng = np.random.default_rng(3)
    Sij = rng.uniform(-1, 1, (N, N)) + 1j * rng.uniform(-1, 1, (N, N))
    Sji = rng.uniform(-1, 1, (N, N)) + 1j * rng.uniform(-1, 1, (N, N))
    for q in (0.31 + 0.22j, 0.12 + 0.45j):
        U = md.potential_U(fam, Sij, Sji, q)
        total = 0j
        for a1 in range(N):
            for a2 in range(N):
                Sa = np.trace(Sij @ tn.sin_basis_T_int(-a1, -a2, N)) / N
                Sma = np.trace(Sji @ tn.sin_basis_T_int(a1, a2, N)) / N
                om = (a1 + a2 * fl.tau) / N
                total += Sa * Sma * sf.eisenstein_E2(fl, om + q / N)
        assert abs(U + total) < 1e-8 * max(abs(U), 1.0)


def test_eom_matches_bracket_flow():
    for key, kwargs in (("xxx", {}), ("11v", {}), ("bb", {"tau": 1j})):
        fam = rm.make_family(key, N=2, **kwargs)
        st = md.random_state(fam, 3, 1.0, seed=13)
        dq1, dp1, dS1 = md.eom_rhs(st)
        dq2, dp2, dS2 = md.bracket_flow(st)
        assert np.max(np.abs(np.array(dq1) - np.array(dq2))) < 1e-12
        assert np.max(np.abs(np.array(dp1) - np.array(dp2))) < 1e-10, key
        for i in range(3):
            for j in range(3):
                diff = np.max(np.abs(dS1[i][j] - dS2[i][j]))
                assert diff < 1e-10, f"{key} block {i}{j}: {diff:.3e}"


def test_rank1_diagonal_forms_agree():
    for key in ("xxx", "11v"):
        fam = rm.make_family(key, N=2)
        st = md.random_state(fam, 3, 1.0, seed=17, spin_mode="rank1")
        _, _, dSa = md.eom_rhs(st, diagonal_form="general")
        _, _, dSb = md.eom_rhs(st, diagonal_form="commutator")
        for i in range(3):
            diff = np.max(np.abs(dSa[i][i] - dSb[i][i]))
            assert diff < 1e-10, f"{key} site {i}: {diff:.3e}"
    with pytest.raises(ValueError):
        md.eom_rhs(st, diagonal_form="nope")


def test_bracket_flow_observables():
    fam = rm.make_family("xxx", N=2)
    st = md.random_state(fam, 2, 1.0, seed=19)
    dq, dp, dS = md.bracket_flow(st)
    assert md.bracket_flow(st, ("q", 1)) == dq[1]
    assert md.bracket_flow(st, ("p", 0)) == dp[0]
    assert md.bracket_flow(st, ("S", 0, 1, 1, 0)) == dS[0][1][1, 0]
    z = 0.4 + 0.2j
    assert md.bracket_flow(st, ("L", z, 0, 3)) == md.flow_L(st, z)[0, 3]
    with pytest.raises(ValueError):
        md.bracket_flow(st, ("nope",))


def test_hamiltonian_gradient_by_finite_difference():
    fam = rm.make_family("11v")
    st = md.random_state(fam, 2, 1.0, seed=23)
    h = 1e-6
    # dH/dq_0 against a central difference in q_0
    up = st.replace(q=(st.q[0] + h, st.q[1]))
    dn = st.replace(q=(st.q[0] - h, st.q[1]))
    diff = (md.hamiltonian(up) - md.hamiltonian(dn)) / (2 * h)
    assert abs(md.bracket_flow(st, ("p", 0)) + diff) < 1e-6


def test_lax_residual_small():
    for key, kwargs in (("xxx", {}), ("7v", {"C": 0.7 + 0.2j}),
                        ("bb", {"tau": 1j})):
        fam = rm.make_family(key, N=2, **kwargs)
        st = md.random_state(fam, 2, 1.0, seed=29)
        rng = np.random.default_rng(31)
        for _ in range(3):
            z = sf.sample_point(rng, fam.flavor)
            assert md.lax_residual(st, z) < 1e-11, key


def test_exchange_residual_small():
    for key in ("xxx", "11v"):
        fam = rm.make_family(key, N=2)
        st = md.random_state(fam, 2, 1.0, seed=37)
        assert md.exchange_residual(st, 0.41 + 0.13j, 0.17 - 0.22j) < 1e-12


def test_exchange_N1_derivative_term():
    # at N = 1 the q-derivative term of the exchange relation carries
    # S_ii - S_jj and vanishes identically on the constraint surface
    fam = rm.make_family("xxx", N=1)
    st = md.random_state(fam, 3, 0.8, seed=41)
    dr = md._r_big_q_derivative_sum(st, 0.3, 0.1 + 0.2j)
    assert np.max(np.abs(dr)) < 1e-13
    assert md.exchange_residual(st, 0.3, 0.1 + 0.2j) < 1e-12


def test_site_pair_embed():
    rng = np.random.default_rng(43)
    N, M = 2, 3
    A = rng.uniform(-1, 1, (N, N)) + 1j * rng.uniform(-1, 1, (N, N))
    B = rng.uniform(-1, 1, (N, N)) + 1j * rng.uniform(-1, 1, (N, N))
    T = tn.kron(A, B)
    got = md._site_pair_embed(T, 0, 2, N, M)
    expect = tn.kron(A, tn.eye(N), B)
    assert np.max(np.abs(got - expect)) < 1e-13
    got = md._site_pair_embed(T, 2, 0, N, M)
    expect = tn.kron(B, tn.eye(N), A)
    assert np.max(np.abs(got - expect)) < 1e-13


def test_cm_rmx_residual_small():
    rng = np.random.default_rng(47)
    for key in ("xxx", "11v"):
        fam = rm.make_family(key, N=2)
        q = md.random_positions(fam, 2, rng)
        p = tuple(rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2))
        z = sf.sample_point(rng, fam.flavor)
        assert md.cm_rmx_residual(q, p, 1.0, fam, z) < 1e-12, key


def test_cm_rmx_N1_is_scalar_krichever():
    # N = 1: L_ab = d_ab p_a + nu (1 - d_ab) phi(z, q_a - q_b)
    fam = rm.make_family("xxx", N=1)
    rng = np.random.default_rng(53)
    q = md.random_positions(fam, 3, rng)
    p = tuple(rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1, 1, 3))
    z = 0.29 + 0.33j
    nu = 1.0
    L, _ = md.cm_rmx_lax(q, p, nu, fam, z)
    for a in range(3):
        for b in range(3):
            if a == b:
                expect = p[a]
            else:
                expect = nu * sf.kronecker_phi(fam.flavor, z, q[a] - q[b])
            assert abs(L[a, b] - expect) < 1e-13
    assert md.cm_rmx_residual(q, p, nu, fam, z) < 1e-13


def test_cm_rmx_scale_guard():
    fam = rm.make_family("bb", N=2, tau=1j)
    with pytest.raises(ScaleExceeded):
        md.cm_rmx_lax([0.1 * a for a in range(1, 10)], [0.0] * 9,
                      1.0, fam, 0.3 + 0.2j)


def test_load_model_config():
    cfg = {"family": "xxx", "N": 2, "M": 2, "nu": [1.0, 0.0],
           "spin_mode": "rank1", "seed": 3}
    fam, st, nu = md.load_model_config(cfg)
    assert nu == 1.0
    assert st.spin.is_rank1()
    assert st.spin.on_constraints(1.0)
    # the same seed must reproduce the same state
    _, st2, _ = md.load_model_config(cfg)
    assert st2.q == st.q and st2.p == st.p


def test_load_model_config_errors():
    with pytest.raises(ValueError):
        md.load_model_config({"family": "bad", "nu": [1.0, 0.0]})
    with pytest.raises(ValueError):
        md.load_model_config({"family": "xxx"})  # nu missing
    with pytest.raises(ValueError):
        md.load_model_config({"family": "xxx", "nu": [[1, 0], [2, 0]]})
    with pytest.raises(ValueError):
        md.load_model_config({"family": "xxx", "nu": [1.0, 0.0],
                              "spin_mode": "sideways"})
    with pytest.raises(ValueError):
        md.load_model_config({"family": "xxx", "nu": [1.0, 0.0],
                              "M": 2, "q0": [[0.1, 0.0]]})


def test_load_model_config_equal_per_site_nu():
    cfg = {"family": "xxx", "nu": [[1.0, 0.0], [1.0, 0.0]], "seed": 1}
    _, _, nu = md.load_model_config(cfg)
    assert nu == 1.0
