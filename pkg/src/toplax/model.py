"""Phase space and Lax structure for systems of interacting integrable tops.

The configuration is M particles on the line (positions q_i, momenta p_i)
carrying a gl(NM) spin matrix S arranged as an M x M grid of N x N blocks
S^{ij}.  An R-matrix family supplies all couplings: the Lax pair L(z), M(z),
the Hamiltonian, the equations of motion, the classical dynamical r-matrix
and the reductions (spin Calogero-Moser at N=1, a single top at M=1, the
R-matrix-valued Lax pair of the spinless model).

Two independent evaluation paths are kept deliberately separate: eom_rhs
implements the printed equations of motion, while bracket_flow derives the
same flow from the Hamiltonian through the linear Poisson-Lie structure
{S^{ij}_{ab}, S^{kl}_{cd}} = S^{kj}_{cb} d^{il} d_{ad} - S^{il}_{ad} d^{kj} d_{bc}
and {p_i, q_j} = d_{ij}.  Their agreement is part of the certification.
"""

import cmath
import json
from dataclasses import dataclass

import numpy as np

from . import specfun as sf
from .errors import (ConstraintViolation, DegenerateDraw, PoleProximity,
                     ScaleExceeded)
from .rmatrix import FAMILY_KEYS, make_family
from .tensor import (as_four_index, block_embed, block_split, commutator,
                     eye, frobenius_norm, kron, op_contract, op_contract_1,
                     permutation_P)


# --- spin configurations ---------------------------------------------------

@dataclass(frozen=True)
class SpinConfig:
    """M x M grid of N x N complex blocks, with optional rank-1 generators."""

    M: int
    N: int
    blocks: tuple          # tuple of tuples of N x N arrays
    xi: tuple = None       # rank-1 generators, one N-vector per site
    eta: tuple = None

    def block(self, i, j):
        return self.blocks[i][j]

    def assemble(self):
        """The NM x NM matrix S = sum E_ij (x) S^{ij}."""
        return block_embed(self.blocks)

    def traces(self):
        return np.array([np.trace(self.blocks[i][i]) for i in range(self.M)])

    def on_constraints(self, nu, tol=1e-12):
        return bool(np.all(np.abs(self.traces() - nu) < tol))

    def is_rank1(self):
        return self.xi is not None

    def replace_blocks(self, blocks):
        return SpinConfig(self.M, self.N, _freeze(blocks), self.xi, self.eta)


def _freeze(blocks):
    return tuple(tuple(np.asarray(b, dtype=complex) for b in row)
                 for row in blocks)


def spin_from_matrix(S, M, N):
    """Block-decompose an NM x NM matrix into a SpinConfig."""
    return SpinConfig(M, N, _freeze(block_split(S, M, N)))


def spin_rank1(M, N, nu, seed):
    """Random rank-1 spin matrix S^{ij}_{ab} = xi^i_a eta^j_b with
    tr(S^{ii}) = nu exactly (xi^i rescaled by nu / (xi^i . eta^i))."""
    if nu == 0:
        raise ValueError("nu must be nonzero")
    rng = np.random.default_rng(seed)
    for _ in range(10):
        xi = [rng.uniform(-1, 1, N) + 1j * rng.uniform(-1, 1, N)
              for _ in range(M)]
        eta = [rng.uniform(-1, 1, N) + 1j * rng.uniform(-1, 1, N)
               for _ in range(M)]
        dots = [xi[i] @ eta[i] for i in range(M)]
        if all(abs(d) >= 1e-8 for d in dots):
            break
    else:
        raise DegenerateDraw("xi.eta too small after 10 redraws")
    xi = [x * (nu / d) for x, d in zip(xi, dots)]
    blocks = [[np.outer(xi[i], eta[j]) for j in range(M)] for i in range(M)]
    return SpinConfig(M, N, _freeze(blocks),
                      tuple(np.asarray(x) for x in xi),
                      tuple(np.asarray(e) for e in eta))


def spin_general(M, N, nu, seed):
    """Random full-rank spin matrix with diagonal blocks shifted so that
    tr(S^{ii}) = nu exactly."""
    rng = np.random.default_rng(seed)
    blocks = [[rng.uniform(-1, 1, (N, N)) + 1j * rng.uniform(-1, 1, (N, N))
               for _ in range(M)] for _ in range(M)]
    for i in range(M):
        blocks[i][i] = blocks[i][i] + \
            ((nu - np.trace(blocks[i][i])) / N) * np.eye(N)
    return SpinConfig(M, N, _freeze(blocks))


# --- phase states ----------------------------------------------------------

@dataclass(frozen=True)
class PhaseState:
    q: tuple
    p: tuple
    spin: SpinConfig
    family: object

    @property
    def M(self):
        return self.spin.M

    @property
    def N(self):
        return self.spin.N

    def qdiff(self, i, j):
        return self.q[i] - self.q[j]

    def replace(self, q=None, p=None, spin=None):
        return PhaseState(tuple(q) if q is not None else self.q,
                          tuple(p) if p is not None else self.p,
                          spin if spin is not None else self.spin,
                          self.family)


def random_positions(family, M, rng, margin=0.05):
    """Draw M positions with all pairwise differences pole-avoiding."""
    for _ in range(2000):
        q = [sf.sample_point(rng, family.flavor, eps=margin)
             for _ in range(M)]
        ok = all(family.pole_distance(q[i] - q[j]) > margin
                 for i in range(M) for j in range(M) if i != j)
        if ok:
            return tuple(q)
    raise RuntimeError("failed to draw pole-avoiding positions")


def random_state(family, M, nu, seed, spin_mode="general"):
    """Random constrained phase state for the given family."""
    rng = np.random.default_rng(seed)
    if spin_mode == "rank1":
        spin = spin_rank1(M, family.N, nu, rng.integers(2 ** 63))
    elif spin_mode == "general":
        spin = spin_general(M, family.N, nu, rng.integers(2 ** 63))
    else:
        raise ValueError(f"unknown spin_mode {spin_mode!r}")
    q = random_positions(family, M, rng)
    p = tuple(rng.uniform(-1, 1, M) + 1j * rng.uniform(-1, 1, M))
    return PhaseState(q, p, spin, family)


def _require_constraints(state, nu=None, tol=1e-8):
    tr = state.spin.traces()
    if nu is None:
        nu = tr[0]
    if np.max(np.abs(tr - nu)) > tol:
        raise ConstraintViolation(
            "tr(S^ii) must equal a common constant on all sites")
    return nu


# --- contraction helpers ---------------------------------------------------

def _tr2_P(T, S):
    """tr_2(S_2 T P_12) for a two-site operator T and an N x N matrix S."""
    N = S.shape[0]
    return op_contract(T @ permutation_P(N), S)


def _swap(T, N):
    P = permutation_P(N)
    return P @ T @ P


def inertia_J(family, S):
    """Inverse inertia tensor J(S) = tr_2(m_12(0) S_2)."""
    return op_contract(family.m0(), np.asarray(S, dtype=complex))


def top_H(family, S):
    """Single-top Hamiltonian tr(S J(S)) / 2."""
    S = np.asarray(S, dtype=complex)
    return 0.5 * complex(np.trace(S @ inertia_J(family, S)))


def potential_U(family, Sij, Sji, q):
    """Interaction potential tr_12(F^0_21(q) P_12 S^ij_1 S^ji_2)."""
    N = family.N
    sf.check_pole(family.flavor, q)
    W = _swap(family.F0(q), N) @ permutation_P(N)
    return complex(np.trace(W @ kron(Sij, Sji)))


def potential_V(family, Sii, Sjj, q):
    """Tops potential tr_12(F^0_12(q) S^ii_1 S^jj_2); equals potential_U
    for rank-1 spin."""
    sf.check_pole(family.flavor, q)
    return complex(np.trace(family.F0(q) @ kron(Sii, Sjj)))


def hamiltonian(state):
    """H = sum p^2/2 + top terms + pair interactions."""
    fam, spin = state.family, state.spin
    M = spin.M
    total = 0.5 * sum(p * p for p in state.p)
    for i in range(M):
        total += top_H(fam, spin.block(i, i))
    for i in range(M):
        for j in range(i + 1, M):
            total += potential_U(fam, spin.block(i, j), spin.block(j, i),
                                 state.qdiff(i, j))
    return complex(total)


# --- Lax pair --------------------------------------------------------------

def build_L(state, z):
    """Lax matrix: L^{ij} = d_ij (p_i 1 + tr_2(S^ii_2 r_12(z))) +
    (1 - d_ij) tr_2(S^ij_2 R^z_12(q_ij) P_12)."""
    fam, spin = state.family, state.spin
    M, N = spin.M, spin.N
    rz = fam.r(z)
    blocks = [[None] * M for _ in range(M)]
    for i in range(M):
        for j in range(M):
            if i == j:
                blocks[i][i] = state.p[i] * eye(N) + \
                    op_contract(rz, spin.block(i, i))
            else:
                blocks[i][j] = _tr2_P(fam.R(z, state.qdiff(i, j)),
                                      spin.block(i, j))
    return block_embed(blocks)


def build_M(state, z):
    """Accompanying matrix: M^{ij} = d_ij tr_2(S^ii_2 m_12(z)) +
    (1 - d_ij) tr_2(S^ij_2 F^z_12(q_ij) P_12)."""
    fam, spin = state.family, state.spin
    M, N = spin.M, spin.N
    mz = fam.m(z)
    blocks = [[None] * M for _ in range(M)]
    for i in range(M):
        for j in range(M):
            if i == j:
                blocks[i][i] = op_contract(mz, spin.block(i, i))
            else:
                blocks[i][j] = _tr2_P(fam.F(z, state.qdiff(i, j)),
                                      spin.block(i, j))
    return block_embed(blocks)


# --- equations of motion (printed form) ------------------------------------

def eom_rhs(state, diagonal_form="general"):
    """Right-hand side of the flow: (dq, dp, dSpin blocks).

    diagonal_form "general" uses the generic diagonal-block equation;
    "commutator" uses the interacting-tops commutator form, valid for
    rank-1 spin.  Off-diagonal blocks and momenta are shared.
    """
    fam, spin = state.family, state.spin
    M, N = spin.M, spin.N
    _require_constraints(state)
    P = permutation_P(N)
    m0 = fam.m0()

    def Kf(q, A):
        return op_contract(fam.F0(q) @ P, A)

    def Ks(q, A):
        return op_contract(_swap(fam.F0(q), N) @ P, A)

    J = {i: op_contract(m0, spin.block(i, i)) for i in range(M)}
    dq = [state.p[i] for i in range(M)]
    dS = [[np.zeros((N, N), dtype=complex) for _ in range(M)]
          for _ in range(M)]

    for i in range(M):
        for j in range(M):
            if i == j:
                continue
            qij = state.qdiff(i, j)
            acc = spin.block(i, i) @ Kf(qij, spin.block(i, j)) \
                - J[i] @ spin.block(i, j) \
                - Kf(qij, spin.block(i, j)) @ spin.block(j, j) \
                + spin.block(i, j) @ J[j]
            for k in range(M):
                if k == i or k == j:
                    continue
                acc += spin.block(i, k) @ Kf(state.qdiff(k, j),
                                             spin.block(k, j))
                acc -= Kf(state.qdiff(i, k), spin.block(i, k)) \
                    @ spin.block(k, j)
            dS[i][j] = acc

    if diagonal_form == "general":
        for i in range(M):
            acc = commutator(spin.block(i, i), J[i])
            for k in range(M):
                if k == i:
                    continue
                qik = state.qdiff(i, k)
                acc += spin.block(i, k) @ Ks(qik, spin.block(k, i))
                acc -= Kf(qik, spin.block(i, k)) @ spin.block(k, i)
            dS[i][i] = acc
    elif diagonal_form == "commutator":
        for i in range(M):
            acc = commutator(spin.block(i, i), J[i])
            for k in range(M):
                if k == i:
                    continue
                acc += commutator(
                    spin.block(i, i),
                    op_contract(fam.F0(state.qdiff(i, k)),
                                spin.block(k, k)))
            dS[i][i] = acc
    else:
        raise ValueError(f"unknown diagonal_form {diagonal_form!r}")

    dp = []
    for i in range(M):
        acc = 0.0
        for k in range(M):
            if k == i:
                continue
            qik = state.qdiff(i, k)
            G = _swap(fam.F0(qik, d=1), N) @ P
            acc -= np.trace(G @ kron(spin.block(i, k), spin.block(k, i)))
        dp.append(complex(acc))

    return tuple(dq), tuple(dp), _freeze(dS)


# --- Poisson-bracket oracle ------------------------------------------------

def _ham_spin_gradient(state):
    """Entrywise gradient G of H with respect to the big spin matrix,
    computed analytically from the bilinear contraction forms."""
    fam, spin = state.family, state.spin
    M, N = spin.M, spin.N
    P = permutation_P(N)
    m0 = fam.m0()
    grad = [[np.zeros((N, N), dtype=complex) for _ in range(M)]
            for _ in range(M)]
    for i in range(M):
        Sii = spin.block(i, i)
        grad[i][i] += 0.5 * (op_contract(m0, Sii).T
                             + op_contract_1(m0, Sii).T)
    for i in range(M):
        for j in range(i + 1, M):
            W = _swap(fam.F0(state.qdiff(i, j)), N) @ P
            grad[i][j] += op_contract(W, spin.block(j, i)).T
            grad[j][i] += op_contract_1(W, spin.block(i, j)).T
    return block_embed(grad)


def _ham_q_gradient(state):
    """dH/dq_i, analytic through the q-derivative of F^0."""
    fam, spin = state.family, state.spin
    M, N = spin.M, spin.N
    P = permutation_P(N)
    out = [0.0] * M
    for i in range(M):
        for j in range(i + 1, M):
            Wd = _swap(fam.F0(state.qdiff(i, j), d=1), N) @ P
            g = complex(np.trace(Wd @ kron(spin.block(i, j),
                                           spin.block(j, i))))
            out[i] += g
            out[j] -= g
    return out


def bracket_flow(state, observable=None):
    """Hamiltonian flow {H, .} through the linear Poisson-Lie brackets.

    With no observable, returns the full derivative (dq, dp, dSpin) as a
    brute-force oracle for eom_rhs: dq = p, dp = -dH/dq, and the spin flow
    dS = [S, G^T] with G the entrywise spin gradient of H.  An observable
    selector ("q", i), ("p", i), ("S", i, j, a, b) or ("L", z, alpha, beta)
    returns the corresponding component of the flow.
    """
    spin = state.spin
    M, N = spin.M, spin.N
    _require_constraints(state)
    G = _ham_spin_gradient(state)
    S = spin.assemble()
    dS_big = S @ G.T - G.T @ S
    dS = _freeze(block_split(dS_big, M, N))
    dq = tuple(state.p)
    dp = tuple(-g for g in _ham_q_gradient(state))
    if observable is None:
        return dq, dp, dS
    kind = observable[0]
    if kind == "q":
        return dq[observable[1]]
    if kind == "p":
        return dp[observable[1]]
    if kind == "S":
        _, i, j, a, b = observable
        return dS[i][j][a, b]
    if kind == "L":
        _, z, alpha, beta = observable
        return flow_L(state, z)[alpha, beta]
    raise ValueError(f"unknown observable {observable!r}")


def flow_L(state, z):
    """{H, L(z)} assembled by the chain rule from the bracket-side flow."""
    fam, spin = state.family, state.spin
    M, N = spin.M, spin.N
    dq, dp, dS = bracket_flow(state)
    rz = fam.r(z)
    blocks = [[None] * M for _ in range(M)]
    for i in range(M):
        for j in range(M):
            if i == j:
                blocks[i][i] = dp[i] * eye(N) + op_contract(rz, dS[i][i])
            else:
                qij = state.qdiff(i, j)
                blocks[i][j] = _tr2_P(fam.R(z, qij), dS[i][j]) \
                    + (dq[i] - dq[j]) * _tr2_P(fam.F(z, qij),
                                               spin.block(i, j))
    return block_embed(blocks)


def lax_residual(state, z):
    """Relative residual of {H, L(z)} = [L(z), M(z)]."""
    lhs = flow_L(state, z)
    rhs = commutator(build_L(state, z), build_M(state, z))
    scale = max(frobenius_norm(lhs), frobenius_norm(rhs), 1.0)
    return frobenius_norm(lhs - rhs) / scale


# --- classical exchange relation ------------------------------------------

def _lax_grad_tensors(state, z):
    """Per-block four-index gradients T4[a, b', b, a'] of the Lax entries
    L^{ij}_{ab}(z) with respect to their spin block S^{ij}_{a'b'}."""
    fam, spin = state.family, state.spin
    M, N = spin.M, spin.N
    P = permutation_P(N)
    rz4 = as_four_index(fam.r(z), N)
    out = {}
    for i in range(M):
        for j in range(M):
            if i == j:
                out[(i, i)] = rz4
            else:
                out[(i, j)] = as_four_index(
                    fam.R(z, state.qdiff(i, j)) @ P, N)
    return out


def _exchange_lhs(state, z, w):
    """{L_{1'1}(z), L_{2'2}(w)} entrywise by the Poisson-bracket oracle,
    in the primed-first flattening Mat(M) x Mat(M) x Mat(N) x Mat(N)."""
    fam, spin = state.family, state.spin
    M, N = spin.M, spin.N
    P = permutation_P(N)
    T1 = _lax_grad_tensors(state, z)
    T2 = _lax_grad_tensors(state, w)
    D1 = {(i, j): _tr2_P(fam.F(z, state.qdiff(i, j)), spin.block(i, j))
          for i in range(M) for j in range(M) if i != j}
    D2 = {(k, l): _tr2_P(fam.F(w, state.qdiff(k, l)), spin.block(k, l))
          for k in range(M) for l in range(M) if k != l}
    L8 = np.zeros((M, M, N, N, M, M, N, N), dtype=complex)
    I = np.eye(N)
    for i in range(M):
        for j in range(M):
            A4 = T1[(i, j)]
            for k in range(M):
                for l in range(M):
                    B4 = T2[(k, l)]
                    # spin sector of the bracket, both entries linear in S
                    acc = np.zeros((N, N, N, N), dtype=complex)
                    if i == l:
                        acc += np.einsum("cxdw,aybx,wy->abcd",
                                         B4, A4, spin.block(k, j))
                    if k == j:
                        acc -= np.einsum("aybx,cwdy,xw->abcd",
                                         A4, B4, spin.block(i, l))
                    # canonical (p, q) sector
                    if i == j and k != l:
                        acc += (float(i == k) - float(i == l)) \
                            * np.einsum("ab,cd->abcd", I, D2[(k, l)])
                    if i != j and k == l:
                        acc -= (float(k == i) - float(k == j)) \
                            * np.einsum("ab,cd->abcd", D1[(i, j)], I)
                    L8[i, k, :, :, j, l, :, :] += acc.transpose(0, 2, 1, 3)
    dim = M * M * N * N
    return L8.reshape(dim, dim)


def classical_r_big(state, z, w):
    """The dynamical r-matrix on Mat(M)^2 x Mat(N)^2, primed factors first:
    sum_i E_ii x E_ii x r_12(z-w) + sum_{i!=j} E_ij x E_ji x R^{z-w}(q_ij) P."""
    fam, spin = state.family, state.spin
    M, N = spin.M, spin.N
    sf.check_pole(fam.flavor, z - w)
    P = permutation_P(N)
    E = [[np.zeros((M, M)) for _ in range(M)] for _ in range(M)]
    for i in range(M):
        for j in range(M):
            E[i][j][i, j] = 1.0
    out = np.zeros(((M * N) ** 2, (M * N) ** 2), dtype=complex)
    r12 = fam.r(z - w)
    for i in range(M):
        out += kron(E[i][i], E[i][i], r12)
    for i in range(M):
        for j in range(M):
            if i != j:
                out += kron(E[i][j], E[j][i],
                            fam.R(z - w, state.qdiff(i, j)) @ P)
    return out


def _r_big_transposed(state, w, z):
    """r_{2'1'21}(w, z): both primed and unprimed pairs swapped."""
    fam, spin = state.family, state.spin
    M, N = spin.M, spin.N
    P = permutation_P(N)
    E = [[np.zeros((M, M)) for _ in range(M)] for _ in range(M)]
    for i in range(M):
        for j in range(M):
            E[i][j][i, j] = 1.0
    out = np.zeros(((M * N) ** 2, (M * N) ** 2), dtype=complex)
    r12 = _swap(fam.r(w - z), N)
    for i in range(M):
        out += kron(E[i][i], E[i][i], r12)
    for i in range(M):
        for j in range(M):
            if i != j:
                out += kron(E[j][i], E[i][j],
                            _swap(fam.R(w - z, state.qdiff(i, j)) @ P, N))
    return out


def _r_big_q_derivative_sum(state, z, w):
    """sum_k tr(S^kk) d/dq_k of the dynamical r-matrix."""
    fam, spin = state.family, state.spin
    M, N = spin.M, spin.N
    P = permutation_P(N)
    tr = spin.traces()
    E = [[np.zeros((M, M)) for _ in range(M)] for _ in range(M)]
    for i in range(M):
        for j in range(M):
            E[i][j][i, j] = 1.0
    out = np.zeros(((M * N) ** 2, (M * N) ** 2), dtype=complex)
    for i in range(M):
        for j in range(M):
            if i != j:
                out += (tr[i] - tr[j]) * kron(
                    E[i][j], E[j][i],
                    fam.F(z - w, state.qdiff(i, j)) @ P)
    return out


def exchange_residual(state, z, w):
    """Max relative residual of the classical exchange relation
    {L_{1'1}(z), L_{2'2}(w)} = [L_{1'1}(z), r] - [L_{2'2}(w), r_{2'1'21}]
    - sum_k tr(S^kk) d_{q_k} r."""
    spin = state.spin
    M, N = spin.M, spin.N
    _require_constraints(state)
    lhs = _exchange_lhs(state, z, w)

    E = [[np.zeros((M, M)) for _ in range(M)] for _ in range(M)]
    for i in range(M):
        for j in range(M):
            E[i][j][i, j] = 1.0
    L1 = np.zeros(((M * N) ** 2, (M * N) ** 2), dtype=complex)
    L2 = np.zeros_like(L1)
    Lz = block_split(build_L(state, z), M, N)
    Lw = block_split(build_L(state, w), M, N)
    for i in range(M):
        for j in range(M):
            L1 += kron(E[i][j], np.eye(M), Lz[i][j], eye(N))
            L2 += kron(np.eye(M), E[i][j], eye(N), Lw[i][j])

    rb = classical_r_big(state, z, w)
    rbt = _r_big_transposed(state, w, z)
    dr = _r_big_q_derivative_sum(state, z, w)
    c1 = L1 @ rb - rb @ L1
    c2 = L2 @ rbt - rbt @ L2
    rhs = c1 - c2 - dr
    scale = max(frobenius_norm(lhs), frobenius_norm(c1), frobenius_norm(c2),
                frobenius_norm(dr), 1.0)
    return float(np.max(np.abs(lhs - rhs)) / scale)


# --- R-matrix-valued Calogero-Moser Lax pair -------------------------------

def _site_pair_embed(T, a, b, N, M):
    """Embed a two-site operator at chain sites (a, b) of Mat(N)^{x M}."""
    rest = M - 2
    big = np.kron(np.asarray(T, dtype=complex), np.eye(N ** rest))
    big = big.reshape((N,) * (2 * M))
    order = [a, b] + [s for s in range(M) if s not in (a, b)]
    perm = [0] * M
    for pos, s in enumerate(order):
        perm[s] = pos
    axes = [perm[s] for s in range(M)] + [M + perm[s] for s in range(M)]
    return big.transpose(axes).reshape(N ** M, N ** M)


def cm_rmx_lax(q, p, nu, family, z):
    """R-matrix-valued Lax pair of the spinless Calogero-Moser model on
    Mat(M) x Mat(N)^{x M}: returns (L, Mbar) with
    L_ab = d_ab p_a 1 + nu (1 - d_ab) R^z_ab(q_a - q_b) and
    Mbar = M - nu 1_M x F0_total."""
    q = [complex(v) for v in q]
    p = [complex(v) for v in p]
    M = len(q)
    N = family.N
    if N ** M > 256:
        raise ScaleExceeded(f"chain dimension N^M = {N ** M} exceeds 256")
    for a in range(M):
        for b in range(M):
            if a != b:
                sf.check_pole(family.flavor, q[a] - q[b])
    dim = N ** M
    E = np.zeros((M, M))

    def basis(a, b):
        out = np.zeros((M, M))
        out[a, b] = 1.0
        return out

    F0tot = np.zeros((dim, dim), dtype=complex)
    for b in range(M):
        for c in range(b):
            F0tot += _site_pair_embed(family.F0(q[b] - q[c]), b, c, N, M)

    L = np.zeros((M * dim, M * dim), dtype=complex)
    Mbar = np.zeros_like(L)
    for a in range(M):
        L += p[a] * np.kron(basis(a, a), np.eye(dim))
        d_a = np.zeros((dim, dim), dtype=complex)
        for c in range(M):
            if c != a:
                d_a -= _site_pair_embed(family.F0(q[a] - q[c]), a, c, N, M)
        Mbar += nu * np.kron(basis(a, a), d_a)
        for b in range(M):
            if b != a:
                Rab = _site_pair_embed(family.R(z, q[a] - q[b]), a, b, N, M)
                Fab = _site_pair_embed(family.F(z, q[a] - q[b]), a, b, N, M)
                L += nu * np.kron(basis(a, b), Rab)
                Mbar += nu * np.kron(basis(a, b), Fab)
    return L, Mbar


def cm_rmx_residual(q, p, nu, family, z):
    """Relative residual of {H^CM, L} + [nu F0, L] = [L, Mbar], where H^CM
    is the spinless Calogero-Moser Hamiltonian and the bracket uses only
    the canonical (p, q) structure."""
    q = [complex(v) for v in q]
    p = [complex(v) for v in p]
    M = len(q)
    N = family.N
    L, Mbar = cm_rmx_lax(q, p, nu, family, z)
    dim = N ** M

    def basis(a, b):
        out = np.zeros((M, M))
        out[a, b] = 1.0
        return out

    F0tot = np.zeros((dim, dim), dtype=complex)
    for b in range(M):
        for c in range(b):
            F0tot += _site_pair_embed(family.F0(q[b] - q[c]), b, c, N, M)
    F0big = np.kron(np.eye(M), F0tot)

    # {H, L}: dL/dq_m weighted by p_m, minus dH/dq_m times dL/dp_m
    flow = np.zeros_like(L)
    for a in range(M):
        for b in range(M):
            if a != b:
                Fab = _site_pair_embed(family.F(z, q[a] - q[b]), a, b, N, M)
                flow += nu * (p[a] - p[b]) * np.kron(basis(a, b), Fab)
    for a in range(M):
        dH_dqa = 0.0
        for b in range(M):
            if b != a:
                dH_dqa -= nu * nu * sf.eisenstein_E2_prime(
                    family.flavor, q[a] - q[b])
        flow -= dH_dqa * np.kron(basis(a, a), np.eye(dim))

    c0 = nu * (F0big @ L - L @ F0big)
    rhs = L @ Mbar - Mbar @ L
    scale = max(frobenius_norm(flow), frobenius_norm(c0),
                frobenius_norm(rhs), 1.0)
    return frobenius_norm(flow + c0 - rhs) / scale


# --- model configuration ---------------------------------------------------

def _as_complex(value, field):
    if not (isinstance(value, (list, tuple)) and len(value) == 2):
        raise ValueError(f"field {field!r} must be a [re, im] pair")
    return complex(float(value[0]), float(value[1]))


def load_model_config(cfg):
    """Build (family, PhaseState, nu) from the model configuration mapping.

    Schema: {family, N, M, tau?, C?, nu, spin_mode, seed, q0?, p0?}; complex
    values as [re, im] pairs.  Raises ValueError naming the offending field.
    """
    if isinstance(cfg, str):
        with open(cfg) as fh:
            cfg = json.load(fh)
    kind = cfg.get("family")
    if kind not in FAMILY_KEYS:
        raise ValueError(f"field 'family' must be one of {FAMILY_KEYS}")
    try:
        N = int(cfg.get("N", 2))
        M = int(cfg.get("M", 2))
    except (TypeError, ValueError):
        raise ValueError("fields 'N' and 'M' must be positive integers")
    if N < 1 or M < 1:
        raise ValueError("fields 'N' and 'M' must be positive integers")
    tau = _as_complex(cfg["tau"], "tau") if "tau" in cfg else None
    C = _as_complex(cfg["C"], "C") if "C" in cfg else None
    nu_raw = cfg.get("nu")
    if nu_raw is None:
        raise ValueError("field 'nu' is required")
    if nu_raw and isinstance(nu_raw[0], (list, tuple)):
        values = [_as_complex(v, "nu") for v in nu_raw]
        if any(abs(v - values[0]) > 0 for v in values[1:]):
            raise ValueError(
                "field 'nu': per-site traces must be equal; the Lax pair "
                "requires the constraint tr(S^ii) = nu on every site")
        nu = values[0]
    else:
        nu = _as_complex(nu_raw, "nu")
    spin_mode = cfg.get("spin_mode", "general")
    if spin_mode not in ("rank1", "general"):
        raise ValueError("field 'spin_mode' must be 'rank1' or 'general'")
    seed = int(cfg.get("seed", 0))

    family = make_family(kind, N=N, tau=tau, C=C)
    rng = np.random.default_rng(seed)
    if spin_mode == "rank1":
        spin = spin_rank1(M, family.N, nu, rng.integers(2 ** 63))
    else:
        spin = spin_general(M, family.N, nu, rng.integers(2 ** 63))
    if "q0" in cfg:
        q = tuple(_as_complex(v, "q0") for v in cfg["q0"])
        if len(q) != M:
            raise ValueError("field 'q0' must list M positions")
    else:
        q = random_positions(family, M, rng)
    if "p0" in cfg:
        p = tuple(_as_complex(v, "p0") for v in cfg["p0"])
        if len(p) != M:
            raise ValueError("field 'p0' must list M momenta")
    else:
        p = tuple(rng.uniform(-1, 1, M) + 1j * rng.uniform(-1, 1, M))
    return family, PhaseState(q, p, spin, family), nu
