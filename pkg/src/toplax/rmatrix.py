"""Quantum R-matrix families with classical-expansion data and certification.

Each family exposes the quantum matrix R(hbar, z) on Mat(N) x Mat(N), its
z-derivatives, the classical coefficients r(z), m(z) from the hbar-expansion
R = 1/hbar + r + hbar*m + O(hbar^2), and the small-z expansion coefficients.
The certify() routine measures the residual of every identity the Lax
construction relies on.
"""

import cmath

import numpy as np

from . import specfun as sf
from .errors import PoleProximity
from .tensor import (all_sectors, eye, kron, permutation_P, sin_basis_T_int,
                     partial_trace_1, partial_trace_2, frobenius_norm)


class RMatrixFamily:
    """Base interface: N, scalar flavor, quantum R and classical data."""

    kind = None

    def __init__(self, N, flavor):
        self.N = int(N)
        self.flavor = flavor
        self._P = permutation_P(self.N)
        self._I = eye(self.N * self.N)

    # quantum matrix; dz = derivative order in the argument z (0, 1 or 2)
    def R(self, hbar, z, dz=0):
        raise NotImplementedError

    # classical r-matrix; d = derivative order in z (0, 1 or 2)
    def r(self, z, d=0):
        raise NotImplementedError

    def m(self, z):
        raise NotImplementedError

    def m0(self):
        return self.m(0.0)

    def r0(self):
        """Constant coefficient of r(z) = P/z + r0 + z*r1 + O(z^2)."""
        raise NotImplementedError

    def r1(self):
        """Linear coefficient of r(z) near 0, equal to m(0) P."""
        return self.m0() @ self._P

    def Rz0(self, z):
        """Constant q-coefficient of R^z(q) near q=0, equal to r(z) P."""
        return self.r(z) @ self._P

    def Rz1(self, z):
        """Linear q-coefficient of R^z(q) near q=0, equal to m(z) P."""
        return self.m(z) @ self._P

    def F(self, spectral, q, dq=0):
        """F^z(q) = d/dq R^z(q) and its further q-derivative."""
        return self.R(spectral, q, dz=1 + dq)

    def F0(self, q, d=0):
        """F^0(q) = d/dq r(q) and its further q-derivative."""
        return self.r(q, d=1 + d)

    def pole_distance(self, z):
        return sf.pole_distance(self.flavor, z)

    def scalar_phi(self, eta, z):
        """The scalar kernel in the family's flavor (N=1 reduction)."""
        return sf.kronecker_phi(self.flavor, eta, z)

    def wp(self, z):
        return sf.weierstrass_p(self.flavor, z)

    def params(self):
        return {}

    def label(self):
        return self.kind


class YangXXX(RMatrixFamily):
    """Rational R-matrix 1/hbar + P/z for any N (N=1 is the scalar kernel)."""

    kind = "xxx"

    def __init__(self, N=2):
        super().__init__(N, sf.Flavor.rational())

    def R(self, hbar, z, dz=0):
        hbar = complex(hbar)
        z = complex(z)
        sf.check_pole(self.flavor, hbar, z)
        if dz == 0:
            return self._I / hbar + self._P / z
        if dz == 1:
            return -self._P / z ** 2
        if dz == 2:
            return 2.0 * self._P / z ** 3
        raise ValueError("dz must be 0, 1 or 2")

    def r(self, z, d=0):
        z = complex(z)
        sf.check_pole(self.flavor, z)
        if d == 0:
            return self._P / z
        if d == 1:
            return -self._P / z ** 2
        if d == 2:
            return 2.0 * self._P / z ** 3
        raise ValueError("d must be 0, 1 or 2")

    def m(self, z):
        return np.zeros((self.N * self.N, self.N * self.N), dtype=complex)

    def r0(self):
        return np.zeros((self.N * self.N, self.N * self.N), dtype=complex)


class SevenVertex(RMatrixFamily):
    """Trigonometric deformation of the XXZ matrix with corner constant C."""

    kind = "7v"

    def __init__(self, C):
        super().__init__(2, sf.Flavor.trigonometric())
        self.C = complex(C)

    def params(self):
        return {"C": [self.C.real, self.C.imag]}

    def R(self, hbar, z, dz=0):
        hbar = complex(hbar)
        z = complex(z)
        sf.check_pole(self.flavor, hbar, z)
        sh, ch = cmath.sinh(z), cmath.cosh(z)
        shh = cmath.sinh(hbar)
        out = np.zeros((4, 4), dtype=complex)
        if dz == 0:
            diag = ch / sh + cmath.cosh(hbar) / shh
            out[0, 0] = out[3, 3] = diag
            out[1, 1] = out[2, 2] = 1.0 / shh
            out[1, 2] = out[2, 1] = 1.0 / sh
            out[3, 0] = self.C * cmath.sinh(z + hbar)
        elif dz == 1:
            out[0, 0] = out[3, 3] = -1.0 / sh ** 2
            out[1, 2] = out[2, 1] = -ch / sh ** 2
            out[3, 0] = self.C * cmath.cosh(z + hbar)
        elif dz == 2:
            out[0, 0] = out[3, 3] = 2.0 * ch / sh ** 3
            out[1, 2] = out[2, 1] = (2.0 * ch * ch - sh * sh) / sh ** 3
            out[3, 0] = self.C * cmath.sinh(z + hbar)
        else:
            raise ValueError("dz must be 0, 1 or 2")
        return out

    def r(self, z, d=0):
        z = complex(z)
        sf.check_pole(self.flavor, z)
        sh, ch = cmath.sinh(z), cmath.cosh(z)
        out = np.zeros((4, 4), dtype=complex)
        if d == 0:
            out[0, 0] = out[3, 3] = ch / sh
            out[1, 2] = out[2, 1] = 1.0 / sh
            out[3, 0] = self.C * sh
        elif d == 1:
            out[0, 0] = out[3, 3] = -1.0 / sh ** 2
            out[1, 2] = out[2, 1] = -ch / sh ** 2
            out[3, 0] = self.C * ch
        elif d == 2:
            out[0, 0] = out[3, 3] = 2.0 * ch / sh ** 3
            out[1, 2] = out[2, 1] = (2.0 * ch * ch - sh * sh) / sh ** 3
            out[3, 0] = self.C * sh
        else:
            raise ValueError("d must be 0, 1 or 2")
        return out

    def m(self, z):
        z = complex(z)
        out = np.diag(np.array([1, -0.5, -0.5, 1], dtype=complex)) / 3.0
        out[3, 0] = self.C * cmath.cosh(z)
        return out

    def r0(self):
        return np.zeros((4, 4), dtype=complex)


class SixVertexXXZ(SevenVertex):
    """XXZ 6-vertex matrix, the C = 0 limit of the deformed family."""

    kind = "xxz"

    def __init__(self):
        super().__init__(0.0)

    def params(self):
        return {}


class ElevenVertex(RMatrixFamily):
    """Rational deformation of Yang's matrix at N = 2."""

    kind = "11v"

    def __init__(self):
        super().__init__(2, sf.Flavor.rational())

    def R(self, hbar, z, dz=0):
        h = complex(hbar)
        z = complex(z)
        sf.check_pole(self.flavor, h, z)
        out = np.zeros((4, 4), dtype=complex)
        if dz == 0:
            out[0, 0] = out[3, 3] = 1.0 / h + 1.0 / z
            out[1, 1] = out[2, 2] = 1.0 / h
            out[1, 2] = out[2, 1] = 1.0 / z
            out[1, 0] = out[2, 0] = -h - z
            out[3, 1] = out[3, 2] = h + z
            out[3, 0] = -h ** 3 - 2 * z * h ** 2 - 2 * h * z ** 2 - z ** 3
        elif dz == 1:
            out[0, 0] = out[3, 3] = -1.0 / z ** 2
            out[1, 2] = out[2, 1] = -1.0 / z ** 2
            out[1, 0] = out[2, 0] = -1.0
            out[3, 1] = out[3, 2] = 1.0
            out[3, 0] = -2 * h ** 2 - 4 * h * z - 3 * z ** 2
        elif dz == 2:
            out[0, 0] = out[3, 3] = 2.0 / z ** 3
            out[1, 2] = out[2, 1] = 2.0 / z ** 3
            out[3, 0] = -4 * h - 6 * z
        else:
            raise ValueError("dz must be 0, 1 or 2")
        return out

    def r(self, z, d=0):
        z = complex(z)
        sf.check_pole(self.flavor, z)
        out = np.zeros((4, 4), dtype=complex)
        if d == 0:
            out[0, 0] = out[3, 3] = 1.0 / z
            out[1, 2] = out[2, 1] = 1.0 / z
            out[1, 0] = out[2, 0] = -z
            out[3, 1] = out[3, 2] = z
            out[3, 0] = -z ** 3
        elif d == 1:
            out[0, 0] = out[3, 3] = -1.0 / z ** 2
            out[1, 2] = out[2, 1] = -1.0 / z ** 2
            out[1, 0] = out[2, 0] = -1.0
            out[3, 1] = out[3, 2] = 1.0
            out[3, 0] = -3 * z ** 2
        elif d == 2:
            out[0, 0] = out[3, 3] = 2.0 / z ** 3
            out[1, 2] = out[2, 1] = 2.0 / z ** 3
            out[3, 0] = -6 * z
        else:
            raise ValueError("d must be 0, 1 or 2")
        return out

    def m(self, z):
        z = complex(z)
        out = np.zeros((4, 4), dtype=complex)
        out[1, 0] = out[2, 0] = -1.0
        out[3, 1] = out[3, 2] = 1.0
        out[3, 0] = -2 * z ** 2
        return out

    def r0(self):
        return np.zeros((4, 4), dtype=complex)


class BaxterBelavin(RMatrixFamily):
    """Elliptic R-matrix in the Heisenberg sector basis, normalized so that
    the expansion and symmetry properties hold with unit coefficients."""

    kind = "bb"

    def __init__(self, N=2, tau=1j):
        super().__init__(N, sf.Flavor.elliptic(tau))
        self.tau = self.flavor.tau
        self._sectors = all_sectors(self.N)
        # tensor-basis elements T_a (x) T_{-a} (integer-negated label)
        self._TT = {(a.a1, a.a2): kron(sin_basis_T_int(a.a1, a.a2, self.N),
                                       sin_basis_T_int(-a.a1, -a.a2, self.N))
                    for a in self._sectors}

    def params(self):
        return {"tau": [self.tau.real, self.tau.imag]}

    def label(self):
        return f"bb(N={self.N})"

    def R(self, hbar, z, dz=0):
        hbar = complex(hbar)
        z = complex(z)
        N = self.N
        out = np.zeros((N * N, N * N), dtype=complex)
        for a in self._sectors:
            coeff = sf.sector_phi_dz(self.flavor, a, z, hbar / N, order=dz)
            out += coeff * self._TT[(a.a1, a.a2)]
        return out / N

    def r(self, z, d=0):
        z = complex(z)
        N = self.N
        if d == 0:
            scal = sf.eisenstein_E1(self.flavor, z)
        elif d == 1:
            scal = -sf.eisenstein_E2(self.flavor, z)
        elif d == 2:
            scal = -sf.eisenstein_E2_prime(self.flavor, z)
        else:
            raise ValueError("d must be 0, 1 or 2")
        out = scal * self._I
        for a in self._sectors:
            if a.is_zero():
                continue
            coeff = sf.sector_phi_dz(self.flavor, a, z, 0.0, order=d)
            out += coeff * self._TT[(a.a1, a.a2)]
        return out / N

    def m0(self):
        # z -> 0 limit: the scalar part tends to kappa/3, the sector part
        # to f(0, omega_a) = -E2(omega_a)
        N = self.N
        out = (sf.kappa_const(self.flavor) / 3.0) * self._I
        for a in self._sectors:
            if a.is_zero():
                continue
            out -= sf.eisenstein_E2(self.flavor, a.omega(self.tau)) \
                * self._TT[(a.a1, a.a2)]
        return out / (N * N)

    def m(self, z):
        z = complex(z)
        if abs(z) < 1e-12:
            return self.m0()
        N = self.N
        e1 = sf.eisenstein_E1(self.flavor, z)
        scal = (e1 * e1 - sf.weierstrass_p(self.flavor, z)) / 2.0
        out = scal * self._I
        for a in self._sectors:
            if a.is_zero():
                continue
            out += sf.sector_f(self.flavor, a, z, 0.0) \
                * self._TT[(a.a1, a.a2)]
        return out / (N * N)

    def r0(self):
        N = self.N
        out = np.zeros((N * N, N * N), dtype=complex)
        for a in self._sectors:
            if a.is_zero():
                continue
            c = 2j * cmath.pi * a.a2 / N
            out += (sf.eisenstein_E1(self.flavor, a.omega(self.tau)) + c) \
                * self._TT[(a.a1, a.a2)]
        return out / N


FAMILY_KEYS = ("xxx", "11v", "xxz", "7v", "bb")


def make_family(kind, N=2, tau=None, C=None):
    """Construct a family from its CLI/config key."""
    if kind == "xxx":
        return YangXXX(N)
    if kind == "11v":
        return ElevenVertex()
    if kind == "xxz":
        return SixVertexXXZ()
    if kind == "7v":
        if C is None:
            raise ValueError("7v family requires the constant C")
        return SevenVertex(C)
    if kind == "bb":
        if tau is None:
            raise ValueError("bb family requires the modulus tau")
        return BaxterBelavin(N, tau)
    raise ValueError(f"unknown family {kind!r}")


# --- three-site embeddings ------------------------------------------------

def embed12(T, N):
    return kron(np.asarray(T, dtype=complex), eye(N))


def embed23(T, N):
    return kron(eye(N), np.asarray(T, dtype=complex))


def embed13(T, N):
    T4 = np.asarray(T, dtype=complex).reshape(N, N, N, N)
    out = np.einsum("ikjl,ab->iakjbl", T4, eye(N))
    return out.reshape(N ** 3, N ** 3)


def swap_sites(T, N):
    """Conjugate a two-site operator by the factor swap: T_12 -> T_21."""
    P = permutation_P(N)
    return P @ np.asarray(T, dtype=complex) @ P


def perm13(N):
    """Permutation of sites 1 and 3 on Mat(N)^3."""
    out = np.zeros((N ** 3, N ** 3), dtype=complex)
    for i in range(N):
        for j in range(N):
            for k in range(N):
                out[i * N * N + j * N + k, k * N * N + j * N + i] = 1.0
    return out


def perm23(N):
    out = np.zeros((N ** 3, N ** 3), dtype=complex)
    for i in range(N):
        for j in range(N):
            for k in range(N):
                out[i * N * N + j * N + k, i * N * N + k * N + j] = 1.0
    return out


# --- certification --------------------------------------------------------

def _rel(diff, *terms):
    scale = max(frobenius_norm(t) for t in terms)
    if scale == 0.0:
        return frobenius_norm(diff)
    return frobenius_norm(diff) / scale


def _draw(rng, family, margin=0.05):
    return sf.sample_point(rng, family.flavor, eps=margin)


def _draw_many(rng, family, count, extra=(), margin=0.05):
    """Draw count scalars such that all pairwise sums/differences and any
    requested linear combinations stay off the pole set."""
    for _ in range(2000):
        pts = [_draw(rng, family, margin) for _ in range(count)]
        combos = list(pts)
        for i in range(count):
            for j in range(i + 1, count):
                combos.append(pts[i] + pts[j])
                combos.append(pts[i] - pts[j])
        for coeffs in extra:
            combos.append(sum(c * p for c, p in zip(coeffs, pts)))
        if all(family.pole_distance(c) > margin for c in combos):
            return pts
    raise RuntimeError("failed to draw pole-avoiding arguments")


def measure_r1(family, q0=0.05):
    """Finite-difference oracle for the linear coefficient of r(z) near 0.

    Uses the odd part of r to cancel r0 and r2, then two Richardson levels
    to cancel the q^2 and q^4 corrections.
    """
    P = permutation_P(family.N)

    def g(q):
        odd = 0.5 * (family.r(q) - family.r(-q))
        return (odd - P / q) / q

    g1, g2, g3 = g(q0), g(q0 / 2), g(q0 / 4)
    h1 = (4.0 * g2 - g1) / 3.0
    h2 = (4.0 * g3 - g2) / 3.0
    return (16.0 * h2 - h1) / 15.0


def certify(family, n_samples, seed, tol):
    """Residual report for every R-matrix identity used by the construction.

    Returns {"family", "N", "params", "properties": {name: {max_residual,
    samples, tol, pass}}} plus the measured trace scalars.
    """
    rng = np.random.default_rng(seed)
    N = family.N
    I2 = eye(N * N)
    I3 = eye(N ** 3)
    P = permutation_P(N)
    P13 = perm13(N)
    P23 = perm23(N)
    worst = {}
    scalars = {"phi_tilde": [], "E1_tilde": []}

    def record(name, value):
        worst[name] = max(worst.get(name, 0.0), value)

    m0 = family.m0()
    r0 = family.r0()
    r1 = family.r1()
    r0_23 = embed23(r0, N)
    r1_12 = embed12(r1, N)
    r1_23 = embed23(r1, N)
    m0_23 = embed23(m0, N)

    for _ in range(n_samples):
        hb, et, z, w = _draw_many(
            rng, family, 4,
            extra=[(1, -1, 0, 0), (0, 0, 1, 1), (1, 0, 1, 0), (0, 1, 1, 0)])
        x, y = _draw_many(rng, family, 2, extra=[(1, 1)])

        # (i) associative Yang-Baxter relation; z, w play q12, q23
        q12, q23 = z, w
        lhs = embed12(family.R(hb, q12), N) @ embed23(family.R(et, q23), N)
        t1 = embed13(family.R(et, q12 + q23), N) @ embed12(
            family.R(hb - et, q12), N)
        t2 = embed23(family.R(et - hb, q23), N) @ embed13(
            family.R(hb, q12 + q23), N)
        record("aybe", _rel(lhs - t1 - t2, lhs, t1, t2))

        # (ii) skew-symmetry
        A = family.R(hb, z)
        B = -P @ family.R(-hb, -z) @ P
        record("skew_symmetry", _rel(A - B, A, B))

        # (iii) unitarity: product is scalar, scalar equals wp(hb) - wp(z)
        prod = A @ (P @ family.R(hb, -z) @ P)
        scal = np.trace(prod) / (N * N)
        record("unitarity_scalar", _rel(prod - scal * I2, prod))
        target = family.wp(hb) - family.wp(z)
        denom = max(abs(scal), abs(target), 1.0)
        record("unitarity_value", abs(scal - target) / denom)

        # (iv) Fourier symmetry
        lhs = A @ P
        rhs = family.R(z, hb)
        record("fourier_symmetry", _rel(lhs - rhs, lhs, rhs))

        # (vi) partial traces are scalar; record the measured functions
        trR = partial_trace_1(family.R(w, z))
        phit = np.trace(trR) / N
        record("trace_scalar", _rel(trR - phit * eye(N), trR))
        trR2 = partial_trace_2(family.R(w, z))
        record("trace_scalar", _rel(trR2 - phit * eye(N), trR2))
        tr_r = partial_trace_1(family.r(z))
        e1t = np.trace(tr_r) / N
        record("trace_scalar_r", _rel(tr_r - e1t * eye(N), tr_r))
        scalars["phi_tilde"].append([phit.real, phit.imag])
        scalars["E1_tilde"].append([e1t.real, e1t.imag])

        # (vii) mixed relation between R and its argument derivative
        a1 = embed12(family.R(z, x), N) @ embed23(family.F(z, y), N)
        a2 = embed12(family.F(z, x), N) @ embed23(family.R(z, y), N)
        b1 = embed23(family.F0(y), N) @ embed13(family.R(z, x + y), N)
        b2 = embed13(family.R(z, x + y), N) @ embed12(family.F0(x), N)
        record("mixed_rf", _rel(a1 - a2 - b1 + b2, a1, a2, b1, b2))

        # (viii) boundary degenerations of the mixed relation
        Rz0 = family.Rz0(z)
        Rz1 = family.Rz1(z)
        Rx = embed13(family.R(z, x), N)
        a1 = embed12(family.R(z, x), N) @ embed23(Rz1, N)
        a2 = embed12(family.F(z, x), N) @ embed23(Rz0, N)
        b1 = r1_23 @ Rx
        b2 = Rx @ embed12(family.F0(x), N)
        b3 = 0.5 * P23 @ embed13(family.R(z, x, dz=2), N)
        record("mixed_rf_limit_y",
               _rel(a1 - a2 - b1 + b2 + b3, a1, a2, b1, b2, b3))

        Ry = embed13(family.R(z, y), N)
        a1 = embed12(Rz0, N) @ embed23(family.F(z, y), N)
        a2 = embed12(Rz1, N) @ embed23(family.R(z, y), N)
        b1 = embed23(family.F0(y), N) @ Ry
        b2 = Ry @ r1_12
        b3 = 0.5 * embed13(family.R(z, y, dz=2), N) @ kron(P, eye(N))
        record("mixed_rf_limit_x",
               _rel(a1 - a2 - b1 + b2 - b3, a1, a2, b1, b2, b3))

        # (ix) opposite-argument product in commutator form
        q = x
        lhs = embed12(family.R(z, q), N) @ embed23(family.R(z, -q), N)
        r13z = embed13(family.r(z), N)
        r32q = embed23(swap_sites(family.r(q), N), N)
        c1 = r13z @ r32q @ P13
        c2 = r32q @ r13z @ P13
        c3 = embed13(family.F0(z), N) @ P13
        c4 = embed23(swap_sites(family.F0(q), N), N) @ P13
        record("q_product", _rel(lhs - c1 + c2 + c3 - c4, lhs, c1, c2, c3, c4))

        # (x) half of the classical Yang-Baxter relation and its w->0 limit
        p1 = embed12(family.r(z), N) @ embed13(family.r(z + w), N)
        p2 = embed23(family.r(w), N) @ embed12(family.r(z), N)
        p3 = embed13(family.r(z + w), N) @ embed23(family.r(w), N)
        m1 = embed12(family.m(z), N)
        m2 = embed23(family.m(w), N)
        m3 = embed13(family.m(z + w), N)
        record("half_cybe",
               _rel(p1 - p2 + p3 - m1 - m2 - m3, p1, p2, p3, m1, m2, m3, I3))

        r12z = embed12(family.r(z), N)
        r13zz = embed13(family.r(z), N)
        p1 = r12z @ r13zz
        c1 = r0_23 @ r12z
        c2 = r13zz @ r0_23
        c3 = embed13(family.F0(z), N) @ P23
        m1 = embed12(family.m(z), N)
        m3 = embed13(family.m(z), N)
        record("half_cybe_limit",
               _rel(p1 - c1 + c2 + c3 - m1 - m0_23 - m3,
                    p1, c1, c2, c3, m1, m0_23, m3, I3))

    # (v) classical expansion order: the hbar^2 tail halves like hbar^2
    z = _draw_many(rng, family, 1)[0]
    rz = family.r(z)
    mz = family.m(z)

    def tail(h):
        return frobenius_norm(family.R(h, z) - I2 / h - rz - h * mz)

    t_a, t_b = tail(1e-2), tail(5e-3)
    if t_a < 1e-12:
        record("classical_expansion", 0.0)
    else:
        # tail must shrink at least quadratically when hbar halves; some
        # families have a vanishing hbar^2 term and decay even faster
        ratio = t_a / t_b
        record("classical_expansion",
               0.0 if ratio >= 3.5 else abs(ratio - 4.0))

    # (xi) linear coefficient of r equals m(0) P, measured independently
    r1_meas = measure_r1(family)
    record("r1_is_m0P", _rel(r1_meas - r1, r1_meas, r1))

    properties = {}
    for name, value in worst.items():
        properties[name] = {
            "max_residual": value,
            "samples": int(n_samples),
            "tol": tol,
            "pass": bool(value < tol),
        }
    return {
        "family": family.kind,
        "N": family.N,
        "params": family.params(),
        "seed": int(seed),
        "properties": properties,
        "measured_phi_tilde": scalars["phi_tilde"][:3],
        "measured_E1_tilde": scalars["E1_tilde"][:3],
    }
