"""Scalar special functions in three flavors and their identity residuals.

The rational, trigonometric and elliptic flavors share one interface: the
two-variable kernel function phi, the Eisenstein functions E1 and E2, the
Weierstrass function, and the q-derivative f of phi.  The elliptic flavor is
built on an odd theta series whose derivatives are summed term-wise.
"""

import cmath
from dataclasses import dataclass

import numpy as np

from ._accel import theta_sum
from .errors import BadModulus, NonConvergent, PoleProximity

RATIONAL = "rational"
TRIGONOMETRIC = "trigonometric"
ELLIPTIC = "elliptic"

MIN_IM_TAU = 0.05
POLE_EPS = 1e-6
THETA_CAP = 200

TWO_PI_I = 2j * cmath.pi


@dataclass(frozen=True)
class Flavor:
    """Which degeneration of the elliptic function family to evaluate.

    For the elliptic flavor, ``tau`` is the modulus (Im tau >= 0.05) and
    ``trunc_tol`` controls theta-series truncation.
    """

    kind: str
    tau: complex = None
    trunc_tol: float = 1e-16

    def __post_init__(self):
        if self.kind not in (RATIONAL, TRIGONOMETRIC, ELLIPTIC):
            raise ValueError(f"unknown flavor kind {self.kind!r}")
        if not 0.0 < self.trunc_tol <= 1e-8:
            raise ValueError("trunc_tol must lie in (0, 1e-8]")
        if self.kind == ELLIPTIC:
            if self.tau is None:
                raise BadModulus("elliptic flavor requires a modulus")
            object.__setattr__(self, "tau", complex(self.tau))
            if self.tau.imag < MIN_IM_TAU:
                raise BadModulus(
                    f"Im(tau) = {self.tau.imag:.4f} below {MIN_IM_TAU}")
        elif self.tau is not None:
            raise ValueError("tau is only meaningful for the elliptic flavor")

    @classmethod
    def rational(cls):
        return cls(RATIONAL)

    @classmethod
    def trigonometric(cls):
        return cls(TRIGONOMETRIC)

    @classmethod
    def elliptic(cls, tau, trunc_tol=1e-16):
        return cls(ELLIPTIC, complex(tau), trunc_tol)


@dataclass(frozen=True)
class SectorIndex:
    """Discrete label a = (a1, a2) in Z_N x Z_N for the sector functions."""

    a1: int
    a2: int
    N: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be positive")
        if not (0 <= self.a1 < self.N and 0 <= self.a2 < self.N):
            raise ValueError("components must lie in [0, N)")

    def omega(self, tau):
        """Lattice fraction (a1 + a2*tau)/N attached to this sector."""
        return (self.a1 + self.a2 * tau) / self.N

    def __neg__(self):
        return SectorIndex((-self.a1) % self.N, (-self.a2) % self.N, self.N)

    def __add__(self, other):
        if self.N != other.N:
            raise ValueError("mismatched N")
        return SectorIndex((self.a1 + other.a1) % self.N,
                           (self.a2 + other.a2) % self.N, self.N)

    def is_zero(self):
        return self.a1 == 0 and self.a2 == 0


def theta(z, tau, deriv=0, trunc_tol=1e-16, cap=THETA_CAP):
    """Odd theta function (or its deriv-th derivative) at z on modulus tau."""
    tau = complex(tau)
    if tau.imag < MIN_IM_TAU:
        raise BadModulus(f"Im(tau) = {tau.imag:.4f} below {MIN_IM_TAU}")
    value, ok, _ = theta_sum(complex(z), tau, deriv, trunc_tol, cap)
    if not ok:
        raise NonConvergent(
            f"theta series did not converge within |k| <= {cap}")
    return value


def _theta_derivs(z, tau, upto, trunc_tol):
    return [theta(z, tau, deriv=d, trunc_tol=trunc_tol)
            for d in range(upto + 1)]


def pole_distance(flavor, z):
    """Distance from z to the flavor's pole set."""
    z = complex(z)
    if flavor.kind == RATIONAL:
        return abs(z)
    if flavor.kind == TRIGONOMETRIC:
        # poles at i*pi*Z
        k = round(z.imag / cmath.pi)
        return abs(complex(z.real, z.imag - k * cmath.pi))
    tau = flavor.tau
    # poles at m + n*tau: invert the lattice coordinates, scan neighbors
    b = z.imag / tau.imag
    a = z.real - b * tau.real
    best = float("inf")
    for n in (int(np.floor(b)), int(np.floor(b)) + 1):
        for m in (int(np.floor(a)), int(np.floor(a)) + 1):
            best = min(best, abs(z - (m + n * tau)))
    return best


def check_pole(flavor, *args, eps=POLE_EPS):
    """Raise PoleProximity if any argument sits within eps of a pole."""
    for z in args:
        d = pole_distance(flavor, z)
        if d <= eps:
            raise PoleProximity(complex(z), d)


def kappa_const(flavor):
    """The third-log-derivative constant theta'''(0)/theta'(0) per flavor.

    Controls the z^1 coefficient of E1 near 0; equals 0 (rational),
    1 (trigonometric, from sinh), and the theta ratio (elliptic).
    """
    if flavor.kind == RATIONAL:
        return 0.0 + 0.0j
    if flavor.kind == TRIGONOMETRIC:
        return 1.0 + 0.0j
    t1 = theta(0.0, flavor.tau, deriv=1, trunc_tol=flavor.trunc_tol)
    t3 = theta(0.0, flavor.tau, deriv=3, trunc_tol=flavor.trunc_tol)
    return t3 / t1


def eisenstein_E1(flavor, z):
    z = complex(z)
    check_pole(flavor, z)
    if flavor.kind == RATIONAL:
        return 1.0 / z
    if flavor.kind == TRIGONOMETRIC:
        return cmath.cosh(z) / cmath.sinh(z)
    t0, t1 = _theta_derivs(z, flavor.tau, 1, flavor.trunc_tol)
    return t1 / t0


def eisenstein_E2(flavor, z):
    """Second Eisenstein function, -d/dz E1(z)."""
    z = complex(z)
    check_pole(flavor, z)
    if flavor.kind == RATIONAL:
        return 1.0 / z ** 2
    if flavor.kind == TRIGONOMETRIC:
        return 1.0 / cmath.sinh(z) ** 2
    t0, t1, t2 = _theta_derivs(z, flavor.tau, 2, flavor.trunc_tol)
    g = t1 / t0
    return g * g - t2 / t0


def eisenstein_E2_prime(flavor, z):
    """d/dz E2(z), needed for derivative kernels in the dynamics."""
    z = complex(z)
    check_pole(flavor, z)
    if flavor.kind == RATIONAL:
        return -2.0 / z ** 3
    if flavor.kind == TRIGONOMETRIC:
        sh = cmath.sinh(z)
        return -2.0 * cmath.cosh(z) / sh ** 3
    t0, t1, t2, t3 = _theta_derivs(z, flavor.tau, 3, flavor.trunc_tol)
    g = t1 / t0
    gp = t2 / t0 - g * g
    gpp = t3 / t0 - (t2 / t0) * g - 2.0 * g * gp
    return -gpp


def weierstrass_p(flavor, z):
    """Weierstrass function: E2 plus the flavor's additive constant."""
    z = complex(z)
    if flavor.kind == ELLIPTIC:
        return eisenstein_E2(flavor, z) + kappa_const(flavor) / 3.0
    return eisenstein_E2(flavor, z)


def kronecker_phi(flavor, eta, z):
    """Two-variable kernel function phi(eta, z); symmetric in its arguments."""
    eta = complex(eta)
    z = complex(z)
    check_pole(flavor, eta, z, eta + z)
    if flavor.kind == RATIONAL:
        return 1.0 / eta + 1.0 / z
    if flavor.kind == TRIGONOMETRIC:
        return (cmath.cosh(eta) / cmath.sinh(eta)
                + cmath.cosh(z) / cmath.sinh(z))
    tol = flavor.trunc_tol
    tau = flavor.tau
    return (theta(0.0, tau, deriv=1, trunc_tol=tol)
            * theta(eta + z, tau, trunc_tol=tol)
            / (theta(eta, tau, trunc_tol=tol) * theta(z, tau, trunc_tol=tol)))


def phi_derivative_f(flavor, z, q):
    """f(z, q) = d/dq phi(z, q), via the closed form phi*(E1(z+q) - E1(q))."""
    z = complex(z)
    q = complex(q)
    check_pole(flavor, z, q, z + q)
    return kronecker_phi(flavor, z, q) * (
        eisenstein_E1(flavor, z + q) - eisenstein_E1(flavor, q))


def phi_dz(flavor, z, u, order=1):
    """Derivative of phi(z, u) in its first argument, order 0, 1 or 2."""
    z = complex(z)
    u = complex(u)
    check_pole(flavor, z, u, z + u)
    p = kronecker_phi(flavor, z, u)
    if order == 0:
        return p
    d = eisenstein_E1(flavor, z + u) - eisenstein_E1(flavor, z)
    if order == 1:
        return p * d
    if order == 2:
        dp = eisenstein_E2(flavor, z) - eisenstein_E2(flavor, z + u)
        return p * (d * d + dp)
    raise ValueError("order must be 0, 1 or 2")


def sector_phi(flavor, a, z, u):
    """phi_a(z, omega_a + u) = exp(2*pi*i*a2*z/N) * phi(z, omega_a + u)."""
    if flavor.kind != ELLIPTIC:
        raise ValueError("sector functions require the elliptic flavor")
    z = complex(z)
    arg = a.omega(flavor.tau) + complex(u)
    return cmath.exp(TWO_PI_I * a.a2 * z / a.N) * kronecker_phi(flavor, z, arg)


def sector_f(flavor, a, z, u):
    """f_a(z, omega_a + u) = exp(2*pi*i*a2*z/N) * f(z, omega_a + u)."""
    if flavor.kind != ELLIPTIC:
        raise ValueError("sector functions require the elliptic flavor")
    z = complex(z)
    arg = a.omega(flavor.tau) + complex(u)
    return (cmath.exp(TWO_PI_I * a.a2 * z / a.N)
            * phi_derivative_f(flavor, z, arg))


def sector_phi_dz(flavor, a, z, u, order=1):
    """Derivative of phi_a(z, omega_a + u) in z, order 0, 1 or 2.

    The exponential prefactor contributes c = 2*pi*i*a2/N per product rule.
    """
    if flavor.kind != ELLIPTIC:
        raise ValueError("sector functions require the elliptic flavor")
    z = complex(z)
    arg = a.omega(flavor.tau) + complex(u)
    check_pole(flavor, z, arg, z + arg)
    pref = cmath.exp(TWO_PI_I * a.a2 * z / a.N)
    p = kronecker_phi(flavor, z, arg)
    if order == 0:
        return pref * p
    c = TWO_PI_I * a.a2 / a.N
    d = eisenstein_E1(flavor, z + arg) - eisenstein_E1(flavor, z)
    if order == 1:
        return pref * p * (c + d)
    if order == 2:
        dp = eisenstein_E2(flavor, z) - eisenstein_E2(flavor, z + arg)
        return pref * p * ((c + d) ** 2 + dp)
    raise ValueError("order must be 0, 1 or 2")


def sample_point(rng, flavor, eps=1e-2):
    """Draw one pole-avoiding complex argument for identity sampling.

    Rational/trigonometric: uniform in the unit box centered at 0.5 + 0.25i.
    Elliptic: uniform in the fundamental cell spanned by 1 and tau.
    Redraws until the point clears the margin eps (coarser than the pole
    guard, so that differences and sums of samples stay well-conditioned).
    """
    for _ in range(1000):
        if flavor.kind == ELLIPTIC:
            z = rng.random() + rng.random() * flavor.tau
        else:
            z = complex(rng.random(), rng.random() - 0.25)
        if pole_distance(flavor, z) > eps:
            return z
    raise RuntimeError("sampling failed to clear the pole margin")


def _rel(residual, *terms):
    scale = max(abs(t) for t in terms)
    if scale == 0.0:
        return abs(residual)
    return abs(residual) / scale


def _sample_tuple(rng, flavor, count, eps=1e-2):
    """Draw count points whose pairwise sums/differences clear the margin."""
    for _ in range(1000):
        pts = [sample_point(rng, flavor, eps) for _ in range(count)]
        combos = list(pts)
        for i in range(count):
            for j in range(count):
                if i != j:
                    combos.append(pts[i] + pts[j])
                    combos.append(pts[i] - pts[j])
        if all(pole_distance(flavor, c) > eps for c in combos):
            return pts
    raise RuntimeError("tuple sampling failed to clear the pole margin")


def _local_expansion_residuals(flavor, u):
    """Residuals of the small-z expansions of phi(z, u) and E1(z) at |z|=1e-3.

    phi(z,u) = 1/z + E1(u) + z*(E1(u)^2 - E2(u) - kappa/3)/2 + O(z^2),
    E1(z) = 1/z + z*kappa/3 + O(z^3).

    The neglected z^2 coefficient of phi grows like E1(u)^3 when u sits
    near the cell boundary, so the elliptic check uses a smaller step.
    """
    step = 2e-4 if flavor.kind == ELLIPTIC else 1e-3
    z = step * cmath.exp(0.3j)
    kap = kappa_const(flavor)
    e1u = eisenstein_E1(flavor, u)
    c1 = 0.5 * (e1u * e1u - eisenstein_E2(flavor, u) - kap / 3.0)
    approx = 1.0 / z + e1u + z * c1
    r_phi = _rel(kronecker_phi(flavor, z, u) - approx, approx)
    approx_e1 = 1.0 / z + z * kap / 3.0
    r_e1 = _rel(eisenstein_E1(flavor, z) - approx_e1, approx_e1)
    return r_phi, r_e1


def _f_at_zero_residual(flavor, u):
    """Residual of lim_{z->0} f(z, u) = -E2(u), by Richardson extrapolation."""
    eps = 1e-4
    f1 = phi_derivative_f(flavor, eps, u)
    f2 = phi_derivative_f(flavor, eps / 2, u)
    f3 = phi_derivative_f(flavor, eps / 4, u)
    limit = (f1 - 6.0 * f2 + 8.0 * f3) / 3.0
    target = -eisenstein_E2(flavor, u)
    return _rel(limit - target, target)


def _f_difference_residual(flavor, z, q):
    """Closed-form f against a Richardson central difference of phi in q.

    The step shrinks with the pole distance of the arguments: the error
    term h^4 phi''''' grows like d^-6 near a pole, so a fixed step loses
    relative accuracy exactly where phi is largest.
    """
    d = min(pole_distance(flavor, q), pole_distance(flavor, z + q))
    h = min(1e-3, d / 50.0)
    d1 = (kronecker_phi(flavor, z, q + h)
          - kronecker_phi(flavor, z, q - h)) / (2 * h)
    d2 = (kronecker_phi(flavor, z, q + h / 2)
          - kronecker_phi(flavor, z, q - h / 2)) / h
    approx = (4.0 * d2 - d1) / 3.0
    exact = phi_derivative_f(flavor, z, q)
    return _rel(exact - approx, exact, approx)


def _sector_identity_residuals(flavor, N, rng):
    """One sample of the four lattice-sum identities for Z_N x Z_N sectors."""
    tau = flavor.tau
    sectors = [SectorIndex(a1, a2, N) for a1 in range(N) for a2 in range(N)]

    def kappa_sq(alpha, gamma):
        return cmath.exp(TWO_PI_I * (gamma.a1 * alpha.a2
                                     - gamma.a2 * alpha.a1) / N)

    # keep N*q and q/N off the lattice as well
    while True:
        q = sample_point(rng, flavor)
        hb = sample_point(rng, flavor)
        z = sample_point(rng, flavor)
        pts = [q, hb, z, N * hb, N * q, q / N]
        pts += [a.omega(tau) + q for a in sectors]
        pts += [N * q + a.omega(tau) for a in sectors]
        pts += [q + a.omega(tau) for a in sectors]
        pts += [a.omega(tau) + z / N for a in sectors if not a.is_zero()]
        pts += [N * hb + a.omega(tau) + z / N for a in sectors]
        pts += [a.omega(tau) + hb for a in sectors]
        if all(pole_distance(flavor, p) > 1e-2 for p in pts):
            break

    out = {}
    # Fourier sum: (1/N) sum_a kappa^2 phi_a(N*hb, w_a + z/N) = phi_g(z, w_g + hb)
    worst = 0.0
    for gam in sectors:
        total = 0.0j
        for alp in sectors:
            total += kappa_sq(alp, gam) * sector_phi(flavor, alp, N * hb, z / N)
        total /= N
        rhs = sector_phi(flavor, gam, z, hb)
        worst = max(worst, _rel(total - rhs, total, rhs))
    out["fourier_sum"] = worst

    # lattice sum: sum_a E2(w_a + q) = N^2 E2(N*q)
    # residuals of the lattice sums are scaled by the largest summand, since
    # the sums themselves suffer heavy cancellation near the cell boundary
    terms = [eisenstein_E2(flavor, a.omega(tau) + q) for a in sectors]
    total = sum(terms)
    rhs = N * N * eisenstein_E2(flavor, N * q)
    out["e2_lattice_sum"] = _rel(total - rhs, rhs, *terms)

    # twisted sum, gamma != 0:
    # sum_a kappa^2 E2(w_a + q) = -N^2 phi_g(N*q, w_g)(E1(N*q+w_g)-E1(N*q)+c_g)
    worst = 0.0
    for gam in sectors:
        if gam.is_zero():
            continue
        terms = [kappa_sq(alp, gam)
                 * eisenstein_E2(flavor, alp.omega(tau) + q)
                 for alp in sectors]
        total = sum(terms)
        c = TWO_PI_I * gam.a2 / N
        rhs = -N * N * sector_phi(flavor, gam, N * q, 0.0) * (
            eisenstein_E1(flavor, N * q + gam.omega(tau))
            - eisenstein_E1(flavor, N * q) + c)
        worst = max(worst, _rel(total - rhs, rhs, *terms))
    out["e2_twisted_sum"] = worst

    # converse: -E2(q) + sum_{a!=0} kappa^2 phi_a(q, w_a)(E1(q+w_a)-E1(q)+c_a)
    #           = -E2(w_g + q/N)
    worst = 0.0
    for gam in sectors:
        terms = [-eisenstein_E2(flavor, q)]
        for alp in sectors:
            if alp.is_zero():
                continue
            c = TWO_PI_I * alp.a2 / N
            terms.append(kappa_sq(alp, gam)
                         * sector_phi(flavor, alp, q, 0.0)
                         * (eisenstein_E1(flavor, q + alp.omega(tau))
                            - eisenstein_E1(flavor, q) + c))
        total = sum(terms)
        rhs = -eisenstein_E2(flavor, gam.omega(tau) + q / N)
        worst = max(worst, _rel(total - rhs, rhs, *terms))
    out["e2_converse_sum"] = worst
    return out


def scalar_identity_report(flavor, n_samples, seed, sector_sizes=(2, 3)):
    """Max relative residuals of the scalar identity suite over random draws.

    Returns {"flavor", "samples", "seed", "identities": {name: max_residual}}.
    Sector identities are evaluated for the elliptic flavor only, for each
    N in sector_sizes (they are lattice sums over Z_N x Z_N).
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    worst = {}

    def record(name, value):
        worst[name] = max(worst.get(name, 0.0), value)

    for _ in range(n_samples):
        eta, z, w, u = _sample_tuple(rng, flavor, 4)
        q = u

        p_ez = kronecker_phi(flavor, eta, z)
        record("symmetry", _rel(p_ez - kronecker_phi(flavor, z, eta), p_ez))

        t1 = kronecker_phi(flavor, z, q) * kronecker_phi(flavor, w, u)
        t2 = kronecker_phi(flavor, z - w, q) * kronecker_phi(flavor, w, q + u)
        t3 = kronecker_phi(flavor, w - z, u) * kronecker_phi(flavor, z, q + u)
        record("fay", _rel(t1 - t2 - t3, t1, t2, t3))

        # phi(z,x)f(z,y) - phi(z,y)f(z,x) = phi(z,x+y)(wp(x) - wp(y))
        x, y = eta, w
        lhs = (kronecker_phi(flavor, z, x) * phi_derivative_f(flavor, z, y)
               - kronecker_phi(flavor, z, y) * phi_derivative_f(flavor, z, x))
        rhs = kronecker_phi(flavor, z, x + y) * (
            weierstrass_p(flavor, x) - weierstrass_p(flavor, y))
        record("wp_difference", _rel(lhs - rhs, lhs, rhs))

        # phi(eta,z)phi(eta,-z) = wp(eta) - wp(z) = E2(eta) - E2(z)
        prod = p_ez * kronecker_phi(flavor, eta, -z)
        wdiff = weierstrass_p(flavor, eta) - weierstrass_p(flavor, z)
        ediff = eisenstein_E2(flavor, eta) - eisenstein_E2(flavor, z)
        record("unitarity", max(_rel(prod - wdiff, prod, wdiff),
                                _rel(prod - ediff, prod, ediff)))

        # phi(z,q)phi(w,q) = phi(z+w,q)(E1(z) + E1(w)) - f(z+w,q)
        lhs = kronecker_phi(flavor, z, q) * kronecker_phi(flavor, w, q)
        rhs = kronecker_phi(flavor, z + w, q) * (
            eisenstein_E1(flavor, z) + eisenstein_E1(flavor, w)
        ) - phi_derivative_f(flavor, z + w, q)
        record("e1_sum_product", _rel(lhs - rhs, lhs, rhs))

        r_phi, r_e1 = _local_expansion_residuals(flavor, u)
        record("phi_local_expansion", r_phi)
        record("e1_local_expansion", r_e1)
        record("f_at_zero", _f_at_zero_residual(flavor, u))
        record("f_closed_form", _f_difference_residual(flavor, z, q))

    if flavor.kind == ELLIPTIC:
        for N in sector_sizes:
            for _ in range(n_samples):
                res = _sector_identity_residuals(flavor, N, rng)
                for key, value in res.items():
                    record(f"{key}_N{N}", value)

    return {
        "flavor": flavor.kind,
        "tau": None if flavor.tau is None else [flavor.tau.real,
                                                flavor.tau.imag],
        "samples": int(n_samples),
        "seed": int(seed),
        "identities": worst,
    }
