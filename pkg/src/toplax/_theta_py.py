"""Pure-Python kernel for the odd theta series.

Same contract as the compiled variant in ``_theta_c.pyx``; one of the two is
selected at import time by :mod:`toplax._accel`.
"""

import cmath

COMPILED = False

_TWO_PI_I = 2j * cmath.pi
_PI_I = 1j * cmath.pi


def theta_sum(z, tau, deriv=0, tol=1e-16, cap=200):
    """Sum the odd theta series (or its ``deriv``-th z-derivative).

    Terms are exp(pi*i*tau*(k+1/2)^2 + 2*pi*i*(z+1/2)(k+1/2)) summed in
    symmetric pairs k = n, -1-n outward from n = 0.  Each pair carries the
    factor (2*pi*i*(k+1/2))^deriv for the derivative.

    Returns (value, converged, n_pairs).  The truncation test passes when a
    pair's term-magnitude sum |t_k| + |t_{-1-k}| drops below tol times the
    running scale (partial-sum magnitude, floored by the largest pair bound
    seen).  Using the magnitude sum rather than |pair| avoids two traps:
    exactly-cancelling sums such as theta(0) still terminate, and accidental
    zeros of a single pair (cosine nodes at rational real z) cannot trigger
    a premature stop.
    """
    total = 0.0 + 0.0j
    scale = 0.0
    for n in range(cap + 1):
        h = n + 0.5
        quad = cmath.exp(_PI_I * tau * h * h)
        lin = _TWO_PI_I * (z + 0.5) * h
        t_plus = quad * cmath.exp(lin)
        t_minus = quad * cmath.exp(-lin)
        if deriv:
            t_plus *= (_TWO_PI_I * h) ** deriv
            t_minus *= (-_TWO_PI_I * h) ** deriv
        total += t_plus + t_minus
        bound = abs(t_plus) + abs(t_minus)
        if bound > scale:
            scale = bound
        if n >= 1 and bound < tol * max(abs(total), scale):
            return total, True, n + 1
    return total, False, cap + 1
