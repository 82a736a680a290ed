# cython: language_level=3, boundscheck=False, cdivision=True
"""Compiled kernel for the odd theta series.

Same contract as the pure-Python variant in ``_theta_py.py``; one of the two
is selected at import time by :mod:`toplax._accel`.
"""

cdef extern from "complex.h" nogil:
    double complex cexp(double complex)
    double cabs(double complex)
    double complex cpow(double complex, double complex)

COMPILED = True


def theta_sum(double complex z, double complex tau, int deriv=0,
              double tol=1e-16, int cap=200):
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
    cdef double complex two_pi_i = 2j * 3.14159265358979323846
    cdef double complex pi_i = 1j * 3.14159265358979323846
    cdef double complex total = 0, quad, lin, t_plus, t_minus
    cdef double scale = 0, bound, s
    cdef double h
    cdef int n
    for n in range(cap + 1):
        h = n + 0.5
        quad = cexp(pi_i * tau * h * h)
        lin = two_pi_i * (z + 0.5) * h
        t_plus = quad * cexp(lin)
        t_minus = quad * cexp(-lin)
        if deriv:
            t_plus = t_plus * cpow(two_pi_i * h, deriv)
            t_minus = t_minus * cpow(-two_pi_i * h, deriv)
        total = total + t_plus + t_minus
        bound = cabs(t_plus) + cabs(t_minus)
        if bound > scale:
            scale = bound
        s = cabs(total)
        if s < scale:
            s = scale
        if n >= 1 and bound < tol * s:
            return total, True, n + 1
    return total, False, cap + 1
