"""Benchmark the compiled theta kernel against the pure-Python fallback.

Usage: python benchmarks/bench_theta.py [repeats]

Times theta_sum over a grid of arguments, derivative orders and moduli,
checks that the two implementations agree to rounding, and reports the
speedup of the compiled extension.
"""

import sys
import time

from toplax._theta_py import theta_sum as theta_py

try:
    from toplax._theta_c import theta_sum as theta_c
except ImportError:
    theta_c = None


def workload():
    cases = []
    for tau in (1j, 0.3 + 0.8j, 0.1 + 0.07j):
        for deriv in (0, 1, 2, 3):
            for k in range(25):
                z = complex(0.03 * k - 0.3, 0.02 * k - 0.2)
                cases.append((z, tau, deriv))
    return cases


def run(kernel, cases):
    out = []
    for z, tau, deriv in cases:
        value, ok, terms = kernel(z, tau, deriv, 1e-16, 200)
        assert ok
        out.append(value)
    return out


def main():
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 20
    cases = workload()

    if theta_c is None:
        print("compiled kernel not available; timing pure Python only")
    else:
        a = run(theta_c, cases)
        b = run(theta_py, cases)
        worst = max(abs(x - y) / max(abs(y), 1.0) for x, y in zip(a, b))
        print(f"agreement over {len(cases)} evaluations: "
              f"max relative deviation {worst:.3e}")
        assert worst < 1e-13

    t0 = time.perf_counter()
    for _ in range(repeats):
        run(theta_py, cases)
    t_py = (time.perf_counter() - t0) / repeats

    print(f"pure Python : {t_py * 1e3:8.2f} ms per pass "
          f"({len(cases)} evaluations)")
    if theta_c is not None:
        t0 = time.perf_counter()
        for _ in range(repeats):
            run(theta_c, cases)
        t_c = (time.perf_counter() - t0) / repeats
        print(f"compiled    : {t_c * 1e3:8.2f} ms per pass")
        print(f"speedup     : {t_py / t_c:8.1f}x")


if __name__ == "__main__":
    main()
