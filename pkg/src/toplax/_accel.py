"""Select the theta-series kernel: compiled if the extension built, else pure.

``USING_COMPILED`` records which one is active; both expose ``theta_sum``
with identical semantics, so callers never branch on it.
"""

try:
    from ._theta_c import theta_sum, COMPILED as USING_COMPILED
except ImportError:
    from ._theta_py import theta_sum, COMPILED as USING_COMPILED

__all__ = ["theta_sum", "USING_COMPILED"]
