"""Backend selection for the hot RK4 kernel.

The compiled Cython kernel is preferred; the numpy implementation is the
fallback when the extension was not built.  Both expose the same
rk4_lindblad contract and are benchmarked against each other in
benchmarks/bench_kernels.py.
"""

from . import _rk4_py

try:
    from . import _rk4_cy as _impl

    HAVE_COMPILED = True
except ImportError:
    _impl = _rk4_py
    HAVE_COMPILED = False

RECORD_FULL = _rk4_py.RECORD_FULL
RECORD_DIAG = _rk4_py.RECORD_DIAG
RECORD_N0 = _rk4_py.RECORD_N0

rk4_lindblad = _impl.rk4_lindblad

BACKEND = "compiled" if HAVE_COMPILED else "numpy"


def get_backend(name: str):
    """Explicit backend module by name ("compiled" or "numpy"); tests and benchmarks."""
    if name == "numpy":
        return _rk4_py
    if name == "compiled":
        if not HAVE_COMPILED:
            raise ImportError("compiled kernel not available")
        return _impl
    raise ValueError(f"unknown kernel backend {name!r}")
