"""Backend selection for the numeric hot kernels.

The loop-heavy kernels (transport simplex pivoting, log-domain Sinkhorn
sweeps, pairwise distance assembly, squared-hinge descent) exist twice: a
numba ``@njit`` version in ``_numba_kernels`` and a pure-numpy version in
``_numpy_kernels``. The active set is chosen once at import time:

* ``JDOT_NUMBA`` unset, ``1``, ``true`` ... -> numba kernels when numba is
  importable, numpy otherwise.
* ``JDOT_NUMBA=0`` (or ``false``/``off``/``no``) -> numpy kernels.

Both twins follow the same pivot rules and accumulation order, so solver
results agree across backends. ``benchmarks/bench_kernels.py`` compares
their speed.
"""

import os

_FALSE_VALUES = {"0", "false", "off", "no"}


def numba_requested() -> bool:
    return os.environ.get("JDOT_NUMBA", "1").strip().lower() not in _FALSE_VALUES


try:
    import numba  # noqa: F401

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False

NUMBA_ENABLED = NUMBA_AVAILABLE and numba_requested()

if NUMBA_ENABLED:
    from . import _numba_kernels as ops
else:
    from . import _numpy_kernels as ops  # noqa: F401
