"""Hot-loop kernel backends.

The slot-by-slot simulation, the fixed-weight schedule-chain runs, and the
conductance subset scan dominate runtime.  Each has two interchangeable
implementations: jitted kernels (``numba_impl``) and a pure-numpy fallback
(``numpy_impl``).  Selection: the ``SLOTCSMA_BACKEND`` environment variable
(``numba`` or ``numpy``); unset means numba when importable, numpy otherwise.
``benchmarks/bench_backends.py`` times the two side by side and checks they
produce identical traces.
"""

from __future__ import annotations

import os

from ..errors import ConfigError

_MODULES: dict[str, object] = {}


def backend_name() -> str:
    forced = os.environ.get("SLOTCSMA_BACKEND", "").strip().lower()
    if forced:
        if forced not in ("numba", "numpy"):
            raise ConfigError(
                f"SLOTCSMA_BACKEND must be 'numba' or 'numpy', got {forced!r}"
            )
        return forced
    try:
        import numba  # noqa: F401
    except ImportError:
        return "numpy"
    return "numba"


def kernels(name: str | None = None):
    """Kernel module for ``name`` (default: resolved from the environment)."""
    resolved = name or backend_name()
    if resolved not in _MODULES:
        if resolved == "numba":
            from . import numba_impl as mod
        elif resolved == "numpy":
            from . import numpy_impl as mod
        else:
            raise ConfigError(f"unknown backend {resolved!r}")
        _MODULES[resolved] = mod
    return _MODULES[resolved]
