"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback is used.  Setting ``POLYCAP_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("POLYCAP_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _fallback

ryser_permanent = _impl.ryser_permanent
multilinear_polarization = _impl.multilinear_polarization
sinkhorn = _impl.sinkhorn
subset_min_gap = _impl.subset_min_gap
submodular_violation = _impl.submodular_violation
subset_sums = _fallback.subset_sums


def backends():
    """Return ``{name: module}`` for every importable backend."""
    found = {"python": _fallback}
    try:
        from . import _kernels

        found["cython"] = _kernels
    except ImportError:  # pragma: no cover
        pass
    return found
