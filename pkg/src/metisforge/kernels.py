"""Hot-loop kernels with a compiled backend and a pure-Python fallback.

The compiled extension is used when it was built; set
``METISFORGE_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _raster_py

BACKEND = "python"
_compiled = None

if not os.environ.get("METISFORGE_PURE_PYTHON"):
    try:
        from . import _raster_kernel as _compiled  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _compiled = None


def backends():
    """Return the available backend modules keyed by name."""
    out = {"python": _raster_py}
    if _compiled is not None:
        out["cython"] = _compiled
    return out


_impl = _compiled if _compiled is not None else _raster_py

flatten_segments = _impl.flatten_segments
fill_coverage = _impl.fill_coverage
