"""Arc-geometry kernel dispatch.

The hot inner loops (pairwise arc intersection scans, crossing-parity
counts, arc-to-arc distances) exist twice: a compiled Cython core and a
numpy fallback with identical semantics.  Selection happens once at import:

* ``NILSPHERE_KERNELS=cython`` forces the compiled core (ImportError if the
  extension was not built),
* ``NILSPHERE_KERNELS=numpy`` forces the fallback,
* unset / ``auto`` prefers the compiled core when available.
"""

import os

from . import _numpy_backend

KIND_NONE = _numpy_backend.KIND_NONE
KIND_CROSS = _numpy_backend.KIND_CROSS
KIND_TOUCH = _numpy_backend.KIND_TOUCH
KIND_OVERLAP = _numpy_backend.KIND_OVERLAP
EPS_PLANE = _numpy_backend.EPS_PLANE

_choice = os.environ.get("NILSPHERE_KERNELS", "auto").lower()

if _choice == "numpy":
    _impl = _numpy_backend
elif _choice == "cython":
    from . import _cyarcs as _impl
else:
    try:
        from . import _cyarcs as _impl
    except ImportError:
        _impl = _numpy_backend


def backend_name():
    return "cython" if _impl is not _numpy_backend else "numpy"


def get_backend(name=None):
    """Return a kernel module by name ('numpy' or 'cython')."""
    if name in (None, "auto"):
        return _impl
    if name == "numpy":
        return _numpy_backend
    if name == "cython":
        from . import _cyarcs

        return _cyarcs
    raise ValueError(f"unknown kernel backend {name!r}")


arc_pair_intersection = _impl.arc_pair_intersection
scan_edge_hits = _impl.scan_edge_hits
polyline_pair_hit = _impl.polyline_pair_hit
arc_distance = _impl.arc_distance
min_polyline_distance = _impl.min_polyline_distance
min_point_to_arcs = _impl.min_point_to_arcs
count_path_crossings = _impl.count_path_crossings
