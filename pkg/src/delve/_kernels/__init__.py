"""Hot kernels with a compiled core and a pure-numpy fallback.

Selection happens once at import: the Cython extension if it built,
otherwise the numpy implementation.  Set DELVE_PURE_PY=1 to force the
fallback (used by the benchmark and the equivalence tests).
"""

import os

if os.environ.get("DELVE_PURE_PY"):
    from .pure import diffuse_pass, grid_bfs, grid_bfs_multi, label_regions, largest_rect

    HAVE_NATIVE = False
else:
    try:
        from ._core import diffuse_pass, grid_bfs, grid_bfs_multi, label_regions, largest_rect

        HAVE_NATIVE = True
    except ImportError:
        from .pure import diffuse_pass, grid_bfs, grid_bfs_multi, label_regions, largest_rect

        HAVE_NATIVE = False

__all__ = ["diffuse_pass", "grid_bfs", "grid_bfs_multi", "label_regions", "largest_rect", "HAVE_NATIVE"]
