"""Backend selection for the walk-on-spheres kernel.

The compiled core is used when it imports; setting ``HAYMANWU_PURE_PYTHON=1``
forces the numpy fallback.
"""

from __future__ import annotations

import os

from . import _wos_fallback

if os.environ.get("HAYMANWU_PURE_PYTHON") == "1":
    _core = None
else:
    try:
        from . import _wos_core as _core
    except ImportError:  # no compiler at install time
        _core = None

BACKEND = "cython" if _core is not None else "python"
BACKENDS = {"python": _wos_fallback.walk_batch}
if _core is not None:
    BACKENDS["cython"] = _core.walk_batch


def walk_batch(*args, backend: str | None = None):
    return BACKENDS[backend or BACKEND](*args)
