"""Select the compiled weight-field core, falling back to numpy.

Set ``TRICOV_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _pycore


def _load_compiled() -> ModuleType | None:
    try:
        from . import _core
    except ImportError:
        return None
    return _core


_compiled = _load_compiled()

if _compiled is not None and not os.environ.get("TRICOV_PURE_PYTHON"):
    impl: ModuleType = _compiled
    BACKEND = "cython"
else:
    impl = _pycore
    BACKEND = "python"


def get_backend(name: str | None = None) -> ModuleType:
    """Return the active core, or a specific one by name ('cython' / 'python')."""
    if name is None:
        return impl
    if name == "python":
        return _pycore
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled core tricov._core is not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> list[str]:
    return ["python"] + (["cython"] if _compiled is not None else [])
