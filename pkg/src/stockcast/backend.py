"""Select the SGD kernel at import time.

The compiled extension is used when it was built; otherwise, or when
``STOCKCAST_BACKEND=python`` is set, the pure-Python twin is used.
"""

from __future__ import annotations

import os

from . import _reference

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _reference.sgd_epochs}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled.sgd_epochs


def available() -> list[str]:
    return sorted(_BACKENDS)


def _default() -> str:
    wanted = os.environ.get("STOCKCAST_BACKEND", "").strip().lower()
    if wanted:
        if wanted not in _BACKENDS:
            raise ImportError(f"STOCKCAST_BACKEND={wanted!r} unavailable; have {available()}")
        return wanted
    return "compiled" if "compiled" in _BACKENDS else "python"


name = _default()


def get(backend: str | None = None):
    """Return an ``sgd_epochs`` callable for ``backend`` (default: the selected one)."""
    key = name if backend is None else backend
    try:
        return _BACKENDS[key]
    except KeyError:
        raise ValueError(f"unknown backend {key!r}; have {available()}") from None
