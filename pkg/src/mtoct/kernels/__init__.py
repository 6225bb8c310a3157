"""Hot-kernel backend selection.

The compiled extension (mtoct.kernels._lstm_cy) is preferred when it is
importable; otherwise the numpy implementation takes over. Set
MTOCT_KERNEL=numpy or MTOCT_KERNEL=cython to force a backend (the latter
raises if the extension was not built). Both backends expose predict,
loss_rmse and loss_and_gradient with identical signatures; the
activation-cache forward is served by the numpy backend regardless,
since it exists for inspection rather than speed.
"""

from __future__ import annotations

import os

from . import numpy_backend

_requested = os.environ.get("MTOCT_KERNEL", "auto").strip().lower()

if _requested in ("auto", ""):
    try:
        from . import _lstm_cy as _active

        BACKEND = "cython"
    except ImportError:
        _active = numpy_backend
        BACKEND = "numpy"
elif _requested in ("cython", "cy"):
    from . import _lstm_cy as _active

    BACKEND = "cython"
elif _requested in ("numpy", "py", "python"):
    _active = numpy_backend
    BACKEND = "numpy"
else:
    raise ValueError(
        f"unrecognized MTOCT_KERNEL={_requested!r}; expected 'auto', 'cython' or 'numpy'"
    )

predict = _active.predict
loss_rmse = _active.loss_rmse
loss_and_gradient = _active.loss_and_gradient
forward_cached = numpy_backend.forward_cached


def available_backends():
    """Names of the importable backends, preferred first."""
    names = []
    try:
        from . import _lstm_cy  # noqa: F401

        names.append("cython")
    except ImportError:
        pass
    names.append("numpy")
    return names
