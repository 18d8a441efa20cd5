"""Selects between the compiled and pure-Python simulation kernels.

The compiled lane (`_ckernels`, Cython) is preferred when its extension
module imported successfully; the pure lane (`_pykernels`) is the fallback
and the reference.  Both implement the same draw protocol bit for bit, so
the choice affects speed only.

Set the environment variable ``CANTORJUMP_BACKEND`` to ``python`` or
``compiled`` before import to force a lane; forcing ``compiled`` raises if
the extension is unavailable rather than silently degrading.
"""

from __future__ import annotations

import os

_REQUESTED = os.environ.get("CANTORJUMP_BACKEND", "").strip().lower()

if _REQUESTED == "python":
    from . import _pykernels as _impl

    BACKEND = "python"
elif _REQUESTED == "compiled":
    from . import _ckernels as _impl  # type: ignore[attr-defined]

    BACKEND = "compiled"
elif _REQUESTED == "":
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _pykernels as _impl

        BACKEND = "python"
else:
    raise ValueError(
        f"CANTORJUMP_BACKEND must be 'python' or 'compiled', not {_REQUESTED!r}"
    )

run_path = _impl.run_path
batch_prefix_counts = _impl.batch_prefix_counts
batch_level_counts = _impl.batch_level_counts
batch_confined_prefix_counts = _impl.batch_confined_prefix_counts
endpoint_histograms = _impl.endpoint_histograms

__all__ = [
    "BACKEND",
    "run_path",
    "batch_prefix_counts",
    "batch_level_counts",
    "batch_confined_prefix_counts",
    "endpoint_histograms",
]
