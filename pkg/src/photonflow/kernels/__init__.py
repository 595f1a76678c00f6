"""Kernel backend selection.

The compiled extension (`photonflow.kernels._ckernels`) is used when it
imports cleanly; otherwise the pure-numpy `reference` module takes over.
Both expose the same functions with identical semantics, so everything above
this package is backend-agnostic.

Set ``PHOTONFLOW_KERNELS=py`` to force the fallback or ``=c`` to require the
extension (ImportError if it is missing).  ``benchmarks/bench_kernels.py``
times the two side by side.
"""

import os

from . import reference

_choice = os.environ.get("PHOTONFLOW_KERNELS", "auto").lower()

if _choice == "py":
    _impl = reference
elif _choice == "c":
    from . import _ckernels as _impl
elif _choice == "auto":
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = reference
else:
    raise ValueError(f"PHOTONFLOW_KERNELS must be 'auto', 'c' or 'py', got {_choice!r}")

BACKEND = _impl.BACKEND
STATUS_OK = reference.STATUS_OK
STATUS_NODE = reference.STATUS_NODE
STATUS_NONFINITE = reference.STATUS_NONFINITE

eval_field = _impl.eval_field
eval_field_gradient = _impl.eval_field_gradient
peak_intensity_bound = _impl.peak_intensity_bound
weak_momentum = _impl.weak_momentum
rk4_bundle = _impl.rk4_bundle
