"""Backend selection for the hot kernels.

The compiled extension is used when importable; set ``HYPERKGE_PURE_PYTHON=1``
to force the numpy fallback.
"""

import os

from . import _kernels_py

python_backend = _kernels_py
compiled_backend = None

if not os.environ.get("HYPERKGE_PURE_PYTHON"):
    try:
        from . import _kernels as compiled_backend
    except ImportError:
        compiled_backend = None

active = compiled_backend or python_backend
BACKEND = active.BACKEND

rotate_score = active.rotate_score
rotate_grad = active.rotate_grad
scatter_add = active.scatter_add
