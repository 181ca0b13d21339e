"""Kernel dispatch: compiled Cython core when available, pure Python otherwise.

Set NILSHIFT_PURE=1 to force the fallback (used by the benchmark and the
backend-parity tests).
"""

from __future__ import annotations

import os

from nilshift import _kernels_py

if os.environ.get("NILSHIFT_PURE"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from nilshift import _kernels_cy as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

moebius_transform = _impl.moebius_transform
zeta_transform = _impl.zeta_transform
hk_violation = _impl.hk_violation
hk_cube_indices_brute = _impl.hk_cube_indices_brute
derivative_violation = _impl.derivative_violation
morphism_table_indices_brute = _impl.morphism_table_indices_brute
