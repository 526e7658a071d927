"""Backend selection for the hot kernels.

Prefers the compiled Cython extension; falls back to pure numpy when the
extension is missing or ``GEOADAPT_DISABLE_EXTENSION`` is set to a non-empty
value.  Both backends are decision-identical; the compiled one is just
faster (see ``benchmarks/bench_kernels.py``).
"""

from __future__ import annotations

import os

if os.environ.get("GEOADAPT_DISABLE_EXTENSION"):
    from geoadapt._core import _fallback as _impl
else:
    try:
        from geoadapt._core import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        from geoadapt._core import _fallback as _impl  # type: ignore[no-redef]

matern_half_integer = _impl.matern_half_integer
select_min_dist_batch = _impl.select_min_dist_batch


def backend_name() -> str:
    """Name of the active kernel backend: "compiled" or "python"."""
    return _impl.BACKEND
