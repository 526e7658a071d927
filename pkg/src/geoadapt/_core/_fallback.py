"""Pure-numpy implementations of the hot kernels.

Selected at import time by :mod:`geoadapt._core` when the compiled extension
is unavailable (or disabled via ``GEOADAPT_DISABLE_EXTENSION``).  Both
backends must make bit-identical *decisions*: the selection loop compares
squared distances against ``delta**2`` and resolves argmax ties to the lowest
index, exactly as the compiled twin does.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def matern_half_integer(u: np.ndarray, phi: float, case: int) -> np.ndarray:
    """Matern correlation for half-integer smoothness over an array of distances.

    ``case`` selects the closed form: 1 for kappa=1/2, 3 for kappa=3/2,
    5 for kappa=5/2.
    """
    t = np.asarray(u, dtype=np.float64) / phi
    if case == 1:
        return np.exp(-t)
    if case == 3:
        return (1.0 + t) * np.exp(-t)
    if case == 5:
        return (1.0 + t + t * t / 3.0) * np.exp(-t)
    raise ValueError(f"unsupported half-integer case: {case}")


def select_min_dist_batch(
    pv: np.ndarray,
    cand_xy: np.ndarray,
    active: np.ndarray,
    design_xy: np.ndarray,
    b: int,
    delta: float,
):
    """Greedy max-variance selection under a minimum-distance constraint.

    Repeatedly takes the active candidate with the largest ``pv``; the
    candidate joins the batch if its distance to every design point and every
    earlier pick exceeds ``delta``, and otherwise is discarded.  Either way it
    leaves the active set (``active`` is updated in place).  Stops after ``b``
    additions or when no active candidates remain.

    Returns ``(chosen, rejected)`` index arrays in selection order.
    """
    pv = np.asarray(pv, dtype=np.float64)
    cand_xy = np.asarray(cand_xy, dtype=np.float64)
    delta2 = delta * delta

    taken_x = list(np.asarray(design_xy, dtype=np.float64)[:, 0]) if len(design_xy) else []
    taken_y = list(np.asarray(design_xy, dtype=np.float64)[:, 1]) if len(design_xy) else []

    work = np.where(active, pv, -np.inf)
    chosen: list[int] = []
    rejected: list[int] = []
    while len(chosen) < b:
        i = int(np.argmax(work))
        if work[i] == -np.inf:
            break
        work[i] = -np.inf
        active[i] = False
        xi, yi = cand_xy[i, 0], cand_xy[i, 1]
        ok = True
        for xj, yj in zip(taken_x, taken_y):
            dx = xi - xj
            dy = yi - yj
            if dx * dx + dy * dy <= delta2:
                ok = False
                break
        if ok:
            chosen.append(i)
            taken_x.append(xi)
            taken_y.append(yi)
        else:
            rejected.append(i)
    return (
        np.asarray(chosen, dtype=np.int64),
        np.asarray(rejected, dtype=np.int64),
    )
