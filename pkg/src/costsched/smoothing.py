"""Locally weighted linear smoothing of pooled schedule points.

Classic lowess with tricube weights and a single (non-robust) pass: at
each evaluation point the nearest span-fraction of the data gets a local
weighted linear fit.  Used to turn per-run schedule scatter into the
average schedule curve.
"""

from __future__ import annotations

import numpy as np

from .errors import TooFewPoints

DEFAULT_SPAN = 2.0 / 3.0
MIN_POINTS = 5


def smooth_schedule(points, span: float = DEFAULT_SPAN, n_grid: int = 100,
                    eval_x=None) -> tuple[np.ndarray, np.ndarray]:
    """Smooth (x, y) points and return (eval_x, fitted).

    eval_x defaults to a uniform n_grid-point grid over the observed x
    range.  Requires at least five points.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (m, 2) array of (x, y)")
    m = pts.shape[0]
    if m < MIN_POINTS:
        raise TooFewPoints(f"need at least {MIN_POINTS} points, got {m}")
    x = pts[:, 0]
    y = pts[:, 1]
    if eval_x is None:
        eval_x = np.linspace(x.min(), x.max(), n_grid)
    else:
        eval_x = np.asarray(eval_x, dtype=float)

    k = int(np.clip(int(span * m), 2, m))
    fitted = np.empty(len(eval_x))
    for idx, x0 in enumerate(eval_x):
        d = np.abs(x - x0)
        h = np.partition(d, k - 1)[k - 1]
        if h <= 0:
            # all usable neighbors sit exactly at x0
            fitted[idx] = y[d == 0].mean()
            continue
        w = np.clip(d / h, 0.0, 1.0)
        w = (1.0 - w ** 3) ** 3
        sw = w.sum()
        xw = (w * x).sum() / sw
        yw = (w * y).sum() / sw
        sxx = (w * (x - xw) ** 2).sum()
        if sxx <= 1e-12 * max(1.0, xw * xw):
            fitted[idx] = yw
        else:
            slope = (w * (x - xw) * (y - yw)).sum() / sxx
            fitted[idx] = yw + slope * (x0 - xw)
    return eval_x, fitted
