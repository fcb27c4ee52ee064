"""Maximal Lyapunov exponent from nearest-neighbor divergence.

Rosenstein-style estimate: embed the series, pair every reference point with
its nearest neighbor outside a temporal exclusion window, track the mean log
separation over a horizon, and read the exponent off the least-squares slope
of the early part of that curve.  No Jacobian needed, which is why it works on
observed data; reported units are per sample step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .embedding import EmbeddingParams, delay_embed
from .errors import DegenerateSeriesError, TooShortError


@dataclass(frozen=True)
class LyapunovEstimate:
    mle: float
    divergence_curve: np.ndarray
    fit_range: tuple


def estimate_mle(
    series,
    params: EmbeddingParams,
    horizon: int = 200,
    theiler: int | None = None,
    fit_range: tuple | None = None,
) -> LyapunovEstimate:
    """Mean log-divergence curve and its slope over ``fit_range``.

    ``theiler`` defaults to m * tau; ``fit_range`` (start, end) defaults to
    (1, horizon // 2).  Pairs whose initial separation is exactly zero carry
    no direction information and are dropped.
    """
    series = np.asarray(series, dtype=float)
    if series.ndim != 1:
        raise ValueError("expected a scalar series")
    if np.ptp(series) == 0.0:
        raise DegenerateSeriesError("series is constant")
    if theiler is None:
        theiler = params.m * params.tau
    if fit_range is None:
        fit_range = (1, max(2, horizon // 2))
    lo, hi = int(fit_range[0]), int(fit_range[1])
    if not (0 <= lo < hi <= horizon) or hi - lo < 2:
        raise ValueError("fit_range must satisfy 0 <= start < end <= horizon, end - start >= 2")
    needed = params.span + horizon + theiler + 1
    if series.size < needed:
        raise TooShortError(f"need at least {needed} samples")

    pts = delay_embed(series, params).points
    n = pts.shape[0]
    usable = n - horizon  # both ends of a pair must track the full horizon
    if usable < 2:
        raise TooShortError("horizon leaves no usable reference points")
    base = pts[:usable]
    tree = cKDTree(base)
    idx = np.arange(usable)
    partner = _nearest_outside_window(tree, base, idx, theiler)

    valid = partner >= 0
    i_ref = idx[valid]
    j_ref = partner[valid]
    d0 = np.linalg.norm(base[i_ref] - base[j_ref], axis=1)
    keep = d0 > 0
    i_ref, j_ref = i_ref[keep], j_ref[keep]
    if i_ref.size == 0:
        raise DegenerateSeriesError("no separated neighbor pairs found")

    curve = np.empty(horizon + 1)
    for k in range(horizon + 1):
        d = np.linalg.norm(pts[i_ref + k] - pts[j_ref + k], axis=1)
        good = d > 0
        curve[k] = float(np.mean(np.log(d[good]))) if np.any(good) else -np.inf
    ks = np.arange(lo, hi)
    slope = float(np.polyfit(ks, curve[lo:hi], 1)[0])
    return LyapunovEstimate(mle=slope, divergence_curve=curve, fit_range=(lo, hi))


def _nearest_outside_window(tree, base, idx, theiler):
    """Nearest neighbor index with |i - j| > theiler (-1 when none exists)."""
    n = base.shape[0]
    partner = np.full(n, -1, dtype=int)
    unresolved = idx
    k = min(n, 2 * theiler + 4)
    while unresolved.size:
        dist, nbrs = tree.query(base[unresolved], k=k)
        if k == 1:
            dist, nbrs = dist[:, None], nbrs[:, None]
        ok = np.abs(nbrs - unresolved[:, None]) > theiler
        has = ok.any(axis=1)
        first = ok.argmax(axis=1)
        partner[unresolved[has]] = nbrs[has, first[has]]
        unresolved = unresolved[~has]
        if k >= n:
            break
        k = min(n, 4 * k)
    return partner


def mle_table(dataset, params, horizon: int = 200, theiler: int | None = None,
              fit_range: tuple | None = None) -> dict:
    """Channel-wise estimates plus their arithmetic mean.

    ``params`` is one EmbeddingParams shared by all channels or a list with
    one entry per channel.
    """
    arr = np.asarray(dataset, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    channels = arr.shape[1]
    if isinstance(params, EmbeddingParams):
        params = [params] * channels
    if len(params) != channels:
        raise ValueError("need one EmbeddingParams per channel")
    estimates = [
        estimate_mle(arr[:, c], params[c], horizon, theiler, fit_range)
        for c in range(channels)
    ]
    per_channel = np.array([e.mle for e in estimates])
    return {
        "per_channel": per_channel,
        "mean": float(per_channel.mean()),
        "estimates": estimates,
    }
