"""Phase-space reconstruction from sampled series.

Coordinate-delay embedding (oldest coordinate first) with data-driven
parameter selection: the delay is the first strict local minimum of the
histogram-estimated mutual information between the series and its lagged
copy, and the dimension is the smallest one whose false-nearest-neighbor
fraction drops below threshold.  The FNN test is the two-part criterion:
a neighbor is false when the extra coordinate blows up relative to its
current distance (ratio tolerance 10) or relative to the attractor size
(loneliness tolerance 2); the second part keeps pure noise from looking
embeddable at large dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import DegenerateSeriesError, TooShortError

FNN_RATIO_TOL = 10.0
FNN_SIZE_TOL = 2.0


@dataclass(frozen=True)
class EmbeddingParams:
    m: int
    tau: int

    def __post_init__(self):
        if self.m < 1 or self.tau < 1:
            raise ValueError("embedding needs m >= 1 and tau >= 1")

    @property
    def span(self) -> int:
        """Samples covered by one embedded point: (m-1)*tau + 1."""
        return (self.m - 1) * self.tau + 1


@dataclass(frozen=True)
class PhaseTrajectory:
    """Embedded points (count, m); point i ends at sample i + (m-1)*tau."""

    points: np.ndarray
    params: EmbeddingParams
    source_len: int


@dataclass(frozen=True)
class PatchConfig:
    p: int
    m: int

    @property
    def d(self) -> int:
        return self.m * self.p


def default_bins(length: int) -> int:
    return int(np.clip(int(np.sqrt(length / 5)), 8, 64))


def _check_series(series: np.ndarray) -> np.ndarray:
    series = np.asarray(series, dtype=float)
    if series.ndim != 1:
        raise ValueError("expected a 1-D scalar series")
    if series.size and np.ptp(series) == 0.0:
        raise DegenerateSeriesError("series is constant")
    return series


def mi_profile(series, max_tau: int, bins: int | None = None) -> np.ndarray:
    """I(tau) in nats for tau = 0..max_tau, equal-width histogram estimator."""
    series = _check_series(series)
    if max_tau < 1:
        raise ValueError("max_tau must be >= 1")
    if series.size < 4 * max_tau:
        raise TooShortError(f"need at least {4 * max_tau} samples for max_tau={max_tau}")
    if bins is None:
        bins = default_bins(series.size)
    edges = np.linspace(series.min(), series.max(), bins + 1)
    out = np.empty(max_tau + 1)
    for tau in range(max_tau + 1):
        x = series[: series.size - tau]
        y = series[tau:]
        joint, _, _ = np.histogram2d(x, y, bins=(edges, edges))
        joint /= joint.sum()
        px = joint.sum(axis=1)
        py = joint.sum(axis=0)
        nz = joint > 0
        out[tau] = float(
            np.sum(joint[nz] * np.log(joint[nz] / np.outer(px, py)[nz]))
        )
    return out


def mutual_information_delay(series, max_tau: int, bins: int | None = None) -> int:
    """First strict local minimum of I(tau); argmin over [1, max_tau] if none.

    Histogram MI curves carry bin-level jitter, so a minimum only counts when
    it undercuts every value in a +-max(2, max_tau//12) neighborhood.
    """
    profile = mi_profile(series, max_tau, bins)
    w = max(2, max_tau // 12)
    for tau in range(1, max_tau):
        lo = max(0, tau - w)
        hi = min(max_tau, tau + w)
        neighborhood = np.concatenate([profile[lo:tau], profile[tau + 1 : hi + 1]])
        if np.all(profile[tau] < neighborhood):
            return tau
    return int(np.argmin(profile[1:]) + 1)


def _embed_forward(series: np.ndarray, m: int, tau: int) -> np.ndarray:
    n = series.size - (m - 1) * tau
    view = np.lib.stride_tricks.sliding_window_view(series, (m - 1) * tau + 1)
    return view[:n, ::tau]


def fnn_profile(
    series,
    tau: int,
    max_m: int,
    ratio_tol: float = FNN_RATIO_TOL,
    size_tol: float = FNN_SIZE_TOL,
) -> np.ndarray:
    """False-neighbor fraction for m = 1..max_m (1.0 where too short to test)."""
    series = _check_series(series)
    if tau < 1 or max_m < 1:
        raise ValueError("need tau >= 1 and max_m >= 1")
    if series.size < (max_m - 1) * tau + 2:
        raise TooShortError("series too short to embed at max_m")
    sigma = float(series.std())
    fracs = np.ones(max_m)
    for m in range(1, max_m + 1):
        usable = series.size - m * tau
        if usable < 2:
            break
        pts = _embed_forward(series, m, tau)[:usable]
        tree = cKDTree(pts)
        dist, idx = tree.query(pts, k=2)
        d = dist[:, 1]
        j = idx[:, 1]
        extra = np.abs(series[np.arange(usable) + m * tau] - series[j + m * tau])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(d > 0, extra / np.where(d > 0, d, 1.0), np.inf)
        ratio[(d == 0) & (extra == 0)] = 0.0
        lonely = np.sqrt(d**2 + extra**2) / sigma > size_tol
        fracs[m - 1] = float(np.mean((ratio > ratio_tol) | lonely))
    return fracs


def false_nearest_neighbors(
    series, tau: int, max_m: int, threshold: float = 0.01
) -> int:
    """Smallest m <= max_m whose FNN fraction is below threshold, else max_m."""
    fracs = fnn_profile(series, tau, max_m)
    below = np.nonzero(fracs < threshold)[0]
    if below.size:
        return int(below[0] + 1)
    return max_m


def delay_embed(series, params: EmbeddingParams) -> PhaseTrajectory:
    """Delay embedding per u_i = (z_{i-(m-1)tau}, ..., z_{i-tau}, z_i)."""
    series = np.asarray(series, dtype=float)
    if series.ndim != 1:
        raise ValueError("expected a 1-D scalar series")
    if series.size < params.span:
        raise TooShortError(
            f"need at least {params.span} samples for m={params.m}, tau={params.tau}"
        )
    pts = _embed_forward(series, params.m, params.tau).copy()
    return PhaseTrajectory(points=pts, params=params, source_len=series.size)


def patch(traj: PhaseTrajectory | np.ndarray, p: int) -> np.ndarray:
    """Group p consecutive points and flatten each group to a D = m*p vector.

    The leading remainder (len mod p) is dropped so the most recent points are
    always kept.  Flattening is time-major: the first m entries of a patch
    vector are its oldest point.
    """
    if p < 1:
        raise ValueError("patch length must be >= 1")
    pts = traj.points if isinstance(traj, PhaseTrajectory) else np.asarray(traj, dtype=float)
    n, m = pts.shape
    count = n // p
    kept = pts[n - count * p :]
    return kept.reshape(count, p * m)


def select_embedding(
    series,
    max_tau: int | None = None,
    max_m: int = 10,
    threshold: float = 0.01,
    bins: int | None = None,
    repeats: int = 1,
) -> EmbeddingParams:
    """Delay from the MI minimum, then dimension from FNN.

    Multivariate input (2-D, columns are channels) is handled channel
    independently; the unified parameters are the maximum m and the median tau
    across channels.  ``repeats > 1`` re-runs the selection on that many
    overlapping segments (60% of the series each) and reports the modal m and
    median tau, damping the method's numerical sensitivity.
    """
    arr = np.asarray(series, dtype=float)
    if arr.ndim == 2:
        per = [
            select_embedding(arr[:, c], max_tau, max_m, threshold, bins, repeats)
            for c in range(arr.shape[1])
        ]
        m = max(p.m for p in per)
        tau = int(np.median([p.tau for p in per]))
        return EmbeddingParams(m=m, tau=max(1, tau))
    if repeats > 1:
        seg_len = max(8, int(0.6 * arr.size))
        starts = np.linspace(0, arr.size - seg_len, repeats).astype(int)
        picks = [
            select_embedding(arr[s : s + seg_len], max_tau, max_m, threshold, bins)
            for s in starts
        ]
        ms = [p.m for p in picks]
        m = int(np.bincount(ms).argmax())
        tau = int(np.median([p.tau for p in picks]))
        return EmbeddingParams(m=m, tau=max(1, tau))
    if max_tau is None:
        max_tau = int(np.clip(arr.size // 10, 10, 100))
    tau = mutual_information_delay(arr, max_tau, bins)
    m = false_nearest_neighbors(arr, tau, max_m, threshold)
    return EmbeddingParams(m=m, tau=tau)
