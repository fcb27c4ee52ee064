"""End-to-end attractor-aware forecaster.

Per channel and per context window the pipeline is: instance-normalize,
delay-embed, patch, run the discretized polynomial-projection recurrence over
the patch sequence, split the state sequence into a multi-scale pyramid,
advance every scale one step with the configured evolution strategy,
reconstruct the finest scale from the evolved pyramid, collapse the polynomial
axis by evaluating each window expansion at its right endpoint, and map the
flattened features to the next ``horizon`` samples with a ridge-fit readout.

Every learned map is a closed-form ridge regression; there is no iterative
training.  Evolution operators are fit on consecutive-window pairs (windows
shifted by one patch), so "evolve" means "advance the window by one patch".
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import evolution as evo
from .embedding import EmbeddingParams, delay_embed, patch, select_embedding
from .errors import ShapeMismatchError, TooShortError, WindowTooShortError
from .legendre import (
    DiscretizedSsm,
    SsmParams,
    discretize,
    make_ssm_params,
    ssm_params_from_json,
    ssm_params_to_json,
)
from .scan import ScanInput, sequential_scan
from .seeding import derive_seed, worker_count
from .wavelet import Pyramid, WaveletFilters, build_filters, decompose, reconstruct

STRATEGIES = ("frequency", "direct", "hopfield")

AUTO_MAX_M = 6


@dataclass(frozen=True)
class ForecasterConfig:
    window: int
    horizon: int
    embedding: EmbeddingParams | None = None  # None selects (m, tau) from data
    patch_len: int = 8
    poly_order: int = 8
    ssm_variant: str = "diag_neg1"
    theta: float = 4.0  # measure window in patch steps; per-step delta = 1/theta
    levels: int = 2
    m_modes: int = 16
    ridge_lambda: float = 1e-3
    evolution_strategy: str = "frequency"
    teacher_alpha: float = 0.0
    n_clusters: int = 8
    hopfield_beta: float = 4.0
    max_train_windows: int = 1024
    seed: int = 0

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.window < 2:
            raise ValueError("window must be >= 2")
        if self.patch_len < 1 or self.poly_order < 1 or self.levels < 0:
            raise ValueError("patch_len, poly_order >= 1 and levels >= 0 required")
        if self.theta <= 0:
            raise ValueError("theta must be positive")
        if self.evolution_strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        if not 0.0 <= self.teacher_alpha <= 1.0:
            raise ValueError("teacher_alpha must lie in [0, 1]")
        if self.m_modes < 1 or self.n_clusters < 1:
            raise ValueError("m_modes and n_clusters must be >= 1")


@dataclass(frozen=True)
class ShapeInfo:
    """Static pipeline shapes for a given config + embedding."""

    n_points: int
    n_patches: int
    padded: int
    pad: int
    d: int
    order: int
    eff_levels: int
    scale_lens: tuple
    feat_len: int


def pipeline_shapes(config: ForecasterConfig, embedding: EmbeddingParams) -> ShapeInfo:
    n_points = config.window - (embedding.m - 1) * embedding.tau
    if n_points < config.patch_len:
        raise TooShortError(
            "window leaves no full patch after embedding "
            f"(points={n_points}, patch_len={config.patch_len})"
        )
    n_patches = n_points // config.patch_len
    padded = 1
    while padded < n_patches:
        padded *= 2
    eff_levels = min(config.levels, padded.bit_length() - 1)
    scale_lens = tuple(padded // 2 ** (i + 1) for i in range(eff_levels))
    scale_lens = scale_lens + (padded // 2**eff_levels,)
    d = embedding.m * config.patch_len
    return ShapeInfo(
        n_points=n_points,
        n_patches=n_patches,
        padded=padded,
        pad=padded - n_patches,
        d=d,
        order=config.poly_order,
        eff_levels=eff_levels,
        scale_lens=scale_lens,
        feat_len=n_patches * d,
    )


@dataclass(frozen=True)
class ChannelModel:
    evolvers: list
    readout: np.ndarray  # (feat_len, horizon)
    train_mean: float
    train_std: float


@dataclass(frozen=True)
class ForecastResult:
    predictions: np.ndarray  # (horizon, channels)
    mse_per_channel: np.ndarray | None = None
    mae_per_channel: np.ndarray | None = None


@dataclass(frozen=True)
class FittedForecaster:
    config: ForecasterConfig
    embedding: EmbeddingParams
    ssm: SsmParams
    disc: DiscretizedSsm
    filters: WaveletFilters
    shapes: ShapeInfo
    channels: list

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    def represent(self, window: np.ndarray):
        """Pipeline front half for one normalized-window: returns
        (scale sequences, mean, std) of a single channel window."""
        return _represent(np.asarray(window, dtype=float), self)


def _as_2d(series) -> np.ndarray:
    arr = np.asarray(series, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError("series must be 1-D or (samples, channels)")
    return arr


def _normalize(window: np.ndarray):
    mu = float(window.mean())
    sd = float(window.std())
    if sd == 0.0:
        sd = 1.0
    return (window - mu) / sd, mu, sd


def _scan_states(patches: np.ndarray, model) -> np.ndarray:
    """Run the discretized recurrence over the patch sequence.

    Each patch row drives D independent order-N states; the result is
    (L, D, N).
    """
    length = patches.shape[0]
    bu = patches[:, :, None] * model.disc.b_bar  # (L, D, N)
    a_seq = np.broadcast_to(model.disc.a_bar, (length,) + model.disc.a_bar.shape)
    return sequential_scan(
        ScanInput(a_seq=a_seq, bu_seq=bu, matrix=not model.ssm.is_diagonal)
    )


def _represent(window: np.ndarray, model):
    """Normalize, embed, patch, scan, decompose one channel window."""
    zn, mu, sd = _normalize(window)
    traj = delay_embed(zn, model.embedding)
    patches = patch(traj, model.config.patch_len)
    states = _scan_states(patches, model)
    sh = model.shapes
    if sh.pad:
        # wavelet stage needs a power-of-two step count; repeat the earliest
        # state on the left so the most recent data stays aligned
        head = np.repeat(states[:1], sh.pad, axis=0)
        states = np.concatenate([head, states], axis=0)
    pyr = decompose(states, model.filters, sh.eff_levels)
    scales = list(pyr.details) + [pyr.coarse]
    return scales, mu, sd


def _scale_cell_sizes(shapes: ShapeInfo):
    sizes = [2 ** (i + 1) for i in range(shapes.eff_levels)]
    sizes.append(2**shapes.eff_levels)
    return sizes


def _valid_positions(length: int, cell: int, pad: int) -> np.ndarray:
    start = -(-pad // cell)  # ceil: cells that overlap the repeated padding
    if start >= length:
        # every position at this scale spans padding; keep them all rather
        # than dropping the scale
        return np.arange(length)
    return np.arange(start, length)


def _evolve_scales(scales, evolvers, strategy):
    out = []
    for seq, ev in zip(scales, evolvers):
        if strategy == "frequency":
            out.append(evo.apply_spectral_evolution(seq, ev))
        else:
            flat = seq.reshape(seq.shape[0], -1)
            if strategy == "direct":
                nxt = evo.apply_direct_evolution(flat, ev)
            else:
                nxt = evo.apply_hopfield_evolution(flat, ev)
            out.append(nxt.reshape(seq.shape))
    return out


def _finalize_features(evolved_scales, model) -> np.ndarray:
    sh = model.shapes
    pyr = Pyramid(
        details=list(evolved_scales[:-1]), coarse=evolved_scales[-1], levels=sh.eff_levels
    )
    states = reconstruct(pyr, model.filters)
    states = states[sh.pad :]
    endpoint = np.sqrt(2.0 * np.arange(sh.order) + 1.0)
    feats = states @ endpoint  # (L', D)
    return feats.reshape(-1)


def _fit_channel(z: np.ndarray, starts: np.ndarray, model_stub, config: ForecasterConfig,
                 channel_index: int) -> ChannelModel:
    sh = model_stub.shapes
    w, h = config.window, config.horizon
    reps = []
    stats = []
    for s in starts:
        scales, mu, sd = _represent(z[s : s + w], model_stub)
        reps.append(scales)
        stats.append((mu, sd))

    cell_sizes = _scale_cell_sizes(sh)
    evolvers = []
    n_scales = len(reps[0])
    for si in range(n_scales):
        seqs = [r[si] for r in reps]
        length = seqs[0].shape[0]
        if config.evolution_strategy == "frequency":
            m_modes = min(config.m_modes, length // 2 + 1)
            # one spectrum per window; consecutive windows form the pairs
            spectra = [np.moveaxis(evo.fft_modes(s, m_modes), 1, 0) for s in seqs]
            a_spec = np.concatenate(spectra[:-1], axis=0)
            b_spec = np.concatenate(spectra[1:], axis=0)
            evolvers.append(
                evo.fit_spectral_operators(a_spec, b_spec, length, config.ridge_lambda)
            )
        else:
            valid = _valid_positions(length, cell_sizes[si], sh.pad)
            src = np.concatenate(
                [r[si][valid].reshape(valid.size, -1) for r in reps[:-1]], axis=0
            )
            dst = np.concatenate(
                [r[si][valid].reshape(valid.size, -1) for r in reps[1:]], axis=0
            )
            seed = derive_seed(config.seed, 16 * channel_index + si + 2)
            if config.evolution_strategy == "direct":
                k = min(config.n_clusters, src.shape[0])
                part = evo.kmeans_partition(src, k, seed=seed)
                evolvers.append(
                    evo.fit_direct_operators(src, part, config.ridge_lambda, targets=dst)
                )
            else:
                evolvers.append(
                    evo.fit_hopfield_evolution(
                        src, config.n_clusters, config.hopfield_beta, seed=seed, targets=dst
                    )
                )

    feats = np.empty((len(starts), sh.feat_len))
    targets = np.empty((len(starts), h))
    for wdx, s in enumerate(starts):
        evolved = _evolve_scales(reps[wdx], evolvers, config.evolution_strategy)
        feats[wdx] = _finalize_features(evolved, model_stub)
        mu, sd = stats[wdx]
        targets[wdx] = (z[s + w : s + w + h] - mu) / sd
    readout = evo.ridge_fit(feats, targets, config.ridge_lambda).T  # (feat, horizon)
    return ChannelModel(
        evolvers=evolvers,
        readout=readout,
        train_mean=float(z.mean()),
        train_std=float(z.std()),
    )


def fit(config: ForecasterConfig, series) -> FittedForecaster:
    """Fit per-channel evolution operators and readouts on sliding windows.

    Training windows start every ``patch_len`` samples so consecutive windows
    are exactly one recurrence step apart (that is what the evolution
    operators model); at most ``max_train_windows`` of the most recent ones
    are kept.  With ``embedding=None`` the delay/dimension are selected from
    the data, capped so one context window always holds at least two patches;
    a constant series then raises DegenerateSeriesError, while a manually
    supplied embedding turns a constant series into an exact constant
    forecast (zero features, the window mean is returned).
    """
    arr = _as_2d(series)
    n, n_channels = arr.shape
    w, h = config.window, config.horizon
    if n < w + h + config.patch_len:
        raise TooShortError("series shorter than one training window + horizon")

    embedding = config.embedding
    if embedding is None:
        cap_tau = max(1, (w - 2 * config.patch_len) // max(1, AUTO_MAX_M - 1))
        embedding = select_embedding(
            arr if n_channels > 1 else arr[:, 0],
            max_tau=max(1, min(cap_tau, n // 4 - 1)),
            max_m=AUTO_MAX_M,
        )
    shapes = pipeline_shapes(config, embedding)

    ssm = make_ssm_params(config.ssm_variant, config.poly_order, 1.0 / config.theta)
    disc = discretize(ssm, b_method="euler")
    filters = build_filters(config.poly_order)
    stub = FittedForecaster(
        config=config,
        embedding=embedding,
        ssm=ssm,
        disc=disc,
        filters=filters,
        shapes=shapes,
        channels=[],
    )

    all_starts = np.arange(0, n - w - h + 1, config.patch_len)
    if all_starts.size < 2:
        raise TooShortError("need at least two training windows")
    starts = all_starts[-config.max_train_windows :]

    def job(c):
        return _fit_channel(arr[:, c], starts, stub, config, c)

    workers = min(worker_count(), n_channels)
    if workers > 1 and n_channels > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            channels = list(pool.map(job, range(n_channels)))
    else:
        channels = [job(c) for c in range(n_channels)]
    return replace(stub, channels=channels)


def predict(model: FittedForecaster, context, truth=None) -> ForecastResult:
    """Deterministic forward pass on the trailing window of the context.

    When ``truth`` (horizon x channels) is given, per-channel MSE/MAE are
    attached to the result.
    """
    arr = _as_2d(context)
    w = model.config.window
    if arr.shape[0] < w:
        raise WindowTooShortError(f"context needs at least {w} samples")
    if arr.shape[1] != model.n_channels:
        raise ShapeMismatchError(
            f"model has {model.n_channels} channels, context has {arr.shape[1]}"
        )
    h = model.config.horizon
    out = np.empty((h, model.n_channels))
    for c in range(model.n_channels):
        window = arr[-w:, c]
        scales, mu, sd = _represent(window, model)
        ch = model.channels[c]
        evolved = _evolve_scales(scales, ch.evolvers, model.config.evolution_strategy)
        feats = _finalize_features(evolved, model)
        out[:, c] = mu + sd * (feats @ ch.readout)
    if truth is None:
        return ForecastResult(predictions=out)
    metrics = evaluate(out, truth)
    return ForecastResult(
        predictions=out,
        mse_per_channel=metrics["mse_per_channel"],
        mae_per_channel=metrics["mae_per_channel"],
    )


def evaluate(predictions, truth) -> dict:
    """MSE / MAE averaged over horizon and channels (plus per-channel views)."""
    p = _as_2d(predictions)
    t = _as_2d(truth)
    if p.shape != t.shape:
        raise ShapeMismatchError(f"predictions {p.shape} vs truth {t.shape}")
    err = p - t
    return {
        "mse": float(np.mean(err**2)),
        "mae": float(np.mean(np.abs(err))),
        "mse_per_channel": np.mean(err**2, axis=0),
        "mae_per_channel": np.mean(np.abs(err), axis=0),
    }


def teacher_force_modulate(z_pred, z_true, alpha: float):
    """Convex blend (1 - alpha) * prediction + alpha * truth."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    z_pred = np.asarray(z_pred, dtype=float)
    z_true = np.asarray(z_true, dtype=float)
    if z_pred.shape != z_true.shape:
        raise ShapeMismatchError("state shapes differ")
    return (1.0 - alpha) * z_pred + alpha * z_true


def rollout(
    model: FittedForecaster,
    context,
    horizon_total: int,
    truth=None,
    alpha: float | None = None,
) -> np.ndarray:
    """Autoregressive multi-window forecast.

    When ``truth`` is given, each predicted segment is blended with the true
    continuation before being appended to the context (the returned forecast
    itself stays unblended).  alpha defaults to the config's teacher_alpha.
    """
    if alpha is None:
        alpha = model.config.teacher_alpha
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    ctx = _as_2d(context).copy()
    h = model.config.horizon
    truth_arr = None if truth is None else _as_2d(truth)
    preds = []
    produced = 0
    while produced < horizon_total:
        seg = predict(model, ctx).predictions
        preds.append(seg)
        if truth_arr is not None and alpha > 0.0:
            t_seg = truth_arr[produced : produced + h]
            if t_seg.shape[0] < h:
                raise TooShortError("truth shorter than the rollout horizon")
            feed = teacher_force_modulate(seg, t_seg, alpha)
        else:
            feed = seg
        ctx = np.concatenate([ctx, feed], axis=0)
        produced += h
    return np.concatenate(preds, axis=0)[:horizon_total]


def persistence_forecast(context, horizon: int) -> np.ndarray:
    """Repeat the last observed value; the minimal sanity baseline."""
    arr = _as_2d(context)
    return np.repeat(arr[-1:, :], horizon, axis=0)


def global_mean_forecast(train_series, horizon: int) -> np.ndarray:
    arr = _as_2d(train_series)
    return np.repeat(arr.mean(axis=0, keepdims=True), horizon, axis=0)


# ---------------------------------------------------------------------------
# serialization


def _evolver_doc(ev) -> dict:
    if isinstance(ev, evo.SpectralEvolutionModel):
        return {"kind": "frequency", "doc": json.loads(evo.spectral_model_to_json(ev))}
    if isinstance(ev, evo.DirectEvolutionModel):
        return {
            "kind": "direct",
            "centroids": ev.centroids.tolist(),
            "operators": ev.operators.tolist(),
            "ridge_lambda": ev.ridge_lambda,
        }
    if isinstance(ev, evo.HopfieldEvolutionModel):
        return {
            "kind": "hopfield",
            "keys": ev.keys.tolist(),
            "values": ev.values.tolist(),
            "beta": ev.beta,
        }
    raise TypeError(f"unknown evolver type {type(ev)!r}")


def _evolver_from_doc(doc: dict):
    kind = doc["kind"]
    if kind == "frequency":
        return evo.spectral_model_from_json(json.dumps(doc["doc"]))
    if kind == "direct":
        return evo.DirectEvolutionModel(
            centroids=np.asarray(doc["centroids"], dtype=float),
            operators=np.asarray(doc["operators"], dtype=float),
            ridge_lambda=float(doc["ridge_lambda"]),
        )
    if kind == "hopfield":
        return evo.HopfieldEvolutionModel(
            keys=np.asarray(doc["keys"], dtype=float),
            values=np.asarray(doc["values"], dtype=float),
            beta=float(doc["beta"]),
        )
    raise ValueError(f"unknown evolver kind {kind!r}")


def model_to_json(model: FittedForecaster) -> str:
    cfg = model.config
    doc = {
        "v": 1,
        "config": {
            "window": cfg.window,
            "horizon": cfg.horizon,
            "patch_len": cfg.patch_len,
            "poly_order": cfg.poly_order,
            "ssm_variant": cfg.ssm_variant,
            "theta": cfg.theta,
            "levels": cfg.levels,
            "m_modes": cfg.m_modes,
            "ridge_lambda": cfg.ridge_lambda,
            "evolution_strategy": cfg.evolution_strategy,
            "teacher_alpha": cfg.teacher_alpha,
            "n_clusters": cfg.n_clusters,
            "hopfield_beta": cfg.hopfield_beta,
            "max_train_windows": cfg.max_train_windows,
            "seed": cfg.seed,
        },
        "embedding": {"m": model.embedding.m, "tau": model.embedding.tau},
        "ssm": json.loads(ssm_params_to_json(model.ssm)),
        "disc": {"a_bar": model.disc.a_bar.tolist(), "b_bar": model.disc.b_bar.tolist()},
        "channels": [
            {
                "evolvers": [_evolver_doc(ev) for ev in ch.evolvers],
                "readout": ch.readout.tolist(),
                "train_mean": ch.train_mean,
                "train_std": ch.train_std,
            }
            for ch in model.channels
        ],
    }
    return json.dumps(doc)


def model_from_json(text: str) -> FittedForecaster:
    doc = json.loads(text)
    if doc.get("v") != 1:
        raise ValueError("unsupported model document version")
    embedding = EmbeddingParams(m=int(doc["embedding"]["m"]), tau=int(doc["embedding"]["tau"]))
    config = ForecasterConfig(embedding=embedding, **doc["config"])
    ssm = ssm_params_from_json(json.dumps(doc["ssm"]))
    disc = DiscretizedSsm(
        a_bar=np.asarray(doc["disc"]["a_bar"], dtype=float),
        b_bar=np.asarray(doc["disc"]["b_bar"], dtype=float),
    )
    shapes = pipeline_shapes(config, embedding)
    channels = [
        ChannelModel(
            evolvers=[_evolver_from_doc(e) for e in ch["evolvers"]],
            readout=np.asarray(ch["readout"], dtype=float),
            train_mean=float(ch["train_mean"]),
            train_std=float(ch["train_std"]),
        )
        for ch in doc["channels"]
    ]
    return FittedForecaster(
        config=config,
        embedding=embedding,
        ssm=ssm,
        disc=disc,
        filters=build_filters(config.poly_order),
        shapes=shapes,
        channels=channels,
    )


def save_model(model: FittedForecaster, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(model_to_json(model))


def load_model(path) -> FittedForecaster:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_json(fh.read())
