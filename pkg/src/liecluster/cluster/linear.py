"""Linear models on invariant ACE / TRACE features, fitted by ridge regression."""
from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np

from ..errors import ConfigurationError, InvalidArgumentError
from .basis import FeatureField, TraceBasis, ace_flatten, pool_atomic_basis
from .embedding import Embedding, PointCloud
from .mace import ModelParams


@dataclasses.dataclass
class LinearConfig:
    """``mode="ace"`` treats all ``(c, k)`` as one channel; ``mode="trace"``
    mixes channels with a seeded ``(channels, C)`` matrix and couples each
    mixed channel separately."""

    embedding: Embedding
    max_order: int = 2
    mode: str = "ace"
    channels: Optional[int] = None
    outputs: Optional[list] = None
    ridge: float = 1e-10
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.mode not in ("ace", "trace"):
            raise ConfigurationError(f"unknown basis mode {self.mode!r}")
        if self.ridge < 0:
            raise InvalidArgumentError("ridge parameter must be non-negative")


class LinearModel:
    def __init__(self, config: LinearConfig, provider=None, mix: Optional[np.ndarray] = None):
        self.config = config
        emb = config.embedding
        outputs = config.outputs or [emb.trivial]
        if config.mode == "ace":
            layout = emb.layout.repeated(emb.channels) if emb.channels > 1 else emb.layout
            self.mix = None
        else:
            layout = emb.layout
            if mix is None:
                rng = np.random.default_rng(config.seed)
                mix = rng.standard_normal((config.channels or emb.channels, emb.channels))
            self.mix = np.asarray(mix)
        self.basis = TraceBasis(layout, config.max_order, outputs, self.mix, provider)

    def pooled(self, cloud: PointCloud) -> np.ndarray:
        phi = self.config.embedding.embed(cloud.permuted(cloud.canonical_order()))
        A = pool_atomic_basis(phi)
        return ace_flatten(A) if self.config.mode == "ace" else A

    def features(self, cloud: PointCloud) -> FeatureField:
        return self.basis(self.pooled(cloud))

    def design_row(self, cloud: PointCloud) -> np.ndarray:
        inv = self.features(cloud).invariant_vector()
        return np.concatenate([[1.0], inv.real, inv.imag])

    def design_matrix(self, clouds: Sequence[PointCloud]) -> np.ndarray:
        if self.config.threads > 1:
            with ThreadPoolExecutor(self.config.threads) as ex:
                rows = list(ex.map(self.design_row, clouds))
        else:
            rows = [self.design_row(c) for c in clouds]
        return np.stack(rows)

    def predict(self, params: ModelParams, clouds: Sequence[PointCloud]) -> np.ndarray:
        w = np.asarray(params.readout_weights[0])
        X = self.design_matrix(clouds)
        if X.shape[1] != w.shape[0]:
            raise ConfigurationError("weight vector does not match the feature count")
        return X @ w


@dataclasses.dataclass
class FitReport:
    n_train: int
    n_test: int
    n_features: int
    rank: int
    rmse_train: float
    rmse_test: Optional[float]

    def lines(self) -> list:
        out = [f"train samples: {self.n_train}", f"features: {self.n_features} (rank {self.rank})",
               f"train RMSE: {self.rmse_train:.17g}"]
        if self.rmse_test is not None:
            out += [f"test samples: {self.n_test}", f"test RMSE: {self.rmse_test:.17g}"]
        return out


def _rmse(r: np.ndarray) -> float:
    return float(np.sqrt(np.mean(r ** 2))) if r.size else 0.0


def ridge_solve(X: np.ndarray, y: np.ndarray, ridge: float):
    """Minimize ``|X w - y|^2 + ridge |S w|^2`` with ``S`` the column scales.

    Columns are scaled to unit RMS first, so ``ridge`` is relative to the
    feature magnitudes. Returns ``(w, rank)``.
    """
    scale = np.sqrt(np.mean(X ** 2, axis=0))
    scale[scale == 0] = 1.0
    Xs = X / scale
    p = X.shape[1]
    aug = np.vstack([Xs, np.sqrt(ridge) * np.eye(p)]) if ridge > 0 else Xs
    rhs = np.concatenate([y, np.zeros(p)]) if ridge > 0 else y
    ws, _, rank, _ = np.linalg.lstsq(aug, rhs, rcond=None)
    return ws / scale, int(np.linalg.matrix_rank(Xs))


def fit_linear(dataset: Sequence, config: LinearConfig, test: Optional[Sequence] = None,
               provider=None):
    """Fit invariant readout weights on ``[(cloud, target), ...]``.

    Returns ``(ModelParams, FitReport)``; only the readout weights are
    fitted, channel mixing stays at its seeded value.
    """
    if len(dataset) == 0:
        raise InvalidArgumentError("empty dataset")
    model = LinearModel(config, provider)
    X = model.design_matrix([c for c, _ in dataset])
    y = np.array([float(t) for _, t in dataset])
    w, rank = ridge_solve(X, y, config.ridge)
    params = ModelParams(nu=[config.max_order], readout_weights=[w],
                         channel_mix=[] if model.mix is None else [model.mix])
    rmse_test, n_test = None, 0
    if test:
        Xt = model.design_matrix([c for c, _ in test])
        yt = np.array([float(t) for _, t in test])
        rmse_test, n_test = _rmse(Xt @ w - yt), len(test)
    report = FitReport(len(dataset), n_test, X.shape[1], rank, _rmse(X @ w - y), rmse_test)
    return params, report
