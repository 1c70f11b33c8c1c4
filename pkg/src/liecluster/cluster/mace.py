"""Multi-layer message passing whose messages are TRACE features."""
from __future__ import annotations

import dataclasses
from typing import Optional, Sequence

import numpy as np

from ..errors import ConfigurationError
from ..irreps import parse_label, trivial_label
from .basis import InMemoryCouplings, TraceBasis, mix_channels, pool_atomic_basis
from .embedding import Embedding, Layout, PointCloud


@dataclasses.dataclass
class MaceConfig:
    """``hidden[t]`` lists the irreps of ``h^(t+1)``; ``nu[t]`` is the
    correlation order of layer ``t``."""

    hidden: list
    nu: list
    channels: int = 2
    residual: bool = False
    seed: int = 0

    def __post_init__(self):
        self.hidden = [[parse_label(l) if isinstance(l, str) else l for l in layer] for layer in self.hidden]
        self.nu = [int(v) for v in self.nu]
        if len(self.hidden) != len(self.nu):
            raise ConfigurationError("one correlation order per layer is required")
        if any(v < 1 for v in self.nu) or self.channels < 1:
            raise ConfigurationError("correlation orders and channel count must be positive")

    @property
    def layers(self) -> int:
        return len(self.nu)


@dataclasses.dataclass
class ModelParams:
    """Weights of a MACE stack or of a linear readout.

    Per-layer lists: ``embed_mix`` ``(C, C_emb)``; ``pair_weights`` one
    ``(C, mult)`` array per embedding slot; ``channel_mix`` ``(C, C)`` applied
    before the product basis; ``basis_weights`` one ``(C, n_alpha)`` array per
    hidden slot; ``update`` one ``(C, C)`` array per hidden slot.
    ``readout_weights`` holds one ``(C, n_slots)`` array per layer, or a
    single weight vector for a linear model.
    """

    nu: list = dataclasses.field(default_factory=list)
    h0_mix: Optional[np.ndarray] = None
    embed_mix: list = dataclasses.field(default_factory=list)
    pair_weights: list = dataclasses.field(default_factory=list)
    channel_mix: list = dataclasses.field(default_factory=list)
    basis_weights: list = dataclasses.field(default_factory=list)
    update: list = dataclasses.field(default_factory=list)
    readout_weights: list = dataclasses.field(default_factory=list)

    @property
    def layers(self) -> int:
        return len(self.nu)


def _state_layout(labels) -> Layout:
    return Layout.from_labels(labels)


class Mace:
    """Stack of message-passing layers over the full cloud minus self.

    Layer ``t``: ``phi^t_j`` couples ``h^t_j`` with the (channel-mixed)
    embedding of ``j`` slot by slot; ``A_i = sum_{j != i} phi^t_j``; messages
    are TRACE features of ``A_i`` weighted per hidden slot; ``h^(t+1)`` is a
    per-slot channel map of the message (plus ``h^t`` if ``residual``).
    """

    def __init__(self, embedding: Embedding, config: MaceConfig,
                 params: Optional[ModelParams] = None, provider=None):
        self.embedding = embedding
        self.config = config
        provider = provider or InMemoryCouplings()
        V = embedding.layout
        C, Ce = config.channels, embedding.channels
        triv = V.trivial_slots()
        self.h0_slots = triv
        self.layouts = [_state_layout([V.reps[s].label if V.reps[s].label is not None
                                       else trivial_label(embedding.group, embedding.group_n)
                                       for s in triv] or [embedding.trivial])]
        for layer in config.hidden:
            if not layer:
                raise ConfigurationError("every layer needs at least one hidden irrep")
            self.layouts.append(_state_layout(layer))
        rng = np.random.default_rng(config.seed)
        build = params is None
        if build:
            params = ModelParams(nu=list(config.nu))
            params.h0_mix = rng.standard_normal((C, Ce))
        self.pair_cg, self.traces = [], []
        for t in range(config.layers):
            H, Hn = self.layouts[t], self.layouts[t + 1]
            cgs = [provider.pairwise(H.rep, V.reps[s], V.reps[s]) for s in range(len(V))]
            self.pair_cg.append(cgs)
            labels = sorted(set(Hn.labels))
            self.traces.append(TraceBasis(V, config.nu[t], labels, provider=provider))
            if build:
                params.embed_mix.append(rng.standard_normal((C, Ce)))
                params.pair_weights.append([rng.standard_normal((C, cg.multiplicity)) for cg in cgs])
                params.channel_mix.append(rng.standard_normal((C, C)))
                params.basis_weights.append(
                    [rng.standard_normal((C, self._n_alpha(t, lab))) for lab in Hn.labels])
                params.update.append([rng.standard_normal((C, C)) for _ in Hn.labels])
        if build:
            params.readout_weights = [np.zeros((C, len(L))) for L in self.layouts[1:]]
        self.params = params
        self._check_shapes()

    def _n_alpha(self, t: int, label) -> int:
        tr = self.traces[t]
        return sum(tr.couplings[(nu, label)].multiplicity for nu in range(1, tr.max_order + 1))

    def _check_shapes(self):
        p, C = self.params, self.config.channels
        if p.h0_mix is None or p.h0_mix.shape != (C, self.embedding.channels):
            raise ConfigurationError("h0 channel mix has the wrong shape")
        if len(p.update) != self.config.layers:
            raise ConfigurationError("parameter layer count does not match the configuration")
        for t in range(self.config.layers):
            Hn = self.layouts[t + 1]
            if len(p.basis_weights[t]) != len(Hn) or len(p.update[t]) != len(Hn):
                raise ConfigurationError(f"layer {t}: one weight block per hidden slot is required")
            for j, lab in enumerate(Hn.labels):
                if p.basis_weights[t][j].shape != (C, self._n_alpha(t, lab)):
                    raise ConfigurationError(f"layer {t} slot {j}: basis weights shaped "
                                             f"{p.basis_weights[t][j].shape}, expected {(C, self._n_alpha(t, lab))}")

    def initial_state(self, phi: np.ndarray) -> np.ndarray:
        n = phi.shape[0]
        if not self.h0_slots:
            ones = np.ones((n, self.embedding.channels, 1), dtype=np.complex128)
            return mix_channels(ones, self.params.h0_mix)
        cols = [self.embedding.layout.offsets[s] for s in self.h0_slots]
        return mix_channels(phi[:, :, cols], self.params.h0_mix)

    def layer(self, t: int, h: np.ndarray, phi: np.ndarray) -> np.ndarray:
        """One update ``h^t -> h^(t+1)``; particles in canonical order."""
        p = self.params
        V = self.embedding.layout
        n, C = h.shape[0], self.config.channels
        phim = mix_channels(phi, p.embed_mix[t])
        one = np.zeros((n, C, V.dim), dtype=np.complex128)
        for s, cg in enumerate(self.pair_cg[t]):
            if cg.multiplicity == 0:
                continue
            sl = V.slice(s)
            # (n, C, mult, d_s)
            coupled = np.einsum("aKkl,jck,jcl->jcaK", cg.coefficients, h, phim[:, :, sl])
            one[:, :, sl] = np.einsum("ca,jcaK->jcK", p.pair_weights[t][s], coupled)
        Hn = self.layouts[t + 1]
        out = np.zeros((n, C, Hn.dim), dtype=np.complex128)
        if n == 0:
            return out
        tr = self.traces[t]
        A = np.stack([pool_atomic_basis(one, skip=i) for i in range(n)])
        feats = tr(mix_channels(A, p.channel_mix[t]))
        for j, lab in enumerate(Hn.labels):
            B = np.concatenate([feats.blocks[(nu, lab)] for nu in range(1, tr.max_order + 1)], axis=2)
            m = np.einsum("ca,icaK->icK", p.basis_weights[t][j], B)
            out[:, :, Hn.slice(j)] = mix_channels(m, p.update[t][j])
        if self.config.residual and self.layouts[t].names == Hn.names:
            out = out + h
        return out

    def states(self, cloud: PointCloud) -> list:
        """``[h^1, ..., h^T]``, each ``(n, C, dim)`` in the input particle order."""
        order = cloud.canonical_order()
        phi = self.embedding.embed(cloud.permuted(order))
        h = self.initial_state(phi)
        out = []
        for t in range(self.config.layers):
            h = self.layer(t, h, phi)
            out.append(h)
        inv = np.empty_like(order)
        inv[order] = np.arange(len(order))
        return [s[inv] for s in out]

    def readout(self, cloud: PointCloud, weights: Optional[Sequence] = None):
        """Per-particle and global scalar readouts."""
        weights = self.params.readout_weights if weights is None else weights
        states = self.states(cloud)
        local = readout(states, self.layouts[1:], weights)
        order = cloud.canonical_order()
        total = complex(0.0)
        for i in order:
            total = total + local[i]
        return local, total


def readout(states: Sequence[np.ndarray], layouts: Sequence[Layout], weights: Sequence) -> np.ndarray:
    """``y_i = sum_t sum_{c, j trivial} r_t[c, j] h^t_{i c j}``.

    Non-zero weights on non-trivial slots raise ``ConfigurationError``.
    """
    if len(states) != len(weights) or len(states) != len(layouts):
        raise ConfigurationError("one readout weight block per layer is required")
    n = states[0].shape[0] if states else 0
    y = np.zeros(n, dtype=np.complex128)
    for h, L, r in zip(states, layouts, weights):
        r = np.asarray(r)
        if r.shape != (h.shape[1], len(L)):
            raise ConfigurationError(f"readout weights shaped {r.shape}, expected {(h.shape[1], len(L))}")
        triv = set(L.trivial_slots())
        for j in range(len(L)):
            if j not in triv:
                if np.any(r[:, j] != 0):
                    raise ConfigurationError(f"cannot read non-trivial slot {L.names[j]} into a scalar")
                continue
            y = y + h[:, :, L.offsets[j]] @ r[:, j]
    return y
