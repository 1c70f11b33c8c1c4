"""JSON / text formats for point clouds, model configs, parameters and features.

Complex numbers are stored as ``[re, im]`` pairs; floats use Python's
shortest round-trip representation so values reload bit-exactly.
"""
from __future__ import annotations

import json
from typing import Optional

import numpy as np

from ..algebra import rep_from_json
from ..errors import ConfigurationError, InvalidArgumentError
from ..irreps import parse_label
from .embedding import (
    Embedding, PointCloud, RadialHarmonic, RepCoordinates, lorentz_vectors, o3_vectors,
    su2_spinors, sun_vectors,
)
from .linear import LinearConfig, LinearModel
from .mace import Mace, MaceConfig, ModelParams


# --- point clouds -----------------------------------------------------------

def parse_cloud(text: str) -> PointCloud:
    """``{"particles": [{"raw": [...]}, ...]}`` or one whitespace-separated row per particle."""
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            obj = json.loads(stripped)
            rows = [[float(v) for v in p["raw"]] for p in obj["particles"]]
        except (ValueError, KeyError, TypeError) as exc:
            raise InvalidArgumentError(f"malformed point-cloud JSON: {exc}") from exc
    else:
        try:
            rows = [[float(v) for v in line.split()] for line in stripped.splitlines()
                    if line.strip() and not line.lstrip().startswith("#")]
        except ValueError as exc:
            raise InvalidArgumentError(f"malformed point-cloud text: {exc}") from exc
    if len({len(r) for r in rows}) > 1:
        raise InvalidArgumentError("particles have different attribute counts")
    return PointCloud(np.array(rows, dtype=np.float64).reshape(len(rows), -1) if rows else np.zeros((0, 0)))


def load_cloud(path: str) -> PointCloud:
    with open(path, encoding="utf-8") as fh:
        return parse_cloud(fh.read())


def cloud_to_json(cloud: PointCloud) -> str:
    return json.dumps({"particles": [{"raw": [float(v) for v in row]} for row in cloud.raw]})


# --- arrays -----------------------------------------------------------------

def _arr_to_json(a) -> dict:
    a = np.asarray(a)
    if np.iscomplexobj(a):
        vals = [[float(z.real), float(z.imag)] for z in a.reshape(-1)]
        return {"shape": list(a.shape), "complex": True, "values": vals}
    return {"shape": list(a.shape), "complex": False, "values": [float(v) for v in a.reshape(-1)]}


def _arr_from_json(obj) -> np.ndarray:
    shape = tuple(obj["shape"])
    if obj.get("complex"):
        v = np.array(obj["values"], dtype=np.float64).reshape(-1, 2)
        out = np.empty(len(v), dtype=np.complex128)
        out.real, out.imag = v[:, 0], v[:, 1]
        return out.reshape(shape)
    return np.array(obj["values"], dtype=np.float64).reshape(shape)


# --- parameters -------------------------------------------------------------

_PARAM_LISTS = ("embed_mix", "channel_mix", "readout_weights")
_PARAM_NESTED = ("pair_weights", "basis_weights", "update")


def params_to_json(p: ModelParams) -> str:
    d = {"nu": list(p.nu), "h0_mix": None if p.h0_mix is None else _arr_to_json(p.h0_mix)}
    for k in _PARAM_LISTS:
        d[k] = [_arr_to_json(a) for a in getattr(p, k)]
    for k in _PARAM_NESTED:
        d[k] = [[_arr_to_json(a) for a in layer] for layer in getattr(p, k)]
    return json.dumps(d, sort_keys=True) + "\n"


def params_from_json(text: str) -> ModelParams:
    try:
        d = json.loads(text)
        p = ModelParams(nu=[int(v) for v in d["nu"]])
        p.h0_mix = None if d.get("h0_mix") is None else _arr_from_json(d["h0_mix"])
        for k in _PARAM_LISTS:
            setattr(p, k, [_arr_from_json(a) for a in d.get(k, [])])
        for k in _PARAM_NESTED:
            setattr(p, k, [[_arr_from_json(a) for a in layer] for layer in d.get(k, [])])
    except (ValueError, KeyError, TypeError) as exc:
        raise InvalidArgumentError(f"malformed parameter file: {exc}") from exc
    return p


# --- model config -----------------------------------------------------------

_PRESETS = {
    "so13_vector": lambda cfg: lorentz_vectors(tuple(cfg.get("powers", (0, 1)))),
    "o3_vector": lambda cfg: o3_vectors(tuple(cfg.get("powers", (0, 1)))),
    "su2_spinor": lambda cfg: su2_spinors(tuple(cfg.get("powers", (0, 1)))),
    "sun_fundamental": lambda cfg: sun_vectors(int(cfg.get("n", 3)), tuple(cfg.get("powers", (0, 1)))),
}


def build_embedding(cfg: dict) -> Embedding:
    """Embedding from its config dict (see the README for the keys)."""
    kind = cfg.get("kind")
    if kind == "radial_harmonic":
        return RadialHarmonic(l_max=int(cfg.get("l_max", 2)), n_max=int(cfg.get("n_max", 3)),
                              r_cut=float(cfg.get("r_cut", 2.0)), radial=cfg.get("radial", "gaussian"),
                              n_species=int(cfg.get("n_species", 1)), parity=bool(cfg.get("parity", True)))
    if kind == "rep_coordinates":
        src = cfg.get("input")
        if src in _PRESETS:
            return _PRESETS[src](cfg)
        if isinstance(src, str) and src.endswith(".json"):
            try:
                with open(src, encoding="utf-8") as fh:
                    rep = rep_from_json(fh.read())
            except OSError as exc:
                raise ConfigurationError(f"cannot read input rep {src}: {exc}") from exc
            if "group" not in cfg:
                raise ConfigurationError("a custom input rep needs a 'group' for its candidate irreps")
            return RepCoordinates(rep, cfg["group"], int(cfg.get("n", 0)),
                                  powers=tuple(cfg.get("powers", (0, 1))),
                                  complex_input=bool(cfg.get("complex_input", False)),
                                  conjugate=bool(cfg.get("conjugate", False)), name="input")
        raise ConfigurationError(f"unknown rep_coordinates input {src!r}")
    raise ConfigurationError(f"unknown embedding kind {kind!r}")


class FeatureModel:
    """Feature extractor described by a config dict.

    ``layers == 0``: per-cloud ACE/TRACE features of order ``1..correlation_order``
    for each label in ``outputs``. ``layers > 0``: per-particle MACE states.
    """

    KEYS = {"embedding", "mode", "channels", "correlation_order", "outputs", "layers", "hidden",
            "nu_per_layer", "residual", "coupling_tables", "seed"}

    def __init__(self, cfg: dict, provider=None, seed: Optional[int] = None):
        unknown = set(cfg) - self.KEYS
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        if "embedding" not in cfg:
            raise ConfigurationError("config must describe an embedding")
        self.cfg = cfg
        self.embedding = build_embedding(cfg["embedding"])
        self.seed = int(cfg.get("seed", 0) if seed is None else seed)
        self.layers = int(cfg.get("layers", 0))
        outputs = [parse_label(s) for s in cfg.get("outputs", [])] or [self.embedding.trivial]
        if self.layers == 0:
            lc = LinearConfig(self.embedding, max_order=int(cfg.get("correlation_order", 2)),
                              mode=cfg.get("mode", "ace"), channels=cfg.get("channels"),
                              outputs=outputs, seed=self.seed)
            self.model = LinearModel(lc, provider)
        else:
            hidden = cfg.get("hidden") or [[str(l) for l in outputs]] * self.layers
            nu = cfg.get("nu_per_layer") or [int(cfg.get("correlation_order", 2))] * self.layers
            mc = MaceConfig(hidden=hidden, nu=nu, channels=int(cfg.get("channels") or 2),
                            residual=bool(cfg.get("residual", False)), seed=self.seed)
            if mc.layers != self.layers:
                raise ConfigurationError("'layers' disagrees with the hidden / nu_per_layer lists")
            self.model = Mace(self.embedding, mc, provider=provider)

    def compute(self, cloud: PointCloud) -> dict:
        if self.layers == 0:
            ff = self.model.features(cloud)
            blocks = [{"nu": nu, "irrep": str(K), **_arr_to_json(ff.blocks[(nu, K)])}
                      for nu, K in ff.keys()]
            return {"kind": "cloud", "blocks": blocks}
        states = self.model.states(cloud)
        out = []
        for t, (h, L) in enumerate(zip(states, self.model.layouts[1:])):
            out.append({"layer": t + 1, "slots": list(L.names), **_arr_to_json(h)})
        return {"kind": "particles", "states": out}


def features_to_json(features: dict) -> str:
    return json.dumps(features, sort_keys=True) + "\n"
