"""Point clouds and one-particle embeddings.

An embedding maps each particle to a ``(channels, D)`` complex block whose
``D`` axis is a direct sum of irreps (a :class:`Layout`). The group acts on
the ``D`` axis only, identically for every channel.
"""
from __future__ import annotations

import dataclasses
import functools
from typing import Optional, Sequence

import numpy as np

from ..algebra import Rep, conjugate_rep, direct_sum
from ..coupling import decompose_rep, symmetric_coupling, symmetric_power_rep
from ..errors import InvalidArgumentError
from ..irreps import (
    IrrepLabel, candidate_labels, irrep, o3_cartesian_rep, parse_label, so3_cartesian_rep,
    so13_vector_rep, su2_irrep, sun_irrep, trivial_label,
)
from ..symtensor import symmetric_power


@dataclasses.dataclass(frozen=True, eq=False)
class PointCloud:
    """Multiset of particles; row ``i`` of ``raw`` holds particle ``i``'s attributes."""

    raw: np.ndarray

    def __post_init__(self):
        raw = np.array(self.raw, dtype=np.float64)
        if raw.ndim == 1 and raw.size == 0:
            raw = raw.reshape(0, 0)
        if raw.ndim != 2:
            raise InvalidArgumentError("point cloud raw data must be (n_particles, n_attributes)")
        if not np.all(np.isfinite(raw)):
            raise InvalidArgumentError("non-finite particle attributes")
        raw.setflags(write=False)
        object.__setattr__(self, "raw", raw)

    def __len__(self):
        return self.raw.shape[0]

    def canonical_order(self) -> np.ndarray:
        """Permutation sorting particles lexicographically by their attributes.

        Every sum over particles runs in this order, which makes pooled
        quantities bit-identical under relabeling of the input.
        """
        if len(self) == 0:
            return np.zeros(0, dtype=np.int64)
        keys = [self.raw[:, j] for j in range(self.raw.shape[1] - 1, -1, -1)]
        return np.lexsort(keys) if keys else np.arange(len(self))

    def permuted(self, perm) -> "PointCloud":
        return PointCloud(self.raw[np.asarray(perm)])


def _is_trivial_rep(rep: Rep, tol: float = 1e-12) -> bool:
    if rep.dim != 1:
        return False
    return (all(abs(x[0, 0]) <= tol for x in rep.infinitesimal)
            and all(abs(h[0, 0] - 1) <= tol for h in rep.discrete))


@dataclasses.dataclass(frozen=True, eq=False)
class Layout:
    """Ordered direct sum of named representation slots.

    Slots are usually built-in irreps; a slot may also hold a generic rep
    (e.g. the raw four-vector), in which case its name is free text.
    """

    names: tuple
    reps: tuple
    rep: Rep
    offsets: tuple

    @classmethod
    def from_slots(cls, slots: Sequence) -> "Layout":
        slots = list(slots)
        if not slots:
            raise InvalidArgumentError("a layout needs at least one slot")
        names = tuple(str(n) for n, _ in slots)
        reps = tuple(r for _, r in slots)
        rep = reps[0] if len(reps) == 1 else direct_sum(*reps)
        rep = Rep(rep.algebra, rep.dim, rep.infinitesimal, rep.discrete,
                  reps[0].label if len(reps) == 1 else "+".join(names))
        offsets = tuple(int(x) for x in np.cumsum([0] + [r.dim for r in reps[:-1]]))
        return cls(names, reps, rep, offsets)

    @classmethod
    def from_labels(cls, labels: Sequence) -> "Layout":
        labels = [parse_label(l) if isinstance(l, str) else l for l in labels]
        return cls.from_slots([(str(l), irrep(l)) for l in labels])

    @property
    def dim(self) -> int:
        return self.rep.dim

    @property
    def labels(self) -> tuple:
        return tuple(r.label for r in self.reps)

    def __len__(self):
        return len(self.reps)

    def slice(self, i: int) -> slice:
        return slice(self.offsets[i], self.offsets[i] + self.reps[i].dim)

    def trivial_slots(self) -> list:
        return [i for i, r in enumerate(self.reps) if _is_trivial_rep(r)]

    def repeated(self, times: int) -> "Layout":
        return Layout.from_slots(list(zip(self.names, self.reps)) * times)


class Embedding:
    """Base class: subclasses set ``layout``, ``channels``, ``input_rep``."""

    kind: str
    layout: Layout
    channels: int
    input_rep: Rep
    group: str
    group_n: int = 0

    def embed(self, cloud: PointCloud) -> np.ndarray:
        raise NotImplementedError

    def _input_vectors(self, raw: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def transform_raw(self, raw: np.ndarray, coeffs, discrete_index=None) -> np.ndarray:
        raise NotImplementedError

    def transform(self, cloud: PointCloud, coeffs, discrete_index=None) -> PointCloud:
        if len(cloud) == 0:
            return cloud
        return PointCloud(self.transform_raw(cloud.raw, coeffs, discrete_index))

    @property
    def trivial(self) -> IrrepLabel:
        return trivial_label(self.group, self.group_n)


# --- radial x harmonic ------------------------------------------------------

def _cutoff(r, r_cut):
    x = np.clip(r / r_cut, 0.0, 1.0)
    return (1.0 - x ** 2) ** 2


@functools.lru_cache(maxsize=None)
def _harmonic_projector(l: int, with_parity: bool):
    """Degree-``l`` harmonic projector on Cartesian monomials, scaled so that
    the harmonic has unit norm on the unit sphere."""
    sp = symmetric_power(3, l)
    if l == 0:
        return np.ones((1, 1), dtype=np.complex128), sp
    cart = o3_cartesian_rep() if with_parity else so3_cartesian_rep()
    target = irrep(IrrepLabel("O3", (l, (-1) ** l)) if with_parity else IrrepLabel("SO3", (l,)))
    ct = symmetric_coupling(cart, l, target)
    if ct.multiplicity != 1:
        raise ArithmeticError(f"expected one degree-{l} harmonic, found {ct.multiplicity}")
    C = ct.coefficients[0]
    norm = np.linalg.norm(C @ sp.monomials(np.array([0.0, 0.0, 1.0])))
    return C / norm, sp


class RadialHarmonic(Embedding):
    """``phi_{(z,n),(l,m)}(x) = delta(z, Z) R_n(r) Y_lm(r_hat)``.

    ``Y_l`` is the harmonic part of ``r_hat^(x)l`` expressed in the
    ``O3(l, (-1)^l)`` basis. Radial functions are Gaussian bumps times a
    polynomial cutoff (``radial="gaussian"``) or plain powers ``r^n``
    (``radial="monomial"``).
    """

    kind = "radial_harmonic"

    def __init__(self, l_max: int = 2, n_max: int = 3, r_cut: float = 2.0,
                 radial: str = "gaussian", n_species: int = 1, parity: bool = True):
        if radial not in ("gaussian", "monomial"):
            raise InvalidArgumentError(f"unknown radial basis {radial!r}")
        self.l_max, self.n_max, self.r_cut = l_max, n_max, float(r_cut)
        self.radial, self.n_species, self.parity = radial, n_species, parity
        self.group = "O3" if parity else "SO3"
        labels = [IrrepLabel("O3", (l, (-1) ** l)) if parity else IrrepLabel("SO3", (l,))
                  for l in range(l_max + 1)]
        self.layout = Layout.from_labels(labels)
        self.channels = n_species * n_max
        self.input_rep = o3_cartesian_rep() if parity else so3_cartesian_rep()
        self._proj = [_harmonic_projector(l, parity) for l in range(l_max + 1)]

    def radial_basis(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=np.float64)
        if self.radial == "monomial":
            return np.stack([r ** n for n in range(self.n_max)], axis=-1)
        centers = np.linspace(0.0, self.r_cut, self.n_max)
        width = self.r_cut / max(self.n_max - 1, 1)
        g = np.exp(-(((r[..., None] - centers) / width) ** 2))
        return g * _cutoff(r, self.r_cut)[..., None] * (r < self.r_cut)[..., None]

    def harmonics(self, pos: np.ndarray) -> np.ndarray:
        pos = np.asarray(pos, dtype=np.float64)
        r = np.linalg.norm(pos, axis=-1)
        safe = np.where(r > 0, r, 1.0)
        u = pos / safe[..., None]
        out = np.zeros(pos.shape[:-1] + (self.layout.dim,), dtype=np.complex128)
        for l, (C, sp) in enumerate(self._proj):
            y = sp.monomials(u) @ C.T
            if l > 0:
                y = y * (r > 0)[..., None]
            out[..., self.layout.slice(l)] = y
        return out

    def _species(self, raw):
        if self.n_species == 1 and raw.shape[1] == 3:
            return np.zeros(len(raw), dtype=np.int64)
        if raw.shape[1] != 4:
            raise InvalidArgumentError("radial-harmonic particles need (x, y, z[, species])")
        z = raw[:, 3]
        if np.any(z != np.round(z)) or np.any(z < 0) or np.any(z >= self.n_species):
            raise InvalidArgumentError("unknown species index")
        return z.astype(np.int64)

    def embed(self, cloud: PointCloud) -> np.ndarray:
        raw = cloud.raw
        n = len(cloud)
        out = np.zeros((n, self.channels, self.layout.dim), dtype=np.complex128)
        if n == 0:
            return out
        if raw.shape[1] not in (3, 4):
            raise InvalidArgumentError("radial-harmonic particles need (x, y, z[, species])")
        z = self._species(raw)
        pos = raw[:, :3]
        R = self.radial_basis(np.linalg.norm(pos, axis=1))  # (n, n_max)
        Y = self.harmonics(pos)  # (n, D)
        for i in range(n):
            c0 = z[i] * self.n_max
            out[i, c0:c0 + self.n_max] = R[i][:, None] * Y[i][None, :]
        return out

    def transform_raw(self, raw, coeffs, discrete_index=None):
        g = self.input_rep.element(coeffs, discrete_index).matrix.real
        out = np.array(raw, dtype=np.float64)
        out[:, :3] = raw[:, :3] @ g.T
        return out


# --- data already in a representation ----------------------------------------

class RepCoordinates(Embedding):
    """Raw attributes are the coordinates of a vector in ``input_rep``.

    Slot 0 (``powers`` containing 0) is the constant 1; power ``p`` adds the
    degree-``p`` monomials of the data vector projected onto irreps by block
    diagonalization of ``Sym^p``. With ``complex_input`` the raw row holds
    real parts followed by imaginary parts; ``conjugate`` appends the
    complex-conjugate vector (carrying the conjugate rep).
    """

    kind = "rep_coordinates"

    def __init__(self, input_rep: Rep, group: str, group_n: int = 0, powers=(0, 1),
                 candidates: Optional[Sequence] = None, complex_input: bool = False,
                 conjugate: bool = False, name: str = "custom"):
        self.base_rep = input_rep
        self.group, self.group_n = group, group_n
        self.complex_input, self.conjugate = complex_input, conjugate
        self.name = name
        self.input_rep = input_rep
        data_rep = direct_sum(input_rep, conjugate_rep(input_rep)) if conjugate else input_rep
        self.data_rep = data_rep
        self.powers = tuple(sorted(set(int(p) for p in powers)))
        if not self.powers or self.powers[0] < 0:
            raise InvalidArgumentError("powers must be non-negative integers")
        slots, self._blocks = [], []
        for p in self.powers:
            if p == 0:
                slots.append((str(self.trivial), irrep(self.trivial)))
                self._blocks.append(None)
            elif p == 1:
                # the raw vector goes in unchanged, in the rep's own basis
                slots.append((name, input_rep))
                if conjugate:
                    slots.append((name + "*", conjugate_rep(input_rep)))
                self._blocks.append("raw")
            else:
                sp_rep = symmetric_power_rep(data_rep, p)
                cands = candidates
                if cands is None:
                    cands = candidate_labels(group, sp_rep.dim, group_n)
                cands = [parse_label(c) if isinstance(c, str) else c for c in cands]
                cands = [c for c in cands
                         if c.dim <= sp_rep.dim and irrep(c).num_discrete == data_rep.num_discrete]
                dec = decompose_rep(sp_rep, cands)
                slots.extend((str(lab), irrep(lab)) for lab, _, _ in dec.slots)
                self._blocks.append((dec.change_of_basis, symmetric_power(data_rep.dim, p)))
        self.layout = Layout.from_slots(slots)
        self.channels = 1

    @property
    def raw_arity(self) -> int:
        return self.base_rep.dim * (2 if self.complex_input else 1)

    def _data(self, raw):
        if raw.shape[1] != self.raw_arity:
            raise InvalidArgumentError(f"expected {self.raw_arity} attributes per particle, got {raw.shape[1]}")
        d = self.base_rep.dim
        x = raw[:, :d] + 1j * raw[:, d:] if self.complex_input else raw.astype(np.complex128)
        if self.conjugate:
            x = np.concatenate([x, x.conj()], axis=1)
        return x

    def embed(self, cloud: PointCloud) -> np.ndarray:
        n = len(cloud)
        out = np.zeros((n, 1, self.layout.dim), dtype=np.complex128)
        if n == 0:
            return out
        x = self._data(cloud.raw)
        col = 0
        for blk in self._blocks:
            if blk is None:
                out[:, 0, col] = 1.0
                col += 1
                continue
            if isinstance(blk, str):
                out[:, 0, col:col + x.shape[1]] = x
                col += x.shape[1]
                continue
            P, sp = blk
            vals = sp.monomials(x) @ P.T
            out[:, 0, col:col + P.shape[0]] = vals
            col += P.shape[0]
        return out

    def transform_raw(self, raw, coeffs, discrete_index=None):
        g = self.base_rep.element(coeffs, discrete_index).matrix
        d = self.base_rep.dim
        if self.complex_input:
            x = (raw[:, :d] + 1j * raw[:, d:]) @ g.T
            return np.concatenate([x.real, x.imag], axis=1)
        x = raw @ g.T
        if np.abs(x.imag).max(initial=0.0) > 1e-12 * max(1.0, np.abs(x).max(initial=0.0)):
            raise InvalidArgumentError("group element does not preserve real coordinates")
        return x.real


# --- presets --------------------------------------------------------------

def lorentz_vectors(powers=(0, 1)) -> RepCoordinates:
    """Four-momenta ``(E, px, py, pz)`` of SO(1,3)."""
    return RepCoordinates(so13_vector_rep(), "SO13", powers=powers, name="so13_vector")


def o3_vectors(powers=(0, 1)) -> RepCoordinates:
    return RepCoordinates(o3_cartesian_rep(), "O3", powers=powers, name="o3_vector")


def su2_spinors(powers=(0, 1)) -> RepCoordinates:
    """Complex 2-spinors (raw: 2 real + 2 imaginary parts) plus their conjugates."""
    return RepCoordinates(su2_irrep(1), "SU2", powers=powers, complex_input=True,
                          conjugate=True, name="su2_spinor")


def sun_vectors(n: int, powers=(0, 1)) -> RepCoordinates:
    """Vectors of C^n in the fundamental of SU(n), paired with their conjugates."""
    fund = sun_irrep((1,) + (0,) * (n - 1))
    return RepCoordinates(fund, "SUN", group_n=n, powers=powers, complex_input=True,
                          conjugate=True, name="sun_fundamental")
