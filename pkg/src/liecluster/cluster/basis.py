"""Pooled atomic basis, product basis and symmetrized (ACE / TRACE) features."""
from __future__ import annotations

import dataclasses
from typing import Mapping, Optional, Sequence

import numpy as np

from ..algebra import Rep
from ..coupling import CouplingTensor, clebsch_gordan, symmetric_coupling
from ..errors import ConfigurationError, InvalidArgumentError
from ..irreps import IrrepLabel, irrep, parse_label
from ..symtensor import symmetric_power
from .embedding import Layout


class InMemoryCouplings:
    """Coupling provider backed by the in-process solver cache."""

    def symmetric(self, rep: Rep, order: int, rep_out: Rep) -> CouplingTensor:
        return symmetric_coupling(rep, order, rep_out)

    def pairwise(self, rep1: Rep, rep2: Rep, rep_out: Rep) -> CouplingTensor:
        return clebsch_gordan(rep1, rep2, rep_out)


def pool_atomic_basis(phi: np.ndarray, skip: Optional[int] = None) -> np.ndarray:
    """``A = sum_j phi_j``, accumulated row by row in the stored order.

    Callers store particles in canonical order, so the result does not
    depend on how the input was labelled. ``skip`` leaves out one particle.
    """
    phi = np.asarray(phi)
    acc = np.zeros(phi.shape[1:], dtype=np.complex128)
    for j in range(phi.shape[0]):
        if j != skip:
            acc = acc + phi[j]
    return acc


def mix_channels(A: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``A~[..., c, k] = sum_c' w[c, c'] A[..., c', k]``."""
    A, w = np.asarray(A), np.asarray(w)
    if w.ndim != 2 or w.shape[1] != A.shape[-2]:
        raise InvalidArgumentError(f"channel mix of shape {w.shape} does not fit {A.shape[-2]} channels")
    return np.einsum("cd,...dk->...ck", w, A)


def product_basis(A: np.ndarray, order: int) -> np.ndarray:
    """Products over non-decreasing index tuples, per channel: ``(..., C, s)``."""
    if order < 1:
        raise InvalidArgumentError("correlation order must be >= 1")
    A = np.asarray(A)
    return symmetric_power(A.shape[-1], order).monomials(A)


def _label(x):
    if isinstance(x, str):
        try:
            return parse_label(x)
        except InvalidArgumentError:
            return x
    return x


@dataclasses.dataclass
class FeatureField:
    """Equivariant blocks keyed by ``(nu, K)``; each has shape ``(..., C, mult, dim K)``."""

    blocks: dict

    def keys(self):
        return sorted(self.blocks, key=lambda k: (k[0], str(k[1])))

    def invariant_vector(self) -> np.ndarray:
        """Concatenated trivial-irrep values (complex), deterministic order."""
        parts = [self.blocks[k].reshape(self.blocks[k].shape[:-3] + (-1,))
                 for k in self.keys() if isinstance(k[1], IrrepLabel) and k[1].is_trivial]
        if not parts:
            return np.zeros(0, dtype=np.complex128)
        return np.concatenate(parts, axis=-1)


def symmetrize_basis(products: Mapping[int, np.ndarray], couplings: Mapping,
                     outputs: Sequence) -> FeatureField:
    """Contract product-basis values with symmetric coupling tensors.

    ``products[nu]`` has shape ``(..., C, s_nu)``; ``couplings[(nu, K)]`` is a
    symmetric ``CouplingTensor``; ``outputs`` lists the requested ``(nu, K)``.
    """
    blocks = {}
    for nu, K in outputs:
        K = _label(K)
        ct = couplings.get((nu, K))
        if ct is None:
            raise ConfigurationError(f"no coupling table for (nu={nu}, K={K})")
        if nu not in products:
            raise ConfigurationError(f"product basis of order {nu} was not computed")
        P = products[nu]
        if ct.coefficients.shape[-1] != P.shape[-1]:
            raise ConfigurationError(f"coupling table for (nu={nu}, K={K}) does not match the product basis")
        blocks[(nu, K)] = np.einsum("aKs,...cs->...caK", ct.coefficients, P)
    return FeatureField(blocks)


class TraceBasis:
    """Channel mixing, product basis and symmetrization for a fixed layout.

    ``outputs`` are irrep labels; every order ``1..max_order`` is paired with
    every output. ``mix`` is the ``(C', C)`` channel-mixing matrix or ``None``
    (plain ACE per channel).
    """

    def __init__(self, layout: Layout, max_order: int, outputs: Sequence,
                 mix: Optional[np.ndarray] = None, provider=None):
        if max_order < 1:
            raise InvalidArgumentError("max_order must be >= 1")
        self.layout = layout
        self.max_order = max_order
        self.outputs = [_label(K) for K in outputs]
        self.mix = None if mix is None else np.asarray(mix)
        provider = provider or InMemoryCouplings()
        self.couplings = {}
        for nu in range(1, max_order + 1):
            for K in self.outputs:
                self.couplings[(nu, K)] = provider.symmetric(layout.rep, nu, irrep(K))

    @property
    def pairs(self) -> list:
        return [(nu, K) for nu in range(1, self.max_order + 1) for K in self.outputs]

    def products(self, A: np.ndarray) -> dict:
        At = A if self.mix is None else mix_channels(A, self.mix)
        return {nu: product_basis(At, nu) for nu in range(1, self.max_order + 1)}

    def __call__(self, A: np.ndarray) -> FeatureField:
        return symmetrize_basis(self.products(A), self.couplings, self.pairs)


def ace_flatten(A: np.ndarray) -> np.ndarray:
    """Merge channels into one: ``(..., C, D) -> (..., 1, C*D)`` (plain ACE)."""
    return A.reshape(A.shape[:-2] + (1, A.shape[-2] * A.shape[-1]))
