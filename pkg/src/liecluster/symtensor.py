"""Monomial basis of Sym^n(V): index tables and induced group actions.

The basis vector for a non-decreasing tuple ``k`` is the monomial
``prod_t A[k_t]``. Tuples are enumerated in lexicographic order.
"""
from __future__ import annotations

import functools
import itertools
from math import comb, factorial
from collections import Counter

import numpy as np


def sym_dim(d: int, n: int) -> int:
    return comb(d + n - 1, n)


class SymmetricPower:
    def __init__(self, d: int, n: int):
        self.d, self.n = d, n
        self.tuples = np.array(list(itertools.combinations_with_replacement(range(d), n)),
                               dtype=np.int64).reshape(-1, n) if n else np.zeros((1, 0), dtype=np.int64)
        self.size = len(self.tuples)
        self.index = {tuple(int(x) for x in t): i for i, t in enumerate(self.tuples)}
        # number of distinct orderings of each tuple
        self.orbit_size = np.array(
            [factorial(n) // np.prod([factorial(c) for c in Counter(t.tolist()).values()])
             for t in self.tuples], dtype=np.float64)

    @functools.cached_property
    def replace_index(self) -> np.ndarray:
        """``[t, k, j]`` -> index of ``sorted(k with k_t := j)``."""
        out = np.empty((self.n, self.size, self.d), dtype=np.int64)
        for t in range(self.n):
            for i, k in enumerate(self.tuples.tolist()):
                for j in range(self.d):
                    kk = list(k)
                    kk[t] = j
                    out[t, i, j] = self.index[tuple(sorted(kk))]
        return out

    @functools.cached_property
    def full_to_sym(self) -> np.ndarray:
        """Flat index into ``d**n`` -> index of the sorted tuple."""
        full = np.array(list(itertools.product(range(self.d), repeat=self.n)), dtype=np.int64)
        full = np.sort(full.reshape(-1, self.n), axis=1)
        return np.array([self.index[tuple(r)] for r in full.tolist()], dtype=np.int64)

    def monomials(self, A: np.ndarray) -> np.ndarray:
        """Evaluate all monomials on ``A`` of shape ``(..., d)``."""
        A = np.asarray(A)
        if self.n == 0:
            return np.ones(A.shape[:-1] + (1,), dtype=A.dtype)
        out = A[..., self.tuples[:, 0]]
        for t in range(1, self.n):
            out = out * A[..., self.tuples[:, t]]
        return out

    def generator(self, X: np.ndarray) -> np.ndarray:
        """Derivation induced on monomials by an algebra element ``X``."""
        X = np.asarray(X)
        out = np.zeros((self.size, self.size), dtype=np.complex128)
        if self.n == 0:
            return out
        rows = np.repeat(np.arange(self.size), self.d)
        for t in range(self.n):
            vals = X[self.tuples[:, t], :].reshape(-1)
            np.add.at(out, (rows, self.replace_index[t].reshape(-1)), vals)
        return out

    def group_matrix(self, G: np.ndarray, chunk: int = 64) -> np.ndarray:
        """Action of a group matrix ``G`` on monomials:
        ``m_k(G A) = sum_j M[k, j] m_j(A)``."""
        G = np.asarray(G, dtype=np.complex128)
        out = np.zeros((self.size, self.size), dtype=np.complex128)
        if self.n == 0:
            out[0, 0] = 1.0
            return out
        f2s = self.full_to_sym
        for start in range(0, self.size, chunk):
            tup = self.tuples[start:start + chunk]
            T = G[tup[:, 0], :]
            for t in range(1, self.n):
                T = (T[:, :, None] * G[tup[:, t], None, :]).reshape(len(tup), -1)
            for r in range(len(tup)):
                out[start + r] = (np.bincount(f2s, weights=T[r].real, minlength=self.size)
                                  + 1j * np.bincount(f2s, weights=T[r].imag, minlength=self.size))
        return out

    def expand(self, coeffs: np.ndarray) -> np.ndarray:
        """Spread coefficients on sorted tuples into a fully symmetric tensor
        ``B`` with ``sum_k C_k m_k(A) = sum_full B_full prod A``."""
        coeffs = np.asarray(coeffs)
        lead = coeffs.shape[:-1]
        w = coeffs / self.orbit_size
        full = w[..., self.full_to_sym]
        return full.reshape(lead + (self.d,) * self.n)


@functools.lru_cache(maxsize=256)
def symmetric_power(d: int, n: int) -> SymmetricPower:
    return SymmetricPower(d, n)
