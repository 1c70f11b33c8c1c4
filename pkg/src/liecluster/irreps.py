"""Explicit irreducible representations.

Generator convention: every built-in algebra uses *real-form* generators
``X_k`` with real structure constants. For su(2) this means
``X_k = -i J_k`` with ``J_k`` the Hermitian angular-momentum matrices in the
``|j, m>`` basis ordered ``m = j, j-1, ..., -j`` (Condon-Shortley phases), so
``[X_i, X_j] = eps_ijk X_k`` and ``exp(sum a_k X_k)`` is unitary.
"""
from __future__ import annotations

import dataclasses
import functools
import itertools
import re
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import LieAlgebra, Rep, structure_constants_from_matrices
from .errors import InvalidArgumentError

GROUPS = ("SU2", "SO3", "O3", "SO13", "SUN")


def _levi_civita() -> np.ndarray:
    eps = np.zeros((3, 3, 3))
    for i, j, k in itertools.permutations(range(3)):
        eps[i, j, k] = np.linalg.det(np.eye(3)[[i, j, k]])
    return eps


@dataclasses.dataclass(frozen=True, order=True)
class IrrepLabel:
    """Group name plus highest-weight tuple.

    SU2: ``(2j,)``; SO3: ``(l,)``; O3: ``(l, parity)``; SO13: ``(2j1, 2j2)``;
    SUN: normalized weakly-decreasing tuple of length ``n`` ending in 0.
    """

    group: str
    weight: tuple
    n: int = 0

    def __post_init__(self):
        w = tuple(int(x) for x in self.weight)
        object.__setattr__(self, "weight", w)
        g = self.group
        if g not in GROUPS:
            raise InvalidArgumentError(f"unknown group {g!r}")
        if g in ("SU2", "SO3"):
            ok = len(w) == 1 and w[0] >= 0
        elif g == "O3":
            ok = len(w) == 2 and w[0] >= 0 and w[1] in (1, -1)
        elif g == "SO13":
            ok = len(w) == 2 and min(w) >= 0
        else:
            if self.n == 0:
                object.__setattr__(self, "n", len(w))
            if len(w) == self.n and self.n >= 2 and w:
                w = tuple(x - w[-1] for x in w)
                object.__setattr__(self, "weight", w)
            ok = (len(w) == self.n and self.n >= 2 and w[-1] == 0
                  and all(a >= b for a, b in zip(w, w[1:])))
        if not ok:
            raise InvalidArgumentError(f"invalid weight {self.weight} for {g}")

    def __str__(self):
        w = self.weight
        if self.group == "SUN":
            return f"SU({self.n})[{','.join(map(str, w))}]"
        return f"{self.group}({','.join(map(str, w))})"

    @property
    def dim(self) -> int:
        w = self.weight
        if self.group == "SU2":
            return w[0] + 1
        if self.group in ("SO3", "O3"):
            return 2 * w[0] + 1
        if self.group == "SO13":
            return (w[0] + 1) * (w[1] + 1)
        return weyl_dimension(w)

    @property
    def is_trivial(self) -> bool:
        if self.group == "O3":
            return self.weight == (0, 1)
        return all(x == 0 for x in self.weight)


_LABEL_RE = re.compile(r"^\s*(SU2|SO3|O3|SO13)\(([^)]*)\)\s*$")
_SUN_RE = re.compile(r"^\s*SU\((\d+)\)\[([^\]]*)\]\s*$")


def _ints(text: str) -> tuple:
    parts = [p.strip() for p in text.split(",")]
    try:
        return tuple(int(p) for p in parts if p != "")
    except ValueError as exc:
        raise InvalidArgumentError(f"non-integer weight entry in {text!r}") from exc


def parse_label(text: str) -> IrrepLabel:
    """Parse ``SU2(2j)``, ``SO3(l)``, ``O3(l,p)``, ``SO13(a,b)`` or ``SU(N)[...]``."""
    m = _LABEL_RE.match(text)
    if m:
        return IrrepLabel(m.group(1), _ints(m.group(2)))
    m = _SUN_RE.match(text)
    if m:
        return IrrepLabel("SUN", _ints(m.group(2)), int(m.group(1)))
    raise InvalidArgumentError(f"cannot parse irrep label {text!r}")


def parse_short_label(group: str, text: str) -> IrrepLabel:
    """CLI shorthand: group name plus weight, e.g. ``SU2 1`` or ``SU3 [1,0,0]``."""
    g = group.strip().upper()
    body = text.strip().strip("[]()")
    if g in ("SU2", "SO3", "O3", "SO13"):
        return IrrepLabel(g, _ints(body))
    m = re.match(r"^SU\(?(\d+)\)?$", g)
    if m:
        return IrrepLabel("SUN", _ints(body), int(m.group(1)))
    raise InvalidArgumentError(f"unknown group {group!r}")


# --- su(2), so(3), o(3) --------------------------------------------------

@functools.lru_cache(maxsize=None)
def su2_algebra() -> LieAlgebra:
    return LieAlgebra("su2", _levi_civita())


def su2_hermitian(two_j: int):
    """Hermitian ``(J_x, J_y, J_z)`` in the ``m = j..-j`` basis."""
    j = two_j / 2
    m = j - np.arange(two_j + 1)
    jp = np.zeros((two_j + 1, two_j + 1))
    for a in range(1, two_j + 1):
        jp[a - 1, a] = np.sqrt(j * (j + 1) - m[a] * (m[a] + 1))
    jm = jp.T
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    jz = np.diag(m)
    return jx, jy, jz


@functools.lru_cache(maxsize=None)
def su2_irrep(two_j: int) -> Rep:
    if two_j < 0:
        raise InvalidArgumentError("two_j must be non-negative")
    gens = tuple(-1j * J for J in su2_hermitian(two_j))
    return Rep(su2_algebra(), two_j + 1, gens, (), IrrepLabel("SU2", (two_j,)))


@functools.lru_cache(maxsize=None)
def so3_irrep(l: int) -> Rep:
    if l < 0:
        raise InvalidArgumentError("l must be non-negative")
    base = su2_irrep(2 * l)
    return Rep(base.algebra, base.dim, base.infinitesimal, (), IrrepLabel("SO3", (l,)))


@functools.lru_cache(maxsize=None)
def o3_irrep(l: int, parity: int) -> Rep:
    """O(3) irrep; the inversion acts as ``parity * I``."""
    if parity not in (1, -1):
        raise InvalidArgumentError("parity must be +1 or -1")
    if l < 0:
        raise InvalidArgumentError("l must be non-negative")
    base = su2_irrep(2 * l)
    inv = parity * np.eye(base.dim)
    return Rep(base.algebra, base.dim, base.infinitesimal, (inv,), IrrepLabel("O3", (l, parity)))


@functools.lru_cache(maxsize=None)
def o3_cartesian_rep() -> Rep:
    """Real 3x3 rotation generators ``(L_i)_jk = -eps_ijk`` plus inversion."""
    eps = _levi_civita()
    gens = tuple(-eps[i] for i in range(3))
    return Rep(su2_algebra(), 3, gens, (-np.eye(3),))


@functools.lru_cache(maxsize=None)
def so3_cartesian_rep() -> Rep:
    r = o3_cartesian_rep()
    return Rep(r.algebra, 3, r.infinitesimal, ())


# --- so(1,3) ------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def so13_algebra() -> LieAlgebra:
    """Generators ordered ``(J1, J2, J3, K1, K2, K3)``:
    ``[J,J] = eps J``, ``[J,K] = eps K``, ``[K,K] = -eps J``."""
    eps = _levi_civita()
    A = np.zeros((6, 6, 6))
    A[:3, :3, :3] = eps
    A[:3, 3:, 3:] = eps
    A[3:, :3, 3:] = eps
    A[3:, 3:, :3] = -eps
    return LieAlgebra("so13", A)


@functools.lru_cache(maxsize=None)
def so13_irrep(two_j1: int, two_j2: int) -> Rep:
    if two_j1 < 0 or two_j2 < 0:
        raise InvalidArgumentError("SO(1,3) weights must be non-negative")
    a = su2_irrep(two_j1).infinitesimal
    b = su2_irrep(two_j2).infinitesimal
    ia, ib = np.eye(two_j1 + 1), np.eye(two_j2 + 1)
    J = [np.kron(x, ib) + np.kron(ia, y) for x, y in zip(a, b)]
    K = [-1j * (np.kron(x, ib) - np.kron(ia, y)) for x, y in zip(a, b)]
    dim = (two_j1 + 1) * (two_j2 + 1)
    return Rep(so13_algebra(), dim, tuple(J + K), (), IrrepLabel("SO13", (two_j1, two_j2)))


@functools.lru_cache(maxsize=None)
def so13_vector_rep() -> Rep:
    """Defining four-vector rep acting on ``(E, px, py, pz)``."""
    eps = _levi_civita()
    J = []
    for i in range(3):
        m = np.zeros((4, 4))
        m[1:, 1:] = -eps[i]
        J.append(m)
    K = []
    for i in range(3):
        m = np.zeros((4, 4))
        m[0, i + 1] = m[i + 1, 0] = 1.0
        K.append(m)
    return Rep(so13_algebra(), 4, tuple(J + K), ())


MINKOWSKI = np.diag([1.0, -1.0, -1.0, -1.0])


# --- su(N) via Gelfand-Tsetlin patterns ----------------------------------

def _check_sun_weight(weight: Sequence[int]) -> tuple:
    w = tuple(int(x) for x in weight)
    if len(w) < 2 or any(a < b for a, b in zip(w, w[1:])):
        raise InvalidArgumentError(f"SU(N) weight must be weakly decreasing with N >= 2, got {weight}")
    return tuple(x - w[-1] for x in w)


def weyl_dimension(weight: Sequence[int]) -> int:
    w = _check_sun_weight(weight)
    n = len(w)
    dim = Fraction(1)
    for i in range(n):
        for j in range(i + 1, n):
            dim *= Fraction(w[i] - w[j] + j - i, j - i)
    assert dim.denominator == 1
    return int(dim)


def enumerate_gt_patterns(weight: Sequence[int]) -> list:
    """All GT patterns with the given top row, sorted lexicographically on
    the flattened rows (top row first)."""
    top = _check_sun_weight(weight)
    out = []

    def grow(rows):
        last = rows[-1]
        if len(last) == 1:
            out.append(tuple(rows))
            return
        ranges = [range(last[i + 1], last[i] + 1) for i in range(len(last) - 1)]
        for row in itertools.product(*ranges):
            grow(rows + [tuple(row)])

    grow([top])
    out.sort(key=lambda p: tuple(itertools.chain.from_iterable(p)))
    return out


def gt_weight(pattern) -> tuple:
    """Eigenvalues of ``E_11 .. E_NN`` on a GT basis vector."""
    rows = list(reversed(pattern))  # rows[l-1] has length l
    sums = [0] + [sum(r) for r in rows]
    return tuple(sums[l] - sums[l - 1] for l in range(1, len(rows) + 1))


def _sun_defining_basis(n: int) -> list:
    mats = []
    E = lambda i, j: np.eye(n)[:, [i]] @ np.eye(n)[[j], :]
    for i in range(n):
        for j in range(i + 1, n):
            mats.append(-0.5j * (E(i, j) + E(j, i)))
            mats.append(0.5 * (E(j, i) - E(i, j)))
    for k in range(n - 1):
        mats.append(-0.5j * (E(k, k) - E(k + 1, k + 1)))
    return mats


@functools.lru_cache(maxsize=None)
def sun_algebra(n: int) -> LieAlgebra:
    if n < 2:
        raise InvalidArgumentError("SU(N) needs N >= 2")
    return LieAlgebra(f"su{n}", structure_constants_from_matrices(_sun_defining_basis(n)))


def _gt_lowering(patterns, index, l):
    """Matrix of ``E_{l+1,l}`` (1-based ``l``) in the orthonormal GT basis."""
    d = len(patterns)
    out = np.zeros((d, d))
    for col, p in enumerate(patterns):
        rows = list(reversed(p))  # rows[l-1] = row of length l

        def m(k, ll):
            return rows[ll - 1][k - 1]

        for k in range(1, l + 1):
            new_row = list(rows[l - 1])
            new_row[k - 1] -= 1
            new_rows = [list(r) for r in rows]
            new_rows[l - 1] = new_row
            target = tuple(tuple(r) for r in reversed(new_rows))
            row_idx = index.get(target)
            if row_idx is None:
                continue
            mkl = m(k, l)
            num = -1.0
            for kp in range(1, l + 2):
                num *= m(kp, l + 1) - mkl + k - kp + 1
            for kp in range(1, l):
                num *= m(kp, l - 1) - mkl + k - kp
            den = 1.0
            for kp in range(1, l + 1):
                if kp != k:
                    den *= (m(kp, l) - mkl + k - kp + 1) * (m(kp, l) - mkl + k - kp)
            val = num / den
            if val < -1e-12:
                raise ArithmeticError("negative GT matrix element")
            out[row_idx, col] = np.sqrt(max(val, 0.0))
    return out


@functools.lru_cache(maxsize=None)
def sun_irrep(weight: tuple) -> Rep:
    w = _check_sun_weight(weight)
    n = len(w)
    patterns = enumerate_gt_patterns(w)
    index = {p: i for i, p in enumerate(patterns)}
    d = len(patterns)
    E = {}
    for a in range(n):
        E[a, a] = np.diag([float(gt_weight(p)[a]) for p in patterns])
    for l in range(1, n):
        low = _gt_lowering(patterns, index, l)
        E[l, l - 1] = low
        E[l - 1, l] = low.T.copy()
    # remaining root vectors by commutators of adjacent ones
    for gap in range(2, n):
        for a in range(n - gap):
            b = a + gap
            E[a, b] = E[a, a + 1] @ E[a + 1, b] - E[a + 1, b] @ E[a, a + 1]
            E[b, a] = E[b, b - 1] @ E[b - 1, a] - E[b - 1, a] @ E[b, b - 1]
    gens = []
    for x in _sun_defining_basis(n):
        g = np.zeros((d, d), dtype=np.complex128)
        for (a, b), mat in E.items():
            if x[a, b] != 0:
                g = g + x[a, b] * mat
        gens.append(g)
    return Rep(sun_algebra(n), d, tuple(gens), (), IrrepLabel("SUN", w, n))


# --- dispatch -------------------------------------------------------------

def irrep(label) -> Rep:
    if isinstance(label, str):
        label = parse_label(label)
    g, w = label.group, label.weight
    if g == "SU2":
        return su2_irrep(w[0])
    if g == "SO3":
        return so3_irrep(w[0])
    if g == "O3":
        return o3_irrep(w[0], w[1])
    if g == "SO13":
        return so13_irrep(w[0], w[1])
    return sun_irrep(w)


def trivial_label(group: str, n: int = 0) -> IrrepLabel:
    if group in ("SU2", "SO3"):
        return IrrepLabel(group, (0,))
    if group == "O3":
        return IrrepLabel("O3", (0, 1))
    if group == "SO13":
        return IrrepLabel("SO13", (0, 0))
    return IrrepLabel("SUN", (0,) * n, n)


def candidate_labels(group: str, max_dim: int, n: int = 0) -> list:
    """Every irrep label of ``group`` with dimension at most ``max_dim``, sorted."""
    out = []
    if group == "SU2":
        out = [IrrepLabel("SU2", (k,)) for k in range(max_dim)]
    elif group == "SO3":
        out = [IrrepLabel("SO3", (l,)) for l in range((max_dim - 1) // 2 + 1)]
    elif group == "O3":
        out = [IrrepLabel("O3", (l, p)) for l in range((max_dim - 1) // 2 + 1) for p in (-1, 1)]
    elif group == "SO13":
        out = [IrrepLabel("SO13", (a, b)) for a in range(max_dim) for b in range(max_dim)
               if (a + 1) * (b + 1) <= max_dim]
    elif group == "SUN":
        if n < 2:
            raise InvalidArgumentError("SU(N) candidates need N >= 2")

        def rec(prefix, remaining):
            if remaining == 0:
                yield tuple(prefix) + (0,)
                return
            hi = prefix[-1] if prefix else max_dim
            for x in range(hi, -1, -1):
                yield from rec(prefix + [x], remaining - 1)

        for w in rec([], n - 1):
            if weyl_dimension(w) <= max_dim:
                out.append(IrrepLabel("SUN", w, n))
    else:
        raise InvalidArgumentError(f"unknown group {group!r}")
    return sorted(set(out))
