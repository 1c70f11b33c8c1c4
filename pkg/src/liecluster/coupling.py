"""Generalized Clebsch-Gordan coefficients by numerical null space.

An intertwiner ``C: V_in -> V_out`` satisfies ``C T_in = T_out C`` for every
infinitesimal generator (plain or symmetric-power action) and every discrete
generator. All such conditions are stacked into one linear system on
``vec(C)`` whose null space is read off an SVD.

Gauge fixing of the solution basis ``alpha``: the null-space basis ``N`` is
replaced by ``N Q`` where ``Q`` comes from a column-pivoted QR of ``N^H``.
The result depends only on the solution subspace (not on the SVD's choice
of basis). Each solution is then rotated so that its first entry above
``1e-9`` (row-major order, i.e. lexicographic in ``(K, k...)``) is real
positive, and entries below ``1e-14`` are set to zero.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import threading
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .algebra import Rep, tensor_product
from .errors import DecompositionIncompleteError, InvalidArgumentError, ResourceLimitError
from .irreps import IrrepLabel, candidate_labels, irrep, parse_label
from .symtensor import sym_dim, symmetric_power

NULL_TOL = 1e-8
SYM_CAP = 20_000

_cache: dict = {}
_cache_lock = threading.Lock()


def clear_cache():
    with _cache_lock:
        _cache.clear()


def _cached(key, compute):
    with _cache_lock:
        hit = _cache.get(key)
    if hit is not None:
        return hit
    value = compute()
    with _cache_lock:
        _cache[key] = value
    return value


# --- null space -------------------------------------------------------------

def null_space(blocks, ncols: int, tol: float = NULL_TOL) -> np.ndarray:
    """Orthonormal null-space basis (columns) of the row-stacked ``blocks``.

    Rows are folded into an ``ncols x ncols`` triangular factor as they
    arrive, so memory stays bounded by the unknown count.
    """
    R = None
    for blk in blocks:
        blk = np.asarray(blk, dtype=np.complex128)
        stacked = blk if R is None else np.vstack([R, blk])
        if stacked.shape[0] > ncols:
            R = np.linalg.qr(stacked, mode="r")
        else:
            R = stacked
    if R is None or R.size == 0:
        return np.eye(ncols, dtype=np.complex128)
    _, s, vh = np.linalg.svd(R, full_matrices=True)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return np.eye(ncols, dtype=np.complex128)
    rank = int(np.sum(s > tol * smax))
    return vh[rank:].conj().T


def canonical_basis(N: np.ndarray) -> np.ndarray:
    """Gauge-fixed orthonormal basis (rows) of the column span of ``N``."""
    u, m = N.shape
    if m == 0:
        return np.zeros((0, u), dtype=np.complex128)
    Q, _, _ = scipy.linalg.qr(N.conj().T, pivoting=True)
    B = (N @ Q[:, :m]).T
    for a in range(m):
        v = B[a]
        big = np.flatnonzero(np.abs(v) > 1e-9)
        z = v[big[0]]
        B[a] = v * (np.conj(z) / abs(z))
    B.real[np.abs(B.real) < 1e-14] = 0.0
    B.imag[np.abs(B.imag) < 1e-14] = 0.0
    return B


def _intertwiner_blocks(pairs, d_in, d_out):
    eye_in, eye_out = np.eye(d_in), np.eye(d_out)
    for t_in, t_out in pairs:
        # row-major vec: vec(C T) = (I (x) T^T) vec C, vec(T C) = (T (x) I) vec C
        yield np.kron(eye_out, np.asarray(t_in).T) - np.kron(t_out, eye_in)


def solve_intertwiners(pairs, d_in: int, d_out: int, tol: float = NULL_TOL) -> np.ndarray:
    """All ``C`` (``d_out x d_in``) with ``C T_in = T_out C`` for each pair.

    Returns the canonical solution basis with shape ``(mult, d_out, d_in)``.
    """
    pairs = list(pairs)
    u = d_in * d_out
    N = null_space(_intertwiner_blocks(pairs, d_in, d_out), u, tol)
    return canonical_basis(N).reshape(-1, d_out, d_in)


# --- coupling tensors --------------------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class CouplingTensor:
    """Intertwiners from ``inputs[0] (x) ... (x) inputs[-1]`` (or from the
    symmetric power when ``symmetric``) into ``output``.

    ``coefficients`` has shape ``(mult, d_out, d_1, ..., d_n)`` in the plain
    case and ``(mult, d_out, s)`` over sorted index tuples when symmetric.
    """

    inputs: tuple
    output: Rep
    order: int
    symmetric: bool
    coefficients: np.ndarray
    method: str = "direct"

    @property
    def multiplicity(self) -> int:
        return self.coefficients.shape[0]

    @property
    def tuples(self) -> np.ndarray:
        d = self.inputs[0].dim
        if self.symmetric:
            return symmetric_power(d, self.order).tuples
        return np.array(np.unravel_index(np.arange(int(np.prod([r.dim for r in self.inputs]))),
                                         [r.dim for r in self.inputs])).T

    def flat(self) -> np.ndarray:
        """``(mult, d_out, n_in)`` view with input indices flattened."""
        m, d_out = self.coefficients.shape[:2]
        return self.coefficients.reshape(m, d_out, int(np.prod(self.coefficients.shape[2:])))

    def expanded(self) -> np.ndarray:
        """Full-tensor form; symmetric under permutations of input indices."""
        if not self.symmetric:
            return self.coefficients
        return symmetric_power(self.inputs[0].dim, self.order).expand(self.coefficients)

    def input_action(self, coeffs, discrete_index=None) -> np.ndarray:
        mats = [r.element(coeffs, discrete_index).matrix for r in self.inputs]
        if self.symmetric:
            return symmetric_power(self.inputs[0].dim, self.order).group_matrix(mats[0])
        out = mats[0]
        for m in mats[1:]:
            out = np.kron(out, m)
        return out

    def intertwiner_residual(self, coeffs, discrete_index=None) -> float:
        if self.multiplicity == 0:
            return 0.0
        g_in = self.input_action(coeffs, discrete_index)
        g_out = self.output.element(coeffs, discrete_index).matrix
        C = self.flat()
        return float(np.abs(C @ g_in - g_out[None] @ C).max())

    def entries(self):
        """Sorted ``(k_1..k_n, K, alpha, value)`` for every nonzero coefficient."""
        tup = self.tuples
        out = []
        C = self.flat()
        for a, K, kk in zip(*np.nonzero(C)):
            out.append((*(int(x) for x in tup[kk]), int(K), int(a), complex(C[a, K, kk])))
        out.sort(key=lambda e: e[:-1])
        return out


def _check_same(reps: Sequence[Rep]):
    first = reps[0]
    for r in reps[1:]:
        if not first.algebra.is_same(r.algebra):
            raise InvalidArgumentError(f"algebra mismatch: {first.algebra.name} vs {r.algebra.name}")
        if first.num_discrete != r.num_discrete:
            raise InvalidArgumentError("reps carry different numbers of discrete generators")


def _key(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        if isinstance(p, Rep):
            h.update(p.content_hash().encode() + repr(p.label).encode())
        else:
            h.update(repr(p).encode())
        h.update(b"/")
    return h.hexdigest()


def clebsch_gordan(rep1: Rep, rep2: Rep, rep_out: Rep, tol: float = NULL_TOL) -> CouplingTensor:
    _check_same([rep1, rep2, rep_out])

    def compute():
        prod = tensor_product(rep1, rep2)
        pairs = list(zip(prod.infinitesimal, rep_out.infinitesimal)) + list(zip(prod.discrete, rep_out.discrete))
        C = solve_intertwiners(pairs, prod.dim, rep_out.dim, tol)
        C = C.reshape(-1, rep_out.dim, rep1.dim, rep2.dim)
        return CouplingTensor((rep1, rep2), rep_out, 2, False, C)

    return _cached(_key("cg", rep1, rep2, rep_out, tol), compute)


def intertwiners(rep_in: Rep, rep_out: Rep, tol: float = NULL_TOL) -> np.ndarray:
    """Basis of ``Hom_G(rep_in, rep_out)``, shape ``(mult, d_out, d_in)``."""
    _check_same([rep_in, rep_out])

    def compute():
        pairs = list(zip(rep_in.infinitesimal, rep_out.infinitesimal)) + list(zip(rep_in.discrete, rep_out.discrete))
        return solve_intertwiners(pairs, rep_in.dim, rep_out.dim, tol)

    return _cached(_key("hom", rep_in, rep_out, tol), compute)


@dataclasses.dataclass
class SelectionRule:
    terms: list  # (IrrepLabel, multiplicity)

    def dimension_sum(self) -> int:
        return sum(m * lab.dim for lab, m in self.terms)

    def as_dict(self) -> dict:
        return {str(lab): m for lab, m in self.terms}


def _as_label(x) -> IrrepLabel:
    return parse_label(x) if isinstance(x, str) else x


def selection_rule(rep1: Rep, rep2: Rep, candidates) -> SelectionRule:
    terms = []
    for lab in sorted(_as_label(c) for c in candidates):
        m = clebsch_gordan(rep1, rep2, irrep(lab)).multiplicity
        if m:
            terms.append((lab, m))
    return SelectionRule(terms)


# --- symmetric couplings -----------------------------------------------------

def symmetric_power_rep(rep: Rep, n: int) -> Rep:
    """``Sym^n`` of ``rep`` in the monomial basis."""
    sp = symmetric_power(rep.dim, n)
    if sp.size > SYM_CAP:
        raise ResourceLimitError(f"dim Sym^{n} = {sp.size} exceeds cap {SYM_CAP}")
    return Rep(rep.algebra, sp.size, tuple(sp.generator(x) for x in rep.infinitesimal),
               tuple(sp.group_matrix(h) for h in rep.discrete))


def _symmetric_direct(rep: Rep, n: int, rep_out: Rep, tol: float) -> np.ndarray:
    sp = symmetric_power(rep.dim, n)
    pairs = [(sp.generator(x), y) for x, y in zip(rep.infinitesimal, rep_out.infinitesimal)]
    pairs += [(sp.group_matrix(h), y) for h, y in zip(rep.discrete, rep_out.discrete)]
    return solve_intertwiners(pairs, sp.size, rep_out.dim, tol)


def _symmetric_tree(rep: Rep, n: int, rep_out: Rep, tol: float, cap: int) -> Optional[np.ndarray]:
    """Build ``Sym^n -> K`` couplings from ``Sym^(n-1) -> L`` and ``L (x) V -> K``.

    Returns ``None`` when the intermediate irreps cannot be shown to exhaust
    ``Sym^(n-1)``; the caller then falls back to the direct solve.
    """
    label = rep.label
    if not isinstance(label, IrrepLabel):
        return None
    d = rep.dim
    prev = symmetric_power(d, n - 1)
    cur = symmetric_power(d, n)
    inters = []
    covered = 0
    for lab in candidate_labels(label.group, prev.size, label.n):
        L = irrep(lab)
        if L.num_discrete != rep.num_discrete:
            continue
        S = symmetric_coupling(rep, n - 1, L, tol=tol, cap=cap)
        if S.multiplicity:
            inters.append((L, S))
            covered += S.multiplicity * L.dim
    if covered != prev.size:
        return None
    # monomial index of sorted(k + (v,)) for every (n-1)-tuple k and v
    merge = np.array([[cur.index[tuple(sorted((*k, v)))] for v in range(d)]
                      for k in prev.tuples.tolist()], dtype=np.int64).reshape(-1)
    cands = []
    scale = 0.0
    for L, S in inters:
        cg = clebsch_gordan(L, rep, rep_out, tol)
        for beta in range(cg.multiplicity):
            for alpha in range(S.multiplicity):
                # T[K, k, v] = sum_l cg[K, l, v] S[l, k]
                T = np.einsum("Klv,lk->Kkv", cg.coefficients[beta], S.coefficients[alpha])
                T = T.reshape(rep_out.dim, -1)
                scale = max(scale, float(np.linalg.norm(T)))
                Q = np.zeros((rep_out.dim, cur.size), dtype=np.complex128)
                for K in range(rep_out.dim):
                    Q[K] = (np.bincount(merge, weights=T[K].real, minlength=cur.size)
                            + 1j * np.bincount(merge, weights=T[K].imag, minlength=cur.size))
                cands.append(Q.reshape(-1))
    u = rep_out.dim * cur.size
    if not cands:
        return np.zeros((0, rep_out.dim, cur.size), dtype=np.complex128)
    M = np.stack(cands, axis=1)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    # symmetrization can cancel a candidate exactly; compare against the
    # pre-symmetrization scale, not the largest surviving singular value
    rank = int(np.sum(s > tol * scale))
    return canonical_basis(U[:, :rank]).reshape(-1, rep_out.dim, cur.size)


def symmetric_coupling(rep: Rep, order: int, rep_out: Rep, *, method: str = "auto",
                       tol: float = NULL_TOL, cap: int = SYM_CAP) -> CouplingTensor:
    """Intertwiners ``Sym^order(rep) -> rep_out`` over sorted index tuples.

    ``method`` is ``"tree"``, ``"direct"`` or ``"auto"`` (tree when ``rep`` is
    a built-in irrep, with direct fallback).
    """
    if order < 1:
        raise InvalidArgumentError("order must be >= 1")
    _check_same([rep, rep_out])
    s = sym_dim(rep.dim, order)
    if s > cap:
        raise ResourceLimitError(f"dim Sym^{order}(V) = {s} exceeds cap {cap}")

    def compute():
        C, used = None, "direct"
        if method in ("auto", "tree") and order >= 2:
            C = _symmetric_tree(rep, order, rep_out, tol, cap)
            if C is not None:
                used = "tree"
        if C is None:
            C = _symmetric_direct(rep, order, rep_out, tol)
        return CouplingTensor((rep,) * order, rep_out, order, True, C, used)

    return _cached(_key("sym", rep, order, rep_out, method, tol), compute)


# --- block diagonalization ---------------------------------------------------

@dataclasses.dataclass
class Decomposition:
    """``change_of_basis @ X @ inv(change_of_basis)`` is block diagonal for
    every generator; ``slots`` lists ``(label, alpha, offset)`` per block."""

    change_of_basis: np.ndarray
    blocks: list
    slots: list
    condition_number: float
    residual: float


def decompose_rep(rep: Rep, candidates) -> Decomposition:
    labels = sorted({_as_label(c) for c in candidates})
    rows, blocks, slots = [], [], []
    offset = 0
    for lab in labels:
        K = irrep(lab)
        if K.num_discrete != rep.num_discrete or not K.algebra.is_same(rep.algebra):
            raise InvalidArgumentError(f"candidate {lab} does not match the rep's group")
        C = intertwiners(rep, K)
        if C.shape[0] == 0:
            continue
        blocks.append((lab, C.shape[0]))
        for a in range(C.shape[0]):
            rows.append(C[a])
            slots.append((lab, a, offset))
            offset += K.dim
    if offset < rep.dim:
        raise DecompositionIncompleteError(
            f"candidates cover {offset} of {rep.dim} dimensions", rep.dim - offset)
    if offset > rep.dim:
        raise InvalidArgumentError("candidate irreps overlap (equivalent labels listed twice?)")
    P = np.vstack(rows)
    cond = float(np.linalg.cond(P))
    Pi = np.linalg.inv(P)
    resid = 0.0
    for i, x in enumerate(rep.infinitesimal):
        target = np.zeros_like(P)
        for lab, _, off in slots:
            g = irrep(lab).infinitesimal[i]
            target[off:off + g.shape[0], off:off + g.shape[0]] = g
        resid = max(resid, float(np.abs(P @ x @ Pi - target).max()))
    return Decomposition(P, blocks, slots, cond, resid)


# --- coupling-table files ----------------------------------------------------

def rep_name(rep: Rep) -> str:
    if rep.label is not None:
        return str(rep.label)
    return "rep:" + rep.content_hash()[:16]


def coupling_to_dict(ct: CouplingTensor) -> dict:
    entries = [[*e[:-1], float(e[-1].real), float(e[-1].imag)] for e in ct.entries()]
    return {
        "inputs": [rep_name(r) for r in ct.inputs],
        "output": rep_name(ct.output),
        "order": ct.order,
        "symmetric": ct.symmetric,
        "multiplicity": ct.multiplicity,
        "entries": entries,
    }


def coupling_to_json(ct: CouplingTensor) -> str:
    d = coupling_to_dict(ct)
    head = {k: v for k, v in d.items() if k != "entries"}
    body = ",\n  ".join(json.dumps(e) for e in d["entries"])
    text = json.dumps(head)[:-1] + ', "entries": [' + ("\n  " + body + "\n" if body else "") + "]}\n"
    return text


def coupling_from_dict(d: dict, inputs: Sequence[Rep], output: Rep) -> CouplingTensor:
    order = int(d["order"])
    sym = bool(d["symmetric"])
    mult = int(d["multiplicity"])
    if len(inputs) != order:
        raise InvalidArgumentError("input rep count does not match the table order")
    if sym:
        sp = symmetric_power(inputs[0].dim, order)
        C = np.zeros((mult, output.dim, sp.size), dtype=np.complex128)
        for e in d["entries"]:
            k = tuple(int(x) for x in e[:order])
            K, a = int(e[order]), int(e[order + 1])
            C[a, K, sp.index[k]] = complex(e[order + 2], e[order + 3])
    else:
        C = np.zeros((mult, output.dim, *[r.dim for r in inputs]), dtype=np.complex128)
        for e in d["entries"]:
            k = tuple(int(x) for x in e[:order])
            K, a = int(e[order]), int(e[order + 1])
            C[(a, K) + k] = complex(e[order + 2], e[order + 3])
    return CouplingTensor(tuple(inputs), output, order, sym, C, "file")


def coupling_cache_key(inputs: Sequence[Rep], output: Rep, order: int, symmetric: bool) -> str:
    return _key("table", *inputs, output, order, symmetric)
