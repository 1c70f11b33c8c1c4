"""Lie algebras given by structure constants and their finite-dimensional reps.

A representation is the tuple (algebra, dim, infinitesimal generators,
discrete generators). Group elements are built as
``exp(sum_i a_i drho(X_i)) @ rho(h)`` with ``h`` one of the discrete
generators (or none).
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidArgumentError

COMMUTATOR_TOL = 1e-9


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


@dataclasses.dataclass(frozen=True, eq=False)
class LieAlgebra:
    """Abstract Lie algebra: ``[X_i, X_j] = sum_k A[i, j, k] X_k``."""

    name: str
    structure_constants: np.ndarray

    def __post_init__(self):
        A = _frozen(self.structure_constants)
        if A.ndim != 3 or A.shape[0] != A.shape[1] or A.shape[1] != A.shape[2]:
            raise InvalidArgumentError(f"structure constants must be n x n x n, got {A.shape}")
        object.__setattr__(self, "structure_constants", A)

    @property
    def num_generators(self) -> int:
        return self.structure_constants.shape[0]

    def is_same(self, other: "LieAlgebra", tol: float = 1e-12) -> bool:
        if self is other:
            return True
        if self.num_generators != other.num_generators:
            return False
        return bool(np.allclose(self.structure_constants, other.structure_constants, atol=tol, rtol=0))

    def antisymmetry_residual(self) -> float:
        A = self.structure_constants
        if A.size == 0:
            return 0.0
        return float(np.abs(A + A.transpose(1, 0, 2)).max())

    def jacobi_residual(self) -> float:
        A = self.structure_constants
        if A.size == 0:
            return 0.0
        # sum_m A_ijm A_mkl + A_jkm A_mil + A_kim A_mjl
        t1 = np.einsum("ijm,mkl->ijkl", A, A)
        t2 = np.einsum("jkm,mil->ijkl", A, A)
        t3 = np.einsum("kim,mjl->ijkl", A, A)
        return float(np.abs(t1 + t2 + t3).max())


def direct_sum_algebra(a: LieAlgebra, b: LieAlgebra) -> LieAlgebra:
    n, m = a.num_generators, b.num_generators
    A = np.zeros((n + m, n + m, n + m), dtype=np.complex128)
    A[:n, :n, :n] = a.structure_constants
    A[n:, n:, n:] = b.structure_constants
    return LieAlgebra(f"{a.name}+{b.name}", A)


def structure_constants_from_matrices(mats: Sequence[np.ndarray]) -> np.ndarray:
    """Solve ``[X_i, X_j] = sum_k A_ijk X_k`` for a linearly independent set."""
    mats = [np.asarray(m, dtype=np.complex128) for m in mats]
    n = len(mats)
    basis = np.stack([m.reshape(-1) for m in mats], axis=1)
    A = np.zeros((n, n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            c = mats[i] @ mats[j] - mats[j] @ mats[i]
            sol, *_ = np.linalg.lstsq(basis, c.reshape(-1), rcond=None)
            A[i, j] = sol
    A[np.abs(A) < 1e-14] = 0
    if np.abs(A.imag).max(initial=0.0) < 1e-12:
        A = A.real.copy()
    return A


@dataclasses.dataclass(frozen=True, eq=False)
class Rep:
    """Finite-dimensional representation of a Lie group.

    ``infinitesimal[i]`` is ``drho(X_i)``; ``discrete`` holds ``rho(h)`` for the
    representatives of the non-identity components. ``label`` is set for the
    built-in irreps and left ``None`` for generic representations.
    """

    algebra: LieAlgebra
    dim: int
    infinitesimal: tuple
    discrete: tuple = ()
    label: Optional[object] = None

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidArgumentError("representation dimension must be positive")
        inf = tuple(_frozen(x) for x in self.infinitesimal)
        dis = tuple(_frozen(x) for x in self.discrete)
        if len(inf) != self.algebra.num_generators:
            raise InvalidArgumentError(
                f"{len(inf)} generator matrices for an algebra with {self.algebra.num_generators} generators"
            )
        for x in inf + dis:
            if x.shape != (self.dim, self.dim):
                raise InvalidArgumentError(f"generator of shape {x.shape} in a rep of dim {self.dim}")
            if not np.all(np.isfinite(x)):
                raise InvalidArgumentError("non-finite generator matrix")
        object.__setattr__(self, "infinitesimal", inf)
        object.__setattr__(self, "discrete", dis)

    @property
    def num_discrete(self) -> int:
        return len(self.discrete)

    def algebra_element(self, coeffs) -> np.ndarray:
        coeffs = np.asarray(coeffs)
        out = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for a, x in zip(coeffs, self.infinitesimal):
            if a != 0:
                out = out + a * x
        return out

    def element(self, coeffs, discrete_index: Optional[int] = None) -> "GroupElement":
        coeffs = np.asarray(coeffs, dtype=np.float64)
        if coeffs.shape != (self.algebra.num_generators,):
            raise InvalidArgumentError("one coefficient per algebra generator is required")
        m = matrix_exponential(self.algebra_element(coeffs))
        if discrete_index is not None:
            m = m @ self.discrete[discrete_index]
        return GroupElement(m, coeffs, discrete_index)

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.algebra.structure_constants).tobytes())
        h.update(str(self.dim).encode())
        for x in self.infinitesimal:
            h.update(np.ascontiguousarray(x).tobytes())
        h.update(b"|discrete|")
        for x in self.discrete:
            h.update(np.ascontiguousarray(x).tobytes())
        return h.hexdigest()

    def __repr__(self):
        tag = str(self.label) if self.label is not None else f"dim={self.dim}"
        return f"Rep({self.algebra.name}, {tag})"


@dataclasses.dataclass(frozen=True, eq=False)
class GroupElement:
    matrix: np.ndarray
    coeffs: np.ndarray
    discrete_index: Optional[int] = None

    def reconstruct(self, rep: Rep) -> np.ndarray:
        return rep.element(self.coeffs, self.discrete_index).matrix


def matrix_exponential(X, order: int = 18) -> np.ndarray:
    """Matrix exponential by scaling and squaring around a Taylor core.

    The argument is scaled by ``2**-s`` so that its 1-norm is at most 1/2,
    the truncated series is evaluated with Horner's rule and the result is
    squared ``s`` times.
    """
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise InvalidArgumentError(f"matrix_exponential needs a square matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InvalidArgumentError("matrix_exponential got non-finite entries")
    X = X.astype(np.complex128) if np.iscomplexobj(X) else X.astype(np.float64)
    n = X.shape[0]
    norm = float(np.abs(X).sum(axis=0).max()) if n else 0.0
    s = 0
    if norm > 0.5:
        s = int(math.ceil(math.log2(norm / 0.5)))
    Y = X / (2.0 ** s)
    eye = np.eye(n, dtype=X.dtype)
    E = eye.copy()
    for k in range(order, 0, -1):
        E = eye + (Y @ E) / k
    for _ in range(s):
        E = E @ E
    return E


@dataclasses.dataclass
class ValidationReport:
    passed: bool
    max_residual: float
    worst_pair: Optional[tuple]
    min_abs_det: Optional[float] = None
    tol: float = COMMUTATOR_TOL

    def lines(self) -> list[str]:
        out = [
            f"status: {'PASS' if self.passed else 'FAIL'}",
            f"max_commutator_residual: {self.max_residual:.17g}",
            f"worst_pair: {self.worst_pair}",
        ]
        if self.min_abs_det is not None:
            out.append(f"min_abs_det_discrete: {self.min_abs_det:.17g}")
        out.append(f"tolerance: {self.tol:.17g}")
        return out


def validate_rep(rep: Rep, tol: float = COMMUTATOR_TOL) -> ValidationReport:
    """Check commutator closure and invertibility of the discrete generators."""
    gens = rep.infinitesimal
    dims = {g.shape for g in gens + rep.discrete}
    if len(dims) > 1:
        raise InvalidArgumentError(f"generator shapes disagree: {sorted(dims)}")
    A = rep.algebra.structure_constants
    worst, worst_pair = 0.0, None
    for i in range(len(gens)):
        for j in range(len(gens)):
            lhs = gens[i] @ gens[j] - gens[j] @ gens[i]
            rhs = np.tensordot(A[i, j], np.stack(gens), axes=(0, 0))
            r = float(np.abs(lhs - rhs).max())
            if r > worst or worst_pair is None:
                worst, worst_pair = r, (i, j)
    min_det = None
    det_ok = True
    if rep.discrete:
        min_det = min(float(abs(np.linalg.det(h))) for h in rep.discrete)
        det_ok = min_det > 1e-12
    return ValidationReport(worst < tol and det_ok, worst, worst_pair, min_det, tol)


def sample_group_params(num_generators: int, num_discrete: int, rng_seed, scale: float):
    """Algebra coefficients and discrete index of a random group element."""
    if scale < 0:
        raise InvalidArgumentError("scale must be non-negative")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    coeffs = rng.uniform(-scale, scale, size=num_generators)
    choice = int(rng.integers(0, num_discrete + 1))
    return coeffs, (None if choice == 0 else choice - 1)


def sample_group_element(rep: Rep, rng_seed, scale: float = 1.0) -> GroupElement:
    coeffs, idx = sample_group_params(rep.algebra.num_generators, rep.num_discrete, rng_seed, scale)
    return rep.element(coeffs, idx)


def _check_compatible(rep1: Rep, rep2: Rep):
    if not rep1.algebra.is_same(rep2.algebra):
        raise InvalidArgumentError(f"algebra mismatch: {rep1.algebra.name} vs {rep2.algebra.name}")
    if rep1.num_discrete != rep2.num_discrete:
        raise InvalidArgumentError("reps carry different numbers of discrete generators")


def tensor_product(rep1: Rep, rep2: Rep) -> Rep:
    _check_compatible(rep1, rep2)
    i1, i2 = np.eye(rep1.dim), np.eye(rep2.dim)
    inf = [np.kron(a, i2) + np.kron(i1, b) for a, b in zip(rep1.infinitesimal, rep2.infinitesimal)]
    dis = [np.kron(a, b) for a, b in zip(rep1.discrete, rep2.discrete)]
    return Rep(rep1.algebra, rep1.dim * rep2.dim, tuple(inf), tuple(dis))


def _block_diag(a, b):
    n, m = a.shape[0], b.shape[0]
    out = np.zeros((n + m, n + m), dtype=np.complex128)
    out[:n, :n] = a
    out[n:, n:] = b
    return out


def direct_sum(rep1: Rep, *reps: Rep) -> Rep:
    out = rep1
    for rep2 in reps:
        _check_compatible(out, rep2)
        inf = [_block_diag(a, b) for a, b in zip(out.infinitesimal, rep2.infinitesimal)]
        dis = [_block_diag(a, b) for a, b in zip(out.discrete, rep2.discrete)]
        out = Rep(out.algebra, out.dim + rep2.dim, tuple(inf), tuple(dis))
    return out


def product_group_rep(rep1: Rep, rep2: Rep) -> Rep:
    """Outer tensor product: a rep of G1 x G2 on V1 (x) V2.

    Discrete generators of the product are ``h1 (x) 1`` followed by ``1 (x) h2``.
    """
    alg = direct_sum_algebra(rep1.algebra, rep2.algebra)
    i1, i2 = np.eye(rep1.dim), np.eye(rep2.dim)
    inf = [np.kron(a, i2) for a in rep1.infinitesimal] + [np.kron(i1, b) for b in rep2.infinitesimal]
    dis = [np.kron(a, i2) for a in rep1.discrete] + [np.kron(i1, b) for b in rep2.discrete]
    return Rep(alg, rep1.dim * rep2.dim, tuple(inf), tuple(dis))


def conjugate_rep(rep: Rep) -> Rep:
    """Complex-conjugate representation; needs real structure constants."""
    if np.abs(np.imag(rep.algebra.structure_constants)).max(initial=0.0) > 1e-12:
        raise InvalidArgumentError("conjugate rep requires real structure constants")
    return Rep(rep.algebra, rep.dim, tuple(x.conj() for x in rep.infinitesimal),
               tuple(h.conj() for h in rep.discrete))


def change_basis(rep: Rep, S: np.ndarray) -> Rep:
    """The rep ``S^-1 rho S``."""
    S = np.asarray(S, dtype=np.complex128)
    Si = np.linalg.inv(S)
    return Rep(rep.algebra, rep.dim, tuple(Si @ x @ S for x in rep.infinitesimal),
               tuple(Si @ h @ S for h in rep.discrete))


def trivial_rep(algebra: LieAlgebra, num_discrete: int = 0, dim: int = 1) -> Rep:
    z = np.zeros((dim, dim))
    return Rep(algebra, dim, tuple(z for _ in range(algebra.num_generators)),
               tuple(np.eye(dim) for _ in range(num_discrete)))


# --- JSON ---------------------------------------------------------------

def _mat_to_json(m: np.ndarray):
    m = np.asarray(m, dtype=np.complex128)
    if not np.all(np.isfinite(m)):
        raise InvalidArgumentError("cannot serialize non-finite values")
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _mat_from_json(obj, shape=None) -> np.ndarray:
    a = np.asarray(obj, dtype=np.float64)
    if a.shape[-1:] != (2,):
        raise InvalidArgumentError("complex entries must be [re, im] pairs")
    out = np.empty(a.shape[:-1], dtype=np.complex128)
    # assign parts separately: re + 1j*im would not preserve signed zeros
    out.real, out.imag = a[..., 0], a[..., 1]
    if shape is not None and out.shape != shape:
        raise InvalidArgumentError(f"expected shape {shape}, got {out.shape}")
    return out


def rep_to_dict(rep: Rep) -> dict:
    A = rep.algebra.structure_constants
    return {
        "algebra": {
            "name": rep.algebra.name,
            "num_generators": rep.algebra.num_generators,
            "structure_constants": [_mat_to_json(A[i]) for i in range(A.shape[0])],
        },
        "dim": rep.dim,
        "infinitesimal": [_mat_to_json(x) for x in rep.infinitesimal],
        "discrete": [_mat_to_json(x) for x in rep.discrete],
    }


def rep_from_dict(d: dict) -> Rep:
    try:
        alg = d["algebra"]
        n = int(alg["num_generators"])
        dim = int(d["dim"])
        if n:
            A = _mat_from_json(alg["structure_constants"], (n, n, n))
        else:
            A = np.zeros((0, 0, 0))
        algebra = LieAlgebra(str(alg["name"]), A)
        inf = tuple(_mat_from_json(x, (dim, dim)) for x in d["infinitesimal"])
        dis = tuple(_mat_from_json(x, (dim, dim)) for x in d.get("discrete", []))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidArgumentError):
            raise
        raise InvalidArgumentError(f"malformed rep document: {exc}") from exc
    return Rep(algebra, dim, inf, dis)


def rep_to_json(rep: Rep) -> str:
    return json.dumps(rep_to_dict(rep))


def rep_from_json(text: str) -> Rep:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"invalid JSON: {exc}") from exc
    if not isinstance(d, dict):
        raise InvalidArgumentError("rep document must be a JSON object")
    return rep_from_dict(d)
