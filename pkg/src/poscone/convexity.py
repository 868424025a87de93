"""Exponential sets ``M = e^H`` and their geodesic convexity.

A real subspace ``H`` of the Hermitian part is stored through a
``tau``-orthonormal basis. Internally Hermitian elements are flattened to real
coordinate vectors in which the trace inner product is the Euclidean dot
product (real and imaginary parts, each block scaled by ``sqrt(w_i/d_i)``).

``e^H`` is geodesically convex exactly when ``[x, [x, y]] in H`` for all
``x, y in H``; :func:`check_double_bracket` decides this on basis triples by
polarization, since the bracket is quadratic in ``x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .algebra import (
    AlgebraElement,
    HermitianElement,
    PositiveElement,
    TracialAlgebra,
    commutator,
    expm,
    norm2,
)
from .geometry import Geodesic, unwhiten, whiten

__all__ = [
    "Subspace",
    "ConvexSubmanifold",
    "ClosureWitness",
    "ClosureError",
    "NotInSubmanifoldError",
    "hermitian_to_vector",
    "vector_to_hermitian",
    "standard_basis",
    "orthonormalize",
    "project_subspace",
    "check_double_bracket",
    "double_bracket",
    "membership",
    "membership_residual",
    "TangentProjector",
    "tangent_at",
    "orthogonal_supplement",
    "aba_closure_test",
    "standard_subspace",
    "parse_subspace_spec",
    "conditional_expectation",
    "flat_immersion",
    "falsification_scan",
    "geodesic_stays_inside",
    "DEFAULT_CLOSURE_TOL",
    "DEFAULT_MEMBERSHIP_TOL",
]

DEFAULT_CLOSURE_TOL = 1e-9
DEFAULT_MEMBERSHIP_TOL = 1e-8
_DROP_TOL = 1e-10


class ClosureError(ValueError):
    """The subspace fails the double-bracket condition."""

    def __init__(self, witness: "ClosureWitness"):
        super().__init__(f"double-bracket closure fails, residual {witness.residual:.3e}")
        self.witness = witness


class NotInSubmanifoldError(ValueError):
    pass


# ---------------------------------------------------------------------------
# coordinates


def _factors(algebra: TracialAlgebra) -> list:
    return [math.sqrt(f) for f in algebra.trace_factors]


def _stack_to_vectors(algebra: TracialAlgebra, stacks: Sequence[np.ndarray]) -> np.ndarray:
    """Per-block arrays of shape ``(..., d, d)`` to real vectors ``(..., N)``."""
    parts = []
    for s, blk in zip(_factors(algebra), stacks):
        lead = blk.shape[:-2]
        flat = blk.reshape(lead + (-1,))
        parts.append(s * flat.real)
        parts.append(s * flat.imag)
    return np.concatenate(parts, axis=-1)


def hermitian_to_vector(x: HermitianElement) -> np.ndarray:
    """Real coordinates with ``v(x) . v(y) == tau(x y)``."""
    return _stack_to_vectors(x.algebra, x.blocks)


def vector_to_hermitian(algebra: TracialAlgebra, v: np.ndarray) -> HermitianElement:
    blocks, k = [], 0
    for s, d in zip(_factors(algebra), algebra.dims):
        n = d * d
        re = v[k:k + n].reshape(d, d)
        im = v[k + n:k + 2 * n].reshape(d, d)
        blocks.append((re + 1j * im) / s)
        k += 2 * n
    return HermitianElement(algebra, blocks)


def standard_basis(algebra: TracialAlgebra) -> list:
    """A ``tau``-orthonormal basis of the whole Hermitian part."""
    out = []
    for bi, (d, f) in enumerate(zip(algebra.dims, algebra.trace_factors)):
        def put(mat):
            blocks = [np.zeros((dd, dd), dtype=complex) for dd in algebra.dims]
            blocks[bi] = mat
            out.append(HermitianElement(algebra, blocks))
        for j in range(d):
            m = np.zeros((d, d), dtype=complex)
            m[j, j] = 1.0 / math.sqrt(f)
            put(m)
        for j in range(d):
            for k in range(j + 1, d):
                m = np.zeros((d, d), dtype=complex)
                m[j, k] = m[k, j] = 1.0 / math.sqrt(2 * f)
                put(m)
                m = np.zeros((d, d), dtype=complex)
                m[j, k] = 1j / math.sqrt(2 * f)
                m[k, j] = -1j / math.sqrt(2 * f)
                put(m)
    return out


# ---------------------------------------------------------------------------
# subspaces


class Subspace:
    """A real subspace of the Hermitian part with a ``tau``-orthonormal basis.

    Use :func:`orthonormalize` (or :func:`standard_subspace`) rather than the
    constructor, which trusts its input.
    """

    def __init__(self, algebra: TracialAlgebra, basis: Sequence[HermitianElement],
                 matrix: Optional[np.ndarray] = None):
        self.algebra = algebra
        self.basis = tuple(basis)
        if matrix is None:
            n = 2 * algebra.real_dim
            matrix = (np.array([hermitian_to_vector(b) for b in self.basis])
                      if self.basis else np.zeros((0, n)))
        matrix = np.array(matrix, dtype=float)
        matrix.flags.writeable = False
        self.matrix = matrix

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def __len__(self):
        return self.dimension

    def gram_residual(self) -> float:
        g = self.matrix @ self.matrix.T
        return float(np.max(np.abs(g - np.eye(self.dimension)))) if self.dimension else 0.0

    def coordinates(self, x: HermitianElement) -> np.ndarray:
        return self.matrix @ hermitian_to_vector(x)

    def from_coordinates(self, c: np.ndarray) -> HermitianElement:
        return vector_to_hermitian(self.algebra, np.asarray(c, dtype=float) @ self.matrix)

    def contains(self, x: HermitianElement, tol: float = 1e-10) -> bool:
        return norm2(x - project_subspace(self, x)) <= tol * (1.0 + norm2(x))

    def to_dict(self) -> dict:
        from .algebra import element_to_dict

        return {
            "algebra": self.algebra.to_dict(),
            "generators": [element_to_dict(b)["blocks"] for b in self.basis],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Subspace":
        from .algebra import element_from_dict

        alg = TracialAlgebra.from_dict(data["algebra"])
        gens = [element_from_dict({"blocks": g}, "hermitian", algebra=alg) for g in data["generators"]]
        return orthonormalize(gens, algebra=alg)


def orthonormalize(generators: Sequence[HermitianElement], drop_tol: float = _DROP_TOL,
                   algebra: Optional[TracialAlgebra] = None) -> Subspace:
    """Gram-Schmidt under the trace inner product.

    Two passes of modified Gram-Schmidt; a generator whose remainder is below
    ``drop_tol`` times its norm is dropped as dependent. Raises ``ValueError``
    when every generator is numerically zero.
    """
    generators = list(generators)
    if not generators:
        raise ValueError("need at least one generator")
    alg = algebra or generators[0].algebra
    vecs = []
    for g in generators:
        if g.algebra != alg:
            raise ValueError("generators belong to different algebras")
        vecs.append(hermitian_to_vector(g))
    q = _gram_schmidt(vecs, drop_tol)
    if not q:
        raise ValueError("all generators are numerically zero")
    mat = np.array(q)
    return Subspace(alg, [vector_to_hermitian(alg, v) for v in q], mat)


def _gram_schmidt(vecs, drop_tol, start=()):
    q = list(start)
    n0 = len(q)
    for v in vecs:
        nv = np.linalg.norm(v)
        if nv == 0.0:
            continue
        w = v.copy()
        for _ in range(2):
            for e in q:
                w -= (e @ w) * e
        nw = np.linalg.norm(w)
        if nw <= drop_tol * nv:
            continue
        q.append(w / nw)
    return q[n0:]


def project_subspace(H: Subspace, x: HermitianElement) -> HermitianElement:
    """``tau``-orthogonal projection ``P_H x``."""
    if x.algebra != H.algebra:
        raise ValueError("element and subspace belong to different algebras")
    if H.dimension == 0:
        return H.algebra.zero()
    return H.from_coordinates(H.coordinates(x))


def orthogonal_supplement(H: Subspace) -> Subspace:
    """``S`` with ``A_h = H (+) S`` orthogonally; may be ``{0}``."""
    q = _gram_schmidt([hermitian_to_vector(b) for b in standard_basis(H.algebra)],
                      1e-8, start=list(H.matrix))
    alg = H.algebra
    mat = np.array(q) if q else np.zeros((0, 2 * alg.real_dim))
    return Subspace(alg, [vector_to_hermitian(alg, v) for v in q], mat)


def conditional_expectation(H: Subspace, a: AlgebraElement) -> AlgebraElement:
    """Complex-linear extension of ``P_H``: ``P_H(Re a) + i P_H(Im a)``.

    For ``H`` the Hermitian part of a subalgebra this is the trace-preserving
    conditional expectation onto that subalgebra.
    """
    re = HermitianElement(a.algebra, [(b + b.conj().T) / 2 for b in a.blocks])
    im = HermitianElement(a.algebra, [(b - b.conj().T) / 2j for b in a.blocks])
    pre, pim = project_subspace(H, re), project_subspace(H, im)
    return AlgebraElement(a.algebra, [r + 1j * i for r, i in zip(pre.blocks, pim.blocks)])


# ---------------------------------------------------------------------------
# double-bracket closure


def double_bracket(x: HermitianElement, y: HermitianElement) -> HermitianElement:
    """``[x, [x, y]]`` (Hermitian for Hermitian arguments)."""
    return commutator(x, commutator(x, y)).hermitian_part()


@dataclass(frozen=True)
class ClosureWitness:
    """A pair ``(x, y)`` in ``H`` with ``[x, [x, y]]`` outside ``H``."""

    x: HermitianElement
    y: HermitianElement
    offending: HermitianElement
    residual: float
    triple: tuple = field(default=())

    def to_dict(self) -> dict:
        from .algebra import element_to_dict

        return {
            "x": element_to_dict(self.x),
            "y": element_to_dict(self.y),
            "offending": element_to_dict(self.offending),
            "residual": self.residual,
            "triple": list(self.triple),
        }


def _polarized_residuals(H: Subspace) -> np.ndarray:
    """``R[i, j, k] = ||B - P_H B||_2 / max(1, ||B||_2)`` for
    ``B = [h_i, [h_j, h_k]] + [h_j, [h_i, h_k]]``."""
    k = H.dimension
    alg = H.algebra
    stacks = [np.array([b.blocks[bi] for b in H.basis]) for bi in range(alg.n_blocks)]
    # C[j, k] = [h_j, h_k] per block
    comms = [s[:, None] @ s[None, :] - s[None, :] @ s[:, None] for s in stacks]
    out = np.empty((k, k, k))
    for i in range(k):
        bi_blocks = []
        for s, c in zip(stacks, comms):
            hi = s[i]
            t1 = hi @ c - c @ hi                       # [h_i, [h_j, h_k]]
            t2 = s[:, None] @ c[i][None] - c[i][None] @ s[:, None]   # [h_j, [h_i, h_k]]
            bi_blocks.append(t1 + t2)
        v = _stack_to_vectors(alg, bi_blocks)          # (k, k, N)
        resid = v - (v @ H.matrix.T) @ H.matrix
        out[i] = np.linalg.norm(resid, axis=-1) / np.maximum(1.0, np.linalg.norm(v, axis=-1))
    return out


def check_double_bracket(H: Subspace, tol: float = DEFAULT_CLOSURE_TOL) -> Optional[ClosureWitness]:
    """None when ``H`` is closed under ``x, y -> [x, [x, y]]``, else a witness.

    Every basis triple is tested through the polarized form. Diagonal triples
    ``(i, i, k)`` are scanned first because they give a witness pair directly
    (``x = h_i, y = h_k``); an off-diagonal failure ``(i, j, k)`` yields
    ``x = h_i +- h_j``.
    """
    if H.dimension == 0:
        return None
    r = _polarized_residuals(H)
    k = H.dimension
    for i in range(k):
        for kk in range(k):
            if r[i, i, kk] > tol:
                return _witness(H, H.basis[i], H.basis[kk], (i, i, kk))
    for i in range(k):
        for j in range(i + 1, k):
            for kk in range(k):
                if r[i, j, kk] > tol:
                    y = H.basis[kk]
                    cands = [_witness(H, H.basis[i] + H.basis[j], y, (i, j, kk)),
                             _witness(H, H.basis[i] - H.basis[j], y, (i, j, kk))]
                    return max(cands, key=lambda w: w.residual)
    return None


def _witness(H, x, y, triple) -> ClosureWitness:
    off = double_bracket(x, y)
    res = norm2(off - project_subspace(H, off))
    return ClosureWitness(x, y, off, res, triple)


# ---------------------------------------------------------------------------
# exponential sets


class ConvexSubmanifold:
    """The exponential set ``M = e^H``.

    ``closure_certified`` is True only when the double-bracket condition was
    checked (:meth:`certify`) or holds by construction (standard subspaces
    that are Hermitian parts of subalgebras, and one-dimensional spans).
    """

    def __init__(self, subspace: Subspace, closure_certified: bool = False):
        self.subspace = subspace
        self.closure_certified = bool(closure_certified)

    @property
    def algebra(self) -> TracialAlgebra:
        return self.subspace.algebra

    @classmethod
    def certify(cls, subspace: Subspace, tol: float = DEFAULT_CLOSURE_TOL) -> "ConvexSubmanifold":
        """Run :func:`check_double_bracket`; raise :class:`ClosureError` on failure."""
        w = check_double_bracket(subspace, tol)
        if w is not None:
            raise ClosureError(w)
        return cls(subspace, True)

    @classmethod
    def standard(cls, algebra: TracialAlgebra, kind: str, **kwargs) -> "ConvexSubmanifold":
        H = standard_subspace(algebra, kind, **kwargs)
        if kind in ("diagonal", "block_diagonal", "full", "single_generator"):
            return cls(H, True)
        return cls.certify(H)

    def contains(self, a: PositiveElement, tol: float = DEFAULT_MEMBERSHIP_TOL) -> bool:
        return membership(self, a, tol)

    def random_point(self, seed=None, max_norm: float = 2.0) -> PositiveElement:
        """``e^h`` for ``h`` uniformly directed in ``H`` with ``||h||_2 <= max_norm``."""
        from .algebra import as_rng

        rng = as_rng(seed)
        c = rng.standard_normal(self.subspace.dimension)
        nc = np.linalg.norm(c)
        if nc > 0:
            c *= max_norm * (1.0 - rng.random()) / nc
        return expm(self.subspace.from_coordinates(c))


def membership_residual(M: ConvexSubmanifold, a: PositiveElement) -> float:
    """``||ln a - P_H ln a||_2 / (1 + ||ln a||_2)``."""
    la = a.log if isinstance(a, PositiveElement) else PositiveElement(a).log
    return norm2(la - project_subspace(M.subspace, la)) / (1.0 + norm2(la))


def membership(M: ConvexSubmanifold, a: PositiveElement, tol: float = DEFAULT_MEMBERSHIP_TOL) -> bool:
    """``a in e^H`` iff ``ln a in H``, up to ``tol (1 + ||ln a||_2)``."""
    return membership_residual(M, a) <= tol


class TangentProjector:
    """Metric-orthogonal projector of ``T_p`` onto ``T_p M = p^{1/2} H p^{1/2}``."""

    def __init__(self, M: ConvexSubmanifold, p: PositiveElement):
        self.submanifold = M
        self.base = p

    def __call__(self, v: HermitianElement) -> HermitianElement:
        p = self.base
        return unwhiten(p, project_subspace(self.submanifold.subspace, whiten(p, v)))

    def coordinates(self, v: HermitianElement) -> np.ndarray:
        """``tau(h_k p^{-1/2} v p^{-1/2})`` for each basis element ``h_k``."""
        return self.submanifold.subspace.coordinates(whiten(self.base, v))


def tangent_at(M: ConvexSubmanifold, p: PositiveElement,
               tol: float = DEFAULT_MEMBERSHIP_TOL) -> TangentProjector:
    if not membership(M, p, tol):
        raise NotInSubmanifoldError("base point is not in the submanifold")
    return TangentProjector(M, p)


def aba_closure_test(M: ConvexSubmanifold, a: PositiveElement, b: PositiveElement,
                     tol: float = DEFAULT_MEMBERSHIP_TOL) -> bool:
    """Whether ``a b a`` stays in ``M`` for ``a, b in M``."""
    if not (membership(M, a, tol) and membership(M, b, tol)):
        raise NotInSubmanifoldError("aba test needs a and b in the submanifold")
    return membership(M, PositiveElement((a @ b @ a).hermitian_part()), tol)


def flat_immersion(a: PositiveElement, b: PositiveElement, s: float, t: float,
                   tol: float = 1e-10) -> PositiveElement:
    """``e^{s ln a + t ln b}`` for commuting ``a, b``.

    The segment ``s + t = 1, s, t >= 0`` is the geodesic from ``b`` (``s = 0``)
    to ``a`` (``s = 1``), and the triangle ``(0,0), (1,0), (0,1)`` maps onto the
    flat geodesic triangle spanned by ``1, a, b``.
    """
    if norm2(commutator(a, b)) > tol * (1.0 + norm2(a) * norm2(b)):
        raise ValueError("flat immersion needs commuting a and b")
    return expm(a.log * s + b.log * t)


def falsification_scan(M: ConvexSubmanifold, x: HermitianElement, y: HermitianElement,
                       params: Sequence[float] = (0.25, 0.5, 1.0, 2.0),
                       tol: float = DEFAULT_MEMBERSHIP_TOL):
    """Search ``a = e^{s x}, b = e^{t y}`` (``x, y in H``) for ``a b a`` outside ``M``.

    Returns ``(a, b, residual)`` for the first failure, or None.
    """
    for s in params:
        for t in params:
            a = expm(x * s)
            b = expm(y * t)
            aba = PositiveElement((a @ b @ a).hermitian_part())
            res = membership_residual(M, aba)
            if res > tol:
                return a, b, res
    return None


# ---------------------------------------------------------------------------
# standard subspaces


def _diagonal_generators(algebra: TracialAlgebra) -> list:
    eye = np.eye(algebra.size)
    return [algebra.diag(row) for row in eye]


def _block_generators(algebra: TracialAlgebra, partition) -> list:
    """Hermitian matrix units supported on ``group x group`` for each group.

    ``partition`` lists groups of 1-based indices into the concatenated
    diagonal of the algebra; every group must sit inside one block.
    """
    offsets = np.cumsum((0,) + algebra.dims)
    seen = []
    gens = []
    for group in partition:
        idx = sorted(int(i) - 1 for i in group)
        if not idx:
            raise ValueError("empty group in partition")
        if idx[0] < 0 or idx[-1] >= algebra.size:
            raise ValueError(f"partition index out of range: {group}")
        blk = int(np.searchsorted(offsets, idx[0], side="right") - 1)
        if idx[-1] >= offsets[blk + 1]:
            raise ValueError(f"group {group} straddles algebra blocks")
        seen.extend(idx)
        loc = [i - offsets[blk] for i in idx]
        d = algebra.dims[blk]
        for a_ in loc:
            for b_ in loc:
                if b_ < a_:
                    continue
                for unit in ((1.0,) if a_ == b_ else (1.0, 1j)):
                    m = np.zeros((d, d), dtype=complex)
                    m[a_, b_] = unit
                    m[b_, a_] = np.conj(unit)
                    blocks = [np.zeros((dd, dd), dtype=complex) for dd in algebra.dims]
                    blocks[blk] = m
                    gens.append(HermitianElement(algebra, blocks))
    if sorted(seen) != list(range(algebra.size)):
        raise ValueError("partition must cover every index exactly once")
    return gens


def standard_subspace(algebra: TracialAlgebra, kind: str, *, partition=None,
                      x: Optional[HermitianElement] = None,
                      generators: Optional[Sequence[HermitianElement]] = None) -> Subspace:
    """Named subspaces.

    ``kind`` is one of ``"diagonal"`` (the maximal abelian case),
    ``"block_diagonal"`` (needs ``partition``), ``"full"``,
    ``"single_generator"`` (needs ``x``) or ``"span"`` (needs ``generators``).
    """
    if kind == "diagonal":
        return orthonormalize(_diagonal_generators(algebra))
    if kind == "block_diagonal":
        if partition is None:
            raise ValueError("block_diagonal needs a partition")
        return orthonormalize(_block_generators(algebra, partition))
    if kind == "full":
        basis = standard_basis(algebra)
        return Subspace(algebra, basis)
    if kind == "single_generator":
        if x is None:
            raise ValueError("single_generator needs x")
        return orthonormalize([x])
    if kind == "span":
        if not generators:
            raise ValueError("span needs generators")
        return orthonormalize(generators)
    raise ValueError(f"unknown subspace kind {kind!r}")


def parse_subspace_spec(algebra: TracialAlgebra, text: str) -> ConvexSubmanifold:
    """CLI shortcuts: ``diagonal``, ``full``, ``blocks=1,2|3``."""
    text = text.strip()
    if text in ("diagonal", "full"):
        return ConvexSubmanifold.standard(algebra, text)
    if text.startswith("blocks="):
        groups = [[int(i) for i in g.split(",") if i.strip()] for g in text[len("blocks="):].split("|")]
        return ConvexSubmanifold.standard(algebra, "block_diagonal", partition=groups)
    raise ValueError(f"unrecognized subspace spec {text!r}")


def geodesic_stays_inside(M: ConvexSubmanifold, a: PositiveElement, b: PositiveElement,
                          ts: Sequence[float] = (-1.0, 0.5, 2.0),
                          tol: float = DEFAULT_MEMBERSHIP_TOL) -> bool:
    g = Geodesic.between(a, b)
    return all(membership(M, g(t), tol) for t in ts)
