"""Nearest-point projection onto convex exponential sets, and the factorizations it yields.

The foot ``p = Pi_M(r)`` is the unique point of ``M = e^H`` where the geodesic
to ``r`` leaves ``M`` orthogonally. It is found by minimizing
``phi(p) = dist(r, p)^2`` over ``M`` with Riemannian gradient descent; ``phi``
is geodesically convex, so the stationary point is the global minimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .algebra import (
    AlgebraElement,
    HermitianElement,
    PositiveElement,
    element_to_dict,
    expm,
    norm2,
)
from .convexity import ConvexSubmanifold, project_subspace
from .geometry import SingularElementError, congruence, dist, log_map, unwhiten, whiten

__all__ = [
    "ProjectionResult",
    "SymmetricFactorization",
    "IwasawaFactorization",
    "ProjectionError",
    "ConvergenceError",
    "ConditioningError",
    "project",
    "contractivity_slack",
    "factor_symmetric",
    "factor_masa",
    "factor_iwasawa",
    "orthogonality_residual",
]

MAX_DISTANCE = 50.0
_ARMIJO_C = 1e-4
_MIN_STEP = 2.0 ** -40


class ProjectionError(ValueError):
    pass


class ConvergenceError(ProjectionError):
    """Descent stopped before meeting the convergence criterion.

    The partial :class:`ProjectionResult` is attached as ``result``.
    """

    def __init__(self, result: "ProjectionResult"):
        super().__init__(
            f"projection did not converge in {result.iterations} iterations "
            f"(orthogonality residual {result.residual:.3e})")
        self.result = result


class ConditioningError(ProjectionError):
    pass


@dataclass(frozen=True)
class ProjectionResult:
    """Foot ``p``, normal velocity ``v = Log_p(r)`` and convergence data."""

    foot: PositiveElement
    normal: HermitianElement
    residual: float
    iterations: int
    converged: bool
    distance: float

    def to_dict(self) -> dict:
        return {
            "foot": element_to_dict(self.foot),
            "normal": element_to_dict(self.normal),
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "distance": self.distance,
        }


def orthogonality_residual(M: ConvexSubmanifold, p: PositiveElement, v: HermitianElement) -> float:
    """``max_k |<v, p^{1/2} h_k p^{1/2}>_p| = max_k |tau(h_k p^{-1/2} v p^{-1/2})|``."""
    if M.subspace.dimension == 0:
        return 0.0
    return float(np.max(np.abs(M.subspace.coordinates(whiten(p, v)))))


def project(M: ConvexSubmanifold, r: PositiveElement, tol: Optional[float] = None,
            max_iter: int = 500, init: Optional[PositiveElement] = None,
            step_tol: float = 1e-12, strict: bool = True) -> ProjectionResult:
    """Nearest point of ``M`` to ``r`` in geodesic distance.

    Iterates ``p <- Exp_p(s Q_p(Log_p r))`` where ``Q_p`` is the tangent
    projector onto ``T_p M``, starting from ``e^{P_H ln r}`` (or ``init``),
    with ``s`` started at a Barzilai-Borwein estimate (1 on the first
    step) and halved until the Armijo condition holds.

    Parameters
    ----------
    tol : float, optional
        Orthogonality tolerance; default ``1e-10 (1 + dist(r, p))``.
    step_tol : float
        Converged also requires ``||Q_p(Log_p r)||_p <= step_tol (1 + dist(r, p))``.
    strict : bool
        Raise :class:`ConvergenceError` instead of returning an unconverged
        result.
    """
    if not M.closure_certified:
        raise ProjectionError("projection needs a closure-certified submanifold")
    H = M.subspace
    if init is None:
        p = expm(project_subspace(H, r.log))
    else:
        if not M.contains(init):
            raise ProjectionError("initial foot is not in the submanifold")
        p = init
    try:
        d0 = dist(r, p)
    except SingularElementError:
        d0 = math.inf
    if d0 > MAX_DISTANCE:
        raise ConditioningError(f"r is too far from M (distance {d0:.1f} > {MAX_DISTANCE})")

    it = 0
    s_init = 1.0
    prev = None
    while True:
        w = PositiveElement(whiten(p, r)).log        # p^{-1/2} Log_p(r) p^{-1/2}
        phi = _phi_from_whitened(w)
        c = H.coordinates(w)
        res = float(np.max(np.abs(c))) if c.size else 0.0
        dnorm = float(np.linalg.norm(c))
        d = math.sqrt(phi)
        limit = 1e-10 * (1.0 + d) if tol is None else tol
        if res <= limit and dnorm <= step_tol * (1.0 + d):
            return ProjectionResult(p, log_map(p, r), res, it, True, d)
        if it >= max_iter:
            break
        if prev is not None:
            s_init = _bb_step(prev[0], prev[1], c)
        # tangent direction at p, written in whitened coordinates
        direction = H.from_coordinates(c)
        s = s_init
        slack = 1e4 * np.finfo(float).eps * (1.0 + phi)  # dist^2 round-off near the foot
        while True:
            cand = _step(p, direction, s)
            phi_new = dist(r, cand) ** 2
            if phi_new <= phi - _ARMIJO_C * s * dnorm ** 2 + slack or s < _MIN_STEP:
                break
            s *= 0.5
        if s < _MIN_STEP:
            break
        prev = (s * c, c)
        p = cand
        it += 1

    result = ProjectionResult(p, log_map(p, r), res, it, False, math.sqrt(phi))
    if strict:
        raise ConvergenceError(result)
    return result


def _bb_step(move: np.ndarray, c_old: np.ndarray, c_new: np.ndarray) -> float:
    """Barzilai-Borwein step length from consecutive descent directions.

    Directions at different feet are compared through their ``H``
    coordinates in the whitened frame; the result is clipped to ``[1e-3, 1e3]``.
    """
    dy = c_old - c_new
    denom = float(np.dot(move, dy))
    if denom <= 0.0:
        return 1.0
    return min(max(float(np.dot(move, move)) / denom, 1e-3), 1e3)


def _phi_from_whitened(w: HermitianElement) -> float:
    return norm2(w) ** 2


def _step(p: PositiveElement, direction: HermitianElement, s: float) -> PositiveElement:
    """``Exp_p(s p^{1/2} direction p^{1/2})`` with ``direction`` already whitened."""
    return PositiveElement(unwhiten(p, expm(direction * s)))


def contractivity_slack(M: ConvexSubmanifold, r: PositiveElement, s: PositiveElement, **kwargs) -> float:
    """``dist(r, s) - dist(Pi_M r, Pi_M s)``; nonnegative."""
    pr = project(M, r, **kwargs).foot
    ps = project(M, s, **kwargs).foot
    return dist(r, s) - dist(pr, ps)


@dataclass(frozen=True)
class SymmetricFactorization:
    """``e^z = e^y e^w e^y`` with ``y in H`` and ``w`` orthogonal to ``H``."""

    y: HermitianElement
    w: HermitianElement
    foot: PositiveElement
    residual: float
    orthogonality: float
    iterations: int

    def to_dict(self) -> dict:
        return {
            "foot": element_to_dict(self.foot),
            "y": element_to_dict(self.y),
            "w": element_to_dict(self.w),
            "residuals": {"reconstruction": self.residual, "orthogonality": self.orthogonality},
            "iterations": self.iterations,
        }


def factor_symmetric(M: ConvexSubmanifold, z: HermitianElement, init: Optional[PositiveElement] = None,
                     **kwargs) -> SymmetricFactorization:
    """Factor ``e^z = e^y e^w e^y``.

    ``e^{2y}`` is the projection of ``e^z`` onto ``M``; then
    ``w = ln(e^{-y} e^z e^{-y})`` satisfies ``tau(w x) = 0`` for ``x in H``.
    """
    ez = expm(z)
    res = project(M, ez, init=init, **kwargs)
    H = M.subspace
    y = project_subspace(H, res.foot.log * 0.5)
    ey = expm(y)
    eminus = expm(-y)
    w = PositiveElement((eminus @ ez @ eminus).hermitian_part()).log
    recon = norm2(ey @ expm(w) @ ey - ez) / norm2(ez)
    orth = norm2(project_subspace(H, w))
    return SymmetricFactorization(y, w, res.foot, recon, orth, res.iterations)


def factor_masa(algebra, x: HermitianElement, init: Optional[PositiveElement] = None, **kwargs):
    """``e^x = d e^v d`` with ``d`` positive diagonal and ``v`` zero-diagonal.

    Returns ``(d, v, factorization)``.
    """
    M = ConvexSubmanifold.standard(algebra, "diagonal")
    f = factor_symmetric(M, x, init=init, **kwargs)
    return expm(f.y), f.w, f


@dataclass(frozen=True)
class IwasawaFactorization:
    """``g = e^x e^y u`` with ``x in H``, ``y`` orthogonal to ``H`` and ``u`` unitary."""

    x: HermitianElement
    y: HermitianElement
    u: AlgebraElement
    residual: float
    unitarity: float
    iterations: int

    def to_dict(self) -> dict:
        return {
            "x": element_to_dict(self.x),
            "y": element_to_dict(self.y),
            "u": element_to_dict(self.u),
            "residuals": {"reconstruction": self.residual, "unitarity": self.unitarity},
            "iterations": self.iterations,
        }


def factor_iwasawa(M: ConvexSubmanifold, g: AlgebraElement, init: Optional[PositiveElement] = None,
                   **kwargs) -> IwasawaFactorization:
    """Factor an invertible ``g`` as ``e^x e^y u``.

    ``g g* = e^x e^{2y} e^x`` by :func:`factor_symmetric`, then
    ``u = e^{-y} e^{-x} g``.
    """
    gg = congruence(g, M.algebra.identity())
    f = factor_symmetric(M, gg.log, init=init, **kwargs)
    x = f.y
    y = f.w * 0.5
    u = expm(-y) @ expm(-x) @ g
    recon = norm2(expm(x) @ expm(y) @ u - g) / norm2(g)
    eye = M.algebra.identity()
    unit = max(norm2(u @ u.adjoint() - eye), norm2(u.adjoint() @ u - eye))
    return IwasawaFactorization(x, y, u, recon, unit, f.iterations)
