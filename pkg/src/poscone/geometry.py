"""Riemannian geometry of the positive cone under the trace metric.

The metric at ``a`` is ``<x, y>_a = tau(x a^-1 y a^-1)``. Everything here is
expressed through spectral calculus on Hermitian elements; the
congruence ``x -> a^{-1/2} x a^{-1/2}`` ("whitening") moves a tangent vector
at ``a`` to the identity, where the metric is the plain trace inner product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .algebra import (
    AlgebraElement,
    HermitianElement,
    PositiveElement,
    commutator,
    divided_difference_apply,
    expm,
    inner2,
    norm2,
)

__all__ = [
    "Geodesic",
    "TangentAtPoint",
    "JacobiSolution",
    "TriangleReport",
    "SingularElementError",
    "whiten",
    "unwhiten",
    "metric_inner",
    "metric_norm",
    "geodesic",
    "exp_map",
    "exp_map_product",
    "log_map",
    "dist",
    "dexp",
    "emi_slack",
    "inner_inequality_slack",
    "t_operator",
    "t_operator_inverse",
    "curvature",
    "sectional",
    "jacobi_rhs",
    "jacobi_integrate",
    "angle",
    "triangle_report",
    "curve_length",
    "lower_bound_slack",
    "convexity_profile",
    "geodesic_symmetry",
    "congruence",
]


class SingularElementError(ValueError):
    """A group element, or the relative spectrum of a pair, is numerically singular."""


def whiten(a: PositiveElement, x: HermitianElement) -> HermitianElement:
    """``a^{-1/2} x a^{-1/2}``: carries ``T_a`` isometrically onto ``T_1``."""
    s = a.invsqrt
    return HermitianElement(a.algebra, [m @ b @ m for m, b in zip(s.blocks, x.blocks)])


def unwhiten(a: PositiveElement, x: HermitianElement) -> HermitianElement:
    """``a^{1/2} x a^{1/2}``, inverse of :func:`whiten`."""
    s = a.sqrt
    return HermitianElement(a.algebra, [m @ b @ m for m, b in zip(s.blocks, x.blocks)])


def _sandwich(s: AlgebraElement, x: AlgebraElement) -> HermitianElement:
    return HermitianElement(s.algebra, [m @ b @ m.conj().T for m, b in zip(s.blocks, x.blocks)])


def metric_inner(a: PositiveElement, x: HermitianElement, y: HermitianElement) -> float:
    """``tau(x a^-1 y a^-1)``."""
    return inner2(whiten(a, x), whiten(a, y))


def metric_norm(a: PositiveElement, x: HermitianElement) -> float:
    return norm2(whiten(a, x))


@dataclass(frozen=True)
class TangentAtPoint:
    base: PositiveElement
    vector: HermitianElement

    def norm(self) -> float:
        return metric_norm(self.base, self.vector)


class Geodesic:
    """Geodesic ``t -> p^{1/2} e^{t h} p^{1/2}`` through ``p``.

    Build with :meth:`between` (``h = ln(p^{-1/2} q p^{-1/2})``, so that
    ``evaluate(1) == q``) or :meth:`from_velocity` (``h = p^{-1/2} v p^{-1/2}``).
    Square roots of ``p`` and the spectral decomposition of ``h`` are computed
    once at construction.
    """

    def __init__(self, start: PositiveElement, generator: HermitianElement,
                 end: Optional[PositiveElement] = None):
        start._check(generator)
        self.start = start
        self.generator = generator
        self.end = end
        self._half = start.sqrt
        self._spec = generator.eig

    @classmethod
    def between(cls, p: PositiveElement, q: PositiveElement) -> "Geodesic":
        p._check(q)
        inner = PositiveElement(whiten(p, q))
        return cls(p, inner.log, end=q)

    @classmethod
    def from_velocity(cls, p: PositiveElement, v: HermitianElement) -> "Geodesic":
        return cls(p, whiten(p, v))

    @property
    def velocity(self) -> HermitianElement:
        """Initial velocity in ``T_p``."""
        return unwhiten(self.start, self.generator)

    def _inner_power(self, t: float):
        return [(u * np.exp(t * lam)) @ u.conj().T
                for lam, u in zip(self._spec.eigenvalues, self._spec.eigenvectors)]

    def evaluate(self, t: float) -> PositiveElement:
        if t == 0:
            return self.start
        if t == 1 and self.end is not None:
            return self.end
        mid = self._inner_power(t)
        blocks = [s @ m @ s for s, m in zip(self._half.blocks, mid)]
        return PositiveElement(HermitianElement(self.start.algebra, blocks))

    __call__ = evaluate

    def derivative(self, t: float) -> HermitianElement:
        """``p^{1/2} e^{th/2} h e^{th/2} p^{1/2}``."""
        out = []
        for s, lam, u, h in zip(self._half.blocks, self._spec.eigenvalues,
                                self._spec.eigenvectors, self.generator.blocks):
            e = (u * np.exp(t * lam / 2)) @ u.conj().T
            out.append(s @ e @ h @ e @ s)
        return HermitianElement(self.start.algebra, out)

    def speed(self, t: float = 0.0) -> float:
        return metric_norm(self.evaluate(t), self.derivative(t))

    @property
    def length(self) -> float:
        """Length of the segment ``t in [0, 1]``, i.e. ``||h||_2``."""
        return norm2(self.generator)


def geodesic(p: PositiveElement, q: PositiveElement) -> Geodesic:
    """Geodesic ``p^{1/2} (p^{-1/2} q p^{-1/2})^t p^{1/2}`` from ``p`` to ``q``."""
    return Geodesic.between(p, q)


def exp_map(p: PositiveElement, v: HermitianElement) -> PositiveElement:
    """``Exp_p(v) = p^{1/2} exp(p^{-1/2} v p^{-1/2}) p^{1/2}``."""
    return PositiveElement(unwhiten(p, expm(whiten(p, v))))


def exp_map_product(p: PositiveElement, v: HermitianElement) -> PositiveElement:
    """``Exp_p(v) = p e^{p^-1 v}`` evaluated with a general (non-Hermitian) matrix exponential."""
    out = []
    for pb, pinv, vb in zip(p.blocks, p.inverse.blocks, v.blocks):
        out.append(pb @ scipy.linalg.expm(pinv @ vb))
    return PositiveElement(HermitianElement(p.algebra, out))


def log_map(p: PositiveElement, q: PositiveElement) -> HermitianElement:
    """``Exp_p^{-1}(q) = p^{1/2} ln(p^{-1/2} q p^{-1/2}) p^{1/2}``."""
    return unwhiten(p, PositiveElement(whiten(p, q)).log)


def dist(a: PositiveElement, b: PositiveElement) -> float:
    """Geodesic distance ``tau(ln(a^{-1/2} b a^{-1/2})^2)^{1/2}``."""
    a._check(b)
    s = 0.0
    for f, m, bb in zip(a.algebra.trace_factors, a.invsqrt.blocks, b.blocks):
        c = m @ bb @ m
        lam = np.linalg.eigvalsh((c + c.conj().T) / 2)
        if lam[0] <= 0:
            raise SingularElementError("relative spectrum of the pair is below floating-point resolution")
        s += f * float(np.sum(np.log(lam) ** 2))
    return math.sqrt(s)


# ---------------------------------------------------------------------------
# derivative of exp and the operators built from it


def dexp(x: HermitianElement, y: HermitianElement) -> HermitianElement:
    """``d/dt e^{x + t y}|_0``, evaluated by first divided differences of exp."""
    return divided_difference_apply("exp", x, y)


def emi_slack(x: HermitianElement, y: HermitianElement) -> float:
    """``||e^-x dexp_x(y)||_2 - ||y||_2``; nonnegative (exponential metric increasing)."""
    d = dexp(x, y)
    return norm2(expm(-x) @ d) - norm2(y)


def inner_inequality_slack(a: PositiveElement, b: PositiveElement, integral: HermitianElement) -> float:
    """``||int_0^1 a^t b a^{1-t} dt||_2 - ||a^{1/2} b a^{1/2}||_2`` given the integral."""
    return norm2(integral) - norm2(_sandwich(a.sqrt, b))


def _sinhc(z: np.ndarray) -> np.ndarray:
    small = np.abs(z) < 1e-4
    zz = np.where(small, 1.0, z)
    return np.where(small, 1.0 + z * z / 6.0, np.sinh(zz) / zz)


def _eigenbasis_multiply(x: HermitianElement, y: HermitianElement, kernel) -> HermitianElement:
    x._check(y)
    spec = x.eig
    out = []
    for lam, u, yb in zip(spec.eigenvalues, spec.eigenvectors, y.blocks):
        k = kernel((lam[:, None] - lam[None, :]) / 2)
        out.append(u @ (k * (u.conj().T @ yb @ u)) @ u.conj().T)
    return HermitianElement(x.algebra, out)


def t_operator(x: HermitianElement, y: HermitianElement) -> HermitianElement:
    """``T_x(y) = e^{-x/2} dexp_x(y) e^{-x/2}``.

    Computed as ``sinh(D_x/2)/(D_x/2)`` applied to ``y`` where ``D_x`` is the
    commutator with ``x``: entry ``(i, j)`` in the eigenbasis of ``x`` is scaled
    by ``sinh(d)/d`` with ``d = (l_i - l_j)/2``.
    """
    return _eigenbasis_multiply(x, y, _sinhc)


def t_operator_inverse(x: HermitianElement, z: HermitianElement) -> HermitianElement:
    return _eigenbasis_multiply(x, z, lambda d: 1.0 / _sinhc(d))


# ---------------------------------------------------------------------------
# curvature and Jacobi fields


def curvature(a: PositiveElement, x: HermitianElement, y: HermitianElement,
              z: HermitianElement) -> HermitianElement:
    """``R_a(x, y) z = -1/4 a [[a^-1 x, a^-1 y], a^-1 z]``.

    ``z`` enters through the outer bracket; this completed form gives
    sectional values ``-1/4 ||[X, Y]||_2^2`` for orthonormal whitened ``X, Y``.
    """
    ainv = a.inverse
    ax, ay, az = ainv @ x, ainv @ y, ainv @ z
    r = a @ commutator(commutator(ax, ay), az)
    return HermitianElement(a.algebra, r.blocks) * -0.25


def sectional(a: PositiveElement, x: HermitianElement, y: HermitianElement) -> float:
    """``<R_a(x, y) y, x>_a``; nonpositive."""
    return metric_inner(a, curvature(a, x, y, y), x)


def jacobi_rhs(x: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Right side of ``4 K'' = K x^2 + x^2 K - 2 x K x`` divided by 4 (one block)."""
    xk = x @ k
    kx = k @ x
    return (kx @ x + x @ xk - 2.0 * xk @ x) / 4.0


@dataclass(frozen=True)
class JacobiSolution:
    """RK4 solution of the transformed Jacobi equation along ``t -> e^{tx}``.

    ``K_values[n]`` is the field ``K(t_n) = e^{-t_n x/2} J(t_n) e^{-t_n x/2}``;
    ``J_values`` undoes the transformation.
    """

    generator: HermitianElement
    grid: np.ndarray
    K_values: tuple
    Kdot_values: tuple
    J_values: tuple

    def _stacks(self, values) -> list:
        n = self.generator.algebra.n_blocks
        return [np.array([v.blocks[i] for v in values]) for i in range(n)]

    def _accelerations(self, stacks) -> list:
        out = []
        for xb, st in zip(self.generator.blocks, stacks):
            xk = xb @ st
            kx = st @ xb
            out.append((kx @ xb + xb @ xk - 2.0 * xk @ xb) / 4.0)
        return out

    def _tau(self, products) -> np.ndarray:
        factors = self.generator.algebra.trace_factors
        return sum(f * np.real(np.trace(p, axis1=-2, axis2=-1)) for f, p in zip(factors, products))

    def norms(self) -> np.ndarray:
        """``||K(t)||_2`` on the grid (equal to the metric norm of ``J``)."""
        stacks = self._stacks(self.K_values)
        sq = self._tau([np.conj(np.swapaxes(st, -1, -2)) @ st for st in stacks])
        return np.sqrt(np.maximum(sq, 0.0))

    def kkddot(self) -> np.ndarray:
        """``tau(K K'')`` on the grid, with ``K''`` from the equation."""
        stacks = self._stacks(self.K_values)
        return self._tau([st @ acc for st, acc in zip(stacks, self._accelerations(stacks))])

    def ode_residual(self) -> float:
        """Max over the grid of ``||K''_fd - K''_eq||_2 / max(1, max ||K||_2)``.

        ``K''_fd`` is the fourth-order five-point central difference; the five
        point stencil keeps truncation (``h^4 K^(6)/90``) well below the RK4
        error so the residual measures the integrator, not the stencil.
        """
        if len(self.K_values) < 5:
            return 0.0
        h = float(self.grid[1] - self.grid[0])
        stacks = self._stacks(self.K_values)
        acc = self._accelerations(stacks)
        diffs = []
        for st, ac in zip(stacks, acc):
            fd = (-st[4:] + 16.0 * st[3:-1] - 30.0 * st[2:-2] + 16.0 * st[1:-3] - st[:-4]) / (12.0 * h * h)
            r = fd - ac[2:-2]
            diffs.append(np.conj(np.swapaxes(r, -1, -2)) @ r)
        worst = float(np.sqrt(np.max(np.maximum(self._tau(diffs), 0.0))))
        return worst / max(1.0, float(np.max(self.norms())))

    def convexity_defect(self) -> float:
        """Largest ``f(t_n) - (f(t_{n-1}) + f(t_{n+1}))/2`` with ``f = ||K||_2``."""
        f = self.norms()
        if len(f) < 3:
            return 0.0
        return float(np.max(f[1:-1] - (f[:-2] + f[2:]) / 2))


def jacobi_integrate(x: HermitianElement, K0: HermitianElement, Kdot0: HermitianElement,
                     t_end: float = 1.0, step: float = 1e-3) -> JacobiSolution:
    """Classical RK4 for ``K' = V, V' = (K x^2 + x^2 K - 2 x K x)/4``.

    The number of steps is ``round(t_end / step)``; the grid is uniform.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    x._check(K0)
    x._check(Kdot0)
    n = max(1, int(round(abs(t_end) / step)))
    h = t_end / n
    grid = np.linspace(0.0, t_end, n + 1)
    ks = [[] for _ in grid]
    vs = [[] for _ in grid]
    for xb, k, v in zip(x.blocks, K0.blocks, Kdot0.blocks):
        k = np.array(k)
        v = np.array(v)
        ks[0].append(k)
        vs[0].append(v)
        for i in range(1, n + 1):
            a1 = jacobi_rhs(xb, k)
            k2 = k + 0.5 * h * v
            v2 = v + 0.5 * h * a1
            a2 = jacobi_rhs(xb, k2)
            k3 = k + 0.5 * h * v2
            v3 = v + 0.5 * h * a2
            a3 = jacobi_rhs(xb, k3)
            k4 = k + h * v3
            v4 = v + h * a3
            a4 = jacobi_rhs(xb, k4)
            k = k + (h / 6.0) * (v + 2.0 * v2 + 2.0 * v3 + v4)
            v = v + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
            ks[i].append(k)
            vs[i].append(v)
    alg = x.algebra
    K_values = tuple(HermitianElement(alg, b) for b in ks)
    Kdot_values = tuple(HermitianElement(alg, b) for b in vs)
    spec = x.eig
    J_values = []
    for t, kk in zip(grid, K_values):
        blocks = []
        for lam, u, kb in zip(spec.eigenvalues, spec.eigenvectors, kk.blocks):
            e = (u * np.exp(t * lam / 2)) @ u.conj().T
            blocks.append(e @ kb @ e)
        J_values.append(HermitianElement(alg, blocks))
    return JacobiSolution(x, grid, K_values, Kdot_values, tuple(J_values))


# ---------------------------------------------------------------------------
# angles, triangles, lengths


def angle(p: PositiveElement, u: HermitianElement, v: HermitianElement) -> float:
    """Angle in ``[0, pi]`` between tangent vectors at ``p``.

    Uses ``2 atan2(|u' - v'|, |u' + v'|)`` on the normalized vectors, equal to
    the clamped arccos of the normalized metric inner product but accurate
    near 0 and pi.
    """
    uw, vw = whiten(p, u), whiten(p, v)
    nu, nv = norm2(uw), norm2(vw)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("angle is undefined for a zero vector")
    uh, vh = uw * (1.0 / nu), vw * (1.0 / nv)
    return 2.0 * math.atan2(norm2(uh - vh), norm2(uh + vh))


@dataclass(frozen=True)
class TriangleReport:
    """Sides ``l_i`` opposite the vertex with angle ``alpha_i``."""

    sides: tuple
    angles: tuple
    angle_sum: float

    def comparison_slack(self) -> tuple:
        """``l_i^2 - (l_{i+1}^2 + l_{i-1}^2 - 2 l_{i+1} l_{i-1} cos alpha_i)`` per vertex."""
        l, al = self.sides, self.angles
        out = []
        for i in range(3):
            a, b = l[(i + 1) % 3], l[(i - 1) % 3]
            out.append(l[i] ** 2 - (a * a + b * b - 2 * a * b * math.cos(al[i])))
        return tuple(out)


def triangle_report(a: PositiveElement, b: PositiveElement, c: PositiveElement) -> TriangleReport:
    verts = (a, b, c)
    sides = []
    angles = []
    for i in range(3):
        p, q, r = verts[i], verts[(i + 1) % 3], verts[(i + 2) % 3]
        sides.append(dist(q, r))
        u, v = log_map(p, q), log_map(p, r)
        if metric_norm(p, u) == 0.0 or metric_norm(p, v) == 0.0:
            raise ValueError("triangle has coincident vertices")
        angles.append(angle(p, u, v))
    return TriangleReport(tuple(sides), tuple(angles), math.fsum(angles))


def curve_length(samples: Sequence[PositiveElement]) -> float:
    """Discretized length ``sum ||g_{k+1} - g_k||_{m_k}``.

    ``m_k`` is the geodesic midpoint of ``g_k`` and ``g_{k+1}``. With that
    choice each chord measures ``2 ||sinh(h/2)||_2 >= ||h||_2`` for the segment
    generator ``h``, so the sum never undercuts the polygonal distance, and on
    geodesic samples it converges to the length at rate ``O(step^2)``.
    """
    if len(samples) < 2:
        raise ValueError("need at least two samples")
    total = 0.0
    for g0, g1 in zip(samples[:-1], samples[1:]):
        mid = Geodesic.between(g0, g1).evaluate(0.5)
        total += metric_norm(mid, g1 - g0)
    return total


def lower_bound_slack(x: HermitianElement, y: HermitianElement) -> float:
    """``dist(e^x, e^y) - ||x - y||_2``; nonnegative."""
    return dist(expm(x), expm(y)) - norm2(x - y)


def convexity_profile(g1: Geodesic, g2: Geodesic, grid: Sequence[float]) -> list:
    """``[(t, dist(g1(t), g2(t))) for t in grid]``."""
    return [(float(t), dist(g1(t), g2(t))) for t in grid]


def geodesic_symmetry(p: PositiveElement, q: PositiveElement) -> PositiveElement:
    """``sigma_p(q) = p q^-1 p``."""
    p._check(q)
    return PositiveElement(HermitianElement(
        p.algebra, [pb @ qi @ pb for pb, qi in zip(p.blocks, q.inverse.blocks)]))


def congruence(g: AlgebraElement, a: PositiveElement, rtol: float = 1e-8) -> PositiveElement:
    """``I_g(a) = g a g*`` for invertible ``g``.

    Invertibility is certified by solving ``g X = 1`` and checking the
    relative residual; raises :class:`SingularElementError` otherwise.
    """
    g._check(a)
    for gb in g.blocks:
        eye = np.eye(gb.shape[0])
        try:
            sol = np.linalg.solve(gb, eye)
        except np.linalg.LinAlgError as exc:
            raise SingularElementError("g is singular") from exc
        if not np.all(np.isfinite(sol)):
            raise SingularElementError("g is singular")
        # backward error of the solve, and a cap on the condition number
        cond = np.linalg.norm(gb, 2) * np.linalg.norm(sol, 2)
        res = np.linalg.norm(gb @ sol - eye, 2)
        if res > rtol or cond * rtol > 1.0:
            raise SingularElementError(f"g is numerically singular (condition number {cond:.3g})")
    return PositiveElement(_sandwich(g, a))
