"""Independent reference computations used to cross-check the main code paths.

Nothing here calls into :mod:`poscone.geometry`, :mod:`poscone.convexity`
(beyond reading a subspace basis) or :mod:`poscone.projection`; agreement with
those modules is therefore evidence rather than a tautology. Speed is not a
goal.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from .algebra import AlgebraElement, HermitianElement, PositiveElement

__all__ = [
    "OracleReport",
    "simpson_weights",
    "dexp_quadrature",
    "inner_integral_quadrature",
    "finite_difference_derivative",
    "oracle_dist",
    "path_length_sampler",
    "polygon_length",
    "projection_bruteforce",
    "jacobi_exact",
    "MAX_BRUTEFORCE_DIM",
]

MAX_BRUTEFORCE_DIM = 4


@dataclass
class OracleReport:
    """Outcome of one property check over a batch of random instances."""

    name: str
    instances: int
    max_violation: float
    tolerance: float
    passed: bool
    worst_seed: Optional[int] = None

    @classmethod
    def from_violations(cls, name: str, violations: Sequence[float], tolerance: float,
                        seeds: Optional[Sequence[int]] = None) -> "OracleReport":
        """Violation ``v`` passes when ``v <= tolerance``; an empty batch passes."""
        v = np.asarray(violations, dtype=float)
        if v.size == 0:
            return cls(name, 0, 0.0, tolerance, True, None)
        i = int(np.argmax(v))
        worst = float(v[i])
        seed = None if seeds is None else int(seeds[i])
        return cls(name, int(v.size), worst, tolerance, bool(worst <= tolerance), seed)

    def to_dict(self) -> dict:
        return asdict(self)


def simpson_weights(panels: int) -> np.ndarray:
    """Composite Simpson weights on ``[0, 1]`` with ``panels`` (even) subintervals."""
    if panels < 2 or panels % 2:
        raise ValueError("Simpson needs an even panel count >= 2")
    w = np.ones(panels + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / (3.0 * panels)


def _block_expm_powers(x: HermitianElement, ts: np.ndarray):
    """``e^{t x}`` for every ``t`` in ``ts``, per block, as arrays ``(len(ts), d, d)``."""
    out = []
    for b in x.blocks:
        lam, u = np.linalg.eigh(b)
        e = np.exp(ts[:, None] * lam[None, :])
        out.append(np.einsum("ij,tj,kj->tik", u, e, u.conj()))
    return out


def dexp_quadrature(x: HermitianElement, y: HermitianElement, panels: int = 200) -> HermitianElement:
    """Composite Simpson evaluation of ``int_0^1 e^{tx} y e^{(1-t)x} dt``."""
    w = simpson_weights(panels)
    ts = np.linspace(0.0, 1.0, panels + 1)
    fwd = _block_expm_powers(x, ts)
    out = []
    for ef, yb in zip(fwd, y.blocks):
        eb = ef[::-1]                      # e^{(1-t) x}
        out.append(np.einsum("t,tij,jk,tkl->il", w, ef, yb, eb))
    return HermitianElement(x.algebra, out)


def inner_integral_quadrature(a: PositiveElement, b: HermitianElement, panels: int = 200) -> HermitianElement:
    """Simpson evaluation of ``int_0^1 a^t b a^{1-t} dt`` for positive ``a``."""
    blocks = []
    for ab in a.blocks:
        lam, u = np.linalg.eigh(ab)
        if lam[0] <= 0:
            raise ValueError("a must be positive")
        blocks.append(u @ np.diag(np.log(lam)) @ u.conj().T)
    return dexp_quadrature(HermitianElement(a.algebra, blocks), b, panels)


def finite_difference_derivative(f: Callable[[float], AlgebraElement], t: float, h: float = 1e-5) -> AlgebraElement:
    """Central difference ``(f(t + h) - f(t - h)) / 2h``."""
    if h <= 0:
        raise ValueError("h must be positive")
    return (f(t + h) - f(t - h)) * (1.0 / (2.0 * h))


def oracle_dist(a: AlgebraElement, b: AlgebraElement) -> float:
    """Distance from the generalized eigenvalues of ``(b, a)``, i.e. the spectrum of ``a^-1 b``."""
    s = 0.0
    for f, ab, bb in zip(a.algebra.trace_factors, a.blocks, b.blocks):
        lam = scipy.linalg.eigvalsh(bb, ab)
        s += f * float(np.sum(np.log(lam) ** 2))
    return math.sqrt(s)


def path_length_sampler(curve: Callable, samples: int = 200, t0: float = 0.0, t1: float = 1.0,
                        vectorized: bool = False) -> float:
    """Inscribed-polygon length ``sum dist(c(t_k), c(t_{k+1}))`` on a uniform grid.

    The polygon length is nondecreasing under refinement of the partition
    and bounded by the curve length, so the refinement gap is monotone.
    With ``vectorized=True`` the curve receives the whole time array and
    returns ``(algebra, stacks)`` where ``stacks[i]`` has shape
    ``(samples, d_i, d_i)``.
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    ts = np.linspace(t0, t1, samples)
    if vectorized:
        algebra, stacks = curve(ts)
    else:
        pts = [curve(t) for t in ts]
        algebra = pts[0].algebra
        stacks = [np.array([p.blocks[i] for p in pts]) for i in range(algebra.n_blocks)]
    return polygon_length(algebra, stacks)


def polygon_length(algebra, stacks) -> float:
    """Sum of consecutive distances for per-block stacks of positive matrices.

    Each distance uses the Cholesky factor ``L`` of the earlier point and the
    spectrum of ``L^-1 q L^-*``.
    """
    sq = np.zeros(stacks[0].shape[0] - 1)
    for f, st in zip(algebra.trace_factors, stacks):
        low = np.linalg.cholesky(st[:-1])
        x = np.linalg.solve(low, st[1:])
        c = np.linalg.solve(low, np.conj(np.swapaxes(x, -1, -2)))
        c = (c + np.conj(np.swapaxes(c, -1, -2))) / 2
        sq += f * np.sum(np.log(np.linalg.eigvalsh(c)) ** 2, axis=-1)
    return math.fsum(np.sqrt(sq))


def _batched_dist2(r_invsqrt, factors, basis_stacks, coeffs: np.ndarray) -> np.ndarray:
    """``dist(r, e^{sum c_i h_i})^2`` for each row of ``coeffs``."""
    total = np.zeros(coeffs.shape[0])
    for f, ri, hs in zip(factors, r_invsqrt, basis_stacks):
        x = np.einsum("mk,kij->mij", coeffs, hs)
        lam, u = np.linalg.eigh(x)
        ex = np.einsum("mij,mj,mkj->mik", u, np.exp(lam), u.conj())
        c = ri @ ex @ ri
        mu = np.linalg.eigvalsh((c + np.conj(np.swapaxes(c, -1, -2))) / 2)
        total += f * np.sum(np.log(mu) ** 2, axis=-1)
    return total


def projection_bruteforce(basis: Sequence[HermitianElement], r: PositiveElement, radius: float = 3.0,
                          rounds: int = 6, points: int = 9, polish_cycles: int = 60,
                          polish_tol: float = 1e-11) -> PositiveElement:
    """Minimize ``dist(r, e^{sum c_i h_i})`` over coefficients ``c`` by brute force.

    A ``points**k`` grid of half-width ``radius`` around the origin is
    recentred on its best point and shrunk by 3 for ``rounds`` rounds; then
    cyclic coordinate descent (golden-section line searches) polishes the
    coefficients.

    Parameters
    ----------
    basis : sequence of HermitianElement
        At most four spanning elements of ``H``.
    """
    k = len(basis)
    if k > MAX_BRUTEFORCE_DIM:
        raise ValueError(f"brute force is limited to {MAX_BRUTEFORCE_DIM} dimensions, got {k}")
    alg = r.algebra
    r_is = []
    for rb in r.blocks:
        lam, u = np.linalg.eigh(rb)
        r_is.append((u / np.sqrt(lam)) @ u.conj().T)
    stacks = [np.array([b.blocks[i] for b in basis]) for i in range(alg.n_blocks)]
    factors = alg.trace_factors

    def obj(c):
        return _batched_dist2(r_is, factors, stacks, np.atleast_2d(c))

    center = np.zeros(k)
    rad = radius
    offsets = np.linspace(-1.0, 1.0, points)
    mesh = np.array(np.meshgrid(*([offsets] * k), indexing="ij")).reshape(k, -1).T
    for _ in range(rounds):
        cand = center + rad * mesh
        vals = obj(cand)
        center = cand[int(np.argmin(vals))]
        rad /= 3.0

    step = 2.0 * rad * 3.0 / (points - 1)
    best = float(obj(center)[0])
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    for _ in range(polish_cycles):
        before = center.copy()
        for i in range(k):
            lo, hi = center[i] - step, center[i] + step

            def g(s):
                c = center.copy()
                c[i] = s
                return float(obj(c)[0])

            a_, b_ = lo, hi
            x1 = b_ - invphi * (b_ - a_)
            x2 = a_ + invphi * (b_ - a_)
            f1, f2 = g(x1), g(x2)
            while b_ - a_ > polish_tol:
                if f1 < f2:
                    b_, x2, f2 = x2, x1, f1
                    x1 = b_ - invphi * (b_ - a_)
                    f1 = g(x1)
                else:
                    a_, x1, f1 = x1, x2, f2
                    x2 = a_ + invphi * (b_ - a_)
                    f2 = g(x2)
            s = (a_ + b_) / 2
            val = g(s)
            if val <= best:
                center[i], best = s, val
        move = float(np.max(np.abs(center - before)))
        step = max(4.0 * move, 1e-9)
        if move <= polish_tol:
            break

    blocks = []
    for hs in stacks:
        x = np.einsum("k,kij->ij", center, hs)
        lam, u = np.linalg.eigh((x + x.conj().T) / 2)
        blocks.append((u * np.exp(lam)) @ u.conj().T)
    return PositiveElement(HermitianElement(alg, blocks))


def jacobi_exact(x: HermitianElement, K0: HermitianElement, Kdot0: HermitianElement, t: float) -> HermitianElement:
    """Closed-form solution of ``4 K'' = [x, [x, K]]``.

    In the eigenbasis of ``x`` the equation decouples into
    ``K_ij'' = w_ij^2 K_ij`` with ``w_ij = (l_i - l_j)/2``.
    """
    out = []
    for xb, k0, k1 in zip(x.blocks, K0.blocks, Kdot0.blocks):
        lam, u = np.linalg.eigh(xb)
        w = (lam[:, None] - lam[None, :]) / 2
        a0 = u.conj().T @ k0 @ u
        a1 = u.conj().T @ k1 @ u
        wt = w * t
        small = np.abs(wt) < 1e-8
        sinh_over = np.where(small, t * (1.0 + wt * wt / 6.0), np.sinh(wt) / np.where(small, 1.0, w))
        out.append(u @ (a0 * np.cosh(wt) + a1 * sinh_over) @ u.conj().T)
    return HermitianElement(x.algebra, out)
