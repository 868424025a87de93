"""Randomized property checks behind ``poscone verify``.

Each check draws one random instance from its own generator, seeded by
``(seed + instance index, crc32(check name))``, and returns a mapping from
property name to a violation. A property passes when its largest violation is
at most ``tolerance * tol_scale``.

Trial counts are per dimension. Checks whose instances are expensive carry a
cap; the report records how many instances actually ran.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import geometry as geo
from . import oracles
from .algebra import (
    AlgebraElement,
    HermitianElement,
    PositiveElement,
    TracialAlgebra,
    commutator,
    divided_difference_apply,
    eig_hermitian,
    expm,
    fun_hermitian,
    inner2,
    logm,
    norm2,
    random_hermitian,
    random_invertible,
    random_positive,
    random_tangent,
    random_unitary,
    trace,
)
from .convexity import (
    ConvexSubmanifold,
    TangentProjector,
    check_double_bracket,
    conditional_expectation,
    falsification_scan,
    membership_residual,
    orthonormalize,
    project_subspace,
    standard_subspace,
)
from .oracles import OracleReport
from .projection import factor_iwasawa, factor_masa, factor_symmetric, project

__all__ = ["SUITES", "CHECKS", "Check", "VerifyReport", "run_check", "run_suite"]

SCHEMA_VERSION = 1
SUITES = ("emi", "geodesic", "jacobi", "convexity", "projection")


@dataclass(frozen=True)
class Check:
    """A random-instance generator feeding one or more properties."""

    name: str
    suite: str
    tolerances: Dict[str, float]
    fn: Callable[[np.random.Generator, TracialAlgebra], Dict[str, float]]
    cap: Optional[int] = None
    two_block: bool = True


@dataclass
class VerifyReport:
    suite: str
    seed: int
    dims: List[int]
    trials: int
    tol_scale: float
    properties: List[OracleReport]

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.properties)

    def to_dict(self) -> dict:
        props = []
        for p in self.properties:
            d = p.to_dict()
            if not math.isfinite(d["max_violation"]):
                d["max_violation"] = None
            props.append(d)
        return {
            "schema": SCHEMA_VERSION,
            "suite": self.suite,
            "seed": self.seed,
            "dims": list(self.dims),
            "trials": self.trials,
            "tol_scale": self.tol_scale,
            "passed": self.passed,
            "properties": props,
        }


def algebra_for(d: int, j: int, two_block: bool = True) -> TracialAlgebra:
    """``M_d``, except every fourth instance uses ``M_d + M_2`` with weights 0.6/0.4."""
    if two_block and j % 4 == 3:
        return TracialAlgebra.from_blocks([(d, 0.6), (2, 0.4)])
    return TracialAlgebra.matrix(d)


def _rel(x: AlgebraElement, ref: AlgebraElement) -> float:
    return norm2(x - ref) / max(norm2(ref), 1e-300)


def _general(alg: TracialAlgebra, rng) -> AlgebraElement:
    a = random_hermitian(alg, 1.0, rng)
    b = random_hermitian(alg, 1.0, rng)
    return AlgebraElement(alg, [x + 1j * y for x, y in zip(a.blocks, b.blocks)])


# ---------------------------------------------------------------------------
# spectral calculus and the exponential


def _spectral(rng, alg):
    x, y = _general(alg, rng), _general(alg, rng)
    cyc = abs(trace(x @ y) - trace(y @ x)) / (norm2(x) * norm2(y))

    h = random_tangent(alg, rng, 2.0)
    back = fun_hermitian(fun_hermitian(h, np.exp), np.log)
    roundtrip = norm2(back - h) / (1.0 + norm2(h))

    lap = eig_hermitian(h, "lapack")
    jac = eig_hermitian(h, "jacobi")
    eig = max(float(np.max(np.abs(np.sort(a) - np.sort(b)))) for a, b in zip(lap.eigenvalues, jac.eigenvalues))
    eig = max(eig, jac.reconstruction_residual(h)) / (1.0 + norm2(h))

    a = random_positive(alg, rng, 2.0)
    k = random_hermitian(alg, 1.0, rng)
    dd = divided_difference_apply("log", a, k)
    fd = oracles.finite_difference_derivative(lambda s: logm(a + k * s), 0.0, 1e-5)
    log_fd = _rel(dd, fd)

    vals = rng.uniform(-2.0, 2.0, alg.size)
    dx = alg.diag(vals)
    dy = alg.diag(rng.standard_normal(alg.size))
    prod = expm(dx) @ dy
    commuting = _rel(divided_difference_apply("exp", dx, dy), prod)
    return {
        "spectral.trace_cyclicity": cyc,
        "spectral.exp_log_roundtrip": roundtrip,
        "spectral.jacobi_vs_lapack": eig,
        "spectral.log_divided_difference": log_fd,
        "spectral.commuting_product_rule": commuting,
    }


def _emi(rng, alg):
    x = random_tangent(alg, rng, 2.0)
    y = random_tangent(alg, rng, 2.0)
    return {"emi.slack": -geo.emi_slack(x, y)}


def _dexp(rng, alg):
    x = random_tangent(alg, rng, 2.0)
    y = random_tangent(alg, rng, 2.0)
    d = geo.dexp(x, y)
    quad = oracles.dexp_quadrature(x, y, 200)
    fd = oracles.finite_difference_derivative(lambda s: expm(x + y * s), 0.0, 1e-5)
    e8 = _rel(oracles.dexp_quadrature(x, y, 8), d)
    e16 = _rel(oracles.dexp_quadrature(x, y, 16), d)
    return {
        "dexp.quadrature": _rel(d, quad),
        "dexp.finite_difference": _rel(d, fd),
        # doubling the panel count must cut the error by 8 until the floor
        "dexp.quadrature_convergence": e16 - e8 / 8.0,
    }


def _inner(rng, alg):
    a = random_positive(alg, rng, 2.0)
    b = random_positive(alg, rng, 2.0)
    integral = oracles.inner_integral_quadrature(a, b, 200)
    return {"emi.inner_inequality": -geo.inner_inequality_slack(a, b, integral)}


def _t_operator(rng, alg):
    x = random_tangent(alg, rng, 2.0)
    y = random_tangent(alg, rng, 2.0)
    z = random_tangent(alg, rng, 2.0)
    ty, tz = geo.t_operator(x, y), geo.t_operator(x, z)
    scale = max(1.0, norm2(ty) * norm2(z) + norm2(y) * norm2(tz))
    sym = abs(inner2(ty, z) - inner2(y, tz)) / scale
    contr = norm2(geo.t_operator_inverse(x, z)) - norm2(z)
    e = expm(x * -0.5)
    quad = (e @ oracles.dexp_quadrature(x, y, 200) @ e).hermitian_part()
    return {
        "t_operator.symmetry": sym,
        "t_operator.inverse_contractive": contr,
        "t_operator.sinh_vs_quadrature": _rel(ty, quad),
    }


# ---------------------------------------------------------------------------
# geodesics and distance


def _geodesic(rng, alg):
    a = random_positive(alg, rng, 2.0)
    b = random_positive(alg, rng, 2.0)
    d = geo.dist(a, b)
    g = geo.geodesic(a, b)
    m = g(0.5)
    mid = max(abs(geo.dist(a, m) - d / 2), abs(geo.dist(m, b) - d / 2))
    speeds = [g.speed(t) for t in np.linspace(0.0, 1.0, 11)]
    const = max(speeds) - min(speeds)
    via_exp = geo.exp_map(a, geo.log_map(a, b))
    prod = geo.exp_map_product(a, geo.log_map(a, b))
    sigma = geo.geodesic_symmetry(a, b)
    refl = max(abs(geo.dist(a, sigma) - d) / (1.0 + d), _rel(geo.geodesic(b, sigma)(0.5), a))
    return {
        "geodesic.midpoint": mid,
        "geodesic.constant_speed": const,
        "geodesic.length_vs_oracle": abs(g.length - oracles.oracle_dist(a, b)),
        "geodesic.exp_log_inverse": _rel(via_exp, b),
        "geodesic.exp_product_form": _rel(prod, via_exp),
        "geodesic.symmetry_reflects": refl,
    }


def _perturbed_curve(a: PositiveElement, b: PositiveElement, h: HermitianElement, eps: float, freq: int):
    """``t -> g(t) e^{eps bump(t) h} g(t)*`` where ``g(t) g(t)* `` is the geodesic."""
    g = geo.geodesic(a, b)
    half = a.sqrt
    spec = g.generator.eig
    hspec = h.eig

    def curve(ts):
        bump = np.sin(np.pi * ts) ** 2 * np.sin(np.pi * freq * ts)
        stacks = []
        for s, lam, u, nu, v in zip(half.blocks, spec.eigenvalues, spec.eigenvectors,
                                    hspec.eigenvalues, hspec.eigenvectors):
            gt = np.einsum("ij,jk,tk->tik", s, u, np.exp(ts[:, None] * lam[None, :] / 2))
            e = np.einsum("ij,tj,kj->tik", v, np.exp(eps * bump[:, None] * nu[None, :]), v.conj())
            stacks.append(gt @ e @ np.conj(np.swapaxes(gt, -1, -2)))
        return a.algebra, stacks

    return curve


def _minimality(rng, alg):
    a = random_positive(alg, rng, 2.0)
    b = random_positive(alg, rng, 2.0)
    d = oracles.oracle_dist(a, b)
    worst = -math.inf
    for _ in range(20):
        h = random_tangent(alg, rng, 1.0)
        eps = float(rng.uniform(0.05, 0.5))
        freq = int(rng.integers(1, 4))
        length = oracles.path_length_sampler(_perturbed_curve(a, b, h, eps, freq), 200, vectorized=True)
        worst = max(worst, d - length)
    return {"geodesic.minimality": worst}


def _distance(rng, alg):
    a = random_positive(alg, rng, 2.0)
    b = random_positive(alg, rng, 2.0)
    g = random_invertible(alg, rng, 1.0)
    inv = abs(geo.dist(geo.congruence(g, a), geo.congruence(g, b)) - geo.dist(a, b))
    x = random_tangent(alg, rng, 2.0)
    y = random_tangent(alg, rng, 2.0)
    c = random_positive(alg, rng, 2.0)
    tri = geo.triangle_report(a, b, c)
    lsq = max(s * s for s in tri.sides)
    return {
        "distance.congruence_invariance": inv,
        "distance.lower_bound": -geo.lower_bound_slack(x, y),
        "distance.angle_sum": tri.angle_sum - math.pi,
        "distance.law_of_cosines": -min(tri.comparison_slack()) / (1.0 + lsq),
        "distance.triangle_inequality": tri.sides[0] - tri.sides[1] - tri.sides[2],
    }


def _distance_convexity(rng, alg):
    g1 = geo.geodesic(random_positive(alg, rng, 2.0), random_positive(alg, rng, 2.0))
    g2 = geo.geodesic(random_positive(alg, rng, 2.0), random_positive(alg, rng, 2.0))
    f = np.array([d for _, d in geo.convexity_profile(g1, g2, np.linspace(0.0, 1.0, 33))])
    return {"distance.geodesic_convexity": float(np.max(f[1:-1] - (f[:-2] + f[2:]) / 2))}


# ---------------------------------------------------------------------------
# curvature and Jacobi fields


def _curvature(rng, alg):
    a = random_positive(alg, rng, 2.0)
    x = random_tangent(alg, rng, 2.0)
    y = random_tangent(alg, rng, 2.0)
    k = geo.sectional(a, x, y)
    bx, by = geo.whiten(a, x), geo.whiten(a, y)
    # [X, Y] is skew-Hermitian; its 2-norm squared is tau([X,Y]*[X,Y])
    expect = -0.25 * norm2(commutator(bx, by)) ** 2
    return {
        "curvature.sectional_nonpositive": k,
        "curvature.sectional_formula": abs(k - expect) / (1.0 + abs(expect)),
    }


def _jacobi(rng, alg):
    x = random_tangent(alg, rng, 2.0)
    k0 = random_tangent(alg, rng, 1.0)
    k1 = random_tangent(alg, rng, 1.0)
    sol = geo.jacobi_integrate(x, k0, k1, 1.0, 1e-3)
    exact = oracles.jacobi_exact(x, k0, k1, 1.0)
    scale = max(1.0, norm2(exact))

    # halving a coarse step must cut the global error by >= 8 (RK4: 16)
    def err(step):
        return norm2(geo.jacobi_integrate(x, k0, k1, 1.0, step).K_values[-1] - exact) / scale

    e1, e2 = err(0.2), err(0.1)
    halving = 0.0 if e2 < 1e-13 else max(0.0, 8.0 - e1 / e2)
    return {
        "jacobi.ode_residual": sol.ode_residual(),
        "jacobi.exact_agreement": norm2(sol.K_values[-1] - exact) / scale,
        "jacobi.step_halving": halving,
        "jacobi.norm_convexity": sol.convexity_defect(),
        "jacobi.k_kddot": -float(np.min(sol.kkddot())),
    }


# ---------------------------------------------------------------------------
# exponential sets


def _random_partition(rng, alg: TracialAlgebra) -> list:
    groups = []
    offset = 0
    for d in alg.dims:
        idx = list(range(offset + 1, offset + d + 1))
        cuts = sorted(rng.choice(np.arange(1, d), size=min(d - 1, int(rng.integers(0, d))),
                                 replace=False).tolist()) if d > 1 else []
        bounds = [0] + cuts + [d]
        groups += [idx[lo:hi] for lo, hi in zip(bounds[:-1], bounds[1:])]
        offset += d
    return groups


def _real_symmetric(alg: TracialAlgebra) -> list:
    gens = []
    for bi, d in enumerate(alg.dims):
        for i in range(d):
            for j in range(i, d):
                blocks = [np.zeros((dd, dd)) for dd in alg.dims]
                blocks[bi][i, j] = blocks[bi][j, i] = 1.0
                gens.append(HermitianElement(alg, blocks))
    return gens


_KINDS = ("diagonal", "block_diagonal", "full", "single_generator", "real_symmetric")


def random_submanifold(rng, alg: TracialAlgebra, kind: str) -> ConvexSubmanifold:
    """A closed exponential set of the given kind; ``real_symmetric`` is certified by the check."""
    if kind == "block_diagonal":
        return ConvexSubmanifold.standard(alg, kind, partition=_random_partition(rng, alg))
    if kind == "single_generator":
        return ConvexSubmanifold.standard(alg, kind, x=random_tangent(alg, rng, 1.0))
    if kind == "real_symmetric":
        return ConvexSubmanifold.certify(orthonormalize(_real_symmetric(alg)))
    return ConvexSubmanifold.standard(alg, kind)


def _closure(rng, alg):
    worst = 0.0
    for kind in ("diagonal", "block_diagonal", "full", "single_generator"):
        if kind == "block_diagonal":
            H = standard_subspace(alg, kind, partition=_random_partition(rng, alg))
        elif kind == "single_generator":
            H = standard_subspace(alg, kind, x=random_tangent(alg, rng, 1.0))
        else:
            H = standard_subspace(alg, kind)
        w = check_double_bracket(H)
        worst = max(worst, 0.0 if w is None else w.residual)
    return {"closure.standard_kinds_pass": worst}


def _failing_span(alg: TracialAlgebra) -> list:
    """``span{E11, E12 + E21}`` in the first block."""
    d = alg.dims[0]
    e11 = [np.zeros((dd, dd)) for dd in alg.dims]
    e11[0][0, 0] = 1.0
    sx = [np.zeros((dd, dd)) for dd in alg.dims]
    sx[0][0, 1] = sx[0][1, 0] = 1.0
    return [HermitianElement(alg, e11), HermitianElement(alg, sx)] if d >= 2 else []


def _witness(rng, alg):
    gens = _failing_span(alg)
    H = orthonormalize(gens)
    w = check_double_bracket(H)
    found = 0.0 if (w is not None and w.residual > 1e-6) else 1.0
    M = ConvexSubmanifold(H, False)
    scan = falsification_scan(M, gens[0], gens[1])
    return {"closure.witness_found": found, "closure.falsification_found": 0.0 if scan else 1.0}


def _membership(rng, alg):
    kind = _KINDS[int(rng.integers(len(_KINDS)))]
    M = random_submanifold(rng, alg, kind)
    a = M.random_point(rng, 2.0)
    b = M.random_point(rng, 2.0)
    aba = PositiveElement((a @ b @ a).hermitian_part())
    g = geo.geodesic(a, b)
    geod = max(membership_residual(M, g(t)) for t in (-1.0, 0.5, 2.0))
    sym = membership_residual(M, geo.geodesic_symmetry(a, b))
    powers = max(membership_residual(M, a.power(al)) for al in (-1.0, 0.5, 3.0))
    return {
        "convex.aba_membership": membership_residual(M, aba),
        "convex.geodesic_membership": geod,
        "convex.symmetry_membership": sym,
        "convex.power_membership": powers,
    }


def _conditional(rng, alg):
    H = standard_subspace(alg, "block_diagonal", partition=_random_partition(rng, alg))
    x = _general(alg, rng)
    px = conditional_expectation(H, x)
    h1 = conditional_expectation(H, _general(alg, rng))
    h2 = conditional_expectation(H, _general(alg, rng))
    scale = 1.0 + norm2(h1) * norm2(x) * norm2(h2)
    bimod = norm2(conditional_expectation(H, h1 @ x @ h2) - h1 @ px @ h2) / scale
    tr = abs(trace(px) - trace(x)) / (1.0 + norm2(x))
    return {"convex.conditional_trace": tr, "convex.conditional_bimodule": bimod}


def _tangent_projector(rng, alg):
    kind = _KINDS[int(rng.integers(len(_KINDS)))]
    M = random_submanifold(rng, alg, kind)
    p = M.random_point(rng, 2.0)
    Q = TangentProjector(M, p)
    u = random_tangent(alg, rng, 1.0)
    v = random_tangent(alg, rng, 1.0)
    qu, qv = Q(u), Q(v)
    idem = geo.metric_norm(p, Q(qu) - qu)
    sym = abs(geo.metric_inner(p, qu, v) - geo.metric_inner(p, u, qv))
    return {"convex.tangent_projector": max(idem, sym) / (1.0 + geo.metric_norm(p, u))}


# ---------------------------------------------------------------------------
# projection and factorizations


def _projection(rng, alg, kind: Optional[str] = None):
    if kind is None:
        kind = _KINDS[int(rng.integers(len(_KINDS)))]
    M = random_submanifold(rng, alg, kind)
    r = random_positive(alg, rng, 2.0)
    s = random_positive(alg, rng, 2.0)
    res = project(M, r)
    p, d = res.foot, res.distance
    again = project(M, p).foot
    out = {
        "projection.orthogonality": res.residual / (1.0 + d),
        "projection.idempotence": geo.dist(again, p),
        "projection.contractivity": -(geo.dist(r, s) - geo.dist(p, project(M, s).foot)),
    }
    first = 0.0
    pyth = -math.inf
    for _ in range(4):
        h = M.subspace.from_coordinates(rng.standard_normal(M.subspace.dimension))
        h = h * (1.0 / max(norm2(h), 1e-300))
        g = geo.Geodesic(p, h)
        step = 1e-5

        def phi(t):
            return geo.dist(r, g(t)) ** 2

        first = max(first, abs(phi(step) - phi(-step)) / (2 * step))
        q = g(float(rng.uniform(-2.0, 2.0)))
        pyth = max(pyth, geo.dist(q, p) ** 2 + d * d - geo.dist(q, r) ** 2)
    out["projection.first_variation"] = first
    out["projection.pythagoras"] = pyth
    return out


def _uniqueness(rng, alg):
    kind = _KINDS[int(rng.integers(len(_KINDS)))]
    M = random_submanifold(rng, alg, kind)
    r = random_positive(alg, rng, 2.0)
    ref = project(M, r).foot
    spread = max(geo.dist(project(M, r, init=M.random_point(rng, 3.0)).foot, ref) for _ in range(5))
    return {"projection.multistart_uniqueness": spread}


def _small_submanifold(rng, alg: TracialAlgebra) -> ConvexSubmanifold:
    """A closed set of dimension at most four for the brute-force oracle."""
    n = alg.size
    choice = int(rng.integers(3))
    if choice == 0 and alg.dims == (2,):
        return ConvexSubmanifold.certify(orthonormalize(_real_symmetric(alg)))
    if choice == 1:
        return ConvexSubmanifold.standard(alg, "single_generator", x=random_tangent(alg, rng, 1.0))
    # span of the indicator projections of at most four consecutive index groups
    k = min(n, 4)
    cuts = np.sort(rng.choice(np.arange(1, n), size=k - 1, replace=False)) if k > 1 else np.array([], int)
    bounds = [0] + cuts.tolist() + [n]
    gens = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        v = np.zeros(n)
        v[lo:hi] = 1.0
        gens.append(alg.diag(v))
    return ConvexSubmanifold.certify(orthonormalize(gens))


def _projection_oracle(rng, alg):
    M = _small_submanifold(rng, alg)
    r = random_positive(alg, rng, 2.0)
    foot = project(M, r).foot
    brute = oracles.projection_bruteforce(M.subspace.basis, r)
    return {"projection.oracle_agreement": abs(oracles.oracle_dist(r, brute) - oracles.oracle_dist(r, foot))}


def _factor(rng, alg):
    kind = _KINDS[int(rng.integers(len(_KINDS)))]
    M = random_submanifold(rng, alg, kind)
    H = M.subspace
    z = random_tangent(alg, rng, 2.0)
    f = factor_symmetric(M, z)
    init = M.random_point(rng, 1.0)
    f2 = factor_symmetric(M, z, init=init)
    unique = max(norm2(f2.y - f.y), norm2(f2.w - f.w))

    d, v, fm = factor_masa(alg, z)
    masa_diag = max(float(np.max(np.abs(np.diag(b)))) for b in v.blocks)
    masa_offdiag = max(float(np.max(np.abs(b - np.diag(np.diag(b))))) for b in d.blocks)

    g = random_invertible(alg, rng, 1.0)
    iw = factor_iwasawa(M, g)
    iw_split = max(norm2(iw.x - project_subspace(H, iw.x)), norm2(project_subspace(H, iw.y)))

    # trivial cases
    zin = H.from_coordinates(rng.standard_normal(H.dimension))
    zin = zin * (float(rng.uniform(0.1, 2.0)) / max(norm2(zin), 1e-300))
    t1 = factor_symmetric(M, zin)
    zperp = z - project_subspace(H, z)
    t2 = factor_symmetric(M, zperp)
    u = random_unitary(alg, rng)
    t3 = factor_iwasawa(M, u)
    trivial = max(norm2(t1.y - zin * 0.5), norm2(t1.w),
                  norm2(t2.y), norm2(t2.w - zperp),
                  norm2(t3.x), norm2(t3.y), norm2(t3.u - u))
    return {
        "factor.symmetric_reconstruction": f.residual,
        "factor.symmetric_orthogonality": f.orthogonality,
        "factor.symmetric_uniqueness": unique,
        "factor.masa_reconstruction": fm.residual,
        "factor.masa_orthogonality": max(masa_diag, masa_offdiag),
        "factor.iwasawa_reconstruction": iw.residual,
        "factor.iwasawa_unitarity": max(iw.unitarity, iw_split),
        "factor.trivial_cases": trivial,
    }


CHECKS: List[Check] = [
    Check("spectral", "emi", {
        "spectral.trace_cyclicity": 1e-12,
        "spectral.exp_log_roundtrip": 1e-10,
        "spectral.jacobi_vs_lapack": 1e-12,
        "spectral.log_divided_difference": 1e-6,
        "spectral.commuting_product_rule": 1e-12,
    }, _spectral),
    Check("emi", "emi", {"emi.slack": 1e-10}, _emi),
    Check("dexp", "emi", {
        "dexp.quadrature": 1e-8,
        "dexp.finite_difference": 1e-6,
        "dexp.quadrature_convergence": 1e-12,
    }, _dexp),
    Check("inner", "emi", {"emi.inner_inequality": 1e-10}, _inner),
    Check("t_operator", "emi", {
        "t_operator.symmetry": 1e-10,
        "t_operator.inverse_contractive": 1e-10,
        "t_operator.sinh_vs_quadrature": 1e-8,
    }, _t_operator),
    Check("geodesic", "geodesic", {
        "geodesic.midpoint": 1e-9,
        "geodesic.constant_speed": 1e-9,
        "geodesic.length_vs_oracle": 1e-10,
        "geodesic.exp_log_inverse": 1e-10,
        "geodesic.exp_product_form": 1e-10,
        "geodesic.symmetry_reflects": 1e-9,
    }, _geodesic),
    Check("minimality", "geodesic", {"geodesic.minimality": 1e-6}, _minimality, cap=20),
    Check("distance", "geodesic", {
        "distance.congruence_invariance": 1e-10,
        "distance.lower_bound": 1e-10,
        "distance.angle_sum": 1e-9,
        "distance.law_of_cosines": 1e-9,
        "distance.triangle_inequality": 1e-10,
    }, _distance),
    Check("distance_convexity", "geodesic", {"distance.geodesic_convexity": 1e-9},
          _distance_convexity, cap=40),
    Check("curvature", "jacobi", {
        "curvature.sectional_nonpositive": 1e-12,
        "curvature.sectional_formula": 1e-10,
    }, _curvature),
    Check("jacobi", "jacobi", {
        "jacobi.ode_residual": 1e-6,
        "jacobi.exact_agreement": 1e-9,
        "jacobi.step_halving": 0.0,
        "jacobi.norm_convexity": 1e-9,
        "jacobi.k_kddot": 1e-10,
    }, _jacobi, cap=5),
    Check("closure", "convexity", {"closure.standard_kinds_pass": 1e-9}, _closure, cap=10),
    Check("witness", "convexity", {
        "closure.witness_found": 0.0,
        "closure.falsification_found": 0.0,
    }, _witness, cap=1, two_block=False),
    Check("membership", "convexity", {
        "convex.aba_membership": 1e-8,
        "convex.geodesic_membership": 1e-8,
        "convex.symmetry_membership": 1e-8,
        "convex.power_membership": 1e-8,
    }, _membership, cap=100),
    Check("conditional", "convexity", {
        "convex.conditional_trace": 1e-10,
        "convex.conditional_bimodule": 1e-10,
    }, _conditional),
    Check("tangent", "convexity", {"convex.tangent_projector": 1e-10}, _tangent_projector, cap=100),
    Check("projection", "projection", {
        "projection.orthogonality": 1e-10,
        "projection.idempotence": 1e-9,
        "projection.contractivity": 1e-8,
        "projection.first_variation": 1e-7,
        "projection.pythagoras": 1e-7,
    }, _projection, cap=50),
    Check("uniqueness", "projection", {"projection.multistart_uniqueness": 1e-7}, _uniqueness, cap=10),
    Check("projection_oracle", "projection", {"projection.oracle_agreement": 1e-6},
          _projection_oracle, cap=5),
    Check("factor", "projection", {
        "factor.symmetric_reconstruction": 1e-8,
        "factor.symmetric_orthogonality": 1e-9,
        "factor.symmetric_uniqueness": 1e-7,
        "factor.masa_reconstruction": 1e-8,
        "factor.masa_orthogonality": 1e-9,
        "factor.iwasawa_reconstruction": 1e-8,
        "factor.iwasawa_unitarity": 1e-9,
        "factor.trivial_cases": 1e-10,
    }, _factor, cap=30),
]


def instance_rng(check_name: str, seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed + index, zlib.crc32(check_name.encode())])


def run_check(check: Check, dims: Sequence[int], trials: int, seed: int,
              tol_scale: float = 1.0, cap: Optional[bool] = True) -> List[OracleReport]:
    """Run ``trials`` instances per dimension (capped unless ``cap`` is False).

    An exception inside an instance counts as an infinite violation for every
    property of the check.
    """
    per_dim = trials if (not cap or check.cap is None) else min(trials, check.cap)
    viol: Dict[str, list] = {k: [] for k in check.tolerances}
    seeds: list = []
    index = 0
    for d in dims:
        for j in range(per_dim):
            alg = algebra_for(d, j, check.two_block)
            try:
                out = check.fn(instance_rng(check.name, seed, index), alg)
            except Exception:  # recorded as a failure, not raised
                out = {k: math.inf for k in check.tolerances}
            for k in check.tolerances:
                viol[k].append(out[k])
            seeds.append(seed + index)
            index += 1
    return [OracleReport.from_violations(k, viol[k], tol * tol_scale, seeds)
            for k, tol in check.tolerances.items()]


def run_suite(suite: str, dims: Sequence[int], trials: int, seed: int,
              tol_scale: float = 1.0) -> VerifyReport:
    if suite != "all" and suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    if trials < 0:
        raise ValueError("trials must be non-negative")
    if any(d < 2 for d in dims):
        raise ValueError("dimensions must be at least 2")
    props: List[OracleReport] = []
    for check in CHECKS:
        if suite == "all" or check.suite == suite:
            props.extend(run_check(check, dims, trials, seed, tol_scale))
    return VerifyReport(suite, seed, list(dims), trials, tol_scale, props)
