"""Finite tracial matrix algebras and spectral calculus on their Hermitian parts.

An algebra is a direct sum of full complex matrix blocks ``M_{d_1} + ... + M_{d_k}``
carrying the faithful tracial state

    tau(a) = sum_i w_i * tr(a_i) / d_i,      w_i > 0,  sum_i w_i = 1.

Elements are immutable: every block is stored as a read-only ``complex128``
array, so derived quantities (eigendecompositions, square roots) can be cached
on the instance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

__all__ = [
    "TracialAlgebra",
    "AlgebraElement",
    "HermitianElement",
    "PositiveElement",
    "SpectralDecomposition",
    "AlgebraMismatchError",
    "NotPositiveError",
    "EigenConvergenceError",
    "DEFAULT_FLOOR",
    "trace",
    "inner2",
    "norm2",
    "commutator",
    "eig_hermitian",
    "jacobi_eigh",
    "fun_hermitian",
    "expm",
    "logm",
    "sqrtm",
    "invsqrtm",
    "powm",
    "divided_difference_apply",
    "exp_divided_differences",
    "is_positive",
    "as_rng",
    "random_hermitian",
    "random_tangent",
    "random_positive",
    "random_unitary",
    "random_invertible",
    "element_to_dict",
    "element_from_dict",
]

DEFAULT_FLOOR = 1e-12
_WEIGHT_SUM_TOL = 1e-12
_JACOBI_MAX_SWEEPS = 100
_JACOBI_TOL = 1e-14
_COINCIDENCE_RTOL = 1e-7


class AlgebraMismatchError(ValueError):
    """Operands live in different algebras or have the wrong block shapes."""


class NotPositiveError(ValueError):
    """An element expected to be positive invertible is not."""


class EigenConvergenceError(ArithmeticError):
    """The Jacobi eigensolver hit its sweep cap."""


@dataclass(frozen=True)
class TracialAlgebra:
    """Direct sum of matrix blocks with a weighted normalized trace.

    Parameters
    ----------
    dims : tuple of int
        Block sizes ``d_i``.
    weights : tuple of float
        Strictly positive block weights summing to one.
    """

    dims: tuple
    weights: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        weights = tuple(float(w) for w in self.weights)
        if not dims:
            raise ValueError("an algebra needs at least one block")
        if len(dims) != len(weights):
            raise ValueError("dims and weights must have equal length")
        if any(d < 1 for d in dims):
            raise ValueError(f"block dimensions must be positive, got {dims}")
        if any(not (w > 0 and math.isfinite(w)) for w in weights):
            raise ValueError(f"block weights must be positive, got {weights}")
        if abs(math.fsum(weights) - 1.0) > _WEIGHT_SUM_TOL:
            raise ValueError(f"block weights must sum to 1, got {math.fsum(weights)!r}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def matrix(cls, n: int) -> "TracialAlgebra":
        """Single block ``M_n`` with the normalized trace ``tr/n``."""
        return cls((n,), (1.0,))

    @classmethod
    def from_blocks(cls, blocks: Iterable) -> "TracialAlgebra":
        """Build from ``(dim, weight)`` pairs."""
        pairs = [tuple(b) for b in blocks]
        return cls(tuple(d for d, _ in pairs), tuple(w for _, w in pairs))

    @property
    def n_blocks(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        """Total matrix size ``sum d_i`` (rows of the block-diagonal realization)."""
        return sum(self.dims)

    @property
    def real_dim(self) -> int:
        """Real dimension of the Hermitian part, ``sum d_i**2``."""
        return sum(d * d for d in self.dims)

    @property
    def trace_factors(self) -> tuple:
        """Per-block multipliers ``w_i / d_i`` applied to the ordinary trace."""
        return tuple(w / d for d, w in zip(self.dims, self.weights))

    def identity(self) -> "PositiveElement":
        return PositiveElement(HermitianElement(self, [np.eye(d) for d in self.dims]))

    def zero(self) -> "HermitianElement":
        return HermitianElement(self, [np.zeros((d, d)) for d in self.dims])

    def scalar(self, c: float) -> "HermitianElement":
        return HermitianElement(self, [c * np.eye(d) for d in self.dims])

    def diag(self, values: Sequence[float]) -> "HermitianElement":
        """Diagonal Hermitian element from ``size`` real values, split across blocks."""
        values = np.asarray(values, dtype=float)
        if values.shape != (self.size,):
            raise AlgebraMismatchError(f"expected {self.size} diagonal values, got {values.shape}")
        out, k = [], 0
        for d in self.dims:
            out.append(np.diag(values[k:k + d]))
            k += d
        return HermitianElement(self, out)

    def to_dict(self) -> dict:
        return {"blocks": [{"dim": d, "weight": w} for d, w in zip(self.dims, self.weights)]}

    @classmethod
    def from_dict(cls, data: dict) -> "TracialAlgebra":
        return cls.from_blocks((b["dim"], b["weight"]) for b in data["blocks"])


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.flags.writeable = False
    return arr


class AlgebraElement:
    """An element of a :class:`TracialAlgebra`, one dense complex matrix per block.

    Supports ``+``, ``-``, scalar ``*`` and ``/``, and the algebra product ``@``.
    """

    def __init__(self, algebra: TracialAlgebra, blocks: Sequence):
        if len(blocks) != algebra.n_blocks:
            raise AlgebraMismatchError(
                f"expected {algebra.n_blocks} blocks, got {len(blocks)}")
        frozen = []
        for d, b in zip(algebra.dims, blocks):
            b = np.asarray(b)
            if b.shape != (d, d):
                raise AlgebraMismatchError(f"block of shape {b.shape} does not match dim {d}")
            if not np.all(np.isfinite(b)):
                raise ValueError("element entries must be finite")
            frozen.append(b)
        self.algebra = algebra
        self.blocks = tuple(_freeze(b) for b in self._prepare(frozen))

    def _prepare(self, blocks):
        return blocks

    @classmethod
    def _raw(cls, algebra, blocks):
        obj = cls.__new__(cls)
        obj.algebra = algebra
        obj.blocks = tuple(_freeze(b) for b in blocks)
        return obj

    def _check(self, other: "AlgebraElement"):
        if other.algebra != self.algebra:
            raise AlgebraMismatchError("operands belong to different algebras")

    def _result_cls(self, other=None):
        if isinstance(self, HermitianElement) and (other is None or isinstance(other, HermitianElement)):
            return HermitianElement
        return AlgebraElement

    def __add__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        self._check(other)
        return self._result_cls(other)._raw(
            self.algebra, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        self._check(other)
        return self._result_cls(other)._raw(
            self.algebra, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self):
        return self._result_cls()._raw(self.algebra, [-a for a in self.blocks])

    def __mul__(self, c):
        if isinstance(c, AlgebraElement):
            raise TypeError("use @ for the algebra product")
        c = complex(c) if np.iscomplexobj(c) else float(c)
        cls = self._result_cls() if isinstance(c, float) else AlgebraElement
        return cls._raw(self.algebra, [c * a for a in self.blocks])

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / c)

    def __matmul__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        self._check(other)
        return AlgebraElement._raw(self.algebra, [a @ b for a, b in zip(self.blocks, other.blocks)])

    def adjoint(self) -> "AlgebraElement":
        return self._result_cls()._raw(self.algebra, [a.conj().T for a in self.blocks])

    def hermitian_part(self) -> "HermitianElement":
        """``(a + a*) / 2``."""
        return HermitianElement(self.algebra, self.blocks)

    def inv(self) -> "AlgebraElement":
        return AlgebraElement._raw(self.algebra, [np.linalg.inv(a) for a in self.blocks])

    def to_dense(self) -> np.ndarray:
        """Block-diagonal matrix realization (ignores the trace weights)."""
        n = self.algebra.size
        out = np.zeros((n, n), dtype=np.complex128)
        k = 0
        for b in self.blocks:
            d = b.shape[0]
            out[k:k + d, k:k + d] = b
            k += d
        return out

    def allclose(self, other: "AlgebraElement", atol: float = 1e-10) -> bool:
        """True when ``||self - other||_2 <= atol``."""
        self._check(other)
        return norm2(self - other) <= atol

    def __repr__(self):
        return f"{type(self).__name__}(dims={self.algebra.dims})"


class HermitianElement(AlgebraElement):
    """Self-adjoint element; inputs are symmetrized as ``(x + x*) / 2``."""

    def _prepare(self, blocks):
        return [(b + b.conj().T) / 2 for b in blocks]

    @property
    def eig(self) -> "SpectralDecomposition":
        """Cached eigendecomposition."""
        cached = self.__dict__.get("_eig")
        if cached is None:
            cached = eig_hermitian(self)
            self.__dict__["_eig"] = cached
        return cached


class PositiveElement(HermitianElement):
    """A point of the positive cone, with a certified spectral floor.

    Construct from a :class:`HermitianElement` (or an algebra plus blocks).
    Raises :class:`NotPositiveError` when the smallest eigenvalue is below
    ``floor``.
    """

    def __init__(self, value, blocks=None, floor: float = DEFAULT_FLOOR):
        if blocks is not None:
            value = HermitianElement(value, blocks)
        if not isinstance(value, HermitianElement):
            raise TypeError("PositiveElement wraps a HermitianElement")
        self.algebra = value.algebra
        self.blocks = value.blocks
        spec = value.eig
        self.__dict__["_eig"] = spec
        lo = spec.min()
        if not lo >= floor:
            raise NotPositiveError(f"smallest eigenvalue {lo!r} is below the floor {floor!r}")
        self.spectral_floor = lo

    @property
    def value(self) -> HermitianElement:
        return HermitianElement._raw(self.algebra, self.blocks)

    def _cached(self, key, fn):
        out = self.__dict__.get(key)
        if out is None:
            out = fn()
            self.__dict__[key] = out
        return out

    @property
    def sqrt(self) -> "PositiveElement":
        return self._cached("_sqrt", lambda: _positive_from(self.eig, np.sqrt))

    @property
    def invsqrt(self) -> "PositiveElement":
        return self._cached("_invsqrt", lambda: _positive_from(self.eig, lambda v: 1.0 / np.sqrt(v)))

    @property
    def inverse(self) -> "PositiveElement":
        return self._cached("_inv", lambda: _positive_from(self.eig, lambda v: 1.0 / v))

    @property
    def log(self) -> HermitianElement:
        return self._cached("_log", lambda: self.eig.apply(np.log))

    def power(self, t: float) -> "PositiveElement":
        return _positive_from(self.eig, lambda v: v ** t)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Per-block ascending eigenvalues and unitary eigenvector matrices."""

    algebra: TracialAlgebra
    eigenvalues: tuple
    eigenvectors: tuple

    def min(self) -> float:
        return min(float(v[0]) for v in self.eigenvalues)

    def max(self) -> float:
        return max(float(v[-1]) for v in self.eigenvalues)

    def apply(self, f: Callable[[np.ndarray], np.ndarray]) -> HermitianElement:
        """``U f(Lambda) U*`` blockwise."""
        out = []
        for lam, u in zip(self.eigenvalues, self.eigenvectors):
            fl = np.asarray(f(lam))
            if not np.all(np.isfinite(fl)):
                raise ValueError("function is not finite on the spectrum")
            out.append((u * fl) @ u.conj().T)
        return HermitianElement(self.algebra, out)

    def reconstruction_residual(self, x: AlgebraElement) -> float:
        return norm2(self.apply(lambda v: v) - x)

    def unitarity_residual(self) -> float:
        return max(float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0]), 2))
                   for u in self.eigenvectors)


def _positive_from(spec: SpectralDecomposition, f) -> PositiveElement:
    """Positive element ``U f(Lambda) U*`` with its spectrum known in advance."""
    lams = tuple(np.asarray(f(v), dtype=float) for v in spec.eigenvalues)
    blocks = [(u * lv) @ u.conj().T for lv, u in zip(lams, spec.eigenvectors)]
    value = HermitianElement(spec.algebra, blocks)
    order = tuple(np.argsort(lv) for lv in lams)
    value.__dict__["_eig"] = SpectralDecomposition(
        spec.algebra,
        tuple(lv[o] for lv, o in zip(lams, order)),
        tuple(u[:, o] for u, o in zip(spec.eigenvectors, order)),
    )
    return PositiveElement(value)


# ---------------------------------------------------------------------------
# trace and inner product


def trace(a: AlgebraElement):
    """Weighted normalized trace; a float for Hermitian input, else complex."""
    t = sum(f * np.trace(b) for f, b in zip(a.algebra.trace_factors, a.blocks))
    if isinstance(a, HermitianElement):
        return float(np.real(t))
    return complex(t)


def inner2(x: HermitianElement, y: HermitianElement) -> float:
    """Trace inner product ``tau(x y)`` of two Hermitian elements."""
    x._check(y)
    # tau(x y) = sum_i f_i * sum_jk x_jk conj(y_jk) for Hermitian y
    s = 0.0
    for f, a, b in zip(x.algebra.trace_factors, x.blocks, y.blocks):
        s += f * float(np.vdot(b, a).real)
    return s


def norm2(a: AlgebraElement) -> float:
    """``tau(a* a) ** 0.5``."""
    s = 0.0
    for f, b in zip(a.algebra.trace_factors, a.blocks):
        s += f * float(np.vdot(b, b).real)
    return math.sqrt(s)


def commutator(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    return a @ b - b @ a


# ---------------------------------------------------------------------------
# eigensolvers


def _offdiag_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def jacobi_eigh(a: np.ndarray, tol: float = _JACOBI_TOL, max_sweeps: int = _JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi eigensolver for one complex Hermitian matrix.

    Returns ascending eigenvalues and the unitary eigenvector matrix.
    Raises :class:`EigenConvergenceError` after ``max_sweeps`` sweeps.
    """
    a = np.array(a, dtype=np.complex128)
    a = (a + a.conj().T) / 2
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = np.linalg.norm(a)
    if n == 1 or scale == 0.0:
        return np.real(np.diag(a)).copy(), v
    target = tol * scale
    for _ in range(max_sweeps):
        off = _offdiag_norm(a)
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = a[p, q]
                mag = abs(g)
                if mag <= 1e-300:
                    continue
                phase = g / mag
                app, aqq = a[p, p].real, a[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(1.0 + theta * theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ rot
                a[idx, :] = rot.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                v[:, idx] = v[:, idx] @ rot
    else:
        off = _offdiag_norm(a)
        if off > target:
            raise EigenConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
    lam = np.real(np.diag(a))
    order = np.argsort(lam, kind="stable")
    return lam[order], v[:, order]


def eig_hermitian(x: HermitianElement, method: str = "lapack") -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian element, eigenvalues ascending per block.

    ``method="lapack"`` uses ``numpy.linalg.eigh``; ``method="jacobi"`` uses the
    self-contained cyclic Jacobi solver :func:`jacobi_eigh`.
    """
    lams, vecs = [], []
    for b in x.blocks:
        if method == "lapack":
            lam, u = np.linalg.eigh(b)
        elif method == "jacobi":
            lam, u = jacobi_eigh(b)
        else:
            raise ValueError(f"unknown eigensolver {method!r}")
        lams.append(lam)
        vecs.append(u)
    return SpectralDecomposition(x.algebra, tuple(lams), tuple(vecs))


# ---------------------------------------------------------------------------
# spectral calculus


def fun_hermitian(x: HermitianElement, f: Callable[[np.ndarray], np.ndarray]) -> HermitianElement:
    """Apply a real scalar function through the spectral theorem."""
    return x.eig.apply(f)


def expm(x: HermitianElement) -> PositiveElement:
    return _positive_from(x.eig, np.exp)


def _require_positive_spectrum(x: HermitianElement, what: str):
    if x.eig.min() <= 0.0:
        raise NotPositiveError(f"{what} requires a positive spectrum, smallest eigenvalue is {x.eig.min()!r}")


def logm(a: HermitianElement) -> HermitianElement:
    if isinstance(a, PositiveElement):
        return a.log
    _require_positive_spectrum(a, "log")
    return a.eig.apply(np.log)


def sqrtm(a: HermitianElement) -> PositiveElement:
    if isinstance(a, PositiveElement):
        return a.sqrt
    _require_positive_spectrum(a, "sqrt")
    return _positive_from(a.eig, np.sqrt)


def invsqrtm(a: HermitianElement) -> PositiveElement:
    if isinstance(a, PositiveElement):
        return a.invsqrt
    _require_positive_spectrum(a, "inverse sqrt")
    return _positive_from(a.eig, lambda v: 1.0 / np.sqrt(v))


def powm(a: HermitianElement, t: float) -> PositiveElement:
    _require_positive_spectrum(a, "real power")
    return _positive_from(a.eig, lambda v: v ** t)


def exp_divided_differences(lam: np.ndarray) -> np.ndarray:
    """Matrix of first divided differences of ``exp`` at ``lam``.

    Uses ``(e^a - e^b)/(a - b) = e^b * expm1(a - b)/(a - b)``, which is
    cancellation-free, so no coincidence threshold is needed.
    """
    a = lam[:, None]
    b = lam[None, :]
    lo = np.minimum(a, b)
    d = np.abs(a - b)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(d > 0, np.expm1(d) / np.where(d > 0, d, 1.0), 1.0)
    return np.exp(lo) * ratio


def _generic_divided_differences(lam, f, fprime):
    a = lam[:, None]
    b = lam[None, :]
    fl = np.asarray(f(lam), dtype=float)
    diff = a - b
    close = np.abs(diff) < _COINCIDENCE_RTOL * (1.0 + np.abs(a) + np.abs(b))
    safe = np.where(close, 1.0, diff)
    dd = (fl[:, None] - fl[None, :]) / safe
    return np.where(close, np.asarray(fprime((a + b) / 2), dtype=float), dd)


_KNOWN = {
    "exp": (np.exp, np.exp),
    "log": (np.log, lambda v: 1.0 / v),
    "sqrt": (np.sqrt, lambda v: 0.5 / np.sqrt(v)),
}


def divided_difference_apply(f, x: HermitianElement, y: HermitianElement,
                             fprime: Optional[Callable] = None) -> HermitianElement:
    """Frechet derivative ``d/dt f(x + t y)`` at ``t = 0`` (Daleckii-Krein).

    In the eigenbasis of ``x`` entry ``(i, j)`` of ``y`` is multiplied by the
    divided difference ``(f(l_i) - f(l_j)) / (l_i - l_j)``, with ``f'`` at
    (near-)coincident eigenvalues.

    Parameters
    ----------
    f : str or callable
        ``"exp"``, ``"log"``, ``"sqrt"`` or a vectorized real function.
    x, y : HermitianElement
    fprime : callable, optional
        Derivative of ``f``; required when ``f`` is a callable.
    """
    x._check(y)
    if isinstance(f, str):
        if f not in _KNOWN:
            raise ValueError(f"unknown function {f!r}")
        name = f
        f, fprime = _KNOWN[name]
    else:
        name = None
        if fprime is None:
            raise ValueError("fprime is required for a callable f")
    spec = x.eig
    out = []
    for lam, u, yb in zip(spec.eigenvalues, spec.eigenvectors, y.blocks):
        if name == "exp":
            dd = exp_divided_differences(lam)
        else:
            dd = _generic_divided_differences(lam, f, fprime)
        yt = u.conj().T @ yb @ u
        out.append(u @ (dd * yt) @ u.conj().T)
    return HermitianElement(x.algebra, out)


def is_positive(x: HermitianElement, floor: float = DEFAULT_FLOOR) -> Optional[PositiveElement]:
    """The certified positive element when ``min spec(x) >= floor``, else None."""
    if isinstance(x, PositiveElement) and x.spectral_floor >= floor:
        return x
    if x.eig.min() >= floor:
        return PositiveElement(x, floor=floor)
    return None


# ---------------------------------------------------------------------------
# random elements


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _complex_gaussian(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def random_hermitian(algebra: TracialAlgebra, scale: float = 1.0, seed=None) -> HermitianElement:
    """``scale * (G + G*) / 2`` with ``G`` standard complex Gaussian per block."""
    rng = as_rng(seed)
    if scale < 0:
        raise ValueError("scale must be non-negative")
    return HermitianElement(algebra, [scale * _complex_gaussian(rng, (d, d)) for d in algebra.dims])


def random_tangent(algebra: TracialAlgebra, seed=None, max_norm: float = 2.0) -> HermitianElement:
    """Random Hermitian with ``||x||_2`` uniform in ``(0, max_norm]``."""
    rng = as_rng(seed)
    x = random_hermitian(algebra, 1.0, rng)
    n = norm2(x)
    if n == 0.0:
        return x
    return x * (max_norm * (1.0 - rng.random()) / n)


def random_positive(algebra: TracialAlgebra, seed=None, max_norm: float = 2.0) -> PositiveElement:
    """``e^x`` for a random Hermitian ``x`` with ``||x||_2 <= max_norm``."""
    return expm(random_tangent(algebra, seed, max_norm))


def random_unitary(algebra: TracialAlgebra, seed=None) -> AlgebraElement:
    """Haar-distributed unitary, blockwise (QR with phase correction)."""
    rng = as_rng(seed)
    blocks = []
    for d in algebra.dims:
        q, r = np.linalg.qr(_complex_gaussian(rng, (d, d)))
        ph = np.diag(r) / np.abs(np.diag(r))
        blocks.append(q * ph)
    return AlgebraElement(algebra, blocks)


def random_invertible(algebra: TracialAlgebra, seed=None, max_norm: float = 1.0) -> AlgebraElement:
    """``u e^h``: Haar unitary times a random positive; condition number <= e^(2 ||h||_op)."""
    rng = as_rng(seed)
    u = random_unitary(algebra, rng)
    return u @ random_positive(algebra, rng, max_norm)


# ---------------------------------------------------------------------------
# JSON element format


def element_to_dict(a: AlgebraElement) -> dict:
    """``{"algebra": ..., "blocks": [{"re": rows, "im": rows}, ...]}``."""
    return {
        "algebra": a.algebra.to_dict(),
        "blocks": [{"re": np.real(b).tolist(), "im": np.imag(b).tolist()} for b in a.blocks],
    }


def element_from_dict(data: dict, kind: str = "general", algebra: Optional[TracialAlgebra] = None):
    """Parse the JSON element format.

    ``kind`` is ``"general"``, ``"hermitian"`` or ``"positive"``. A missing
    ``"im"`` field means a real block.
    """
    alg = TracialAlgebra.from_dict(data["algebra"]) if "algebra" in data else algebra
    if alg is None:
        raise ValueError("element has no algebra descriptor")
    blocks = _blocks_from_list(data["blocks"])
    if kind == "general":
        return AlgebraElement(alg, blocks)
    if kind == "hermitian":
        return HermitianElement(alg, blocks)
    if kind == "positive":
        return PositiveElement(HermitianElement(alg, blocks))
    raise ValueError(f"unknown element kind {kind!r}")


def _blocks_from_list(items) -> list:
    blocks = []
    for item in items:
        re = np.asarray(item["re"], dtype=float)
        im = np.asarray(item.get("im", np.zeros_like(re)), dtype=float)
        if re.ndim == 1 and re.size == 1:
            re, im = re.reshape(1, 1), im.reshape(1, 1)
        if re.shape != im.shape:
            raise ValueError("re and im parts differ in shape")
        blocks.append(re + 1j * im)
    return blocks
