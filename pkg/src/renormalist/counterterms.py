"""Numerical renormalisation constants for truncated Euclidean heat kernels.

Spatial integrals are Gaussian and are done in closed form; what is left
is a low dimensional integral over kernel times and over the variances of a
Gaussian-mixture representation of the covariance

    Q(T, x) = E[Psi(T, x) Psi(0, 0)] = int w_T(A) g_A(x) dA,

of the mollified stochastic convolution Psi.  Here g_A is the centred
Gaussian of variance 2A per coordinate (the heat kernel at time A) and w_T
collects the time mollifiers.  All remaining integrals use composite
Gauss-Legendre rules on geometrically graded panels; the error estimate is
the difference between n and 2n nodes per panel.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy import integrate, interpolate, optimize

from .homogeneity import Homogeneity

FOUR_PI = 4.0 * math.pi


class QuadratureError(RuntimeError):
    pass


class FitError(ValueError):
    pass


# ------------------------------------------------------------------ profiles


def _smooth_exp(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def kappa(t):
    """Cut-off: 1 on [0, 1), 0 outside [0, 2], smooth exp step on [1, 2]."""
    t = np.asarray(t, dtype=float)
    a, b = _smooth_exp(2.0 - t), _smooth_exp(t - 1.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        step = np.where(a + b > 0, a / np.where(a + b > 0, a + b, 1.0), 0.0)
    out = np.where((t >= 0) & (t < 1), 1.0, step)
    return np.where((t < 0) | (t > 2), 0.0, out)


def _bump(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


_BUMP_MASS = integrate.quad(lambda s: float(_bump(np.array(s))), -1, 1, epsabs=1e-14, epsrel=1e-13)[0]


def phi(t):
    """Normalised even bump supported in (-1, 1)."""
    return _bump(t) / _BUMP_MASS


@lru_cache(maxsize=None)
def gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


@lru_cache(maxsize=1)
def _psi_tables(points=4001, nodes=96):
    """Spline of psi = phi * phi on [-2, 2] and of its distribution function."""
    u = np.linspace(-2.0, 2.0, points)
    x, w = gauss_legendre(nodes)
    lo = np.maximum(-1.0, u - 1.0)
    hi = np.minimum(1.0, u + 1.0)
    half = (hi - lo)[:, None] / 2
    s = (lo + hi)[:, None] / 2 + half * x[None, :]
    vals = (phi(s) * phi(u[:, None] - s) * half * w[None, :]).sum(axis=1)
    vals[0] = vals[-1] = 0.0
    spline = interpolate.CubicSpline(u, vals, bc_type="clamped")
    cdf = spline.antiderivative()
    total = float(cdf(2.0))
    return spline, cdf, total


def psi(u):
    """Time autocorrelation phi * phi, supported in [-2, 2]."""
    u = np.asarray(u, dtype=float)
    spline, _, _ = _psi_tables()
    return np.where(np.abs(u) < 2, spline(np.clip(u, -2, 2)), 0.0)


def psi_cdf(u):
    """F_2(u) = int_{-inf}^u psi, normalised so that F_2(2) = 1."""
    u = np.asarray(u, dtype=float)
    _, cdf, total = _psi_tables()
    return np.clip(cdf(np.clip(u, -2, 2)) / total, 0.0, 1.0)


def heat_gaussian(var, r2, d):
    """(4 pi var)^{-d/2} exp(-r2 / (4 var))."""
    return (FOUR_PI * var) ** (-d / 2) * np.exp(-r2 / (4.0 * var))


def zbar(t, x, d: int = 2):
    """Truncated Euclidean heat kernel (4 pi t)^{-d/2} e^{-|x|^2/4t} kappa(t); 0 for t <= 0."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1) if x.ndim and x.shape[-1] == d else x * x
    safe = np.where(t > 0, t, 1.0)
    return np.where(t > 0, heat_gaussian(safe, r2, d) * kappa(t), 0.0)


# ------------------------------------------------------------------ quadrature


@dataclass(frozen=True)
class QuadConfig:
    """n: Gauss nodes per panel; panels shrink by ``ratio`` down to h_factor * eps^2."""

    n: int = 4
    ratio: float = 2.0
    h_factor: float = 0.5
    delta_nodes: int = 16
    rtol: float = 1e-3
    chunk: int = 2_000_000

    def refined(self):
        return QuadConfig(2 * self.n, self.ratio, self.h_factor, self.delta_nodes, self.rtol, self.chunk)


@dataclass(frozen=True)
class KernelSpec:
    d: int
    static_noise: bool = False
    rbar: float = 1.0
    quad: QuadConfig = field(default_factory=QuadConfig)

    @property
    def scaling_norm(self):
        return self.d if self.static_noise else self.d + 2


@dataclass(frozen=True)
class Estimate:
    value: float
    error: float
    name: str = ""

    @property
    def converged(self):
        return self.error <= 1e-3 * abs(self.value) + 1e-300

    def to_json(self):
        return {"name": self.name, "value": self.value, "error": self.error}


def _panel_count(length, h_min, ratio):
    return max(1, int(math.ceil(math.log(max(length / h_min, 1.0)) / math.log(ratio))) + 1)


def graded_rule(lo, hi, m: int, n: int, ratio: float):
    """Batched composite Gauss rule between lo and hi, graded geometrically toward lo.

    lo and hi are arrays of one shape S (hi < lo is allowed); returns nodes
    and positive weights of shape S + (m * n,).  The panel next to lo has
    length |hi - lo| * ratio**-(m-1).
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    x, w = gauss_legendre(n)
    fr = np.concatenate([[0.0], ratio ** -np.arange(m - 1, -1, -1.0)])
    a, b = fr[:-1], fr[1:]
    rel = ((a + b)[:, None] / 2 + (b - a)[:, None] / 2 * x[None, :]).ravel()
    relw = ((b - a)[:, None] / 2 * w[None, :]).ravel()
    length = (hi - lo)[..., None]
    return lo[..., None] + length * rel, np.abs(length) * relw


def _ridge_rule(lo, hi, center, m, n, ratio):
    """Rule on [lo, hi] graded toward an interior point from both sides."""
    left_x, left_w = graded_rule(center, lo, m, n, ratio)
    right_x, right_w = graded_rule(center, hi, m, n, ratio)
    return np.concatenate([left_x, right_x], -1), np.concatenate([left_w, right_w], -1)


# ------------------------------------------------------------------ mixture weights


def mixture_weight(T, A, eps, delta_nodes=16):
    """w_T(A) for the time-mollified covariance; A is the total Gaussian variance."""
    T = np.asarray(T, dtype=float)
    A = np.asarray(A, dtype=float)
    T, A = np.broadcast_arrays(T, A)
    e2 = eps * eps
    sigma = A - 2 * e2
    lo = np.maximum(-sigma, T - 2 * e2)
    hi = np.minimum(sigma, T + 2 * e2)
    out = np.zeros(T.shape)
    live = (sigma > 0) & (hi > lo)
    # cut-offs identically one over the whole mollifier window
    flat = live & (sigma + np.minimum(sigma, np.abs(T) + 2 * e2) < 2.0)
    out[flat] = 0.5 * (psi_cdf((T[flat] + sigma[flat]) / e2) - psi_cdf((T[flat] - sigma[flat]) / e2))
    rest = live & ~flat
    if rest.any():
        x, w = gauss_legendre(delta_nodes)
        l, h, s, t = lo[rest], hi[rest], sigma[rest], T[rest]
        half = ((h - l) / 2)[:, None]
        dl = ((h + l) / 2)[:, None] + half * x[None, :]
        f = psi((t[:, None] - dl) / e2) / e2 * kappa((s[:, None] + dl) / 2) * kappa((s[:, None] - dl) / 2)
        out[rest] = 0.5 * (f * half * w[None, :]).sum(axis=1)
    return out


def _variance_rule(T, eps, q: QuadConfig):
    """Nodes/weights for the variance A of w_T, graded toward its lower end."""
    e2 = eps * eps
    lo = np.maximum(2 * e2, np.abs(T))
    hi = np.full_like(lo, 4.0 + 2 * e2)
    m = _panel_count(4.0, q.h_factor * e2, q.ratio)
    A, wA = graded_rule(lo, hi, m, q.n, q.ratio)
    return A, wA * mixture_weight(np.asarray(T)[..., None], A, eps, q.delta_nodes)


def _time_rule(eps, q: QuadConfig, hi=2.0):
    m = _panel_count(hi, q.h_factor * eps * eps, q.ratio)
    return graded_rule(np.array(0.0), np.array(hi), m, q.n, q.ratio)


def _chunked_sum(fn, count, chunk_rows):
    total = 0.0
    comp = 0.0
    for start in range(0, count, max(1, chunk_rows)):
        part = float(fn(slice(start, min(count, start + chunk_rows))))
        # compensated accumulation keeps the order-dependent rounding small
        y = part - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


# ------------------------------------------------------------------ g-PAM


def _pam_raw(eps, q: QuadConfig, t=0.0, d=2):
    e2 = eps * eps
    m = _panel_count(2.0, q.h_factor * e2, q.ratio)
    # integrate over the source time s in [t - 2, t]; tau = t - s >= 0
    s, ws = graded_rule(np.array(t), np.array(t - 2.0), m, q.n, q.ratio)
    tau = t - s
    k = kappa(tau + e2)
    C = np.sum(ws * k * (FOUR_PI * (tau + 2 * e2)) ** (-d / 2))
    v = tau[:, None] + tau[None, :] + 2 * e2
    Cp = np.sum((ws * k)[:, None] * (ws * k)[None, :] * (FOUR_PI * v) ** (-d / 2) / (2 * v))
    return float(C), float(Cp)


def pam_constants(eps, quad: QuadConfig | None = None, t: float = 0.0):
    """(C, C') for the two-dimensional static-noise equation."""
    q = quad or QuadConfig()
    lo = _pam_raw(eps, q, t)
    hi = _pam_raw(eps, q.refined(), t)
    return tuple(Estimate(h, abs(h - l), name) for h, l, name in zip(hi, lo, ("C", "C'")))


# ------------------------------------------------------------------ Phi^4_3


def _coincident(eps, q, d, weight_power=0):
    """int w_0(A) A^k (4 pi A)^{-d/2} dA: the covariance of Psi at a point."""
    A, wA = _variance_rule(np.array(0.0), eps, q)
    return float(np.sum(wA * A**weight_power * (FOUR_PI * A) ** (-d / 2)))


def _phi4_raw(eps, q: QuadConfig, d=3):
    C = _coincident(eps, q, d)
    t, wt = _time_rule(eps, q)
    A, wA = _variance_rule(t, eps, q)  # shape (Nt, NA)
    wt = wt * kappa(t)
    tt = t[:, None, None]
    a, b = A[:, :, None], A[:, None, :]
    s = a * b + tt * (a + b)
    inner = (wA[:, :, None] * wA[:, None, :] * s ** (-d / 2)).sum(axis=(1, 2))
    Cp = float(np.sum(wt * inner)) * FOUR_PI ** (-d)
    return C, Cp


def phi4_constants(eps, quad: QuadConfig | None = None):
    """(C, C') for the three-dimensional space-time white noise equation."""
    q = quad or QuadConfig()
    lo = _phi4_raw(eps, q)
    hi = _phi4_raw(eps, q.refined())
    return tuple(Estimate(h, abs(h - l), name) for h, l, name in zip(hi, lo, ("C", "C'")))


# ------------------------------------------------------------------ phi^3_4


def _two_vertex(v01, v02, v12, d):
    """int over x1, x2 of prod_e g_{v_e}(x_u - x_v) with root x0 = 0; v12 may be a list."""
    c01, c02 = 1.0 / (2 * v01), 1.0 / (2 * v02)
    c12 = sum(1.0 / (2 * v) for v in v12)
    det = c01 * c02 + c12 * (c01 + c02)
    pref = FOUR_PI ** (-d / 2 * (2 + len(v12))) * (v01 * v02) ** (-d / 2)
    for v in v12:
        pref = pref * v ** (-d / 2)
    return pref * ((2 * math.pi) ** 2 / det) ** (d / 2)


def _c11(eps, q, d):
    a, wa = _time_rule(eps, q)
    A, wA = _variance_rule(a, eps, q)
    vals = wA * (FOUR_PI * (a[:, None] + A)) ** (-d / 2)
    return float(np.sum(wa * kappa(a) * vals.sum(axis=1)))


def _c22j(eps, q, d):
    e2 = eps * eps
    a, wa = _time_rule(eps, q)
    wa = wa * kappa(a)
    m = _panel_count(2.0, q.h_factor * e2, q.ratio)
    # T = b - a, graded toward the ridge T = 0 from both sides
    T, wT = _ridge_rule(-a, 2.0 - a, np.zeros_like(a), m, q.n, q.ratio)
    b = a[:, None] + T
    wT = wT * kappa(b)
    A, wA = _variance_rule(T, eps, q)  # (Na, NT, NA)
    Na = a.size

    def part(sl):
        aa = a[sl, None, None, None]
        bb = b[sl, :, None, None]
        AA = A[sl, :, :, None]
        BB = A[sl, :, None, :]
        g = _two_vertex(aa, bb, [AA, BB], d)
        inner = (wA[sl, :, :, None] * wA[sl, :, None, :] * g).sum(axis=(2, 3))
        return np.sum(wa[sl, None] * wT[sl] * inner)

    rows = max(1, q.chunk // max(1, T.shape[1] * A.shape[2] ** 2))
    return 2.0 * _chunked_sum(part, Na, rows)


def _c211(eps, q, d):
    a, wa = _time_rule(eps, q)
    wa = wa * kappa(a)
    b, wb = a, wa
    S = a[:, None] + b[None, :]
    A, wA = _variance_rule(S, eps, q)  # (Na, Nb, NA), weights w_{a+b}
    B, wB = _variance_rule(b, eps, q)  # (Nb, NB), weights w_b
    Na = a.size

    def part(sl):
        aa = a[sl, None, None, None]
        bb = b[None, :, None, None]
        AA = A[sl, :, :, None]
        BB = B[None, :, None, :]
        # edges: 0-1 time a, 1-2 time b, 0-2 mixture A, 1-2 mixture B
        g = _two_vertex(aa, AA, [bb, BB], d)
        inner = (wA[sl, :, :, None] * wB[None, :, None, :] * g).sum(axis=(2, 3))
        return np.sum(wa[sl, None] * wb[None, :] * inner)

    rows = max(1, q.chunk // max(1, b.size * A.shape[2] * B.shape[1]))
    return 2.0 * _chunked_sum(part, Na, rows)


PHI34_ORDER = ("C<2>,1", "C<2>,2", "C211", "C22j", "C11")


def _phi34_raw(eps, q: QuadConfig, d=4):
    c1 = _coincident(eps, q, d)
    c2 = _coincident(eps, q, d, weight_power=1) / 3.0
    return c1, c2, _c211(eps, q, d), _c22j(eps, q, d), _c11(eps, q, d)


def phi34_constants(eps, quad: QuadConfig | None = None):
    """Five constants in the order of PHI34_ORDER."""
    q = quad or QuadConfig()
    lo = _phi34_raw(eps, q)
    hi = _phi34_raw(eps, q.refined())
    return tuple(Estimate(h, abs(h - l), name) for h, l, name in zip(hi, lo, PHI34_ORDER))


EQUATION_CONSTANTS = {
    "gpam": pam_constants,
    "phi43": phi4_constants,
    "phi34": phi34_constants,
}


def thread_count():
    try:
        return max(1, int(os.environ.get("RENORMALIST_THREADS", "1")))
    except ValueError:
        return 1


def sweep(equation: str, eps_grid, quad: QuadConfig | None = None, strict=False):
    """Evaluate all constants of an equation on a list of eps; results keep eps order."""
    fn = EQUATION_CONSTANTS[equation]
    eps_grid = [float(e) for e in eps_grid]
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        rows = list(pool.map(lambda e: fn(e, quad), eps_grid))
    if strict:
        for e, row in zip(eps_grid, rows):
            for est in row:
                if not est.converged:
                    raise QuadratureError(
                        f"{equation} {est.name} at eps={e}: error {est.error:.3g} exceeds tolerance"
                    )
    return list(zip(eps_grid, rows))


# ------------------------------------------------------------------ divergence fits


@dataclass(frozen=True)
class Fit:
    model: str  # "power" or "log"
    a: float
    b: float
    p: float | None
    residual: float  # |y - fit| / |y| in the Euclidean norm

    def to_json(self):
        return {"model": self.model, "a": self.a, "b": self.b, "p": self.p, "residual": self.residual}


def _lsq(x, y):
    M = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(M, y, rcond=None)
    pred = M @ coef
    return coef, float(np.linalg.norm(y - pred) / np.linalg.norm(y))


def fit_divergence(samples, p_min=0.25, p_max=8.0):
    """Fit a*eps^-p + b and a*log(1/eps) + b; the lower relative residual wins."""
    samples = sorted(samples)
    if len(samples) < 4:
        raise FitError("need at least 4 samples")
    eps = np.array([s[0] for s in samples], dtype=float)
    y = np.array([s[1] for s in samples], dtype=float)
    if np.any(eps <= 0) or np.any(y == 0) or len(set(eps)) < len(eps):
        raise FitError("degenerate sample set")
    L = np.log(1.0 / eps)
    (la, lb), lres = _lsq(L, y)
    log_fit = Fit("log", float(la), float(lb), None, lres)

    def resid(p):
        return _lsq(eps**-p, y)[1]

    grid = np.linspace(p_min, p_max, 64)
    k = int(np.argmin([resid(p) for p in grid]))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(resid, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    p = float(res.x)
    (pa, pb), pres = _lsq(eps**-p, y)
    power_fit = Fit("power", float(pa), float(pb), p, pres)
    return log_fit if log_fit.residual <= power_fit.residual else power_fit


# ------------------------------------------------------------------ power counting


@dataclass(frozen=True)
class Diagram:
    """Vertices 0..n with 0 fixed; edges (u, v, order) where order is the kernel's scaling degree."""

    name: str
    n_vertices: int
    edges: tuple
    scaling_norm: int

    def degree(self, vertices=None):
        vs = set(range(self.n_vertices)) if vertices is None else set(vertices)
        inside = sum(o for u, v, o in self.edges if u in vs and v in vs)
        return inside + self.scaling_norm * (len(vs) - 1)

    def _connected(self, vs):
        vs = set(vs)
        seen = {min(vs)}
        stack = [min(vs)]
        while stack:
            x = stack.pop()
            for u, v, _ in self.edges:
                for a, b in ((u, v), (v, u)):
                    if a == x and b in vs and b not in seen:
                        seen.add(b)
                        stack.append(b)
        return seen == vs

    def divergent_subsets(self):
        out = []
        for k in range(2, self.n_vertices):
            for vs in combinations(range(self.n_vertices), k):
                if self._connected(vs) and self.degree(vs) <= 0:
                    out.append(frozenset(vs))
        return out


@dataclass(frozen=True)
class Prediction:
    model: str  # "power", "log" or "finite"
    p: int | None
    log_power: int

    def to_json(self):
        return {"model": self.model, "p": self.p, "log_power": self.log_power}


def power_counting(diagram: Diagram) -> Prediction:
    """Overall degree sets the model; nested log-divergent subgraphs add log powers."""
    deg = diagram.degree()
    if deg > 0:
        return Prediction("finite", None, 0)
    subs = [s for s in diagram.divergent_subsets() if diagram.degree(s) == 0]
    # longest chain of nested proper subsets
    depth = {}
    for s in sorted(subs, key=len):
        depth[s] = 1 + max((depth[t] for t in depth if t < s), default=0)
    nested = max(depth.values(), default=0)
    if deg < 0:
        return Prediction("power", -deg, nested)
    return Prediction("log", None, 1 + nested)


def _z(d):
    return -d


def _q(d):
    return 2 - d


DIAGRAMS = {
    "gpam": (
        Diagram("C", 2, ((0, 1, -2), (0, 1, -2)), 4),
        Diagram("C'", 3, ((0, 1, -3), (0, 2, -3), (1, 2, -2)), 4),
    ),
    "phi43": (
        Diagram("C", 2, ((0, 1, _z(3)), (0, 1, _z(3))), 5),
        Diagram("C'", 2, ((0, 1, _z(3)), (0, 1, _q(3)), (0, 1, _q(3))), 5),
    ),
    "phi34": (
        Diagram("C<2>,1", 2, ((0, 1, _z(4)), (0, 1, _z(4))), 6),
        Diagram("C<2>,2", 2, ((0, 1, _z(4)), (0, 1, _z(4) + 2)), 6),
        Diagram("C211", 3, ((0, 1, _z(4)), (1, 2, _z(4)), (0, 2, _q(4)), (1, 2, _q(4))), 6),
        Diagram("C22j", 3, ((0, 1, _z(4)), (0, 2, _z(4)), (1, 2, _q(4)), (1, 2, _q(4))), 6),
        Diagram("C11", 2, ((0, 1, _z(4)), (0, 1, _q(4))), 6),
    ),
}


# ------------------------------------------------------------------ dyadic decomposition


def _chi(r):
    """Radial cut-off: 1 for r <= 1/2, 0 for r >= 1, smooth in between."""
    r = np.asarray(r, dtype=float)
    a, b = _smooth_exp(1.0 - r), _smooth_exp(r - 0.5)
    with np.errstate(invalid="ignore"):
        s = np.where(a + b > 0, a / np.where(a + b > 0, a + b, 1.0), 0.0)
    return np.where(r <= 0.5, 1.0, np.where(r >= 1, 0.0, s))


def parabolic_distance(t, x):
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    return np.sqrt(np.abs(t)) + np.sqrt(np.sum(x * x, axis=-1))


@dataclass(frozen=True)
class DyadicReport:
    n: tuple
    sup: tuple
    grad_x: tuple
    grad_t: tuple
    bounded: bool
    growth: float

    def to_json(self):
        return {
            "n": list(self.n),
            "sup": list(self.sup),
            "grad_x": list(self.grad_x),
            "grad_t": list(self.grad_t),
            "bounded": self.bounded,
            "growth": self.growth,
        }


def dyadic_piece(kernel, n, t, x):
    d = parabolic_distance(t, x)
    return kernel(t, x) * (_chi(2.0**n * d) - _chi(2.0 ** (n + 1) * d))


def dyadic_decompose(kernel, d: int, scaling_norm: int, beta: float, n_max=12, samples=9, growth_tol=0.25):
    """Scaled sup norms of the dyadic pieces of a kernel on a parabolic test grid.

    ``kernel(t, x)`` must accept arrays t of shape S and x of shape S + (d,).
    A piece is tested at points of parabolic size between 2^-(n+2) and 2^-n;
    a fitted growth rate of the scaled norms above ``growth_tol`` (in log2
    units per level) is flagged as a violation.
    """
    ts = np.linspace(-1.0, 1.0, samples)
    xs = np.linspace(-1.0, 1.0, samples)
    grid = np.meshgrid(ts, *([xs] * d), indexing="ij")
    T0 = grid[0].ravel()
    X0 = np.stack([g.ravel() for g in grid[1:]], axis=-1)
    ns, sups, gx, gt = [], [], [], []
    for n in range(n_max + 1):
        s = 2.0**-n
        t, x = T0 * s * s, X0 * s
        h = 1e-3 * s
        val = np.abs(dyadic_piece(kernel, n, t, x))
        dx = np.zeros_like(val)
        for i in range(d):
            e = np.zeros(d)
            e[i] = h
            diff = (dyadic_piece(kernel, n, t, x + e) - dyadic_piece(kernel, n, t, x - e)) / (2 * h)
            dx = np.maximum(dx, np.abs(diff))
        ht = h * h
        dt = np.abs(dyadic_piece(kernel, n, t + ht, x) - dyadic_piece(kernel, n, t - ht, x)) / (2 * ht)
        scale = 2.0 ** (-n * (scaling_norm - beta))
        ns.append(n)
        sups.append(float(val.max() * scale))
        gx.append(float(dx.max() * scale * s))
        gt.append(float(dt.max() * scale * s * s))
    logs = [math.log2(v) for v in sups if v > 0]
    growth = 0.0
    if len(logs) >= 3:
        tail = np.array(logs[len(logs) // 2 :])
        growth = float(np.polyfit(np.arange(tail.size), tail, 1)[0])
    return DyadicReport(tuple(ns), tuple(sups), tuple(gx), tuple(gt), growth <= growth_tol, growth)


def heat_kernel(d: int):
    def K(t, x):
        return zbar(t, x, d)

    return K


def homogeneous_kernel(scaling_norm: int, power=None):
    """d_s(z)^-power (power defaults to the scaling norm), 0 at the origin."""
    power = scaling_norm if power is None else power

    def K(t, x):
        r = parabolic_distance(t, x)
        return np.where(r > 0, np.where(r > 0, r, 1.0) ** -float(power), 0.0)

    return K


def degree_of(kind: str, d: int) -> Homogeneity:
    """Scaling degree of the kernels entering the diagrams."""
    table = {"heat": -d, "grad_heat": -d - 1, "covariance": 2 - d}
    return Homogeneity(table[kind])
