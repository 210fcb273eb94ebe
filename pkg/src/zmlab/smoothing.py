"""Analytic smoothing machinery: the even entire damping function G, the
Mellin cutoff kernels it generates, Gamma-quotient factors, a compactly
supported bump, and a shared vertical-line contour quadrature engine.

The damping function used by the main-term machinery is

    G(s) = exp(s^2) * prod_k (s^2 - r_k^2) / Q(0),

with r_k running over the four half-sums of shift pairs; its engineered zeros
cancel zeta poles in contour shifts. ``gaussian_spec`` provides the plain
exp(s^2) variant (no engineered zeros) for contexts where any even, entire,
rapidly decaying G with G(0) = 1 is admissible; the zero-bearing G amplifies
the cutoff kernels' transition ringing by 1/Q(0), which matters numerically
(see the decay tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .arith import ShiftTuple
from .errors import DegenerateShiftError, DomainError, UnsupportedOrderError
from .specialfn import log_gamma

__all__ = [
    "LineIntegralSpec",
    "SmoothingSpec",
    "build_smoothing",
    "gaussian_spec",
    "line_integral",
    "mellin_cutoff",
    "afe_cutoff",
    "gamma_quotient",
    "reflection_factor",
    "bump",
    "bump_derivative",
    "CompactBump",
]

_TWO_PI = 2.0 * math.pi
_LOG_4PI2 = math.log(4.0 * math.pi**2)


@dataclass(frozen=True)
class LineIntegralSpec:
    """Vertical-line quadrature layout: Re s = abscissa, Im s in [-H, H]."""

    abscissa: float = 1.0
    half_height: float = 12.0
    nodes: int = 2048

    def __post_init__(self) -> None:
        if self.nodes < 64:
            raise DomainError("LineIntegralSpec: nodes must be >= 64")
        if self.half_height < 10.0:
            raise DomainError("LineIntegralSpec: half_height must be >= 10")


DEFAULT_LINE = LineIntegralSpec()


@lru_cache(maxsize=64)
def _panel_rule(nodes: int, half_height: float) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on [-H, H]: 16-point panels."""
    per_panel = 16
    panels = max(4, int(math.ceil(nodes / per_panel)))
    x, w = np.polynomial.legendre.leggauss(per_panel)
    edges = np.linspace(-half_height, half_height, panels + 1)
    half = 0.5 * (edges[1] - edges[0])
    mids = 0.5 * (edges[:-1] + edges[1:])
    taus = (mids[:, None] + half * x[None, :]).ravel()
    weights = np.tile(half * w, panels)
    return taus, weights


def contour_nodes(line: LineIntegralSpec) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes s = abscissa + i tau and weights for (1/2pi) * integral d tau."""
    taus, weights = _panel_rule(line.nodes, line.half_height)
    return line.abscissa + 1j * taus, weights


def line_integral(integrand, line: LineIntegralSpec = DEFAULT_LINE) -> complex:
    """(1/2 pi i) * integral of ``integrand`` over the vertical line of ``line``.

    ``integrand`` should map a complex ndarray to an ndarray; a scalar-only
    callable is accepted and looped. Raises DomainError (with the node) on a
    non-finite sample; the caller is responsible for tail decay beyond H.
    """
    s, w = contour_nodes(line)
    try:
        vals = np.asarray(integrand(s), dtype=np.complex128)
        if vals.shape != s.shape:
            raise TypeError
    except TypeError:
        vals = np.array([integrand(si) for si in s], dtype=np.complex128)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        raise DomainError(f"line_integral: non-finite integrand at s = {s[bad][0]}")
    return complex((vals * w).sum() / _TWO_PI)


@dataclass(frozen=True)
class SmoothingSpec:
    """Even entire damping function with optional engineered zeros.

    q_roots lists all zeros (sign pairs included); normalization is 1/Q(0)
    for the polynomial part, so that G(0) = 1 exactly.
    """

    shifts: ShiftTuple | None
    q_roots: tuple[complex, ...]
    normalization: complex

    def positive_roots(self) -> tuple[complex, ...]:
        return self.q_roots[: len(self.q_roots) // 2]

    def __call__(self, s):
        s_arr = np.asarray(s, dtype=np.complex128)
        out = np.exp(s_arr * s_arr)
        prod = np.ones_like(out)
        for r in self.positive_roots():
            prod = prod * (s_arr * s_arr - r * r)
        return out * prod * self.normalization


def build_smoothing(shifts: ShiftTuple) -> SmoothingSpec:
    """Damping function with zeros at all four half-sums of shift pairs.

    Raises DegenerateShiftError when a pair sum vanishes (Q(0) = 0); perturb
    the shifts to restore separation.
    """
    sums = shifts.pair_sums()
    roots = []
    q0 = 1.0 + 0.0j
    for name, val in sums.items():
        r = val / 2.0
        if abs(r) < 1e-14:
            raise DegenerateShiftError(
                f"build_smoothing: pair sum {name} vanishes; perturb the shifts"
            )
        roots.append(r)
        q0 *= -(r * r)
    spec = SmoothingSpec(
        shifts=shifts,
        q_roots=tuple(roots) + tuple(-r for r in roots),
        normalization=1.0 / q0,
    )
    _check_smoothing_invariants(spec)
    return spec


def gaussian_spec() -> SmoothingSpec:
    """Plain exp(s^2): even, entire, rapidly decaying, G(0) = 1, no zeros."""
    return SmoothingSpec(shifts=None, q_roots=(), normalization=1.0 + 0.0j)


def _check_smoothing_invariants(spec: SmoothingSpec) -> None:
    g0 = complex(spec(0.0))
    if abs(g0 - 1.0) > 1e-14:
        raise DegenerateShiftError(f"smoothing: G(0) = {g0}, expected 1")
    probe = np.array([0.3 + 0.4j, 1.1 - 0.2j, 0.05 + 0.9j])
    even_gap = np.max(np.abs(spec(probe) - spec(-probe)))
    if even_gap > 1e-13 * max(1.0, float(np.max(np.abs(spec(probe))))):
        raise DegenerateShiftError("smoothing: evenness violated")
    for r in spec.q_roots:
        if abs(complex(spec(r))) > 1e-12:
            raise DegenerateShiftError(f"smoothing: G does not vanish at root {r}")


def _kernel_profile(u: np.ndarray, spec: SmoothingSpec, line: LineIntegralSpec,
                    abscissa: float) -> np.ndarray:
    """(1/2 pi i) int G(s)/s exp(-s u) ds on Re s = abscissa, vectorized in u."""
    s, w = contour_nodes(LineIntegralSpec(abscissa, line.half_height, line.nodes))
    ker = spec(s) / s * w / _TWO_PI
    out = np.empty(u.shape, dtype=np.complex128)
    chunk = max(1, int(8_000_000 // max(1, s.size)))
    for lo in range(0, u.size, chunk):
        blk = u[lo : lo + chunk]
        out[lo : lo + chunk] = np.exp(-np.multiply.outer(blk, s)) @ ker
    return out


def mellin_cutoff(x, spec: SmoothingSpec, line: LineIntegralSpec = DEFAULT_LINE):
    """Smoothed cutoff V(x) = (1/2 pi i) int G(s)/s (2 pi)^{-2s} x^{-s} ds.

    Approximately 1 for 4 pi^2 x << 1 and rapidly decaying for 4 pi^2 x >> 1;
    independent of the abscissa inside the pole-free strip. Deep in the left
    tail the contour is mirrored across s = 0 (adding the residue 1) so the
    quadrature stays cancellation-free.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if np.any(xs <= 0.0):
        raise DomainError("mellin_cutoff: x must be positive")
    u = np.log(xs) + _LOG_4PI2
    out = np.empty(u.shape, dtype=np.complex128)
    c = abs(line.abscissa) or 1.0
    left = u < -2.0
    if np.any(left):
        out[left] = 1.0 + _kernel_profile(u[left], spec, line, -c)
    if np.any(~left):
        out[~left] = _kernel_profile(u[~left], spec, line, line.abscissa)
    return complex(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))


def gamma_quotient(s, t: float, shifts: ShiftTuple):
    """Product of the four Gamma quotients

        Gamma((1/2 + sh + s +/- it)/2) / Gamma((1/2 + sh +/- it)/2)

    over sh in (alpha, +it), (beta, +it), (gamma, -it), (delta, -it).
    Exactly 1 at s = 0. Vectorized over s.
    """
    if t < 1.0:
        raise DomainError("gamma_quotient: requires t >= 1")
    a, b, c, d = shifts.astuple()
    s_arr = np.asarray(s, dtype=np.complex128)
    s_vec = np.atleast_1d(s_arr)
    acc = np.zeros_like(s_vec)
    for sh, sign in ((a, 1.0), (b, 1.0), (c, -1.0), (d, -1.0)):
        base = (0.5 + sh + sign * 1j * t) / 2.0
        acc = acc + log_gamma(base + s_vec / 2.0) - log_gamma(base)
    out = np.exp(acc)
    out[s_vec == 0] = 1.0
    return complex(out[0]) if s_arr.ndim == 0 else out.reshape(s_arr.shape)


def afe_cutoff(x, t: float, shifts: ShiftTuple, spec: SmoothingSpec,
               line: LineIntegralSpec = DEFAULT_LINE):
    """The t-dependent cutoff

        V(x, t) = (1/2 pi i) int G(s)/s g(s, t) pi^{-2s} x^{-s} ds,

    which tracks mellin_cutoff(x / t^2) up to O(1/t) corrections and decays
    rapidly once x >> t^2. Vectorized over x.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if np.any(xs <= 0.0):
        raise DomainError("afe_cutoff: x must be positive")
    if t < 1.0:
        raise DomainError("afe_cutoff: requires t >= 1")
    s, w = contour_nodes(line)
    ker = spec(s) / s * gamma_quotient(s, t, shifts) * np.exp(-2.0 * s * math.log(math.pi))
    ker = ker * w / _TWO_PI
    out = np.empty(xs.shape, dtype=np.complex128)
    chunk = max(1, int(8_000_000 // max(1, s.size)))
    logx = np.log(xs)
    for lo in range(0, xs.size, chunk):
        out[lo : lo + chunk] = np.exp(-np.multiply.outer(logx[lo : lo + chunk], s)) @ ker
    return complex(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))


def reflection_factor(t: float, shifts: ShiftTuple) -> complex:
    """The Gamma-ratio reflection factor

        pi^{alpha+beta+gamma+delta} *
        prod Gamma((1/2 - sh -/+ it)/2) / Gamma((1/2 + sh +/- it)/2),

    approximately (t / 2 pi)^{-(alpha+beta+gamma+delta)} for large t.
    Exactly 1 when all shifts vanish.
    """
    if t < 1.0:
        raise DomainError("reflection_factor: requires t >= 1")
    a, b, c, d = shifts.astuple()
    if a == b == c == d == 0:
        return 1.0 + 0.0j
    total = (a + b + c + d) * math.log(math.pi)
    for sh, sign in ((a, 1.0), (b, 1.0), (c, -1.0), (d, -1.0)):
        total = total + log_gamma((0.5 - sh - sign * 1j * t) / 2.0)
        total = total - log_gamma((0.5 + sh + sign * 1j * t) / 2.0)
    return complex(np.exp(total))


# ----------------------------- compact bump --------------------------------

_BUMP_ORDER_LIMIT = 8


def bump(x):
    """Smooth bump exp(4 - 1/((x-1)(2-x))) on (1, 2), zero outside, max 1 at 1.5."""
    xs = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(xs, dtype=np.float64)
    inside = (xs > 1.0) & (xs < 2.0)
    q = (xs[inside] - 1.0) * (2.0 - xs[inside])
    out[inside] = np.exp(4.0 - 1.0 / q)
    return float(out) if np.ndim(x) == 0 else out


def _bump_jet(x: float, order: int) -> np.ndarray:
    """Taylor coefficients of the bump at x up to ``order`` (inclusive)."""
    n = order + 1
    # q(y) = (y-1)(2-y) around x: exact quadratic jet
    q = np.zeros(n)
    q[0] = (x - 1.0) * (2.0 - x)
    if n > 1:
        q[1] = 3.0 - 2.0 * x
    if n > 2:
        q[2] = -1.0
    # r = 1/q by power-series division
    r = np.zeros(n)
    r[0] = 1.0 / q[0]
    for k in range(1, n):
        acc = sum(q[i] * r[k - i] for i in range(1, min(k, 2) + 1))
        r[k] = -acc / q[0]
    # g = 4 - r, e = exp(g): e_k = (1/k) sum_{i=1..k} i g_i e_{k-i}
    g = -r
    g[0] = 4.0 - r[0]
    e = np.zeros(n)
    e[0] = math.exp(g[0])
    for k in range(1, n):
        e[k] = sum(i * g[i] * e[k - i] for i in range(1, k + 1)) / k
    return e


def bump_derivative(x: float, j: int) -> float:
    """j-th derivative of ``bump`` by analytic differentiation (j <= 8)."""
    if j < 0:
        raise DomainError("bump_derivative: order must be >= 0")
    if j > _BUMP_ORDER_LIMIT:
        raise UnsupportedOrderError(f"bump_derivative: order {j} > {_BUMP_ORDER_LIMIT}")
    if not 1.0 < x < 2.0:
        return 0.0
    jet = _bump_jet(float(x), j)
    return float(jet[j] * math.factorial(j))


@dataclass(frozen=True)
class CompactBump:
    """Bump rescaled to support [lo, hi]; callable, with derivative method."""

    lo: float = 1.0
    hi: float = 2.0

    def __post_init__(self) -> None:
        if not self.hi > self.lo:
            raise DomainError("CompactBump: need hi > lo")

    def _map(self, z):
        return 1.0 + (np.asarray(z, dtype=np.float64) - self.lo) / (self.hi - self.lo)

    def __call__(self, z):
        return bump(self._map(z))

    def derivative(self, z: float, j: int = 1) -> float:
        scale = 1.0 / (self.hi - self.lo)
        return bump_derivative(float(self._map(z)), j) * scale**j
