"""Shifted fourth moment of zeta twisted by Dirichlet polynomials: direct
quadrature of the moment integral and its two closed main-term evaluators.

The six-term main formula attaches, to each coefficient pair, the block

    euler_block = zeta_ratio_block(shifts, 0) * twist corrections,

summed over the six shift permutations with (t/2pi)-power weights; the kernel
form replaces each block by its smoothed counterpart kernel_block(t), a
vertical-line integral of the damping function against the same Euler
products. The direct value is a plain composite quadrature of the integrand
with automatic step refinement.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import simpson

from .arith import DirichletCoefficients, ShiftTuple, twist_euler_factor
from .errors import DomainError, PoleError, RefinementError
from .smoothing import (
    DEFAULT_LINE,
    LineIntegralSpec,
    SmoothingSpec,
    bump,
    contour_nodes,
)
from .specialfn import (
    DEFAULT_ACCURACY,
    _em_tail,
    _em_term_count,
    zeta,
    zeta_ratio_block,
)

__all__ = [
    "MomentProblem",
    "MomentReport",
    "PERMUTATIONS",
    "moment_integrand",
    "moment_direct",
    "euler_block",
    "kernel_block",
    "moment_main_product",
    "moment_main_kernel",
    "offdiag_series",
    "evaluate_moment_problem",
]

_TWO_PI = 2.0 * math.pi

# The six shift permutations of the main formula, as (label, (sign, index)
# assignments, power-pair indices). The weight of a term is
# (t/2pi)^{-(shift[i] + shift[j])} over the listed power-pair (None = 0 or
# the full sum for the reflected diagonal).
PERMUTATIONS: tuple[tuple[str, tuple[tuple[int, int], ...], tuple[int, ...]], ...] = (
    ("diag", ((1, 0), (1, 1), (1, 2), (1, 3)), ()),
    ("diag_dual", ((-1, 2), (-1, 3), (-1, 0), (-1, 1)), (0, 1, 2, 3)),
    ("od_13", ((-1, 2), (1, 1), (-1, 0), (1, 3)), (0, 2)),
    ("od_14", ((-1, 3), (1, 1), (1, 2), (-1, 0)), (0, 3)),
    ("od_23", ((1, 0), (-1, 2), (-1, 1), (1, 3)), (1, 2)),
    ("od_24", ((1, 0), (-1, 3), (1, 2), (-1, 1)), (1, 3)),
)


def _perm_tuple(shifts: ShiftTuple, assignment) -> ShiftTuple:
    return shifts.permuted(assignment)


def _perm_power(shifts: ShiftTuple, idx: tuple[int, ...]) -> complex:
    vals = shifts.astuple()
    return sum((vals[i] for i in idx), 0.0 + 0.0j)


def _swapped(shifts: ShiftTuple) -> ShiftTuple:
    return ShiftTuple(shifts.gamma, shifts.delta, shifts.alpha, shifts.beta)


@dataclass
class MomentProblem:
    """One desk experiment: scale T, shifts, twist coefficients, smoothing."""

    T: float
    shifts: ShiftTuple
    coeffs_a: DirichletCoefficients
    coeffs_b: DirichletCoefficients
    smoothing: SmoothingSpec
    phi=None
    line: LineIntegralSpec = field(default_factory=lambda: DEFAULT_LINE)
    t_nodes: int = 4096

    def __post_init__(self) -> None:
        if self.T < 50:
            raise DomainError("MomentProblem: T must be >= 50")
        if self.phi is None:
            self.phi = bump
        bound = self.T ** 0.25
        if max(self.coeffs_a.support_bound, self.coeffs_b.support_bound) > bound:
            warnings.warn(
                "coefficient support exceeds T^(1/4); main-term error control degrades",
                stacklevel=2,
            )


@dataclass
class MomentReport:
    """Direct value, the two main-term evaluations and their labeled parts."""

    direct_value: complex
    main_product: complex
    main_kernel: complex
    parts_product: dict[str, complex]
    parts_kernel: dict[str, complex]
    residuals: dict[str, float]
    quadrature: dict[str, float]

    def payload(self) -> dict:
        c = lambda z: {"re": float(np.real(z)), "im": float(np.imag(z))}
        return {
            "direct_value": c(self.direct_value),
            "main_product": c(self.main_product),
            "main_kernel": c(self.main_kernel),
            "parts_product": {k: c(v) for k, v in self.parts_product.items()},
            "parts_kernel": {k: c(v) for k, v in self.parts_kernel.items()},
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "quadrature": {k: float(v) for k, v in self.quadrature.items()},
        }


# --------------------------- direct quadrature ------------------------------


def _four_zetas_on_line(t: np.ndarray, shifts: ShiftTuple,
                        workers: int = 1) -> tuple[np.ndarray, ...]:
    """zeta(1/2 + sh + it) for sh in (alpha, beta) and zeta(1/2 + sh - it) for
    (gamma, delta), sharing one phase matrix across all four evaluations."""
    a, b, c, d = shifts.astuple()
    t_max = float(np.max(np.abs(t))) + max(abs(s.imag) for s in (a, b, c, d)) + 1.0
    n_terms = _em_term_count(t_max, DEFAULT_ACCURACY)
    logn = np.log(np.arange(1, n_terms, dtype=np.float64))
    amps = [np.exp(-(0.5 + sh) * logn) for sh in (a, b, c, d)]

    def run_chunk(lo: int, hi: int) -> list[np.ndarray]:
        phase = np.exp(-1j * np.multiply.outer(t[lo:hi], logn))
        out = [phase @ amps[0], phase @ amps[1]]
        np.conjugate(phase, out=phase)
        out.append(phase @ amps[2])
        out.append(phase @ amps[3])
        return out

    chunk = max(64, int(6_000_000 // max(1, n_terms)))
    ranges = [(lo, min(lo + chunk, t.size)) for lo in range(0, t.size, chunk)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pieces = list(pool.map(lambda r: run_chunk(*r), ranges))
    else:
        pieces = [run_chunk(*r) for r in ranges]

    k_corr = DEFAULT_ACCURACY.bernoulli_order // 2
    results = []
    for idx, (sh, sign) in enumerate(((a, 1.0), (b, 1.0), (c, -1.0), (d, -1.0))):
        direct = np.concatenate([p[idx] for p in pieces])
        s_args = 0.5 + sh + sign * 1j * t
        results.append(direct + _em_tail(s_args.astype(np.complex128), n_terms, k_corr))
    return tuple(results)


def moment_integrand(t, prob: MomentProblem, workers: int = 1):
    """Pointwise integrand: four shifted zeta values, the two twist
    polynomials, and the bump window at t/T. Vectorized over t."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    za, zb, zc, zd = _four_zetas_on_line(t_arr, prob.shifts, workers)
    a_poly = prob.coeffs_a.polynomial(0.5 + 1j * t_arr)
    b_poly = prob.coeffs_b.polynomial(0.5 + 1j * t_arr)
    vals = za * zb * zc * zd * a_poly * np.conjugate(b_poly) * prob.phi(t_arr / prob.T)
    return complex(vals[0]) if np.ndim(t) == 0 else vals.reshape(np.shape(t))


def moment_direct(prob: MomentProblem, step_budget: int = 4_000_000,
                  workers: int = 1) -> tuple[complex, dict]:
    """Composite quadrature of the moment integrand over [T, 2T].

    Starts at step 0.02 and halves until two Simpson evaluations that share
    samples agree to 0.1% (the coarse rule reuses every other node). Returns
    (value, metadata); raises RefinementError when the budget is exhausted.
    """
    if np.all(prob.coeffs_a.values == 0) or np.all(prob.coeffs_b.values == 0):
        return 0.0 + 0.0j, {"nodes": 0.0, "step": 0.0, "self_check": 0.0}
    h = 0.02
    while True:
        half_panels = int(math.ceil(prob.T / (2.0 * h)))
        n_nodes = 2 * half_panels + 1
        if n_nodes > step_budget:
            raise RefinementError(
                f"moment_direct: {n_nodes} nodes exceed budget {step_budget}; "
                f"suggested step {h:g} needs a larger budget"
            )
        t = prob.T + (prob.T / (n_nodes - 1)) * np.arange(n_nodes)
        vals = moment_integrand(t, prob, workers=workers)
        fine = complex(simpson(vals, dx=t[1] - t[0]))
        coarse = complex(simpson(vals[::2], dx=2.0 * (t[1] - t[0])))
        gap = abs(fine - coarse) / max(abs(fine), 1e-300)
        if gap <= 1e-3:
            meta = {"nodes": float(n_nodes), "step": float(t[1] - t[0]),
                    "self_check": float(gap)}
            return fine, meta
        h /= 2.0


# ----------------------------- main-term blocks -----------------------------


def euler_block(shifts: ShiftTuple, a: int, b: int) -> complex:
    """The zeta-ratio block times the two twist corrections, at s = 0."""
    if math.gcd(a, b) != 1:
        raise DomainError(f"euler_block: gcd({a},{b}) != 1")
    block = zeta_ratio_block(shifts, 0.0)
    return (
        block
        * twist_euler_factor(a, shifts, 0.0)
        * twist_euler_factor(b, _swapped(shifts), 0.0)
    )


def _block_series(shifts: ShiftTuple, a: int, b: int, s) -> np.ndarray:
    """zeta_ratio_block(s) * twist corrections, vectorized over s (contour use)."""
    return (
        zeta_ratio_block(shifts, s)
        * twist_euler_factor(a, shifts, s)
        * twist_euler_factor(b, _swapped(shifts), s)
    )


def _kernel_block_grid(shifts: ShiftTuple, a: int, b: int, t_grid: np.ndarray,
                       spec: SmoothingSpec, line: LineIntegralSpec) -> np.ndarray:
    """kernel_block on a whole t grid: one contour profile, one phase matmul."""
    s, w = contour_nodes(line)
    ab = float(a * b)
    profile = (
        spec(s) / s
        * np.exp(-(1.0 + s) * math.log(ab))
        * _block_series(shifts, a, b, s)
        * w
        / _TWO_PI
    )
    out = np.empty(t_grid.shape, dtype=np.complex128)
    logt = 2.0 * np.log(t_grid / _TWO_PI)
    chunk = max(1, int(8_000_000 // max(1, s.size)))
    for lo in range(0, t_grid.size, chunk):
        out[lo : lo + chunk] = np.exp(np.multiply.outer(logt[lo : lo + chunk], s)) @ profile
    return out


def kernel_block(shifts: ShiftTuple, a: int, b: int, t: float,
                 spec: SmoothingSpec, line: LineIntegralSpec = DEFAULT_LINE) -> complex:
    """Smoothed counterpart of euler_block: the vertical-line integral

        (1/2 pi i) int G(s)/s (t/2pi)^{2s} (ab)^{-(1+s)} [series block](s) ds

    with the inner Dirichlet series in its factored Euler-product form.
    Requires gcd(a, b) = 1 and t >= 1.
    """
    if math.gcd(a, b) != 1:
        raise DomainError(f"kernel_block: gcd({a},{b}) != 1")
    if t < 1.0:
        raise DomainError("kernel_block: requires t >= 1")
    return complex(_kernel_block_grid(shifts, a, b, np.array([float(t)]), spec, line)[0])


# --------------------------- main-term evaluators ---------------------------


@lru_cache(maxsize=32)
def _t_rule(T: float, n_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule (16-point panels) on [T, 2T]."""
    per_panel = 16
    panels = max(8, n_nodes // per_panel)
    x, w = np.polynomial.legendre.leggauss(per_panel)
    edges = np.linspace(T, 2.0 * T, panels + 1)
    half = 0.5 * (edges[1] - edges[0])
    mids = 0.5 * (edges[:-1] + edges[1:])
    t = (mids[:, None] + half * x[None, :]).ravel()
    weights = np.tile(half * w, panels)
    return t, weights


def _coprime_pairs(prob: MomentProblem):
    """Yield (g, a, b, alpha_{ga} * conj(beta_{gb})) over nonzero weights."""
    la = prob.coeffs_a.support_bound
    lb = prob.coeffs_b.support_bound
    for g in range(1, min(la, lb) + 1):
        for a in range(1, la // g + 1):
            ca = prob.coeffs_a[g * a]
            if ca == 0:
                continue
            for b in range(1, lb // g + 1):
                cb = prob.coeffs_b[g * b]
                if cb == 0 or math.gcd(a, b) != 1:
                    continue
                yield g, a, b, ca * cb.conjugate()


def moment_main_product(prob: MomentProblem) -> tuple[complex, dict[str, complex]]:
    """Six-term main formula built from euler_block values.

    Weighted coprime double sum of the six permuted blocks, each multiplied
    by the bump-weighted power integral int phi(t/T) (t/2pi)^{-P} dt. The
    t-integrals depend only on the power P, so they are evaluated once per
    permutation. Returns (total, labeled parts).
    """
    t, w = _t_rule(float(prob.T), prob.t_nodes)
    phi_vals = prob.phi(t / prob.T)
    log_t = np.log(t / _TWO_PI)
    parts: dict[str, complex] = {}
    power_int: dict[str, complex] = {}
    for label, assignment, pidx in PERMUTATIONS:
        p = _perm_power(prob.shifts, pidx)
        power_int[label] = complex(np.sum(w * phi_vals * np.exp(-p * log_t)))
        parts[label] = 0.0 + 0.0j
    for g, a, b, coeff in _coprime_pairs(prob):
        weight = coeff / (g * a * b)
        for label, assignment, _ in PERMUTATIONS:
            block = euler_block(_perm_tuple(prob.shifts, assignment), a, b)
            parts[label] += weight * block * power_int[label]
    total = sum(parts.values())
    return total, parts


def moment_main_kernel(prob: MomentProblem) -> tuple[complex, dict[str, complex]]:
    """Six-term main formula built from kernel_block grids.

    Sums over all coefficient pairs (a, b) in support (reducing by g =
    gcd(a, b): the smoothed block for (a, b) equals 1/g times the block for
    the coprime core), integrating each permuted block against the bump and
    its (t/2pi)-power weight on a shared Gauss-Legendre t grid.
    """
    t, w = _t_rule(float(prob.T), prob.t_nodes)
    phi_vals = prob.phi(t / prob.T)
    log_t = np.log(t / _TWO_PI)
    series: dict[str, np.ndarray] = {
        label: np.zeros(t.size, dtype=np.complex128) for label, _, _ in PERMUTATIONS
    }

    @lru_cache(maxsize=4096)
    def grid_for(label: str, a: int, b: int) -> np.ndarray:
        for lab, assignment, _ in PERMUTATIONS:
            if lab == label:
                return _kernel_block_grid(
                    _perm_tuple(prob.shifts, assignment), a, b, t, prob.smoothing, prob.line
                )
        raise KeyError(label)

    for a0 in prob.coeffs_a.support_indices():
        ca = prob.coeffs_a[int(a0)]
        for b0 in prob.coeffs_b.support_indices():
            cb = prob.coeffs_b[int(b0)]
            g = math.gcd(int(a0), int(b0))
            coeff = ca * cb.conjugate() / g
            for label, _, _ in PERMUTATIONS:
                series[label] += coeff * grid_for(label, int(a0) // g, int(b0) // g)
    grid_for.cache_clear()

    parts: dict[str, complex] = {}
    for label, _, pidx in PERMUTATIONS:
        p = _perm_power(prob.shifts, pidx)
        parts[label] = complex(np.sum(w * phi_vals * np.exp(-p * log_t) * series[label]))
    total = sum(parts.values())
    return total, parts


def offdiag_series(s, shifts: ShiftTuple, coeffs_a: DirichletCoefficients,
                   coeffs_b: DirichletCoefficients) -> complex:
    """The off-diagonal Dirichlet-series package

        zeta(1+alpha+gamma+2s) zeta(1-beta-delta-2s) *
        sum_{g} sum_{(a,b)=1} w_{ga} conj(w'_{gb}) /
            (g a^{1-beta-s} b^{1-delta-s}) * divisor_local_sum_pair(..., beta+delta+2s),

    symmetric under (shift reversal, s -> -s). Scalar or array s.
    """
    from .arith import divisor_local_sum_pair

    al, be, ga, de = shifts.astuple()
    s_arr = np.asarray(s, dtype=np.complex128)
    s_vec = np.atleast_1d(s_arr)
    arg1 = 1.0 + al + ga + 2.0 * s_vec
    arg2 = 1.0 - be - de - 2.0 * s_vec
    if np.any(arg1 == 1.0):
        raise PoleError("offdiag_series: zeta argument 1 (alpha+gamma+2s vanishes)")
    if np.any(arg2 == 1.0):
        raise PoleError("offdiag_series: zeta argument 1 (beta+delta+2s vanishes)")
    front = zeta(arg1) * zeta(arg2)

    la, lb = coeffs_a.support_bound, coeffs_b.support_bound
    acc = np.zeros_like(s_vec)
    for g in range(1, min(la, lb) + 1):
        for a in range(1, la // g + 1):
            ca = coeffs_a[g * a]
            if ca == 0:
                continue
            for b in range(1, lb // g + 1):
                cb = coeffs_b[g * b]
                if cb == 0 or math.gcd(a, b) != 1:
                    continue
                eta = divisor_local_sum_pair(a, b, shifts, 0.0, 0.0, be + de + 2.0 * s_vec)
                denom = g * np.exp((1.0 - be - s_vec) * math.log(a)) * np.exp(
                    (1.0 - de - s_vec) * math.log(b)
                )
                acc = acc + ca * cb.conjugate() * np.atleast_1d(eta) / denom
    out = front * acc
    return complex(out[0]) if s_arr.ndim == 0 else out.reshape(s_arr.shape)


def evaluate_moment_problem(prob: MomentProblem, workers: int = 1,
                            step_budget: int = 4_000_000) -> MomentReport:
    """Full desk experiment: direct value, both main terms, residual summary."""
    direct, meta = moment_direct(prob, step_budget=step_budget, workers=workers)
    prod_total, prod_parts = moment_main_product(prob)
    kern_total, kern_parts = moment_main_kernel(prob)
    denom = max(abs(direct), 1e-300)
    residuals = {
        "gap_product": abs(direct - prod_total) / denom,
        "gap_kernel": abs(direct - kern_total) / denom,
        "product_vs_kernel": abs(prod_total - kern_total)
        / max(abs(prod_total), 1e-300),
    }
    return MomentReport(
        direct_value=direct,
        main_product=prod_total,
        main_kernel=kern_total,
        parts_product=prod_parts,
        parts_kernel=kern_parts,
        residuals=residuals,
        quadrature=meta,
    )
