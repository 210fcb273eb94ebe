"""Integer arithmetic and the finite Euler products behind every main term.

The building blocks are the shifted divisor sum sigma_shift, the three-factor
local density local_euler_factor, the per-prime series ratio
twist_local_factor (with its product twist_euler_factor over a factorization),
and the divisor-sum packages divisor_local_sum / divisor_local_sum_pair.

Conventions: shifts travel as a ShiftTuple (four complex numbers of modulus at
most 1/2); Dirichlet-polynomial coefficients as a DirichletCoefficients
sequence supported on [1, support_bound].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError, PoleError

__all__ = [
    "Factorization",
    "ShiftTuple",
    "DirichletCoefficients",
    "factorize",
    "sigma_shift",
    "local_euler_factor",
    "twist_local_factor",
    "twist_euler_factor",
    "divisor_local_sum",
    "divisor_local_sum_pair",
]

_FACTORIZE_LIMIT = 10**12
_SERIES_RELTOL = 1e-14
# wheel increments mod 30 after stripping 2, 3, 5
_WHEEL = (4, 2, 4, 2, 4, 6, 2, 6)


@dataclass(frozen=True)
class Factorization:
    """Prime factorization as ascending (prime, exponent) pairs."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        primes = [p for p, _ in self.pairs]
        if primes != sorted(set(primes)):
            raise DomainError("Factorization: primes must be distinct and ascending")
        if any(e < 1 for _, e in self.pairs):
            raise DomainError("Factorization: exponents must be positive")

    @property
    def n(self) -> int:
        out = 1
        for p, e in self.pairs:
            out *= p**e
        return out

    def __iter__(self):
        return iter(self.pairs)


@dataclass(frozen=True)
class ShiftTuple:
    """The four complex shift parameters (alpha, beta, gamma, delta)."""

    alpha: complex
    beta: complex
    gamma: complex
    delta: complex

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma", "delta"):
            v = complex(getattr(self, name))
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise DomainError(f"ShiftTuple: {name} must be finite")
            if abs(v) > 0.5:
                raise DomainError(f"ShiftTuple: |{name}| = {abs(v):g} exceeds sanity region 0.5")
            object.__setattr__(self, name, v)

    def astuple(self) -> tuple[complex, complex, complex, complex]:
        return (self.alpha, self.beta, self.gamma, self.delta)

    def permuted(self, signs_and_order) -> "ShiftTuple":
        """New tuple from (sign, index) pairs, e.g. ((-1,2),(1,1),(-1,0),(1,3))."""
        vals = self.astuple()
        return ShiftTuple(*(sgn * vals[idx] for sgn, idx in signs_and_order))

    def conjugate(self) -> "ShiftTuple":
        a, b, c, d = self.astuple()
        return ShiftTuple(a.conjugate(), b.conjugate(), c.conjugate(), d.conjugate())

    def pair_sums(self) -> dict[str, complex]:
        a, b, c, d = self.astuple()
        return {
            "alpha+gamma": a + c,
            "alpha+delta": a + d,
            "beta+gamma": b + c,
            "beta+delta": b + d,
        }


@dataclass
class DirichletCoefficients:
    """Finite complex coefficient sequence, 1-indexed, zero beyond support_bound."""

    values: np.ndarray
    support_bound: int = field(default=0)

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.complex128).ravel()
        if vals.size == 0:
            vals = np.zeros(1, dtype=np.complex128)
        self.values = vals
        if self.support_bound == 0:
            self.support_bound = int(vals.size)
        if self.support_bound < 1:
            raise DomainError("DirichletCoefficients: support_bound must be >= 1")
        if vals.size > self.support_bound and np.any(vals[self.support_bound :] != 0):
            raise DomainError("DirichletCoefficients: nonzero value beyond support_bound")

    @classmethod
    def delta_one(cls) -> "DirichletCoefficients":
        return cls(np.array([1.0 + 0.0j]), 1)

    @classmethod
    def unit_block(cls, support: int) -> "DirichletCoefficients":
        return cls(np.ones(support, dtype=np.complex128), support)

    def __getitem__(self, n: int) -> complex:
        if n < 1:
            raise DomainError("coefficients are 1-indexed")
        if n > self.values.size:
            return 0.0 + 0.0j
        return complex(self.values[n - 1])

    def polynomial(self, s) -> complex:
        """The finite Dirichlet sum  sum_n values[n] n^{-s} (s scalar or array)."""
        n = np.arange(1, self.values.size + 1, dtype=np.float64)
        s_arr = np.asarray(s, dtype=np.complex128)
        pow_block = np.exp(-np.multiply.outer(np.atleast_1d(s_arr), np.log(n)))
        out = pow_block @ self.values
        return complex(out[0]) if s_arr.ndim == 0 else out.reshape(s_arr.shape)

    def support_indices(self) -> np.ndarray:
        return 1 + np.flatnonzero(self.values != 0)


def factorize(n: int) -> Factorization:
    """Trial division with a 2-3-5 wheel; supports 1 <= n <= 1e12."""
    if n < 1:
        raise DomainError("factorize: n must be >= 1")
    if n > _FACTORIZE_LIMIT:
        raise DomainError(f"factorize: n > {_FACTORIZE_LIMIT:.0e} unsupported")
    pairs: list[tuple[int, int]] = []
    m = int(n)
    for p in (2, 3, 5):
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            pairs.append((p, e))
    p, wheel_idx = 7, 0
    while p * p <= m:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            pairs.append((p, e))
        p += _WHEEL[wheel_idx]
        wheel_idx = (wheel_idx + 1) % len(_WHEEL)
    if m > 1:
        pairs.append((m, 1))
    return Factorization(tuple(pairs))


@lru_cache(maxsize=100_000)
def _factor_pairs_cached(n: int) -> tuple[tuple[int, int], ...]:
    return factorize(n).pairs


def divisors(n: int) -> list[int]:
    """All positive divisors of n, ascending."""
    divs = [1]
    for p, e in _factor_pairs_cached(n):
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def sigma_shift(n: int, x: complex, y: complex) -> complex:
    """Shifted divisor sum  sum_{d | n} d^{-x} (n/d)^{-y}  (exact finite sum)."""
    if n < 1:
        raise DomainError("sigma_shift: n must be >= 1")
    total = 0.0 + 0.0j
    for d in divisors(n):
        total += d ** (-complex(x)) * (n // d) ** (-complex(y))
    return total


def _expm1c(w):
    """expm1 for complex arguments, accurate near 0 (numpy's expm1 is real-only)."""
    arr = np.atleast_1d(np.asarray(w, dtype=np.complex128))
    out = np.exp(arr) - 1.0
    small = np.abs(arr) < 1e-4
    ws = arr[small]
    out[small] = ws * (1.0 + ws * (0.5 + ws * (1.0 / 6.0 + ws / 24.0)))
    return out[0] if np.ndim(w) == 0 else out.reshape(np.shape(w))


def _sigma_prime_power(p: float, j, x: complex, y: complex):
    """sigma_shift(p^j, x, y) for integer arrays j >= 0, vectorized.

    Cancellation-free geometric form
        p^{-y j} * expm1((j+1) w) / expm1(w),   w = (y - x) log p,
    with the confluent limit (j+1) p^{-x j} at w = 0.
    """
    j = np.asarray(j, dtype=np.float64)
    logp = np.log(p)
    w = (complex(y) - complex(x)) * logp
    if w == 0:
        return (j + 1.0) * np.exp(-complex(x) * logp * j)
    return np.exp(-complex(y) * logp * j) * _expm1c((j + 1.0) * w) / _expm1c(w)


def local_euler_factor(p: int, x: complex, y: complex, z: complex) -> complex:
    """The three-factor local density

        (1 - p^{-1-x}) (1 - p^{-1-y}) / (1 - p^{-2-z}).

    Raises PoleError when the denominator vanishes (p^{2+z} = 1).
    """
    denom = 1.0 - p ** (-2.0 - complex(z))
    if abs(denom) < 1e-15:
        raise PoleError(f"local_euler_factor: denominator zero at p={p}, z={z}")
    return (1.0 - p ** (-1.0 - complex(x))) * (1.0 - p ** (-1.0 - complex(y))) / denom


def twist_local_factor(p: int, nu: int, shifts: ShiftTuple, s) -> complex:
    """Per-prime series ratio attached to p^nu || a:

        sum_j sigma_{ab}(p^j) sigma_{cd}(p^{j+nu}) p^{-j(1+2s)}
        -------------------------------------------------------
        sum_j sigma_{ab}(p^j) sigma_{cd}(p^{j})    p^{-j(1+2s)}

    Both series converge geometrically for Re(1+2s) > small; terms are summed
    until the running increment drops below 1e-14 of the partial sum.
    Vectorized over s. Returns exactly 1 for nu = 0.
    """
    if nu < 0:
        raise DomainError("twist_local_factor: nu must be >= 0")
    s_arr = np.asarray(s, dtype=np.complex128)
    scalar = s_arr.ndim == 0
    s_vec = np.atleast_1d(s_arr)
    if nu == 0:
        ones = np.ones_like(s_vec)
        return complex(ones[0]) if scalar else ones.reshape(s_arr.shape)

    a, b, c, d = shifts.astuple()
    ratio_mod = float(np.max(np.abs(p ** (-(1.0 + 2.0 * s_vec)))))
    shift_bulge = p ** (2 * max(abs(a), abs(b), abs(c), abs(d)))
    if ratio_mod * shift_bulge >= 0.999:
        raise DomainError(
            f"twist_local_factor: series divergent at p={p} (|p^-(1+2s)| ~ {ratio_mod:g})"
        )

    x = p ** (-(1.0 + 2.0 * s_vec))
    num = np.zeros_like(s_vec)
    den = np.zeros_like(s_vec)
    xj = np.ones_like(s_vec)
    for j in range(10_000):
        sab = _sigma_prime_power(p, j, a, b)
        num_t = sab * _sigma_prime_power(p, j + nu, c, d) * xj
        den_t = sab * _sigma_prime_power(p, j, c, d) * xj
        num += num_t
        den += den_t
        xj = xj * x
        if j >= 2 and (
            np.max(np.abs(num_t)) <= _SERIES_RELTOL * max(np.max(np.abs(num)), 1e-300)
            and np.max(np.abs(den_t)) <= _SERIES_RELTOL * max(np.max(np.abs(den)), 1e-300)
        ):
            break
    out = num / den
    return complex(out[0]) if scalar else out.reshape(s_arr.shape)


def twist_euler_factor(a: int, shifts: ShiftTuple, s=0.0) -> complex:
    """Product of twist_local_factor over the factorization of a; 1 at a = 1."""
    if a < 1:
        raise DomainError("twist_euler_factor: a must be >= 1")
    s_arr = np.asarray(s, dtype=np.complex128)
    out = np.ones_like(np.atleast_1d(s_arr))
    for p, nu in _factor_pairs_cached(a):
        out = out * np.atleast_1d(twist_local_factor(p, nu, shifts, s_arr))
    return complex(out[0]) if s_arr.ndim == 0 else out.reshape(s_arr.shape)


def divisor_local_sum(a: int, shifts: ShiftTuple, u, v, s) -> complex:
    """Divisor sum of local density products attached to a:

        sum_{l | a} l^{-gamma+delta-2v-s}
            prod_{p | a/l} local_euler_factor(p, w+2u+2v+s, gamma-delta+2v, w+2u+2v)

    where w = alpha-beta+gamma-delta. Exact finite sum; vectorized over
    (u, v, s) broadcast together.
    """
    if a < 1:
        raise DomainError("divisor_local_sum: a must be >= 1")
    al, be, ga, de = shifts.astuple()
    u_a, v_a, s_a = (np.asarray(t, dtype=np.complex128) for t in (u, v, s))
    shape = np.broadcast_shapes(u_a.shape, v_a.shape, s_a.shape)
    scalar = shape == ()
    u_b, v_b, s_b = (np.broadcast_to(t, shape).ravel() for t in (u_a, v_a, s_a))
    w = al - be + ga - de

    total = np.zeros(max(u_b.size, 1), dtype=np.complex128)
    for ell in divisors(a):
        term = np.exp((-ga + de - 2.0 * v_b - s_b) * np.log(ell)) if ell > 1 else np.ones_like(total)
        rest = a // ell
        for p, _ in _factor_pairs_cached(rest):
            x_arg = w + 2.0 * u_b + 2.0 * v_b + s_b
            y_arg = ga - de + 2.0 * v_b
            z_arg = w + 2.0 * u_b + 2.0 * v_b
            denom = 1.0 - np.exp((-2.0 - z_arg) * np.log(p))
            if np.any(np.abs(denom) < 1e-15):
                raise PoleError(f"divisor_local_sum: local factor pole at p={p}")
            term = term * (
                (1.0 - np.exp((-1.0 - x_arg) * np.log(p)))
                * (1.0 - np.exp((-1.0 - y_arg) * np.log(p)))
                / denom
            )
        total += term
    return complex(total[0]) if scalar else total.reshape(shape)


def divisor_local_sum_pair(a: int, b: int, shifts: ShiftTuple, u, v, s) -> complex:
    """Product of divisor_local_sum for a and for b with swapped shift roles:

        eta_a(a; alpha,beta,gamma,delta) * eta_a(b; gamma,delta,alpha,beta)

    Requires gcd(a, b) = 1.
    """
    if math.gcd(a, b) != 1:
        raise DomainError(f"divisor_local_sum_pair: gcd({a},{b}) != 1")
    swapped = ShiftTuple(shifts.gamma, shifts.delta, shifts.alpha, shifts.beta)
    return divisor_local_sum(a, shifts, u, v, s) * divisor_local_sum(b, swapped, u, v, s)
