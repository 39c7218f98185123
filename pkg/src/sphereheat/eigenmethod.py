"""Closed-form route for first-coordinate moments via eigen-polynomials.

The one-variable operator D = d^2 - (1-2/N) x d - (1/N)(x d)^2 is
diagonalized by a family of monic polynomials p_n with exact rational
coefficients and eigenvalues lambda_n = -n (1 + (n-2)/N).  Expanding a
monomial over that family, applying exp((t/2) D) eigenvalue by eigenvalue,
and evaluating at sqrt(N) yields finite-N moments in closed form, kept
symbolic as sums of rationals times exp(-s t/2) exp(q t/(2N)) N^(p/2) until
the final evaluation.

The module also carries the 1/N power-series machinery for the rational
factor t0(h) that drives the large-N moment analysis, and the limiting
moment formula itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import mpmath

from .gaussian_limit import even_moment_factor, var_first
from .operators import SphereConfig, build_D
from .polyalg import Polynomial


class DegenerateParameterError(ValueError):
    """Sphere parameter too small for the closed-form machinery."""


def falling(z, j: int) -> Fraction:
    """Falling factorial z (z-1) ... (z-j+1), exact."""
    if j < 0:
        raise ValueError("j must be >= 0")
    out = Fraction(1)
    z = Fraction(z)
    for i in range(j):
        out *= z - i
    return out


def rising(z, j: int) -> Fraction:
    """Rising factorial z (z+1) ... (z+j-1), exact."""
    if j < 0:
        raise ValueError("j must be >= 0")
    out = Fraction(1)
    z = Fraction(z)
    for i in range(j):
        out *= z + i
    return out


def _require_regular_n(N: int) -> None:
    if N < 3:
        raise DegenerateParameterError(
            f"N={N} is rejected for the closed-form route; use N >= 3"
        )


def eigenvalue(n: int, N: int) -> Fraction:
    """Exact eigenvalue lambda_n = -n (1 + (n-2)/N) of degree n."""
    return Fraction(-n * (N + n - 2), N)


def eigenvalues_distinct(ell: int, N: int) -> bool:
    """Whether lambda_0 ... lambda_ell are pairwise distinct."""
    vals = [eigenvalue(n, N) for n in range(ell + 1)]
    return len(set(vals)) == len(vals)


@dataclass(frozen=True)
class EigenPolynomial:
    """Monic degree-n polynomial diagonalizing D, with its eigenvalue.

    ``coeffs[j]`` is the exact coefficient of x^(n-2j); the leading
    coefficient is one.  The eigen-relation D p = lambda p is re-verified
    exactly on construction.
    """

    n: int
    N: int
    coeffs: tuple[Fraction, ...]
    eigenvalue: Fraction

    def polynomial(self) -> Polynomial:
        return Polynomial(
            1, {(self.n - 2 * j,): c for j, c in enumerate(self.coeffs)}
        )


def _falling_denominator(z: Fraction, j: int, N: int) -> Fraction:
    d = falling(z, j)
    if d == 0:
        raise DegenerateParameterError(
            f"vanishing falling-factorial denominator at N={N}"
        )
    return d


@lru_cache(maxsize=None)
def eigen_poly(n: int, N: int) -> EigenPolynomial:
    """Eigen-polynomial p_n of D for sphere parameter N (memoized).

    p_n(x) = sum_j (-N/4)^j  n^(2j falling) / (j! (N/2 + n - 2)^(j falling))
             x^(n-2j).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    _require_regular_n(N)
    half_n = Fraction(N, 2)
    coeffs = []
    for j in range(n // 2 + 1):
        num = Fraction(-N, 4) ** j * falling(n, 2 * j)
        den = math.factorial(j) * _falling_denominator(half_n + n - 2, j, N)
        coeffs.append(num / den)
    p = EigenPolynomial(n=n, N=N, coeffs=tuple(coeffs), eigenvalue=eigenvalue(n, N))
    poly = p.polynomial()
    if build_D(N, n).apply(poly) != p.eigenvalue * poly:
        raise AssertionError(f"eigen-relation failed for n={n}, N={N}")
    return p


def eigen_poly_at_sqrtN(n: int, N: int) -> Fraction:
    """Exact normalized value p_n(sqrt(N)) / N^(n/2).

    Computed directly from the coefficients and cross-validated against the
    hypergeometric product form; the two must agree exactly.
    """
    p = eigen_poly(n, N)
    direct = sum((c * Fraction(N) ** -j for j, c in enumerate(p.coeffs)), Fraction(0))
    product = pw_product_form(n, N)
    if direct != product:
        raise AssertionError(
            f"product form disagrees with direct evaluation at n={n}, N={N}"
        )
    return direct


def pw_product_form(n: int, N: int) -> Fraction:
    """Product form of p_n(sqrt(N)) / N^(n/2):
    ((N-1)/2)^(floor(n/2) rising) / (N/2 + n - 2)^(floor(n/2) falling).
    """
    _require_regular_n(N)
    half = n // 2
    den = _falling_denominator(Fraction(N, 2) + n - 2, half, N)
    return rising(Fraction(N - 1, 2), half) / den


def pw_simplified_form(n: int, N: int) -> Fraction:
    """The compact form (N-1)^(n rising) / (2^n (N/2)^(n rising)) of
    p_n(sqrt(N)) / N^(n/2).

    This form does not match direct evaluation for n >= 1 (already p_1
    gives (N-1)/N instead of 1); in fact it reproduces the direct value of
    degree n+1 exactly, i.e. it telescopes a ratio that is shifted by one
    degree.  It is exposed solely so the mismatch can be reported; all
    computation uses :func:`pw_product_form`.
    """
    return rising(N - 1, n) / (2**n * rising(Fraction(N, 2), n))


@dataclass(frozen=True)
class PwDiscrepancy:
    n: int
    direct: Fraction
    simplified: Fraction

    @property
    def matches(self) -> bool:
        return self.direct == self.simplified


def pw_discrepancy_report(n_max: int, N: int) -> list[PwDiscrepancy]:
    """Compare the direct evaluation with the simplified form for n <= n_max."""
    return [
        PwDiscrepancy(n, eigen_poly_at_sqrtN(n, N), pw_simplified_form(n, N))
        for n in range(n_max + 1)
    ]


def evaluation_ratio(n: int, N: int) -> Fraction:
    """Directly computed ratio p_(n+1)(sqrt N) / (sqrt(N) p_n(sqrt N)).

    Equals (N + n - 2) / (N + 2n - 2) for every n >= 0, one rational
    expression regardless of the parity of n.
    """
    return eigen_poly_at_sqrtN(n + 1, N) / eigen_poly_at_sqrtN(n, N)


def monomial_in_eigenbasis(n: int, N: int) -> tuple[Fraction, ...]:
    """Coefficients c_j with x^n = sum_j c_j p_(n-2j), exact.

    c_j = (N/4)^j n^(2j falling) / (j! (N/2 + n - j - 1)^(j falling)).
    The reconstruction is verified exactly before returning.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    _require_regular_n(N)
    coeffs = []
    for j in range(n // 2 + 1):
        num = Fraction(N, 4) ** j * falling(n, 2 * j)
        den = math.factorial(j) * _falling_denominator(
            Fraction(N, 2) + n - j - 1, j, N
        )
        coeffs.append(num / den)
    recon = Polynomial.zero(1)
    for j, c in enumerate(coeffs):
        recon = recon + c * eigen_poly(n - 2 * j, N).polynomial()
    if recon != Polynomial.monomial((n,)):
        raise AssertionError(f"eigenbasis reconstruction failed for n={n}, N={N}")
    return tuple(coeffs)


# ----------------------------------------------------------------------
# finite-N first-coordinate moments
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteMomentX1:
    """Symbolic finite-N moment of x1^n.

    ``terms`` maps integer triples (s, q, p) to exact rational weights; the
    moment is  sum  weight * exp(-s t/2) * exp(q t/(2N)) * N^(p/2).
    Transcendental factors enter only at evaluation time.
    """

    n: int
    N: int
    terms: dict[tuple[int, int, int], Fraction]

    def evaluate(self, t: float) -> float:
        """Numeric value of the moment.

        The sum cancels terms of size ~ N^(n/2) down to an O(1) result, so
        it is always carried out at 50 significant digits before rounding
        to float; plain double arithmetic would lose ~ 1e-8 at n = 8.
        """
        return self.evaluate_extended(t)

    def evaluate_double(self, t: float) -> float:
        """Double-precision evaluation (compensated sum, no extra digits)."""
        vals = [
            float(w) * math.exp(-0.5 * s * t + 0.5 * q * t / self.N) * self.N ** (0.5 * p)
            for (s, q, p), w in sorted(self.terms.items())
        ]
        return math.fsum(vals)

    def evaluate_extended(self, t: float, dps: int = 50) -> float:
        with mpmath.workdps(dps):
            tt = mpmath.mpf(t)
            total = mpmath.mpf(0)
            for (s, q, p), w in sorted(self.terms.items()):
                weight = mpmath.mpf(w.numerator) / w.denominator
                total += (
                    weight
                    * mpmath.exp(-s * tt / 2 + mpmath.mpf(q) * tt / (2 * self.N))
                    * mpmath.mpf(self.N) ** (mpmath.mpf(p) / 2)
                )
            return float(total)


def finite_moment_x1(n: int, N: int) -> FiniteMomentX1:
    """Assemble the exact finite-N moment of x1^n through the eigenbasis.

    Expand (x - m)^n binomially, convert each power of x to the eigenbasis,
    scale each eigen-component by exp(t lambda /2), and evaluate at sqrt(N).
    Each drift power contributes m^i = N^(i/2) exp(-i t/2) exp(i t/(2N)).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    _require_regular_n(N)
    if not eigenvalues_distinct(n, N):
        raise DegenerateParameterError(f"repeated eigenvalues at N={N}, n={n}")
    terms: dict[tuple[int, int, int], Fraction] = {}
    for i in range(n + 1):
        binom = Fraction(math.comb(n, i)) * (-1) ** i
        for j, c in enumerate(monomial_in_eigenbasis(n - i, N)):
            d = n - i - 2 * j
            weight = binom * c * eigen_poly_at_sqrtN(d, N)
            key = (i + d, i - d * (d - 2), i + d)
            terms[key] = terms.get(key, Fraction(0)) + weight
    terms = {k: w for k, w in terms.items() if w}
    return FiniteMomentX1(n=n, N=N, terms=terms)


def heat_moment_x1_eigen(n: int, cfg: SphereConfig) -> float:
    """Finite-N heat-kernel moment of x1^n by the eigen route."""
    if n > cfg.ell:
        raise ValueError(f"degree {n} exceeds configured cap {cfg.ell}")
    return finite_moment_x1(n, cfg.N).evaluate(cfg.t)


def limit_moment_x1(n: int, t: float) -> float:
    """Large-N limit of the x1^n moment:
    (n-1)!! (1 - e^{-t} - t e^{-t})^(n/2) for even n, zero for odd n.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n % 2:
        return 0.0
    return even_moment_factor(n) * var_first(t) ** (n // 2)


# ----------------------------------------------------------------------
# the t0(h) factor and its 1/N power series
# ----------------------------------------------------------------------


def t0_exact(j: int, h: int, N: int) -> Fraction:
    """Exact rational t0(h) = (N-1)^(h rising) / (2^h (N/2)^((h+j) rising))."""
    if j < 0 or h < 0:
        raise ValueError("j and h must be >= 0")
    if N < 2:
        raise ValueError("N must be >= 2")
    return rising(N - 1, h) / (2**h * rising(Fraction(N, 2), h + j))


def _poly_eval_frac(coeffs: Sequence[Fraction], x) -> Fraction:
    out = Fraction(0)
    for c in reversed(list(coeffs)):
        out = out * x + c
    return out


def _interpolate(points: Sequence[tuple[int, Fraction]]) -> tuple[Fraction, ...]:
    """Exact Lagrange interpolation through the given integer nodes."""
    total = Polynomial.zero(1)
    x = Polynomial.variable(1, 0)
    for xi, yi in points:
        basis = Polynomial.constant(1, Fraction(1))
        denom = Fraction(1)
        for xj, _ in points:
            if xj == xi:
                continue
            basis = basis * (x - Polynomial.constant(1, Fraction(xj)))
            denom *= Fraction(xi - xj)
        total = total + (yi / denom) * basis
    degree = total.degree()
    return tuple(total.coefficient((d,)) for d in range(degree + 1))


def _initial_constants(j: int, order: int) -> list[Fraction]:
    """Coefficients of t0(0) * N^j = 2^j prod_i (1 + 2i/N)^(-1) in powers 1/N."""
    series = [Fraction(1)] + [Fraction(0)] * order
    for i in range(j):
        # multiply by the geometric series of (1 + 2i/N)^(-1)
        factor = [Fraction((-2 * i) ** s) for s in range(order + 1)]
        series = [
            sum(series[r] * factor[s - r] for r in range(s + 1))
            for s in range(order + 1)
        ]
    return [Fraction(2**j) * c for c in series]


@dataclass(frozen=True)
class SeriesCoefficients:
    """Polynomials u_0 ... u_L with t0(h) = sum_l u_l(h) / N^(l+j).

    Each ``u[l]`` is a coefficient tuple (ascending powers of h) of a
    polynomial of degree 2l with leading coefficient (-1)^l 2^(j-l) / l!.
    The family satisfies, order by order in 1/N, the exact recurrence
    (N + 2h + 2j) t0(h+1) = (N + h - 1) t0(h) obeyed by t0 itself:

        u_l(h+1) - u_l(h) = (h-1) u_(l-1)(h) - (2h + 2j) u_(l-1)(h+1).
    """

    j: int
    u: tuple[tuple[Fraction, ...], ...]

    @property
    def order(self) -> int:
        return len(self.u) - 1

    def u_value(self, ell: int, h: int) -> Fraction:
        return _poly_eval_frac(self.u[ell], Fraction(h))

    def leading_coefficient(self, ell: int) -> Fraction:
        return self.u[ell][-1]

    def partial_sum(self, h: int, N: int, upto: int | None = None) -> Fraction:
        """Exact partial sum sum_(l<=upto) u_l(h) / N^(l+j)."""
        upto = self.order if upto is None else upto
        if upto > self.order:
            raise ValueError("requested order exceeds computed coefficients")
        total = Fraction(0)
        for ell in range(upto + 1):
            total += self.u_value(ell, h) / Fraction(N) ** (ell + self.j)
        return total


def t0_series(j: int, L: int) -> SeriesCoefficients:
    """Compute the 1/N expansion coefficients u_0 ... u_L of t0(h).

    Values of each u_l on 0..2l are generated from the recurrence, with the
    additive constant fixed by the exact expansion of t0(0); Lagrange
    interpolation recovers the polynomial, which is then re-verified
    against the recurrence at extra points.
    """
    if j < 0 or L < 0:
        raise ValueError("j and L must be >= 0")
    init = _initial_constants(j, L)
    polys: list[tuple[Fraction, ...]] = []
    for ell in range(L + 1):
        if ell == 0:
            polys.append((init[0],))
            continue
        prev = polys[ell - 1]
        npts = 2 * ell + 4  # degree 2*ell plus verification slack
        values = [init[ell]]
        for h in range(npts - 1):
            step = (
                (h - 1) * _poly_eval_frac(prev, Fraction(h))
                - (2 * h + 2 * j) * _poly_eval_frac(prev, Fraction(h + 1))
            )
            values.append(values[-1] + step)
        coeffs = _interpolate(list(enumerate(values[: 2 * ell + 1])))
        for h in range(2 * ell + 1, npts):
            if _poly_eval_frac(coeffs, Fraction(h)) != values[h]:
                raise AssertionError(
                    f"u_{ell} is not a degree-{2 * ell} polynomial (j={j})"
                )
        polys.append(coeffs)
    return SeriesCoefficients(j=j, u=tuple(polys))
