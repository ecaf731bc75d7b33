"""Bartholdi's lower bound on the spectral radius of the genus-g surface group.

Two steps:

1. ``zeta``, the largest real root of ``((d x)^(m-1) - 1)(x - 1) + 2(d x - 1)``
   with ``m = d = 4g``;
2. a generating function ``g2(t)`` obtained from the cactus-tree series
   ``H(t, u) = t / (1 + (1 - u)(d - 1 + u) t^2)`` by the substitutions
   ``t -> t z`` and then ``t -> t (d - f) / (d - (d - 1) f)``,
   ``u -> (d - 2) f / (d - f)`` with ``f = 2 d t^m``. The smallest positive
   root ``alpha`` of the numerator of ``g2^2 - 1/(4(d-1))`` gives
   ``rho >= 1 / (d alpha / (1 + (d - 1) alpha^2))``.

The composition is carried out exactly in ``Z[t, u, z]`` (sympy), so common
factors cancel before ``zeta`` is plugged in; everything numeric runs in
an mpmath context at the requested binary precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import mpmath
import sympy

from .errors import NoPositiveRoot, RootNotBracketed
from .surface import _check_genus

DEFAULT_BITS = 256


def _context(bits):
    if bits < 128:
        raise ValueError("precision_bits must be at least 128")
    ctx = mpmath.MPContext()
    ctx.prec = bits
    return ctx


def _horner(coeffs, x):
    """Evaluate a polynomial given by ascending coefficients."""
    acc = 0 * x
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


@dataclass(frozen=True)
class RationalFunction:
    """``numerator / denominator`` with ascending mpmath coefficients."""

    numerator: tuple
    denominator: tuple

    def __post_init__(self):
        if not any(self.denominator):
            raise ZeroDivisionError("denominator is identically zero")

    def __call__(self, x):
        return _horner(self.numerator, x) / _horner(self.denominator, x)

    @property
    def degree(self):
        return len(self.numerator) - 1, len(self.denominator) - 1


def zeta_polynomial(g, ctx) -> list:
    """Ascending coefficients of ``((d x)^(m-1) - 1)(x - 1) + 2(d x - 1)``."""
    d = m = 4 * _check_genus(g)
    c = [ctx.mpf(0)] * (m + 1)
    lead = ctx.mpf(d) ** (m - 1)
    c[m] += lead
    c[m - 1] -= lead
    c[1] += -1 + 2 * d
    c[0] += 1 - 2
    return c


def _refine(coeffs, lo, hi, ctx):
    """Safeguarded Newton on ``[lo, hi]`` with a sign change; bisects whenever
    the Newton step leaves the bracket or fails to halve it."""
    deriv = [k * c for k, c in enumerate(coeffs)][1:]
    flo = _horner(coeffs, lo)
    if flo * _horner(coeffs, hi) > 0:
        raise RootNotBracketed(f"no sign change on [{lo}, {hi}]")
    x = (lo + hi) / 2
    eps = ctx.ldexp(1, -ctx.prec)
    for _ in range(4 * ctx.prec):
        fx = _horner(coeffs, x)
        if fx == 0:
            return x
        if (fx < 0) == (flo < 0):
            lo, flo = x, fx
        else:
            hi = x
        if hi - lo <= eps * abs(x):
            break
        dfx = _horner(deriv, x)
        step = x - fx / dfx if dfx else lo - 1
        x = step if lo < step < hi and abs(step - x) < (hi - lo) / 2 else (lo + hi) / 2
    return x


def _ulp(x, ctx):
    mant, exp = ctx.frexp(x)
    return ctx.ldexp(1, exp - ctx.prec)


def certified_sign_change(coeffs, x, ctx, ulps=1) -> bool:
    step = ulps * _ulp(x, ctx)
    return _horner(coeffs, x - step) * _horner(coeffs, x + step) <= 0


def zeta_root(g: int, precision_bits: int = DEFAULT_BITS):
    """Largest real root of the zeta polynomial, as an mpf of the given
    precision. The root lies in ``(0, 1)``: the polynomial is positive on
    ``[1, oo)`` and negative just below 1."""
    ctx = _context(precision_bits)
    coeffs = zeta_polynomial(g, ctx)
    with ctx.workprec(precision_bits + 32):
        k = 1
        while _horner(coeffs, 1 - ctx.ldexp(1, -k)) >= 0:
            k += 1
            if k > precision_bits:
                raise RootNotBracketed("no negative value below 1")
        root = _refine(coeffs, 1 - ctx.ldexp(1, -k), ctx.mpf(1), ctx)
    root = +root
    if not certified_sign_change(coeffs, root, ctx, ulps=2):
        raise RootNotBracketed("sign change not confirmed at the working precision")
    return root


@lru_cache(maxsize=None)
def _symbolic_numerator(g):
    """Integer coefficients ``{(i, j): c}`` of the reduced numerator in
    ``t^i z^j``, and the same for the reduced ``g2``."""
    d = m = 4 * g
    t, u, z = sympy.symbols("t u z")
    f = 2 * d * t**m
    h = t / (1 + (1 - u) * (d - 1 + u) * t**2)
    g1 = h.subs(t, t * z)
    g2 = sympy.cancel(g1.subs({t: t * (d - f) / (d - (d - 1) * f),
                               u: (d - 2) * f / (d - f)}, simultaneous=True))
    target = sympy.cancel(g2**2 - sympy.Rational(1, 4 * (d - 1)))
    terms = lambda e: dict(sympy.Poly(e, t, z).terms())
    g2_num, g2_den = sympy.fraction(g2)
    return terms(sympy.numer(target)), terms(g2_num), terms(g2_den)


def _plug(terms, zeta, ctx):
    deg = max(i for i, _ in terms)
    out = [ctx.mpf(0)] * (deg + 1)
    for (i, j), c in terms.items():
        out[i] += int(c) * zeta**j
    return out


def g2_function(g: int, zeta, ctx) -> RationalFunction:
    """The substituted generating function ``g2`` at the numeric ``zeta``."""
    _, num, den = _symbolic_numerator(_check_genus(g))
    return RationalFunction(tuple(_plug(num, zeta, ctx)), tuple(_plug(den, zeta, ctx)))


def smallest_positive_root(coeffs: Sequence, ctx):
    """Smallest positive real root of a real polynomial.

    All complex roots are located at doubled precision, the leftmost one on
    the positive real axis is bracketed at a relative width of 2^-40 and
    polished by safeguarded Newton in the working precision.
    """
    hp = 2 * ctx.prec
    with ctx.workprec(hp):
        lead = len(coeffs) - 1
        while lead > 0 and coeffs[lead] == 0:
            lead -= 1
        roots = ctx.polyroots(list(reversed(coeffs[:lead + 1])),
                              maxsteps=400, extraprec=hp, error=False)
        tiny = ctx.ldexp(1, -ctx.prec // 4)
        real = sorted(ctx.re(r) for r in roots
                      if abs(ctx.im(r)) <= tiny * max(1, abs(r)) and ctx.re(r) > 0)
    if not real:
        raise NoPositiveRoot("numerator has no positive real root")
    guess = ctx.mpf(real[0])
    width = ctx.ldexp(guess, -40)
    return _refine(list(coeffs), guess - width, guess + width, ctx)


@dataclass(frozen=True)
class BartholdiResult:
    genus: int
    bound: float
    zeta: object
    alpha: object
    precision_bits: int
    bound_mp: object

    def to_json(self):
        return {"genus": self.genus, "bound": self.bound,
                "zeta": mpmath.nstr(self.zeta, 30), "alpha": mpmath.nstr(self.alpha, 30),
                "bound_digits": mpmath.nstr(self.bound_mp, 30),
                "precision_bits": self.precision_bits}


def bartholdi(g: int, precision_bits: int = DEFAULT_BITS) -> BartholdiResult:
    """Bound, zeta and alpha of Bartholdi's estimate for genus ``g``."""
    g = _check_genus(g)
    ctx = _context(precision_bits)
    d = 4 * g
    zeta = zeta_root(g, precision_bits)
    target, _, _ = _symbolic_numerator(g)
    alpha = smallest_positive_root(_plug(target, zeta, ctx), ctx)
    rho = alpha / (1 + (d - 1) * alpha**2)
    bound = 1 / (d * rho)
    return BartholdiResult(g, float(bound), zeta, alpha, precision_bits, bound)


def bartholdi_lower(g: int, precision_bits: int = DEFAULT_BITS) -> float:
    """Bartholdi's lower bound on the spectral radius for genus ``g``."""
    return bartholdi(g, precision_bits).bound
