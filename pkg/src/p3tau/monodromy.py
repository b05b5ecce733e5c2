"""Algebraic maps between the parameterizations of a Painlevé III solution.

A solution of u'' + u'/x + sin u = 0 is labelled in several equivalent ways:

* Cauchy data (alpha, beta): u ~ alpha ln x + beta as x -> 0,
* monodromy data (sigma, eta),
* Stokes multipliers (p, q),
* oscillation data (b+, b-, nu) of the x -> infinity tail.

All multivalued expressions use principal logarithms. The component of
solution space handled here is the one with |Im nu| < 1/2.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from .errors import SingularValueError, ValidationError
from .specfun import log_gamma

__all__ = [
    "CauchyData",
    "MonodromyData",
    "StokesData",
    "AsymptoticData",
    "RhoValue",
    "Check",
    "ValidityReport",
    "MARGIN_FLOOR",
    "cauchy_from_monodromy",
    "cauchy_to_monodromy",
    "stokes_from_monodromy",
    "monodromy_from_stokes",
    "nu_from_monodromy",
    "amplitudes_from_monodromy",
    "rho_from_monodromy",
    "validate",
    "require_valid",
]

PI = math.pi
LN8 = math.log(8.0)
# margins smaller than this are treated as violations
MARGIN_FLOOR = 1e-10
_DEGENERATE_SIN = 1e-14


@dataclass(frozen=True)
class CauchyData:
    """Small-x data: u(x) = alpha ln x + beta + o(1)."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        if not abs(self.alpha.imag) < 2.0:
            raise ValidationError(f"|Im alpha| = {abs(self.alpha.imag)} must be < 2", condition="|Im alpha| < 2")


@dataclass(frozen=True)
class MonodromyData:
    """Monodromy coordinates (sigma, eta). Validity is checked by :func:`validate`."""

    sigma: complex
    eta: complex

    def __post_init__(self):
        object.__setattr__(self, "sigma", complex(self.sigma))
        object.__setattr__(self, "eta", complex(self.eta))


@dataclass(frozen=True)
class StokesData:
    p: complex
    q: complex

    def __post_init__(self):
        object.__setattr__(self, "p", complex(self.p))
        object.__setattr__(self, "q", complex(self.q))


@dataclass(frozen=True)
class AsymptoticData:
    """Large-x data u ~ x^{-1/2}(b+ e^{ix} x^{i nu} + b- e^{-ix} x^{-i nu}).

    ``residual`` is filled in by fits and left as ``None`` for exact values.
    """

    b_plus: complex
    b_minus: complex
    nu: complex
    residual: float | None = None


@dataclass(frozen=True)
class RhoValue:
    rho: complex


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    margin: float


@dataclass(frozen=True)
class ValidityReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]


def _sin2pi(z: complex) -> complex:
    return cmath.sin(2.0 * PI * z)


def cauchy_from_monodromy(m: MonodromyData) -> CauchyData:
    """alpha = i(2 - 8 sigma); beta from the Gamma-ratio connection formula."""
    require_valid(m)
    s, e = m.sigma, m.eta
    alpha = 1j * (2.0 - 8.0 * s)
    log_ratio = log_gamma(1.0 - 2.0 * s) - log_gamma(2.0 * s)
    beta = -PI + 4.0 * PI * e - 1j * (2.0 - 8.0 * s) * LN8 - 2j * log_ratio
    return CauchyData(alpha, beta)


def cauchy_to_monodromy(c: CauchyData) -> MonodromyData:
    """Inverse of :func:`cauchy_from_monodromy`."""
    a, b = c.alpha, c.beta
    sigma = 0.25 + 0.125j * a
    log_ratio = log_gamma(0.5 - 0.25j * a) - log_gamma(0.5 + 0.25j * a)
    eta = 0.25 + (b + a * LN8) / (4.0 * PI) + 0.5j / PI * log_ratio
    m = MonodromyData(sigma, eta)
    require_valid(m)
    return m


def stokes_from_monodromy(m: MonodromyData) -> StokesData:
    s, e = m.sigma, m.eta
    se = _sin2pi(e)
    if abs(se) < _DEGENERATE_SIN:
        raise ValidationError("sin 2 pi eta vanishes", condition="sin 2 pi eta != 0", margin=abs(se))
    p = -1j * _sin2pi(s + e) / se
    q = 1j * _sin2pi(s - e) / se
    return StokesData(p, q)


def monodromy_from_stokes(st: StokesData, near: complex | None = None) -> MonodromyData:
    """Invert the Stokes map.

    p + q = -2i cos 2 pi sigma fixes sigma with 0 <= Re sigma <= 1/2; then
    cot 2 pi eta = i(p - q)/(2 sin 2 pi sigma) fixes eta modulo 1/2. The
    representative with 0 < Re eta < 1/2 is returned unless ``near`` asks
    for the one closest to a reference value.
    """
    p, q = st.p, st.q
    sigma = cmath.acos(0.5j * (p + q)) / (2.0 * PI)
    ss = _sin2pi(sigma)
    if abs(ss) < _DEGENERATE_SIN:
        raise ValidationError("sin 2 pi sigma vanishes", condition="0 < Re sigma < 1/2")
    c = 0.5j * (p - q) / ss
    eta = 0.25 - cmath.atan(c) / (2.0 * PI)
    if near is not None:
        eta += 0.5 * round(((complex(near) - eta) / 0.5).real)
    return MonodromyData(sigma, eta)


def nu_from_monodromy(m: MonodromyData) -> complex:
    """nu = (1/pi) log(sin 2 pi eta / sin 2 pi sigma), so that |Im nu| < 1/2."""
    s, e = m.sigma, m.eta
    se, ss = _sin2pi(e), _sin2pi(s)
    if abs(se) < _DEGENERATE_SIN or abs(ss) < _DEGENERATE_SIN:
        raise ValidationError("sin 2 pi eta or sin 2 pi sigma vanishes", condition="sin 2 pi eta != 0")
    ratio = se / ss
    arg = cmath.phase(ratio)
    if abs(arg) >= PI / 2:
        raise ValidationError(
            f"|arg(sin 2 pi eta / sin 2 pi sigma)| = {abs(arg):.6g} >= pi/2",
            condition="|arg(sin 2 pi eta / sin 2 pi sigma)| < pi/2",
            margin=PI / 2 - abs(arg),
        )
    return cmath.log(ratio) / PI


def amplitudes_from_monodromy(m: MonodromyData) -> AsymptoticData:
    """Amplitudes b+ and b- of the oscillatory tail from the connection formulae."""
    s, e = m.sigma, m.eta
    nu = nu_from_monodromy(m)
    se = _sin2pi(e)
    ln2 = math.log(2.0)
    common = -cmath.exp(PI * nu / 2.0) / math.sqrt(2.0 * PI)
    bp = (
        common
        * cmath.exp(-0.25j * PI + (1.0 + 2j * nu) * ln2 + log_gamma(1.0 - 1j * nu))
        * _sin2pi(s - e)
        / se
    )
    bm = (
        common
        * cmath.exp(0.25j * PI + (1.0 - 2j * nu) * ln2 + log_gamma(1.0 + 1j * nu))
        * _sin2pi(s + e)
        / se
    )
    return AsymptoticData(bp, bm, nu)


def rho_from_monodromy(m: MonodromyData) -> RhoValue:
    """rho = (i/4pi) log(sin 2pi(sigma+eta) / sin 2pi eta), principal branch."""
    s, e = m.sigma, m.eta
    num = _sin2pi(s + e)
    if abs(num) < _DEGENERATE_SIN:
        raise SingularValueError(
            "sin 2 pi (sigma + eta) vanishes: rho is logarithmically singular",
            condition="sin 2 pi (sigma + eta) != 0",
            margin=abs(num),
        )
    se = _sin2pi(e)
    if abs(se) < _DEGENERATE_SIN:
        raise ValidationError("sin 2 pi eta vanishes", condition="sin 2 pi eta != 0")
    return RhoValue(0.25j / PI * cmath.log(num / se))


def _distance_to_imaginary_rays(z: complex) -> float:
    # distance from z to (-i inf, -2i] U [2i, i inf)
    if abs(z.imag) >= 2.0:
        return abs(z.real)
    return math.hypot(z.real, 2.0 - abs(z.imag))


def _distance_to_negative_ray(z: complex) -> float:
    # distance from z to (-inf, -1]
    if z.real <= -1.0:
        return abs(z.imag)
    return abs(z + 1.0)


def validate(m: MonodromyData) -> ValidityReport:
    """Check every validity inequality and report its margin.

    A check passes when its margin exceeds ``MARGIN_FLOOR``. Checks that
    depend on a failed one are reported as failed with margin 0.
    """
    s, e = m.sigma, m.eta
    checks = [
        Check("Re sigma > 0", s.real > MARGIN_FLOOR, s.real),
        Check("Re sigma < 1/2", 0.5 - s.real > MARGIN_FLOOR, 0.5 - s.real),
    ]
    se, ss = _sin2pi(e), _sin2pi(s)
    checks.append(Check("sin 2 pi eta != 0", abs(se) > MARGIN_FLOOR, abs(se)))
    if abs(se) <= MARGIN_FLOOR or abs(ss) <= MARGIN_FLOOR:
        for name in ("|arg(sin 2 pi eta / sin 2 pi sigma)| < pi/2", "1 + pq != 0",
                     "p + q off the imaginary rays |Im| >= 2", "pq not in (-inf, -1]"):
            checks.append(Check(name, False, 0.0))
        return ValidityReport(checks)
    arg_margin = PI / 2 - abs(cmath.phase(se / ss))
    checks.append(Check("|arg(sin 2 pi eta / sin 2 pi sigma)| < pi/2", arg_margin > MARGIN_FLOOR, arg_margin))
    p = -1j * _sin2pi(s + e) / se
    q = 1j * _sin2pi(s - e) / se
    one_pq = abs(1.0 + p * q)
    checks.append(Check("1 + pq != 0", one_pq > MARGIN_FLOOR, one_pq))
    d = _distance_to_imaginary_rays(p + q)
    checks.append(Check("p + q off the imaginary rays |Im| >= 2", d > MARGIN_FLOOR, d))
    d = _distance_to_negative_ray(p * q)
    checks.append(Check("pq not in (-inf, -1]", d > MARGIN_FLOOR, d))
    return ValidityReport(checks)


def require_valid(m: MonodromyData) -> None:
    """Raise :class:`ValidationError` naming the first failed inequality."""
    report = validate(m)
    if not report.ok:
        bad = report.failures()[0]
        raise ValidationError(
            f"monodromy data (sigma={m.sigma}, eta={m.eta}) violate '{bad.name}' (margin {bad.margin:.3g})",
            condition=bad.name,
            margin=bad.margin,
        )
