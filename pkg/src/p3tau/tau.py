"""Tau-function constants: quadrature, action integral, closed form and chi.

With v = x u_x the Hamiltonian is H = v^2/(2x) - x cos u and the tau-function
obeys d ln tau/dx = -H/4. Its two endpoint behaviours

    ln tau ~ (alpha^2/8) ln x + ln C0                        (x -> 0)
    ln tau ~ x^2/8 + 2 nu x + nu^2 ln x + ln C_inf           (x -> inf)

fix ln(C_inf/C0) as the regularized integral of -H/4. This module
evaluates that number three ways: direct quadrature along a trajectory,
the action-integral rewriting, and the Barnes-G closed form.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, ValidationError
from .monodromy import (
    MonodromyData,
    amplitudes_from_monodromy,
    cauchy_from_monodromy,
    nu_from_monodromy,
    require_valid,
)
from .ode import DEFAULT_TOL, DEFAULT_X0, integrate, series_values
from .specfun import log_barnes_g, log_gamma, log_g_hat

__all__ = [
    "HamiltonianSample",
    "TauRatioResult",
    "GeneratingTerms",
    "LOG_C1",
    "hamiltonian",
    "log_tau_ratio_quadrature",
    "log_tau_ratio_action",
    "log_tau_ratio_closed_form",
    "log_ghat_ratio",
    "generating_function_terms",
    "chi_constant",
    "chi_from_ratio",
    "oscillatory_tail",
]

PI = math.pi
LN2 = math.log(2.0)
LN2PI = math.log(2.0 * PI)
LOG_G_HALF = log_barnes_g(0.5)
# c1 = 2^{3/2} e^{-i pi/4} / (pi G(1/2)^4)
LOG_C1 = 1.5 * LN2 - 0.25j * PI - math.log(PI) - 4.0 * LOG_G_HALF

_GAUSS_NODES = 48


@dataclass(frozen=True)
class HamiltonianSample:
    x: float
    H: complex
    v: complex


@dataclass(frozen=True)
class TauRatioResult:
    log_ratio: complex
    error_estimate: float
    method: str
    details: dict = field(default_factory=dict, compare=False)


def hamiltonian(x: float, u: complex, ux: complex) -> HamiltonianSample:
    """H = v^2/(2x) - x cos u with v = x u_x."""
    v = x * ux
    return HamiltonianSample(x, v * v / (2.0 * x) - x * cmath.cos(u), v)


def oscillatory_tail(t: float, nu: complex, b_plus: complex, b_minus: complex) -> complex:
    """Integral over [t, inf) of the oscillatory part of -H/4, to leading order.

    The large-x form of -H/4 - x/4 - 2 nu - nu^2/x is
    (i b+^2/8) e^{2ix} x^{2i nu - 1} - (i b-^2/8) e^{-2ix} x^{-2i nu - 1};
    one integration by parts gives the value returned here, with an error
    of order t^{-2 + 2|Im nu|}.
    """
    lt = math.log(t)
    return -(b_plus**2 * cmath.exp(2j * t + (2j * nu - 1.0) * lt)
             + b_minus**2 * cmath.exp(-2j * t + (-2j * nu - 1.0) * lt)) / 16.0


def _gauss_log(f, lo: float, hi: float, n: int) -> complex:
    # int_lo^hi f(x) dx with Gauss-Legendre nodes in s = ln x
    nodes, weights = np.polynomial.legendre.leggauss(n)
    a, b = math.log(lo), math.log(hi)
    s = 0.5 * (b - a) * nodes + 0.5 * (a + b)
    x = np.exp(s)
    return complex(0.5 * (b - a) * np.sum(weights * f(x) * x))


def _series_integrals(c, t0: float, x0: float) -> tuple[complex, complex, float]:
    """Integrals over [t0, x0] of omega_x + alpha^2/(8x) and of the action
    integrand + alpha^2/(8x), from the seed expansion.

    Returns both values and a quadrature error estimate.
    """
    a = c.alpha

    def kinetic_reg(x):
        # -x u_x^2/8 + alpha^2/(8x) with u_x = alpha/x + w_x, expanded
        u, _, wx = series_values(c, x)
        return u, -(2.0 * a * wx + x * wx * wx) / 8.0

    def omega_reg(x):
        u, k = kinetic_reg(x)
        return k + 0.25 * x * (np.cos(u) - 1.0)

    def action_reg(x):
        u, k = kinetic_reg(x)
        return k - 0.25 * x * np.cos(u)

    if t0 >= x0:
        return 0j, 0j, 0.0
    i1 = _gauss_log(omega_reg, t0, x0, _GAUSS_NODES)
    i2 = _gauss_log(action_reg, t0, x0, _GAUSS_NODES)
    err = max(abs(i1 - _gauss_log(omega_reg, t0, x0, _GAUSS_NODES // 2)),
              abs(i2 - _gauss_log(action_reg, t0, x0, _GAUSS_NODES // 2)))
    return i1, i2, err


def _truncation_at_zero(c, t0: float) -> float:
    """Size of the integral over (0, t0) dropped by the t0 regularization.

    The regularized integrand behaves like x^{1 - |Im alpha|}, whose
    integral is x times the integrand over (2 - |Im alpha|); the x/4 piece
    contributes t0^2/8.
    """
    u, _, wx = series_values(c, np.array([t0]))
    a = c.alpha
    g = -(2.0 * a * wx + t0 * wx * wx) / 8.0 + 0.25 * t0 * (np.cos(u) - 1.0)
    return float(t0 * abs(g[0]) / (2.0 - abs(a.imag)) + t0 * t0 / 8.0)


class _Route:
    """One integration plus the endpoint bookkeeping shared by both routes."""

    def __init__(self, m: MonodromyData, t0: float, t1: float, tol: float, x0: float | None):
        require_valid(m)
        self.c = cauchy_from_monodromy(m)
        self.amps = amplitudes_from_monodromy(m)
        self.nu = self.amps.nu
        self.t0, self.t1 = t0, t1
        self.x0 = DEFAULT_X0 if x0 is None else x0
        self.i_omega, self.i_action, self.quad_err = _series_integrals(self.c, t0, self.x0)
        self.trunc = _truncation_at_zero(self.c, t0)
        self.traj = integrate(self.c, self.x0, t1, tol, stops=(t0, 0.5 * t1))

    def _start(self):
        # state at t0 when the ODE covers it; the running integrals vanish at x0
        if self.t0 >= self.x0:
            return self.traj.evaluate([self.t0])[0]
        return np.zeros(4, dtype=complex)

    def _regular(self, t):
        return -2.0 * self.nu * t - self.nu**2 * math.log(t) + oscillatory_tail(t, self.nu, self.amps.b_plus, self.amps.b_minus)

    def quadrature(self, t: float) -> complex:
        a2 = self.c.alpha ** 2 / 8.0
        q = self.traj.evaluate([t])[0][2] - self._start()[2]
        if self.t0 < self.x0:
            low = self.i_omega - a2 * math.log(self.x0)
        else:
            low = -a2 * math.log(self.t0)
        return low + q - self.t0**2 / 8.0 + self._regular(t)

    def action(self, t: float) -> complex:
        a2 = self.c.alpha ** 2 / 8.0
        y = self.traj.evaluate([t])[0]
        q = y[3] - self._start()[3]
        if self.t0 < self.x0:
            low = self.i_action - a2 * math.log(self.x0)
            u0, ux0, _ = series_values(self.c, np.array([self.t0]))
            start = (complex(u0[0]), complex(ux0[0]))
        else:
            low = -a2 * math.log(self.t0)
            s = self._start()
            start = (s[0], s[1])
        xh_hi = t * hamiltonian(t, y[0], y[1]).H
        xh_lo = self.t0 * hamiltonian(self.t0, *start).H
        return low + q - 0.25 * (xh_hi - xh_lo) - t * t / 8.0 + self._regular(t)


def _run(m, t0, t1, tol, x0, which: str) -> TauRatioResult:
    if not 0.0 < t0 <= 1e-3:
        raise ValidationError(f"t0={t0} must lie in (0, 1e-3]", condition="0 < t0 <= 1e-3")
    if not t1 >= 100.0:
        raise ValidationError(f"t1={t1} must be >= 100", condition="t1 >= 100")
    fine = _Route(m, t0, t1, tol, x0)
    coarse = _Route(m, t0, t1, 2.0 * tol, x0)
    get = (lambda r, t: r.quadrature(t)) if which == "quadrature" else (lambda r, t: r.action(t))
    value = get(fine, t1)
    endpoint = abs(value - get(fine, 0.5 * t1))
    tol_change = abs(value - get(coarse, t1))
    # the leftover beyond t1 decays like 1/t1, for which the t1/2 comparison
    # reproduces the error itself; the factor 2 keeps the bound on the safe side
    estimate = 2.0 * endpoint + fine.trunc + fine.quad_err
    floor = 1e-12 * (1.0 + t1 * t1)
    if tol_change > 10.0 * max(estimate, floor):
        raise ConvergenceError(
            f"{which}: changing tol moved the result by {tol_change:.3g}, more than 10x the estimate {estimate:.3g}",
            tolerance=estimate,
            achieved=tol_change,
        )
    details = {
        "endpoint_change": endpoint,
        "tolerance_change": tol_change,
        "truncation_at_t0": fine.trunc,
        "series_quadrature": fine.quad_err,
        "steps": int(fine.traj.mesh.size - 1),
        "residual_bound": fine.traj.residual_bound,
        "nu": fine.nu,
    }
    return TauRatioResult(complex(value), float(estimate + tol_change), which, details)


def log_tau_ratio_quadrature(m: MonodromyData, t0: float = 1e-4, t1: float = 200.0,
                             tol: float = DEFAULT_TOL, *, x0: float | None = None) -> TauRatioResult:
    """ln(C_inf/C0) as the regularized integral of -H/4 over [t0, t1].

    Computes

        int_{t0}^{t1} (-H/4) dx - t1^2/8 - 2 nu t1 - nu^2 ln t1 - (alpha^2/8) ln t0

    plus the integration-by-parts correction for the oscillatory tail
    beyond t1. Below the seed point x0 the integrand comes from the seed
    expansion: its 1/x part in closed form, the rest by Gauss-Legendre in ln x.

    The error estimate adds twice the change from t1 to t1/2, the change
    from tol to 2 tol, and the size of the dropped piece on (0, t0).

    Raises
    ------
    ConvergenceError
        If the tolerance change exceeds ten times the other contributions.
    """
    return _run(m, t0, t1, tol, x0, "quadrature")


def log_tau_ratio_action(m: MonodromyData, t0: float = 1e-4, t1: float = 200.0,
                         tol: float = DEFAULT_TOL, *, x0: float | None = None) -> TauRatioResult:
    """ln(C_inf/C0) from the action integral.

    Uses x H_x + v u_x = H to write -H/4 = (H - v u_x)/4 - (xH)'/4, so the
    value is

        int (H - v u_x)/4 dx - [xH]/4 - t1^2/8 - 2 nu t1 - nu^2 ln t1 - (alpha^2/8) ln t0

    with the same endpoint handling as :func:`log_tau_ratio_quadrature`.
    """
    return _run(m, t0, t1, tol, x0, "action")


def _log_sinc(z: complex) -> complex:
    if abs(z) < 1e-8:
        return -(PI * z) ** 2 / 6.0
    return cmath.log(cmath.sin(PI * z) / (PI * z))


def log_ghat_ratio(sigma: complex, eta: complex, nu: complex) -> complex:
    """ln of Ĝ(a)/Ĝ(a') with a = sigma+eta+(1-i nu)/2, a' = sigma+eta+(1+i nu)/2.

    Both Ĝ factors have a pole on the line sigma + eta = 1/2 (where nu = 0),
    but the ratio does not. Writing G(eps) = G(1+eps) eps / Gamma(1+eps) for
    eps = 1 - a and eps' = 1 - a', the two small factors combine through
    sin(pi eps)/sin(pi eps') = e^{2 pi i (eta - sigma)} into

        ln(eps'/eps) = ln sinc(eps) - ln sinc(eps') - 2 pi i (eta - sigma),

    which is regular.
    """
    a = sigma + eta + 0.5 * (1.0 - 1j * nu)
    ap = sigma + eta + 0.5 * (1.0 + 1j * nu)
    ea, eap = 1.0 - a, 1.0 - ap
    return (
        log_barnes_g(1.0 + a)
        - log_barnes_g(1.0 + ap)
        - log_barnes_g(1.0 + ea)
        + log_gamma(1.0 + ea)
        + log_barnes_g(1.0 + eap)
        - log_gamma(1.0 + eap)
        - 2j * PI * (eta - sigma)
        + _log_sinc(ea)
        - _log_sinc(eap)
    )


def _closed_pieces(m: MonodromyData):
    s, e = m.sigma, m.eta
    nu = nu_from_monodromy(m)
    gamma = log_gamma(1.0 - 2.0 * s) - log_gamma(2.0 * s)
    gs = log_barnes_g(1.0 + 2.0 * s) + log_barnes_g(1.0 - 2.0 * s)
    gnu = log_barnes_g(1.0 + 1j * nu)
    return s, e, nu, gamma, gs, gnu


def log_tau_ratio_closed_form(m: MonodromyData, form: str = "stable") -> TauRatioResult:
    """ln(C_inf/C0) from the Barnes-G closed form.

    ``form`` selects how the Ĝ ratio is evaluated: ``"stable"`` (default,
    regular across sigma + eta = 1/2), ``"final"`` (difference of log Ĝ
    values) or ``"answer"`` (the four Barnes G factors written out).
    """
    require_valid(m)
    s, e, nu, gamma, gs, gnu = _closed_pieces(m)
    a = s + e + 0.5 * (1.0 - 1j * nu)
    ap = s + e + 0.5 * (1.0 + 1j * nu)
    if form == "stable":
        L = log_ghat_ratio(s, e, nu)
    elif form == "final":
        L = log_g_hat(a) - log_g_hat(ap)
    elif form == "answer":
        L = log_barnes_g(1.0 + a) + log_barnes_g(1.0 - ap) - log_barnes_g(1.0 + ap) - log_barnes_g(1.0 - a)
    else:
        raise ValueError(f"unknown form {form!r}")
    value = (
        LOG_C1
        + 1j * nu * LN2PI
        + (2.0 * nu**2 + 24.0 * s**2 - 12.0 * s) * LN2
        + 2j * PI * (e**2 - 2.0 * s * e - s**2 + 2.0 * e - s)
        + gamma
        + 2.0 * (gnu + gs + L)
    )
    return TauRatioResult(complex(value), 0.0, "closed_form", {"form": form, "nu": nu})


@dataclass(frozen=True)
class GeneratingTerms:
    """Additive pieces of ln(C_inf/C0) - ln c1.

    ``polynomial`` collects the elementary terms, ``gamma_sigma`` and
    ``gamma_nu`` the two Gamma-function integrals, and ``dilog`` the
    contribution of the generating function.
    """

    polynomial: complex
    gamma_sigma: complex
    gamma_nu: complex
    dilog: complex

    @property
    def total(self) -> complex:
        return self.polynomial + self.gamma_sigma + self.gamma_nu + self.dilog


def generating_function_terms(m: MonodromyData) -> GeneratingTerms:
    """Split ln(C_inf/C0) - ln c1 into its elementary, Gamma and dilogarithm parts."""
    require_valid(m)
    s, e, nu, gamma, gs, gnu = _closed_pieces(m)
    L = log_ghat_ratio(s, e, nu)
    polynomial = (
        nu**2 + 4.0 * s - 8.0 * s**2 - 1j * nu + 2j * PI * e
        - 12.0 * s * LN2 + 24.0 * s**2 * LN2 + 0.5j * PI * nu**2 + 2.0 * nu**2 * LN2
    )
    gamma_sigma = gamma - 4.0 * s + 8.0 * s**2 + 2.0 * gs
    gamma_nu = 1j * nu - nu**2 - 1j * nu * LN2PI + 2.0 * gnu
    dilog = (
        -4j * PI * s * e + 2.0 * L + 2j * PI * e**2 - 2j * PI * s**2
        - 0.5j * PI * nu**2 + 2j * nu * LN2PI - 2j * PI * s + 2j * PI * e
    )
    return GeneratingTerms(complex(polynomial), complex(gamma_sigma), complex(gamma_nu), complex(dilog))


def chi_constant(m: MonodromyData) -> complex:
    """chi = (2pi)^{i nu - 1/2} e^{i pi(eta^2 - 2 sigma eta - sigma^2 + eta - sigma - nu^2/4 + 1/8)}
    2^{-1/4} G(1/2)^{-2} Ĝ(a)/Ĝ(a')."""
    require_valid(m)
    s, e = m.sigma, m.eta
    nu = nu_from_monodromy(m)
    log_chi = (
        (1j * nu - 0.5) * LN2PI
        + 1j * PI * (e**2 - 2.0 * s * e - s**2 + e - s - 0.25 * nu**2 + 0.125)
        - 0.25 * LN2
        - 2.0 * LOG_G_HALF
        + log_ghat_ratio(s, e, nu)
    )
    return cmath.exp(log_chi)


def chi_from_ratio(m: MonodromyData, log_ratio: complex | None = None) -> complex:
    """chi assembled from ln(C_inf/C0) and the relation between the two tau normalizations.

    chi = (C_inf/C0)^{1/2} (2pi)^{i nu/2} 2^{-3/2 - nu^2 - 12 sigma^2 + 6 sigma}
          e^{-i pi nu^2/4 - i pi eta + i pi/4} (Gamma(2 sigma)/Gamma(1-2 sigma))^{1/2}
          / (G(1+i nu) G(1+2 sigma) G(1-2 sigma)).

    ``log_ratio`` defaults to the closed form.
    """
    if log_ratio is None:
        log_ratio = log_tau_ratio_closed_form(m).log_ratio
    s, e, nu, gamma, gs, gnu = _closed_pieces(m)
    log_chi = (
        0.5 * log_ratio
        + 0.5j * nu * LN2PI
        + (-1.5 - nu**2 - 12.0 * s**2 + 6.0 * s) * LN2
        - 0.25j * PI * nu**2
        - 1j * PI * e
        + 0.25j * PI
        - 0.5 * gamma
        - gnu
        - gs
    )
    return cmath.exp(log_chi)
