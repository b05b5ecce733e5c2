"""The localized 1-form omega on (x, p, q) and the generating function W.

Along a solution u(x; p, q) the form has components

    omega_x = -x u_x^2/8 + x (cos u - 1)/4
    omega_p = -[(x^2/4) u_p sin u + (x^2/4) u_x u_px + (x/4) u_x u_p]

and omega_q likewise. Its exterior derivative in the (p, q) plane is
-(1/4)(v_p u_q - v_q u_p) with v = x u_x, a Poisson bracket that does not
depend on x. Adding (x/4) dx + (alpha/4) d beta yields a closed form, whose
endpoint asymptotics tie ln(C_inf/C0) to the generating function W(sigma, nu).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularValueError, ValidationError
from .monodromy import (
    MonodromyData,
    StokesData,
    amplitudes_from_monodromy,
    cauchy_from_monodromy,
    monodromy_from_stokes,
    stokes_from_monodromy,
    validate,
)
from .ode import DEFAULT_TOL, DEFAULT_X0, Trajectory, integrate, replay, sensitivities
from .specfun import dilog

__all__ = [
    "FormSample",
    "FormComponents",
    "GeneratingFunctionValue",
    "ClosureReport",
    "omega_at",
    "omega_samples",
    "closure_check",
    "omega_asymptotic_infty",
    "omega_asymptotic_zero",
    "parameter_jacobian",
    "eta_from_sigma_nu",
    "generating_function",
    "generating_gradient",
]

PI = math.pi
# below this distance to T = +-1 no finite-difference step fits
FOLD_GAP = 1e-8


@dataclass(frozen=True)
class FormSample:
    x: float
    p: complex
    q: complex
    omega_x: complex
    omega_p: complex
    omega_q: complex
    residual_bound: float = 0.0


@dataclass(frozen=True)
class FormComponents:
    """Components of a 1-form in the (dx, dp, dq) frame."""

    dx: complex
    dp: complex
    dq: complex


def _omega_x(x, u, ux):
    return -x * ux * ux / 8.0 + 0.25 * x * (np.cos(u) - 1.0)


def _omega_k(x, u, ux, uk, ukx):
    return -(0.25 * x * x * uk * np.sin(u) + 0.25 * x * x * ux * ukx + 0.25 * x * ux * uk)


def omega_samples(xs, m: MonodromyData, h: float = 1e-5, *, tol: float = DEFAULT_TOL,
                  x0: float = DEFAULT_X0) -> list[FormSample]:
    """Form components at each x in ``xs``, sharing a single base integration."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    st = stokes_from_monodromy(m)
    base = integrate(cauchy_from_monodromy(m), x0, float(xs.max()), tol, stops=xs)
    sens = sensitivities(m, xs, h, tol=tol, x0=x0, base=base)
    out = []
    for s in sens:
        out.append(
            FormSample(
                x=s.x,
                p=st.p,
                q=st.q,
                omega_x=complex(_omega_x(s.x, s.u, s.ux)),
                omega_p=complex(_omega_k(s.x, s.u, s.ux, s.u_p, s.u_px)),
                omega_q=complex(_omega_k(s.x, s.u, s.ux, s.u_q, s.u_qx)),
                residual_bound=base.residual_bound,
            )
        )
    return out


def omega_at(x: float, m: MonodromyData, h: float = 1e-5, **kwargs) -> FormSample:
    """Form components at a single point; see :func:`omega_samples`."""
    return omega_samples([x], m, h, **kwargs)[0]


def parameter_jacobian(m: MonodromyData, h: float = 1e-5):
    """Derivatives of (alpha, beta, b+, b-, nu) with respect to (p, q).

    Central differences of the explicit parameter maps with relative steps
    h max(1, |p|), h max(1, |q|). Returns a dict of name -> (d/dp, d/dq).
    """
    st = stokes_from_monodromy(m)
    dp = h * max(1.0, abs(st.p))
    dq = h * max(1.0, abs(st.q))

    def values(sp, sq):
        mm = monodromy_from_stokes(StokesData(st.p + sp, st.q + sq), near=m.eta)
        c = cauchy_from_monodromy(mm)
        a = amplitudes_from_monodromy(mm)
        return np.array([c.alpha, c.beta, a.b_plus, a.b_minus, a.nu])

    d_p = (values(dp, 0) - values(-dp, 0)) / (2 * dp)
    d_q = (values(0, dq) - values(0, -dq)) / (2 * dq)
    names = ("alpha", "beta", "b_plus", "b_minus", "nu")
    return {n: (complex(a), complex(b)) for n, a, b in zip(names, d_p, d_q)}


def omega_asymptotic_infty(x: float, m: MonodromyData, h: float = 1e-5) -> FormComponents:
    """Large-x form: d(2 nu x + nu^2 ln x + nu^2) - (i/4)(b+ db- - b- db+) + oscillatory dx terms."""
    if x < 50.0:
        raise ValidationError(f"large-x form needs x >= 50, got {x}", condition="x >= 50")
    a = amplitudes_from_monodromy(m)
    nu, bp, bm = a.nu, a.b_plus, a.b_minus
    lx = math.log(x)
    dx = (
        2.0 * nu
        + nu * nu / x
        + 0.125j * bp * bp * cmath.exp(2j * x + (2j * nu - 1.0) * lx)
        - 0.125j * bm * bm * cmath.exp(-2j * x + (-2j * nu - 1.0) * lx)
    )
    jac = parameter_jacobian(m, h)
    comps = []
    for k in (0, 1):
        nk, bpk, bmk = jac["nu"][k], jac["b_plus"][k], jac["b_minus"][k]
        comps.append(nk * (2.0 * x + 2.0 * nu * lx + 2.0 * nu) - 0.25j * (bp * bmk - bm * bpk))
    return FormComponents(complex(dx), complex(comps[0]), complex(comps[1]))


def omega_asymptotic_zero(x: float, m: MonodromyData, h: float = 1e-5) -> FormComponents:
    """Small-x form: d(-(alpha^2/8) ln x - alpha^2/8) - alpha d beta / 4."""
    if x > 0.05:
        raise ValidationError(f"small-x form needs x <= 0.05, got {x}", condition="x <= 0.05")
    c = cauchy_from_monodromy(m)
    alpha = c.alpha
    jac = parameter_jacobian(m, h)
    lx = math.log(x)
    comps = []
    for k in (0, 1):
        ak, bk = jac["alpha"][k], jac["beta"][k]
        comps.append(-0.25 * alpha * ak * (lx + 1.0) - 0.25 * alpha * bk)
    return FormComponents(complex(-alpha * alpha / (8.0 * x)), complex(comps[0]), complex(comps[1]))


@dataclass(frozen=True)
class ClosureReport:
    """Scaled closure defects at each x, for one finite-difference step.

    * ``symplectic``: |d omega(dp, dq) + B/4| / |B/4| with B = v_p u_q - v_q u_p
    * ``bracket_drift``: max |B(x) - B(x_ref)| / |B| over the x list
    * ``bracket_vs_cauchy``: |B - (alpha_p beta_q - alpha_q beta_p)| / |B|
    * ``closure``: defect of w = omega + (x/4) dx + (alpha/4) d beta, the
      largest of its (x,p), (x,q) and (p,q) components, each scaled
    """

    h: float
    xs: tuple[float, ...]
    bracket: tuple[complex, ...]
    cauchy_bracket: complex
    symplectic: tuple[float, ...]
    bracket_drift: float
    bracket_vs_cauchy: tuple[float, ...]
    closure: tuple[float, ...]

    def worst(self) -> dict[str, float]:
        return {
            "symplectic": max(self.symplectic),
            "bracket_drift": self.bracket_drift,
            "bracket_vs_cauchy": max(self.bracket_vs_cauchy),
            "closure": max(self.closure),
        }


def _stencil(m: MonodromyData, xs, base: Trajectory, dp: float, dq: float, eta_ref):
    st = stokes_from_monodromy(m)
    grid = {}
    for i in (-1, 0, 1):
        for j in (-1, 0, 1):
            if i == 0 and j == 0:
                grid[i, j] = base.evaluate(xs)[:, :2]
                continue
            mm = monodromy_from_stokes(StokesData(st.p + i * dp, st.q + j * dq), near=eta_ref)
            grid[i, j] = replay(cauchy_from_monodromy(mm), base.mesh, check_seed=False).evaluate(xs)[:, :2]
    return grid


def _closure_single(m: MonodromyData, xs: np.ndarray, base: Trajectory, h: float) -> ClosureReport:
    st = stokes_from_monodromy(m)
    dp = h * max(1.0, abs(st.p))
    dq = h * max(1.0, abs(st.q))
    g = _stencil(m, xs, base, dp, dq, m.eta)

    def d_p(j):
        return (g[1, j] - g[-1, j]) / (2 * dp)

    def d_q(i):
        return (g[i, 1] - g[i, -1]) / (2 * dq)

    u, ux = g[0, 0][:, 0], g[0, 0][:, 1]
    up, upx = d_p(0)[:, 0], d_p(0)[:, 1]
    uq, uqx = d_q(0)[:, 0], d_q(0)[:, 1]
    # Poisson bracket with v = x u_x
    B = xs * upx * uq - xs * uqx * up

    # d omega(dp, dq) from omega_q at p +- dp and omega_p at q +- dq
    def omega_q_at(i):
        y = g[i, 0]
        s = d_q(i)
        return _omega_k(xs, y[:, 0], y[:, 1], s[:, 0], s[:, 1])

    def omega_p_at(j):
        y = g[0, j]
        s = d_p(j)
        return _omega_k(xs, y[:, 0], y[:, 1], s[:, 0], s[:, 1])

    d_omega = (omega_q_at(1) - omega_q_at(-1)) / (2 * dp) - (omega_p_at(1) - omega_p_at(-1)) / (2 * dq)
    scale = np.abs(B) / 4.0
    symplectic = np.abs(d_omega + B / 4.0) / scale

    jac = parameter_jacobian(m, h)
    (ap, aq), (bp, bq) = jac["alpha"], jac["beta"]
    cb = ap * bq - aq * bp
    drift = float(np.max(np.abs(B - B[0])) / np.max(np.abs(B)))
    vs_cauchy = np.abs(B - cb) / np.abs(cb)

    # (x, k) components of dw: d/dx omega_k - d/dk omega_x, with u_xx and
    # u_kxx eliminated through the equation and its linearization
    sin_u, cos_u = np.sin(u), np.cos(u)
    uxx = -ux / xs - sin_u

    def dx_omega_k(uk, ukx):
        ukxx = -ukx / xs - cos_u * uk
        return -(
            0.5 * xs * uk * sin_u + 0.25 * xs**2 * (ukx * sin_u + uk * cos_u * ux)
            + 0.5 * xs * ux * ukx + 0.25 * xs**2 * (uxx * ukx + ux * ukxx)
            + 0.25 * ux * uk + 0.25 * xs * (uxx * uk + ux * ukx)
        )

    def dk_omega_x(uk, ukx):
        return -0.25 * xs * ux * ukx - 0.25 * xs * sin_u * uk

    parts = []
    for uk, ukx in ((up, upx), (uq, uqx)):
        a, b = dx_omega_k(uk, ukx), dk_omega_x(uk, ukx)
        parts.append(np.abs(a - b) / np.maximum(np.abs(a), np.abs(b)))
    pq = np.abs(d_omega + cb / 4.0) / (np.abs(cb) / 4.0)
    closure = np.maximum(np.maximum(parts[0], parts[1]), pq)
    return ClosureReport(
        h=h,
        xs=tuple(float(x) for x in xs),
        bracket=tuple(complex(b) for b in B),
        cauchy_bracket=complex(cb),
        symplectic=tuple(float(v) for v in symplectic),
        bracket_drift=drift,
        bracket_vs_cauchy=tuple(float(v) for v in vs_cauchy),
        closure=tuple(float(v) for v in closure),
    )


def closure_check(xs, m: MonodromyData, h: float = 5e-4, *, tol: float = DEFAULT_TOL,
                  x0: float = DEFAULT_X0, halvings: int = 1) -> list[ClosureReport]:
    """Closure and symplectic defects at the points ``xs``.

    Runs the 3x3 replay stencil at h, h/2, ..., h/2^halvings on one frozen
    mesh. Plain central differences are used (no extrapolation), so every
    defect should drop by about 4 per halving until rounding takes over.

    Raises
    ------
    ValidationError
        The stencil leaves the validity set.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    c = cauchy_from_monodromy(m)
    st = stokes_from_monodromy(m)
    for sp, sq in ((2, 0), (-2, 0), (0, 2), (0, -2)):
        mm = monodromy_from_stokes(StokesData(st.p + sp * h * max(1, abs(st.p)),
                                              st.q + sq * h * max(1, abs(st.q))), near=m.eta)
        report = validate(mm)
        if not report.ok:
            bad = report.failures()[0]
            raise ValidationError(f"closure stencil leaves the validity set: '{bad.name}'",
                                  condition=bad.name, margin=bad.margin)
    base = integrate(c, x0, float(xs.max()), tol, stops=xs)
    return [_closure_single(m, xs, base, h / 2**k) for k in range(halvings + 1)]


@dataclass(frozen=True)
class GeneratingFunctionValue:
    sigma: complex
    nu: complex
    eta: complex
    W: complex


def eta_from_sigma_nu(sigma: complex, nu: complex, near: complex | None = None) -> complex:
    """Solve sin 2 pi eta = e^{pi nu} sin 2 pi sigma.

    The two roots in the strip are r = arcsin(...)/(2 pi) and 1/2 - r. The
    principal root r is returned unless ``near`` selects the closer one.

    Raises
    ------
    ValidationError
        Neither root gives valid monodromy data.
    """
    target = cmath.exp(PI * nu) * cmath.sin(2.0 * PI * sigma)
    r = cmath.asin(target) / (2.0 * PI)
    roots = [r, 0.5 - r]
    if near is not None:
        roots.sort(key=lambda z: abs(z - near))
    for eta in roots:
        if validate(MonodromyData(sigma, eta)).ok:
            return eta
    raise ValidationError(f"no valid eta for sigma={sigma}, nu={nu}", condition="branch resolution for eta")


def generating_function(sigma: complex, nu: complex, *, eta_hint: complex | None = None) -> GeneratingFunctionValue:
    """W(sigma, nu) with

        8 pi^2 W = Li2(-e^{2 pi i (sigma + eta - i nu/2)}) + Li2(-e^{-2 pi i (sigma + eta + i nu/2)})
                   - 4 pi^2 eta^2 + pi^2 nu^2.

    dW/dsigma = eta and dW/dnu = i rho hold where Re(sigma + eta) + |Im nu|/2 < 1/2,
    i.e. while both sigma + eta + 1/2 -+ i nu/2 keep real parts in (0, 1); beyond
    that a dilogarithm argument of modulus > 1 crosses the branch cut.
    """
    sigma, nu = complex(sigma), complex(nu)
    eta = eta_from_sigma_nu(sigma, nu, eta_hint)
    z1 = -cmath.exp(2j * PI * (sigma + eta - 0.5j * nu))
    z2 = -cmath.exp(-2j * PI * (sigma + eta + 0.5j * nu))
    total = dilog(z1) + dilog(z2) - 4.0 * PI**2 * eta**2 + PI**2 * nu**2
    return GeneratingFunctionValue(sigma, nu, eta, total / (8.0 * PI**2))


def generating_gradient(sigma: complex, nu: complex, h: float = 1e-5, *,
                        eta_hint: complex | None = None) -> tuple[complex, complex]:
    """(dW/dsigma, dW/dnu) by central differences with one Richardson step.

    The eta branch of the base point is carried to the perturbed points, so
    all evaluations stay on one sheet. W has square-root branch points where
    T = e^{pi nu} sin 2 pi sigma reaches +-1 (the two eta roots merge at
    eta = 1/4); each step is capped at a tenth of the distance to them.

    Raises
    ------
    SingularValueError
        If |T -+ 1| < 1e-8, where no finite-difference step fits.
    """
    sigma, nu = complex(sigma), complex(nu)
    eta = eta_from_sigma_nu(sigma, nu, eta_hint)
    T = cmath.exp(PI * nu) * cmath.sin(2.0 * PI * sigma)
    gap = min(abs(T - 1.0), abs(T + 1.0))
    if gap < FOLD_GAP:
        raise SingularValueError(
            f"|T -+ 1| = {gap:.3g}: (sigma, nu) sits on the branch point of eta(sigma, nu)",
            condition="e^{pi nu} sin 2 pi sigma != +-1",
            margin=gap,
        )
    dT_dsigma = abs(2.0 * PI * cmath.exp(PI * nu) * cmath.cos(2.0 * PI * sigma))
    dT_dnu = abs(PI * T)
    h_sigma = min(h, 0.1 * gap / max(dT_dsigma, 1e-300))
    h_nu = min(h, 0.1 * gap / max(dT_dnu, 1e-300))

    def W(s, n):
        return generating_function(s, n, eta_hint=eta).W

    def richardson(f, step):
        d1 = (f(step) - f(-step)) / (2 * step)
        d2 = (f(step / 2) - f(-step / 2)) / step
        return (4 * d2 - d1) / 3

    return (richardson(lambda d: W(sigma + d, nu), h_sigma), richardson(lambda d: W(sigma, nu + d), h_nu))
