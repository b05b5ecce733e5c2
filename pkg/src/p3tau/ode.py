"""Integration of the radial sine-Gordon equation u'' + u'/x + sin u = 0.

The integrator is the Dormand-Prince 8(5,3) pair with its 7th-order dense
output. The Butcher tables are borrowed from scipy; stepping, PI step-size
control, forced stops and mesh replay are implemented here because
sensitivities need the same step sequence across parameter perturbations,
which ``solve_ivp`` cannot provide.

Alongside (u, u_x) the state carries two running quadratures used by the
tau-function code:

* ``q_omega``  = int_{x0}^x ( -s u_s^2/8 + s (cos u - 1)/4 ) ds
* ``q_action`` = int_{x0}^x ( -s u_s^2/8 - s cos u / 4 ) ds
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate._ivp import dop853_coefficients as _dop

from .errors import ConvergenceError, IllConditionedError, SingularityError, ValidationError
from .monodromy import (
    AsymptoticData,
    CauchyData,
    MonodromyData,
    StokesData,
    cauchy_from_monodromy,
    monodromy_from_stokes,
    stokes_from_monodromy,
    validate,
)

__all__ = [
    "DEFAULT_X0",
    "DEFAULT_TOL",
    "DEFAULT_GUARD",
    "SeedValue",
    "series_values",
    "Trajectory",
    "seed_series",
    "integrate",
    "replay",
    "fit_amplitudes",
    "tail_basis",
    "SensitivitySample",
    "sensitivities",
]

DEFAULT_X0 = 1e-3
DEFAULT_TOL = 1e-12
DEFAULT_GUARD = 30.0
SEED_LIMIT = 1e-4

_N = _dop.N_STAGES
_A = _dop.A[:_N, :_N]
_B = _dop.B
_C = _dop.C[:_N]
_E3 = _dop.E3
_E5 = _dop.E5
_D = _dop.D
_A_EXTRA = _dop.A[_N + 1:]
_C_EXTRA = _dop.C[_N + 1:]

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
# PI controller exponents for an error estimator of order 7
_K1 = 0.7 / 8.0
_K2 = 0.4 / 8.0


def _rhs(x: float, y: np.ndarray) -> np.ndarray:
    u, ux = y[0], y[1]
    try:
        su, cu = cmath.sin(u), cmath.cos(u)
    except OverflowError as exc:
        raise SingularityError(f"sin u overflowed at x={x}") from exc
    xu2 = x * ux * ux / 8.0
    return np.array([ux, -ux / x - su, -xu2 + 0.25 * x * (cu - 1.0), -xu2 - 0.25 * x * cu])


@dataclass(frozen=True)
class SeedValue:
    u: complex
    ux: complex
    correction: complex
    residual: float


def seed_series(c: CauchyData, x0: float = DEFAULT_X0, *, check: bool = True) -> SeedValue:
    """Initial values from the small-x expansion u = alpha ln x + beta + w(x).

    The leading correction is

        w(x) = A x^{2+i alpha} + B x^{2-i alpha},
        A = i e^{i beta} / (2 (2+i alpha)^2),  B = -i e^{-i beta} / (2 (2-i alpha)^2).

    ``residual`` is x0^2 |u'' + u'/x + sin u| at x0, i.e. the defect of the
    equation written in s = ln x.

    Raises
    ------
    ValidationError
        If x0 is outside (0, 0.01] or |w(x0)| exceeds 1e-4 (with ``check``).
    """
    if not 0.0 < x0 <= 0.01:
        raise ValidationError(f"seed point x0={x0} must lie in (0, 0.01]", condition="0 < x0 <= 0.01")
    a, b = c.alpha, c.beta
    ea, eb = 2.0 + 1j * a, 2.0 - 1j * a
    A = 0.5j * cmath.exp(1j * b) / ea**2
    B = -0.5j * cmath.exp(-1j * b) / eb**2
    lx = math.log(x0)
    ta, tb = A * cmath.exp(ea * lx), B * cmath.exp(eb * lx)
    w = ta + tb
    u = a * lx + b + w
    ux = (a + ea * ta + eb * tb) / x0
    uxx = (-a + ea * (ea - 1.0) * ta + eb * (eb - 1.0) * tb) / x0**2
    residual = abs(x0 * x0 * (uxx + ux / x0 + cmath.sin(u)))
    if check and abs(w) > SEED_LIMIT:
        raise ValidationError(
            f"seed correction |w(x0)|={abs(w):.3g} exceeds {SEED_LIMIT}; choose a smaller x0",
            condition="|w(x0)| <= 1e-4",
            margin=SEED_LIMIT - abs(w),
        )
    return SeedValue(u, ux, w, residual)


def series_values(c: CauchyData, xs) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized seed expansion: returns (u, u_x, w_x) at the points ``xs``.

    ``w_x`` is the derivative of the correction alone, so that
    u_x = alpha/x + w_x without cancellation.
    """
    a, b = c.alpha, c.beta
    xs = np.asarray(xs, dtype=float)
    lx = np.log(xs)
    ea, eb = 2.0 + 1j * a, 2.0 - 1j * a
    A = 0.5j * cmath.exp(1j * b) / ea**2
    B = -0.5j * cmath.exp(-1j * b) / eb**2
    ta, tb = A * np.exp(ea * lx), B * np.exp(eb * lx)
    wx = (ea * ta + eb * tb) / xs
    return a * lx + b + ta + tb, a / xs + wx, wx


@dataclass
class Trajectory:
    """Accepted mesh of one integration with per-step dense output.

    ``y`` holds the state [u, u_x, q_omega, q_action] at each mesh point and
    ``coeffs`` the dense-output polynomials of each step. ``residual`` is the
    relative defect |Y' - f(Y)|/(1 + |f(Y)|) of the interpolant at each step
    midpoint, for the (u, u_x) components.
    """

    cauchy: CauchyData
    tol: float
    mesh: np.ndarray
    y: np.ndarray
    coeffs: np.ndarray
    residual: np.ndarray
    nfev: int
    seed_residual: float
    guard: float = DEFAULT_GUARD
    rejected: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def x0(self) -> float:
        return float(self.mesh[0])

    @property
    def x1(self) -> float:
        return float(self.mesh[-1])

    @property
    def x(self) -> np.ndarray:
        return self.mesh

    @property
    def u(self) -> np.ndarray:
        return self.y[:, 0]

    @property
    def ux(self) -> np.ndarray:
        return self.y[:, 1]

    @property
    def residual_bound(self) -> float:
        return float(self.residual.max()) if self.residual.size else 0.0

    def evaluate(self, xs) -> np.ndarray:
        """Dense-output state at the points ``xs``; shape (len(xs), 4)."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        if np.any(xs < self.mesh[0] * (1 - 1e-14)) or np.any(xs > self.mesh[-1] * (1 + 1e-14)):
            raise ValidationError("evaluation point outside the trajectory range", condition="x0 <= x <= x1")
        idx = np.clip(np.searchsorted(self.mesh, xs, side="right") - 1, 0, len(self.mesh) - 2)
        h = self.mesh[idx + 1] - self.mesh[idx]
        theta = (xs - self.mesh[idx]) / h
        out = np.zeros((xs.size, self.y.shape[1]), dtype=complex)
        F = self.coeffs[idx]
        th = theta[:, None]
        for i in range(F.shape[1]):
            out += F[:, F.shape[1] - 1 - i]
            out *= th if i % 2 == 0 else (1.0 - th)
        return out + self.y[idx]

    def to_csv(self, path, xs=None) -> None:
        """Write columns x, Re u, Im u, Re u_x, Im u_x (mesh points unless ``xs`` given).

        ``path`` may be a filename or an open text stream.
        """
        if xs is None:
            xs, ys = self.mesh, self.y
        else:
            xs = np.asarray(xs, dtype=float)
            ys = self.evaluate(xs)
        if hasattr(path, "write"):
            self._write_csv(path, xs, ys)
            return
        with open(path, "w", newline="") as fh:
            self._write_csv(fh, xs, ys)

    @staticmethod
    def _write_csv(fh, xs, ys) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "re_u", "im_u", "re_ux", "im_ux"])
        for x, row in zip(xs, ys):
            writer.writerow([repr(float(x)), repr(float(row[0].real)), repr(float(row[0].imag)),
                             repr(float(row[1].real)), repr(float(row[1].imag))])


def _dense_coeffs(x, y_old, y_new, h, K):
    for s, (a, c) in enumerate(zip(_A_EXTRA, _C_EXTRA), start=_N + 1):
        K[s] = _rhs(x + c * h, y_old + h * (K[:s].T @ a[:s]))
    F = np.empty((_dop.INTERPOLATOR_POWER, y_old.size), dtype=complex)
    dy = y_new - y_old
    F[0] = dy
    F[1] = h * K[0] - dy
    F[2] = 2.0 * dy - h * (K[_N] + K[0])
    F[3:] = h * (_D @ K)
    return F


def _midpoint_defect(x, y_old, h, F) -> float:
    theta = 0.5
    val = np.zeros_like(y_old)
    der = np.zeros_like(y_old)
    for i in range(F.shape[0]):
        val = val + F[F.shape[0] - 1 - i]
        der = der.copy()
        if i % 2 == 0:
            der = der * theta + val
            val = val * theta
        else:
            der = der * (1.0 - theta) - val
            val = val * (1.0 - theta)
    Y = y_old + val
    dY = der / h
    f = _rhs(x + theta * h, Y)
    return float(max(abs(dY[k] - f[k]) / (1.0 + abs(f[k])) for k in (0, 1)))


def _step(x, y, f, h, K):
    K[0] = f
    for s in range(1, _N):
        K[s] = _rhs(x + _C[s] * h, y + h * (K[:s].T @ _A[s, :s]))
    y_new = y + h * (K[:_N].T @ _B)
    K[_N] = _rhs(x + h, y_new)
    return y_new


def _error_norm(K, y, y_new, tol) -> float:
    # error per unit step: scipy's DOP853 norm without the factor h
    scale = tol * (1.0 + np.maximum(np.abs(y), np.abs(y_new)))
    e5 = (K[: _N + 1].T @ _E5) / scale
    e3 = (K[: _N + 1].T @ _E3) / scale
    n5 = float(np.sum(np.abs(e5) ** 2))
    n3 = float(np.sum(np.abs(e3) ** 2))
    if n5 == 0.0 and n3 == 0.0:
        return 0.0
    return n5 / math.sqrt((n5 + 0.01 * n3) * scale.size)


def _initial_state(c: CauchyData, x0: float, check: bool) -> tuple[np.ndarray, SeedValue]:
    seed = seed_series(c, x0, check=check)
    return np.array([seed.u, seed.ux, 0.0, 0.0], dtype=complex), seed


def _guard_check(x, y, guard):
    if not np.all(np.isfinite(y)) or abs(y[0].imag) > guard:
        raise SingularityError(
            f"|Im u| exceeded the guard {guard} near x={x:.6g}: movable singularity nearby",
            tolerance=guard,
            achieved=abs(y[0].imag) if np.isfinite(y[0]) else math.inf,
        )


def integrate(
    c: CauchyData,
    x0: float = DEFAULT_X0,
    x1: float = 200.0,
    tol: float = DEFAULT_TOL,
    *,
    stops=(),
    guard: float = DEFAULT_GUARD,
    max_steps: int = 200_000,
    check_seed: bool = True,
) -> Trajectory:
    """Adaptive integration on [x0, x1] seeded by :func:`seed_series`.

    Parameters
    ----------
    stops
        Points in (x0, x1) the mesh must contain exactly.
    guard
        Abort with :class:`SingularityError` once |Im u| exceeds this value.

    Raises
    ------
    SingularityError
        The guard was exceeded.
    ConvergenceError
        The step size underflowed or ``max_steps`` was exhausted.
    """
    if not x0 < x1:
        raise ValidationError(f"need x0 < x1, got {x0}, {x1}", condition="x0 < x1")
    if tol <= 0:
        raise ValidationError("tol must be positive", condition="tol > 0")
    targets = sorted({float(s) for s in stops if x0 < s < x1} | {float(x1)})
    y, seed = _initial_state(c, x0, check_seed)
    x = float(x0)
    f = _rhs(x, y)
    K = np.empty((_dop.N_STAGES_EXTENDED, y.size), dtype=complex)
    mesh, ys, coeffs, defects = [x], [y], [], []
    h = 0.01 * x0
    err_prev = 1.0
    nfev, rejected = 1, 0
    ti = 0
    for _ in range(max_steps):
        target = targets[ti]
        h_try = min(h, target - x)
        if h_try < 1e-14 * x:
            raise ConvergenceError(f"step size underflow at x={x:.6g}", tolerance=tol)
        while True:
            y_new = _step(x, y, f, h_try, K)
            nfev += _N
            err = _error_norm(K, y, y_new, tol)
            if err <= 1.0:
                break
            rejected += 1
            h_try *= max(_MIN_FACTOR, _SAFETY * err ** (-1.0 / 8.0))
            if h_try < 1e-14 * x:
                raise ConvergenceError(f"step size underflow at x={x:.6g}", tolerance=tol, achieved=err * tol)
        landed = h_try == target - x
        x_new = target if landed else x + h_try
        _guard_check(x_new, y_new, guard)
        F = _dense_coeffs(x, y, y_new, h_try, K)
        nfev += 3
        defects.append(_midpoint_defect(x, y, h_try, F))
        nfev += 1
        coeffs.append(F)
        if err == 0.0:
            factor = _MAX_FACTOR
        else:
            factor = _SAFETY * err ** (-_K1) * err_prev ** _K2
        factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
        err_prev = max(err, 1e-4)
        if not landed or h_try >= h:
            h = h_try * factor
        x, y, f = x_new, y_new, K[_N].copy()
        mesh.append(x)
        ys.append(y)
        if landed:
            ti += 1
            if ti == len(targets):
                break
    else:
        raise ConvergenceError(f"max_steps={max_steps} exhausted at x={x:.6g}", tolerance=tol)
    return Trajectory(
        cauchy=c,
        tol=tol,
        mesh=np.array(mesh),
        y=np.array(ys),
        coeffs=np.array(coeffs),
        residual=np.array(defects),
        nfev=nfev,
        seed_residual=seed.residual,
        guard=guard,
        rejected=rejected,
    )


def replay(c: CauchyData, mesh, *, tol: float = math.nan, guard: float = DEFAULT_GUARD,
           check_seed: bool = True) -> Trajectory:
    """Integrate on a frozen mesh without step-size control.

    Differences of replays on the same mesh are smooth functions of the
    parameters, so finite-difference sensitivities are free of the noise
    that adaptive step selection would inject.
    """
    mesh = np.asarray(mesh, dtype=float)
    y, seed = _initial_state(c, float(mesh[0]), check_seed)
    f = _rhs(mesh[0], y)
    K = np.empty((_dop.N_STAGES_EXTENDED, y.size), dtype=complex)
    ys, coeffs = [y], []
    for x, x_new in zip(mesh[:-1], mesh[1:]):
        h = x_new - x
        y_new = _step(x, y, f, h, K)
        _guard_check(x_new, y_new, guard)
        coeffs.append(_dense_coeffs(x, y, y_new, h, K))
        y, f = y_new, K[_N].copy()
        ys.append(y)
    n = len(mesh) - 1
    return Trajectory(
        cauchy=c,
        tol=tol,
        mesh=mesh.copy(),
        y=np.array(ys),
        coeffs=np.array(coeffs),
        residual=np.full(n, np.nan),
        nfev=n * (_N + 3),
        seed_residual=seed.residual,
        guard=guard,
    )


def tail_basis(x, nu):
    """Columns of the large-x expansion of u and u_x.

    Returns ``(phi_plus, phi_minus, psi_plus, psi_minus)``, each a pair
    (value, x-derivative), so that

        u = b+ phi+ + b- phi- + b+^3 psi+ + b-^3 psi- + O(x^{-5/2 + 5|Im nu|}).
    """
    x = np.asarray(x, dtype=float)
    lx = np.log(x)
    ep = np.exp(1j * x + 1j * nu * lx)
    em = np.exp(-1j * x - 1j * nu * lx)
    cp = 0.125j * (6 * nu**2 + 4j * nu - 1)
    cm = -0.125j * (6 * nu**2 - 4j * nu - 1)
    r12, r32 = x**-0.5, x**-1.5
    fp = ep * r12 * (1 + cp / x)
    fm = em * r12 * (1 + cm / x)
    dfp = ep * ((1j + (1j * nu - 0.5) / x) * r12 + cp * (1j + (1j * nu - 1.5) / x) * r32)
    dfm = em * ((-1j + (-1j * nu - 0.5) / x) * r12 + cm * (-1j + (-1j * nu - 1.5) / x) * r32)
    gp = -(ep**3) * r32 / 48.0
    gm = -(em**3) * r32 / 48.0
    dgp = gp * (3j + (3j * nu - 1.5) / x)
    dgm = gm * (-3j + (-3j * nu - 1.5) / x)
    return (fp, dfp), (fm, dfm), (gp, dgp), (gm, dgm)


def fit_amplitudes(t: Trajectory, nu: complex, window=(120.0, 200.0), *, samples: int = 401,
                   max_iter: int = 20) -> AsymptoticData:
    """Least-squares fit of the large-x amplitudes b+ and b-.

    Both u and u_x on ``window`` are matched to the expansion in
    :func:`tail_basis`. The cubic terms make the model nonlinear, so the
    linear problem is re-solved with the cubic part moved to the right-hand
    side until b+- stop changing. A constant 2 pi k offset of u is removed
    first.
    """
    lo, hi = window
    if lo < 30.0:
        raise ValidationError(f"window start {lo} must be >= 30", condition="x_lo >= 30")
    if lo < t.x0 or hi > t.x1 or not lo < hi:
        raise ValidationError("window must lie inside the trajectory range", condition="x0 <= x_lo < x_hi <= x1")
    xs = np.linspace(lo, hi, samples)
    Y = t.evaluate(xs)
    u, ux = Y[:, 0], Y[:, 1]
    u = u - 2.0 * np.pi * np.round(np.mean(u.real) / (2.0 * np.pi))
    (fp, dfp), (fm, dfm), (gp, dgp), (gm, dgm) = tail_basis(xs, nu)
    M = np.column_stack([np.concatenate([fp, dfp]), np.concatenate([fm, dfm])])
    cond = np.linalg.cond(M)
    if cond**2 > 1e12:
        raise IllConditionedError(f"normal matrix condition {cond**2:.3g} exceeds 1e12")
    b = np.zeros(2, dtype=complex)
    target = np.concatenate([u, ux])
    for _ in range(max_iter):
        cubic = np.concatenate([b[0] ** 3 * gp + b[1] ** 3 * gm, b[0] ** 3 * dgp + b[1] ** 3 * dgm])
        b_new, *_ = np.linalg.lstsq(M, target - cubic, rcond=None)
        done = np.max(np.abs(b_new - b)) <= 1e-14 * (1.0 + np.max(np.abs(b_new)))
        b = b_new
        if done:
            break
    cubic = np.concatenate([b[0] ** 3 * gp + b[1] ** 3 * gm, b[0] ** 3 * dgp + b[1] ** 3 * dgm])
    resid = float(np.max(np.abs(M @ b + cubic - target)))
    return AsymptoticData(complex(b[0]), complex(b[1]), complex(nu), residual=resid)


@dataclass(frozen=True)
class SensitivitySample:
    """Derivatives of (u, u_x) with respect to the Stokes multipliers at ``x``.

    ``error`` is the Richardson error estimate per entry, in the order
    (u_p, u_q, u_px, u_qx).
    """

    x: float
    u: complex
    ux: complex
    u_p: complex
    u_q: complex
    u_px: complex
    u_qx: complex
    error: tuple[float, float, float, float]


def _perturbed_cauchy(st: StokesData, dp: complex, dq: complex, eta_ref: complex) -> CauchyData:
    m = monodromy_from_stokes(StokesData(st.p + dp, st.q + dq), near=eta_ref)
    return cauchy_from_monodromy(m)


def _check_margin(m: MonodromyData, st: StokesData, dp: float, dq: float) -> None:
    for sp, sq in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        mm = monodromy_from_stokes(StokesData(st.p + 2 * sp * dp, st.q + 2 * sq * dq), near=m.eta)
        report = validate(mm)
        if not report.ok:
            bad = report.failures()[0]
            raise ValidationError(
                f"(p, q) within 2h of the validity boundary: '{bad.name}' fails",
                condition=bad.name,
                margin=bad.margin,
            )


def sensitivities(
    m: MonodromyData,
    xs,
    h: float = 1e-5,
    *,
    tol: float = DEFAULT_TOL,
    x0: float = DEFAULT_X0,
    base: Trajectory | None = None,
    check: bool = True,
) -> list[SensitivitySample]:
    """Derivatives of u and u_x with respect to p and q at the points ``xs``.

    Central differences of replays on the base mesh with relative steps
    h max(1, |p|) and h max(1, |q|), at h, h/2 and h/4. The Richardson
    values from (h, h/2) and (h/2, h/4) must agree to ten times the
    reported estimate (plus a rounding floor).

    Raises
    ------
    ValidationError
        A perturbed point within 2h of the boundary of the validity set.
    ConvergenceError
        The Richardson extrapolants disagree.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    st = stokes_from_monodromy(m)
    c = cauchy_from_monodromy(m)
    if base is None:
        base = integrate(c, x0, float(xs.max()), tol, stops=xs)
    dp = h * max(1.0, abs(st.p))
    dq = h * max(1.0, abs(st.q))
    _check_margin(m, st, dp, dq)
    centre = base.evaluate(xs)[:, :2]

    def central(step_p, step_q):
        plus = replay(_perturbed_cauchy(st, step_p, step_q, m.eta), base.mesh, check_seed=False).evaluate(xs)
        minus = replay(_perturbed_cauchy(st, -step_p, -step_q, m.eta), base.mesh, check_seed=False).evaluate(xs)
        return (plus[:, :2] - minus[:, :2]) / (2.0 * (step_p + step_q))

    results = []
    levels = {}
    for name, (sp, sq) in (("p", (dp, 0.0)), ("q", (0.0, dq))):
        d = [central(sp / 2**k, sq / 2**k) for k in range(3)]
        r1 = d[1] + (d[1] - d[0]) / 3.0
        r2 = d[2] + (d[2] - d[1]) / 3.0
        est = np.abs(d[2] - d[1]) / 3.0
        step = sp + sq
        floor = 1e3 * np.finfo(float).eps * (1.0 + np.abs(centre)) / step
        if check and np.any(np.abs(r1 - r2) > 10.0 * (est + floor)):
            worst = float(np.max(np.abs(r1 - r2)))
            raise ConvergenceError(
                f"Richardson extrapolants for d/d{name} disagree by {worst:.3g}",
                tolerance=float(np.max(10.0 * (est + floor))),
                achieved=worst,
            )
        levels[name] = (r2, est + floor)
    (vp, ep), (vq, eq) = levels["p"], levels["q"]
    for i, x in enumerate(xs):
        results.append(
            SensitivitySample(
                x=float(x),
                u=complex(centre[i, 0]),
                ux=complex(centre[i, 1]),
                u_p=complex(vp[i, 0]),
                u_q=complex(vq[i, 0]),
                u_px=complex(vp[i, 1]),
                u_qx=complex(vq[i, 1]),
                error=(float(ep[i, 0]), float(eq[i, 0]), float(ep[i, 1]), float(eq[i, 1])),
            )
        )
    return results
