import csv
import math

import numpy as np
import pytest

from p3tau.errors import SingularityError, ValidationError
from p3tau.monodromy import (
    AsymptoticData,
    CauchyData,
    MonodromyData,
    amplitudes_from_monodromy,
    cauchy_from_monodromy,
    nu_from_monodromy,
)
from p3tau.ode import fit_amplitudes, integrate, replay, seed_series, sensitivities, tail_basis
from p3tau.tau import hamiltonian
from p3tau.acceptance import small_x_slope


class _Synthetic:
    """Stand-in trajectory that evaluates the large-x expansion exactly."""

    def __init__(self, b_plus, b_minus, nu, x0=1.0, x1=300.0):
        self.b = (b_plus, b_minus)
        self.nu = nu
        self.x0, self.x1 = x0, x1

    def evaluate(self, xs):
        (fp, dfp), (fm, dfm), (gp, dgp), (gm, dgm) = tail_basis(xs, self.nu)
        bp, bm = self.b
        out = np.zeros((len(xs), 4), dtype=complex)
        out[:, 0] = bp * fp + bm * fm + bp**3 * gp + bm**3 * gm
        out[:, 1] = bp * dfp + bm * dfm + bp**3 * dgp + bm**3 * dgm
        return out


def test_zero_data_stays_zero():
    t = integrate(CauchyData(0.0, 0.0), 1e-3, 100.0, 1e-12)
    assert np.max(np.abs(t.u)) < 1e-12
    assert np.max(np.abs(t.ux)) < 1e-12
    fit = fit_amplitudes(t, 0.0, (40.0, 100.0))
    assert abs(fit.b_plus) < 1e-12 and abs(fit.b_minus) < 1e-12


def test_seed_series_residual_small(reference_point):
    s = seed_series(cauchy_from_monodromy(reference_point), 1e-3)
    assert s.residual < 1e-9
    with pytest.raises(ValidationError):
        seed_series(cauchy_from_monodromy(reference_point), 0.5)


def test_residual_bound_within_ten_tol(reference_trajectory):
    assert reference_trajectory.residual_bound <= 10 * reference_trajectory.tol
    assert np.all(np.diff(reference_trajectory.mesh) > 0)


def test_tolerance_halving_converges(reference_point):
    c = cauchy_from_monodromy(reference_point)
    u = [integrate(c, 1e-3, 100.0, tol).evaluate([100.0])[0, 0] for tol in (1e-8, 5e-9, 2.5e-9)]
    d1, d2 = abs(u[0] - u[1]), abs(u[1] - u[2])
    assert d1 / d2 > 1.8


def test_large_x_envelope_bounded(reference_trajectory):
    xs = np.linspace(50.0, 200.0, 3001)
    env = np.abs(reference_trajectory.evaluate(xs)[:, 0]) * np.sqrt(xs)
    assert env.max() < 2.0
    # oscillatory: u changes sign repeatedly in the window
    re = reference_trajectory.evaluate(xs)[:, 0].real
    assert np.count_nonzero(np.diff(np.sign(re))) > 40


def test_large_x_decay_law(reference_trajectory, reference_point):
    nu = nu_from_monodromy(reference_point)
    xs = np.linspace(100.0, 200.0, 2001)
    u = np.abs(reference_trajectory.evaluate(xs)[:, 0])
    bound = xs ** (-0.5 + abs(nu.imag))
    assert np.max(u / bound) < 2.0


def test_small_x_law_exponent(reference_point):
    alpha = cauchy_from_monodromy(reference_point).alpha
    assert abs(small_x_slope(reference_point) - (2 - abs(alpha.imag))) < 0.1


def test_synthetic_fit_round_trip():
    nu = -0.05 + 0.02j
    b_plus = 0.2 - 0.1j
    b_minus = -4 * nu / b_plus
    fit = fit_amplitudes(_Synthetic(b_plus, b_minus, nu), nu, (120.0, 200.0))
    assert abs(fit.b_plus - b_plus) < 1e-8
    assert abs(fit.b_minus - b_minus) < 1e-8


def test_fit_matches_connection_formulae(reference_trajectory, reference_point):
    exact = amplitudes_from_monodromy(reference_point)
    fit = fit_amplitudes(reference_trajectory, exact.nu, (120.0, 200.0))
    scale = max(abs(exact.b_plus), abs(exact.b_minus))
    assert abs(fit.b_plus - exact.b_plus) / scale < 1e-4
    assert abs(fit.b_minus - exact.b_minus) / scale < 1e-4
    assert isinstance(fit, AsymptoticData) and fit.residual is not None


def test_fit_window_validation(reference_trajectory):
    with pytest.raises(ValidationError):
        fit_amplitudes(reference_trajectory, 0.0, (20.0, 100.0))
    with pytest.raises(ValidationError):
        fit_amplitudes(reference_trajectory, 0.0, (120.0, 400.0))


def test_sensitivities_near_zero_point():
    m = MonodromyData(0.25, 0.25)
    samples = sensitivities(m, [1.0, 5.0])
    for s in samples:
        assert abs(s.u) < 1e-12
        assert all(math.isfinite(abs(v)) for v in (s.u_p, s.u_q, s.u_px, s.u_qx))
        assert abs(s.u_p) > 0 or abs(s.u_q) > 0


def test_sensitivity_stencil_is_second_order(reference_point, reference_trajectory):
    from p3tau.monodromy import monodromy_from_stokes, stokes_from_monodromy, StokesData

    st = stokes_from_monodromy(reference_point)
    xs = np.array([5.0])

    def central(h):
        vals = []
        for sign in (1, -1):
            m = monodromy_from_stokes(StokesData(st.p + sign * h, st.q), near=reference_point.eta)
            t = replay(cauchy_from_monodromy(m), reference_trajectory.mesh)
            vals.append(t.evaluate(xs)[0, 0])
        return (vals[0] - vals[1]) / (2 * h)

    d = [central(h) for h in (4e-3, 2e-3, 1e-3)]
    ratio = abs(d[0] - d[1]) / abs(d[1] - d[2])
    assert 3.5 < ratio < 4.5


def test_bracket_is_x_independent(reference_point):
    xs = [1.0, 5.0, 20.0]
    samples = sensitivities(reference_point, xs)
    brackets = [s.x * (s.u_px * s.u_q - s.u_qx * s.u_p) for s in samples]
    ref = abs(brackets[0])
    assert max(abs(b - brackets[0]) for b in brackets) < 1e-6 * ref


def test_hamiltonian_identity_along_trajectory(reference_trajectory):
    xs = np.linspace(0.5, 30.0, 40)
    h = 1e-4
    Y = reference_trajectory.evaluate(xs)

    def H(x):
        y = reference_trajectory.evaluate(x)
        return np.array([hamiltonian(xi, yi[0], yi[1]).H for xi, yi in zip(x, y)])

    Hx = (-H(xs + 2 * h) + 8 * H(xs + h) - 8 * H(xs - h) + H(xs - 2 * h)) / (12 * h)
    Hv = H(xs)
    v = xs * Y[:, 1]
    lhs = xs * Hx + v * Y[:, 1]
    assert np.max(np.abs(lhs - Hv) / np.maximum(1.0, np.abs(Hv))) < 1e-8


def test_csv_export(tmp_path, reference_trajectory):
    path = tmp_path / "traj.csv"
    reference_trajectory.to_csv(path, [1.0, 2.0, 3.0])
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "re_u", "im_u", "re_ux", "im_ux"]
    assert len(rows) == 4
    u = reference_trajectory.evaluate([2.0])[0, 0]
    assert float(rows[2][1]) == u.real and float(rows[2][2]) == u.imag


def test_singularity_guard_triggers():
    # A small guard on |Im u| is exceeded immediately for imaginary alpha.
    c = cauchy_from_monodromy(MonodromyData(0.3, 0.15))
    with pytest.raises(SingularityError):
        integrate(c, 1e-3, 10.0, 1e-10, guard=1.0)


def test_integration_is_deterministic(reference_point):
    c = cauchy_from_monodromy(reference_point)
    a = integrate(c, 1e-3, 20.0, 1e-10)
    b = integrate(c, 1e-3, 20.0, 1e-10)
    assert np.array_equal(a.mesh, b.mesh) and np.array_equal(a.y, b.y)


def test_replay_reproduces_mesh_solution(reference_trajectory, reference_point):
    again = replay(cauchy_from_monodromy(reference_point), reference_trajectory.mesh)
    # steps are rebuilt from mesh differences, so agreement is to rounding, not bitwise
    assert np.max(np.abs(again.y[:, :2] - reference_trajectory.y[:, :2])) < 1e-11
