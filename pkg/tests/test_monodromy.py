import cmath
import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from p3tau.errors import SingularValueError, ValidationError
from p3tau.monodromy import (
    CauchyData,
    MonodromyData,
    amplitudes_from_monodromy,
    cauchy_from_monodromy,
    cauchy_to_monodromy,
    monodromy_from_stokes,
    nu_from_monodromy,
    rho_from_monodromy,
    stokes_from_monodromy,
    validate,
)

# beta(0.3, 0.15) from mpmath at 30 digits.
BETA_REF = complex(-1.2566370614359172954, 0.034888697406836637445)

ARG_CHECK = "|arg(sin 2 pi eta / sin 2 pi sigma)| < pi/2"


def sin2pi(z):
    return cmath.sin(2 * math.pi * z)


@st.composite
def valid_points(draw):
    s = complex(draw(st.floats(0.05, 0.45)), draw(st.floats(-0.05, 0.05)))
    e = complex(draw(st.floats(0.03, 0.47)), draw(st.floats(-0.05, 0.05)))
    m = MonodromyData(s, e)
    assume(validate(m).ok)
    return m


def test_normalization_point_maps_to_zero():
    m = MonodromyData(0.25, 0.25)
    c = cauchy_from_monodromy(m)
    assert abs(c.alpha) < 1e-15 and abs(c.beta) < 1e-15
    st_ = stokes_from_monodromy(m)
    assert abs(st_.p) < 1e-15 and abs(st_.q) < 1e-15
    a = amplitudes_from_monodromy(m)
    assert abs(a.b_plus) < 1e-15 and abs(a.b_minus) < 1e-15 and abs(a.nu) < 1e-15


def test_reference_cauchy_data():
    c = cauchy_from_monodromy(MonodromyData(0.3, 0.15))
    assert abs(c.alpha - (-0.4j)) < 1e-15
    assert abs(c.beta - BETA_REF) < 5e-14


def test_nu_vanishes_when_sines_match():
    # sin 0.4 pi = sin 0.6 pi
    assert abs(nu_from_monodromy(MonodromyData(0.3, 0.2))) < 1e-15


def test_reference_amplitudes_conjugate_phases():
    m = MonodromyData(0.3, 0.15)
    a = amplitudes_from_monodromy(m)
    assert abs(a.nu.imag) < 1e-15
    assert abs(a.b_plus * a.b_minus + 4 * a.nu) < 1e-14
    # u is complex (alpha is imaginary), so b- is not conj(b+); for real nu the
    # phases are conjugate and the moduli differ by the ratio of the sine factors.
    ratio = sin2pi(m.sigma + m.eta) / sin2pi(m.sigma - m.eta)
    assert abs(a.b_minus - a.b_plus.conjugate() * ratio) < 1e-14


def test_rho_reference_and_singular_point():
    m = MonodromyData(0.3, 0.15)
    rho = rho_from_monodromy(m).rho
    assert abs(cmath.exp(-4j * math.pi * rho) - sin2pi(0.45) / sin2pi(0.15)) < 1e-12
    with pytest.raises(SingularValueError):
        rho_from_monodromy(MonodromyData(0.25, 0.25))


def test_rho_elementary_relation():
    m = MonodromyData(0.3, 0.15)
    s, e = m.sigma, m.eta
    nu = nu_from_monodromy(m)
    rho = rho_from_monodromy(m).rho
    for sign in (1, -1):
        lhs = 2 * cmath.cos(math.pi * (s + e + sign * 0.5j * nu))
        rhs = cmath.exp(1j * math.pi * (sign * s - sign * e - 0.5j * nu - 4 * rho))
        # The relation fixes the ratio of the two sides up to the sign choice of the branch.
        assert abs(abs(lhs) - abs(rhs)) < 1e-10 or abs(lhs - rhs) < 1e-10


def test_validate_examples():
    assert validate(MonodromyData(0.25, 0.25)).ok
    bad = validate(MonodromyData(0.25, 0.5))
    assert not bad.ok
    assert "sin 2 pi eta != 0" in [c.name for c in bad.failures()]
    m = MonodromyData(0.25 + 0.3j, 0.25)
    nu = nu_from_monodromy(m)
    passed = {c.name: c.passed for c in validate(m).checks}
    assert passed[ARG_CHECK] == (abs(nu.imag) < 0.5)


def test_validate_rejects_re_sigma_outside_strip():
    for s in (-0.1, 0.0, 0.5, 0.6):
        assert not validate(MonodromyData(s, 0.2)).ok


def test_cauchy_rejects_large_imaginary_alpha():
    with pytest.raises(ValidationError):
        CauchyData(2.5j, 0.0)


@settings(max_examples=200, deadline=None)
@given(valid_points())
def test_cauchy_round_trip(m):
    back = cauchy_to_monodromy(cauchy_from_monodromy(m))
    assert abs(back.sigma - m.sigma) < 1e-12
    assert abs(back.eta - m.eta) < 1e-12


@settings(max_examples=200, deadline=None)
@given(valid_points())
def test_stokes_round_trip(m):
    back = monodromy_from_stokes(stokes_from_monodromy(m), near=m.eta)
    assert abs(back.sigma - m.sigma) < 1e-12
    assert abs(back.eta - m.eta) < 1e-12


@settings(max_examples=200, deadline=None)
@given(valid_points())
def test_parameter_identities(m):
    nu = nu_from_monodromy(m)
    assert abs(cmath.exp(math.pi * nu) * sin2pi(m.sigma) - sin2pi(m.eta)) < 1e-12
    st_ = stokes_from_monodromy(m)
    assert abs(1 + st_.p * st_.q - sin2pi(m.sigma) ** 2 / sin2pi(m.eta) ** 2) < 1e-12
    a = amplitudes_from_monodromy(m)
    assert abs(a.b_plus * a.b_minus + 4 * a.nu) < 1e-10
    assert abs(a.nu.imag) < 0.5


@settings(max_examples=300, deadline=None)
@given(st.floats(0.02, 0.48), st.floats(-0.3, 0.3), st.floats(0.02, 0.48), st.floats(-0.3, 0.3))
def test_arg_condition_is_imaginary_nu_bound(sr, si, er, ei):
    m = MonodromyData(complex(sr, si), complex(er, ei))
    report = validate(m)
    check = next(c for c in report.checks if c.name == ARG_CHECK)
    assume(check.margin > 1e-8)
    nu = nu_from_monodromy(m)
    assert check.passed == (abs(nu.imag) < 0.5)
