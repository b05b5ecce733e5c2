"""Complex log-Gamma, Barnes log-G, the ratio Ĝ and the dilogarithm.

Every function accepts a scalar or an array and returns the same shape
(a Python ``complex`` for scalar input). Branches are the principal ones on
the plane cut along (-inf, 0] for the Gamma/Barnes family and along
[1, inf) for Li2. Continuity is obtained from recurrences that shift the
argument into the asymptotic region, never from after-the-fact unwinding.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import bernoulli

from .errors import PoleError

__all__ = ["log_gamma", "log_barnes_g", "log_g_hat", "dilog", "LOG_GLAISHER"]

LOG_2PI = np.log(2.0 * np.pi)
# log of the Glaisher-Kinkelin constant A = 1.28242712910062263687...
LOG_GLAISHER = 0.248754477033784262
# zeta'(-1) = 1/12 - log A
ZETA_PRIME_M1 = 1.0 / 12.0 - LOG_GLAISHER

_SHIFT_TO = 8.0
_POLE_TOL = 1e-12
_N_STIRLING = 12
_N_BARNES = 12
_N_DILOG = 24


@lru_cache(maxsize=None)
def _bernoulli(n: int) -> np.ndarray:
    return bernoulli(n)


def _prepare(z):
    arr = np.asarray(z, dtype=np.complex128)
    return arr, arr.ndim == 0


def _finish(out: np.ndarray, scalar: bool):
    if scalar:
        return complex(out.reshape(()))
    return out


def _check_nonpositive_integers(z: np.ndarray, what: str) -> None:
    near = np.round(z.real)
    bad = (near <= 0) & (np.abs(z - near) < _POLE_TOL)
    if np.any(bad):
        where = z[bad].ravel()[0]
        raise PoleError(f"{what} at non-positive integer z={where}", condition="z not in {0,-1,-2,...}")


def _shift_count(z: np.ndarray) -> np.ndarray:
    return np.maximum(0, np.ceil(_SHIFT_TO - z.real)).astype(int)


def _stirling(w: np.ndarray) -> np.ndarray:
    """log Gamma(w) for Re w >= 8 from the Stirling series."""
    b = _bernoulli(2 * _N_STIRLING)
    out = (w - 0.5) * np.log(w) - w + 0.5 * LOG_2PI
    inv = 1.0 / w
    inv2 = inv * inv
    term = inv
    for k in range(1, _N_STIRLING + 1):
        out = out + b[2 * k] / (2 * k * (2 * k - 1)) * term
        term = term * inv2
    return out


def _barnes_asymptotic(w: np.ndarray) -> np.ndarray:
    """log G(w + 1) for Re w >= 8 from its asymptotic series."""
    b = _bernoulli(2 * _N_BARNES + 2)
    logw = np.log(w)
    out = 0.5 * w * w * (logw - 1.5) + 0.5 * w * LOG_2PI - logw / 12.0 + ZETA_PRIME_M1
    inv2 = 1.0 / (w * w)
    term = inv2
    for k in range(1, _N_BARNES + 1):
        out = out + b[2 * k + 2] / (4 * k * (k + 1)) * term
        term = term * inv2
    return out


def log_gamma(z):
    """Principal branch of log Gamma(z).

    Shifts Re z up to at least 8 with log Gamma(z) = log Gamma(z+n) - sum log(z+k)
    and evaluates the Stirling series there.

    Raises
    ------
    PoleError
        If z is within 1e-12 of a non-positive integer.
    """
    z, scalar = _prepare(z)
    _check_nonpositive_integers(z, "pole of Gamma")
    n = _shift_count(z)
    nmax = int(n.max()) if n.size else 0
    acc = np.zeros_like(z)
    for k in range(nmax):
        mask = k < n
        acc = acc + np.where(mask, np.log(np.where(mask, z + k, 1.0)), 0.0)
    out = _stirling(z + n) - acc
    return _finish(out, scalar)


def log_barnes_g(z):
    """Principal branch of log G(z) for the Barnes G-function.

    With w = z + n and Re w >= 8, the functional equation G(z+1) = Gamma(z) G(z)
    telescopes to

        log G(z) = log G(w) - n log Gamma(w) + sum_{j<n} (j+1) log(z+j),

    and log G(w) = log G((w-1)+1) comes from the asymptotic series.

    Raises
    ------
    PoleError
        If z is within 1e-12 of a zero of G (a non-positive integer).
    """
    z, scalar = _prepare(z)
    _check_nonpositive_integers(z, "zero of Barnes G")
    n = _shift_count(z)
    w = z + n
    nmax = int(n.max()) if n.size else 0
    acc = np.zeros_like(z)
    for j in range(nmax):
        mask = j < n
        acc = acc + np.where(mask, (j + 1) * np.log(np.where(mask, z + j, 1.0)), 0.0)
    lgw = _stirling(w)
    out = _barnes_asymptotic(w - 1.0) - n * lgw + acc
    return _finish(out, scalar)


def log_g_hat(z):
    """log Ĝ(z) = log G(1+z) - log G(1-z)."""
    z, scalar = _prepare(z)
    out = np.asarray(log_barnes_g(1.0 + z)) - np.asarray(log_barnes_g(1.0 - z))
    return _finish(out, scalar)


def _dilog_bernoulli(u: np.ndarray) -> np.ndarray:
    # Li2(z) = sum_n B_n u^(n+1)/(n+1)!  with u = -log(1-z), valid for |u| < 2 pi
    b = _bernoulli(2 * _N_DILOG)
    u2 = u * u
    out = u - 0.25 * u2
    term = u * u2 / 6.0  # u^3/3!
    for k in range(1, _N_DILOG + 1):
        out = out + b[2 * k] * term
        term = term * u2 / ((2 * k + 2) * (2 * k + 3))
    return out


def _dilog_unit_disk(z: np.ndarray) -> np.ndarray:
    """Li2 for |z| <= 1, z != 1."""
    out = np.empty_like(z)
    refl = z.real > 0.5
    zs = z[~refl]
    out[~refl] = _dilog_bernoulli(-np.log1p(-zs))
    zr = z[refl]
    # Li2(z) = pi^2/6 - log z log(1-z) - Li2(1-z); the series for 1-z uses u = -log z
    out[refl] = np.pi**2 / 6.0 - np.log(zr) * np.log1p(-zr) - _dilog_bernoulli(-np.log(zr))
    return out


def dilog(z):
    """Principal branch of the dilogarithm Li2(z), cut along [1, inf).

    |z| <= 1 uses the Bernoulli-accelerated series in -log(1-z) (with
    reflection for Re z > 1/2); |z| > 1 is mapped inside with the inversion
    formula.
    """
    z, scalar = _prepare(z)
    flat = z.ravel().copy()
    out = np.empty_like(flat)
    one = flat == 1.0
    out[one] = np.pi**2 / 6.0
    outer = (np.abs(flat) > 1.0) & ~one
    inner = ~outer & ~one
    out[inner] = _dilog_unit_disk(flat[inner])
    zo = flat[outer]
    lm = np.log(-zo)
    out[outer] = -np.pi**2 / 6.0 - 0.5 * lm * lm - _dilog_unit_disk(1.0 / zo)
    return _finish(out.reshape(z.shape), scalar)
