"""Shared numerical primitives: special functions, quadrature, ODE stepping.

Everything here is a pure function of its inputs; the specs are frozen
dataclasses, so values can be shared freely between threads.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.integrate

from .errors import AccuracyError, DomainError, NumericalFailureError

__all__ = [
    "QuadratureSpec",
    "OdeSettings",
    "log_gamma",
    "laguerre",
    "integrate",
    "ode_propagate",
]


@dataclass(frozen=True)
class QuadratureSpec:
    """Interval and accuracy request for :func:`integrate`.

    ``breakpoints`` are optional interior abscissae where the integrand has
    localized structure (narrow peaks); they seed the adaptive subdivision
    so it cannot overlook features much narrower than the interval.
    """

    lower: float
    upper: float
    tolerance: float = 1e-10
    max_subdivisions: int = 200
    breakpoints: tuple = ()

    def __post_init__(self):
        if not self.lower < self.upper:
            raise DomainError(f"need lower < upper, got [{self.lower}, {self.upper}]")
        if not self.tolerance > 0:
            raise DomainError("tolerance must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class OdeSettings:
    """Integrator selection for :func:`ode_propagate`.

    ``method='rk4'`` is the fixed-step classical Runge-Kutta scheme (the
    reproducible default); ``method='adaptive'`` delegates to an embedded
    adaptive pair and honours ``abs_tol``/``rel_tol``.
    """

    step: float = 1e-3
    method: str = "rk4"
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10

    def __post_init__(self):
        if not self.step > 0:
            raise DomainError("step must be positive")
        if self.method not in ("rk4", "adaptive"):
            raise DomainError(f"unknown method {self.method!r}")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("tolerances must be positive")


def log_gamma(x):
    """ln Gamma(x) for x > 0."""
    if x <= 0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def laguerre(n, a, z):
    """Generalized Laguerre polynomial L_n^a(z) by upward recurrence.

    Vectorized over ``z``; returns a scalar for scalar input.  The upward
    three-term recurrence is stable for the small orders used here.
    """
    if n < 0 or n != int(n):
        raise DomainError(f"order must be a nonnegative integer, got {n}")
    n = int(n)
    z_arr = np.asarray(z, dtype=float)
    prev = np.ones_like(z_arr)
    if n == 0:
        return prev if z_arr.ndim else float(prev)
    cur = 1.0 + a - z_arr
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + a - z_arr) * cur - (k + a) * prev) / (k + 1)
    return cur if z_arr.ndim else float(cur)


def integrate(f, quad: QuadratureSpec) -> complex:
    """Adaptive quadrature of a complex-valued integrand on a finite interval.

    Returns an estimate whose estimated absolute error is below
    ``quad.tolerance``; raises :class:`AccuracyError` (carrying the best
    estimate) when the subdivision budget is exhausted first.
    """
    points = sorted(p for p in quad.breakpoints if quad.lower < p < quad.upper)

    def run_part(g):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", scipy.integrate.IntegrationWarning)
            val, err = scipy.integrate.quad(
                g,
                quad.lower,
                quad.upper,
                epsabs=0.5 * quad.tolerance,
                epsrel=1e-12,
                limit=quad.max_subdivisions,
                points=points or None,
            )
        bad = [w for w in caught if issubclass(w.category, scipy.integrate.IntegrationWarning)]
        return val, err, bad

    re_val, re_err, re_bad = run_part(lambda x: np.real(f(x)))
    im_val, im_err, im_bad = run_part(lambda x: np.imag(f(x)))
    estimate = complex(re_val, im_val)
    error = re_err + im_err
    if re_bad or im_bad or error > quad.tolerance:
        raise AccuracyError(
            f"quadrature did not converge to {quad.tolerance:g} "
            f"(estimated error {error:g})",
            best_estimate=estimate,
            error_estimate=error,
        )
    return estimate


def _rk4_span(rhs, y, t0, t1, step):
    """March y from t0 to t1 with fixed RK4 substeps of size <= step."""
    span = t1 - t0
    m = max(1, int(math.ceil(span / step - 1e-12)))
    h = span / m
    t = t0
    for _ in range(m):
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
    return y


def ode_propagate(rhs, y0, t0, t1, settings: OdeSettings = OdeSettings(), t_eval=None):
    """Propagate ``dy/dt = rhs(t, y)`` from t0 to t1.

    Returns ``(times, states)`` with ``states[i]`` the solution at
    ``times[i]``.  ``t_eval`` defaults to the natural fixed-step grid.
    States may be real or complex arrays.
    """
    if not t1 > t0:
        raise DomainError("need t1 > t0")
    y0 = np.atleast_1d(np.asarray(y0))
    if t_eval is None:
        m = max(1, int(round((t1 - t0) / settings.step)))
        t_eval = np.linspace(t0, t1, m + 1)
    else:
        t_eval = np.asarray(t_eval, dtype=float)
        if t_eval[0] != t0 or t_eval[-1] != t1 or np.any(np.diff(t_eval) <= 0):
            raise DomainError("t_eval must increase strictly from t0 to t1")

    if settings.method == "adaptive":
        return _adaptive_propagate(rhs, y0, t0, t1, settings, t_eval)

    states = np.empty((len(t_eval),) + y0.shape, dtype=np.result_type(y0.dtype, np.float64))
    states[0] = y0
    y = y0.astype(states.dtype)
    for i in range(1, len(t_eval)):
        y = _rk4_span(rhs, y, t_eval[i - 1], t_eval[i], settings.step)
        if not np.all(np.isfinite(y.view(float))):
            raise NumericalFailureError(
                f"non-finite state at t={t_eval[i]:g}", time=float(t_eval[i])
            )
        states[i] = y
    return t_eval, states


def _adaptive_propagate(rhs, y0, t0, t1, settings, t_eval):
    """Embedded adaptive integration; complex states stacked as reals."""
    is_complex = np.iscomplexobj(y0)

    if is_complex:
        def real_rhs(t, yr):
            dy = np.asarray(rhs(t, yr[: len(y0)] + 1j * yr[len(y0):]))
            return np.concatenate([dy.real, dy.imag])

        yr0 = np.concatenate([y0.real.astype(float), y0.imag.astype(float)])
    else:
        def real_rhs(t, yr):
            return np.asarray(rhs(t, yr), dtype=float)

        yr0 = y0.astype(float)

    sol = scipy.integrate.solve_ivp(
        real_rhs,
        (t0, t1),
        yr0,
        method="DOP853",
        t_eval=t_eval,
        atol=settings.abs_tol,
        rtol=settings.rel_tol,
    )
    if not sol.success:
        raise NumericalFailureError(f"adaptive integration failed: {sol.message}")
    states = sol.y.T
    if is_complex:
        states = states[:, : len(y0)] + 1j * states[:, len(y0):]
    if not np.all(np.isfinite(states.view(float))):
        raise NumericalFailureError("non-finite state in adaptive integration")
    return sol.t, states
