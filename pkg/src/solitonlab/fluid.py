"""Perfect-fluid data: quasi-Einstein decomposition, (sigma, rho), Einstein equation.

Conventions: ``S = a g + b eta(x)eta`` with ``a = lambda + kappa (sigma - rho)/2``
and ``b = kappa (sigma + rho)``; ``T = rho g + (sigma + rho) eta(x)eta``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .checks import CheckResult, worst
from .tensor import max_abs

UNIT_TOL = 1e-8


class FluidError(ValueError):
    pass


@dataclass(frozen=True)
class FluidParams:
    lam: float
    kappa: float
    sigma: float
    rho: float

    def __post_init__(self):
        if not self.kappa > 0:
            raise FluidError("kappa must be positive")


@dataclass(frozen=True)
class QuasiEinsteinDecomposition:
    a: float
    b: float
    fit_residual: float
    tolerance: float = 1e-8

    @property
    def valid(self) -> bool:
        return self.fit_residual <= self.tolerance


def _eta(g, xi):
    return np.asarray(g) @ np.asarray(xi)


def decompose_quasi_einstein(S, g, xi, tolerance: float = 1e-8) -> QuasiEinsteinDecomposition:
    """Trace and (xi, xi) projections of S onto a g + b eta(x)eta."""
    S, g, xi = (np.asarray(v, float) for v in (S, g, xi))
    norm = xi @ g @ xi
    if abs(norm + 1.0) > UNIT_TOL:
        raise FluidError(f"xi is not unit timelike: g(xi, xi) = {norm!r}")
    r = float(np.einsum("ab,ab->", np.linalg.inv(g), S))
    s_xx = float(xi @ S @ xi)
    a = (r + s_xx) / 3.0
    b = s_xx + a
    eta = _eta(g, xi)
    fit = max_abs(S - a * g - b * np.outer(eta, eta))
    return QuasiEinsteinDecomposition(a, b, fit, tolerance)


def extract_fluid_params(a: float, b: float, lam: float, kappa: float) -> tuple[float, float]:
    """Invert the coefficient definitions; returns (sigma, rho)."""
    if kappa == 0:
        raise FluidError("kappa must be non-zero")
    sigma = (2.0 * (a - lam) + b) / (2.0 * kappa)
    rho = (b - 2.0 * (a - lam)) / (2.0 * kappa)
    return sigma, rho


def energy_momentum(sigma: float, rho: float, g, eta) -> np.ndarray:
    eta = np.asarray(eta, float)
    return rho * np.asarray(g, float) + (sigma + rho) * np.outer(eta, eta)


def einstein_residual(S, r: float, g, T, lam: float, kappa: float) -> np.ndarray:
    """S + (lambda - r/2) g - kappa T."""
    return np.asarray(S) + (lam - r / 2.0) * np.asarray(g) - kappa * np.asarray(T)


def _flag(value: float, tolerance: float) -> str:
    if abs(value) <= tolerance:
        return "boundary"
    return "true" if value > 0 else "false"


@dataclass(frozen=True)
class EnergyConditions:
    s_xi_xi: float
    strong_value: float
    timelike_convergence: str
    strong_energy: str


def energy_conditions(sigma: float, rho: float, S, xi, tolerance: float = 1e-8) -> EnergyConditions:
    xi = np.asarray(xi, float)
    s_xx = float(xi @ np.asarray(S, float) @ xi)
    strong = sigma + 3.0 * rho
    return EnergyConditions(s_xx, strong, _flag(s_xx, tolerance), _flag(strong, tolerance))


def ricci_norm_closed_form(lam: float, kappa: float, sigma: float, rho: float) -> float:
    return 4 * lam**2 + 2 * lam * kappa * (sigma - 3 * rho) + kappa**2 * (sigma**2 + 3 * rho**2)


@dataclass(frozen=True)
class RicciNormReport:
    direct: float
    closed_form: float
    via_a_b: float
    s_xi_xi: float
    s_xi_xi_formula: float

    @property
    def difference(self) -> float:
        return abs(self.direct - self.closed_form)


def ricci_norm_check(bundle, lam, kappa, sigma, rho, xi, decomposition) -> RicciNormReport:
    """trace(Q^2) against its closed form and the a r + b S(xi,xi) form."""
    Q = bundle.ricci_op
    direct = float(np.trace(Q @ Q))
    xi = np.asarray(xi, float)
    s_xx = float(xi @ bundle.ricci @ xi)
    a, b = decomposition.a, decomposition.b
    return RicciNormReport(
        direct=direct,
        closed_form=ricci_norm_closed_form(lam, kappa, sigma, rho),
        via_a_b=a * bundle.scalar + b * s_xx,
        s_xi_xi=s_xx,
        s_xi_xi_formula=-lam + kappa * (sigma + 3 * rho) / 2.0,
    )


@dataclass(frozen=True)
class FluidPoint:
    """Per-point fluid data table row."""

    point: tuple
    a: float
    b: float
    sigma: float
    rho: float
    r: float
    fit_residual: float
    valid: bool
    einstein_residual: float
    eq2_1_residual: float
    eq3_14_residual: float
    norm: RicciNormReport
    energy: EnergyConditions

    def row(self) -> dict:
        return {
            "point": list(self.point), "a": self.a, "b": self.b, "sigma": self.sigma,
            "rho": self.rho, "r": self.r, "fit_residual": self.fit_residual,
            "quasi_einstein": self.valid,
            "timelike_convergence": self.energy.timelike_convergence,
            "strong_energy": self.energy.strong_energy,
        }


def fluid_point(bundle, xi, lam: float, kappa: float, tolerance: float = 1e-8,
                override: tuple[float, float] | None = None) -> FluidPoint:
    """Run the whole fluid chain at one point.

    ``override`` replaces the extracted (sigma, rho); only meant for negative tests.
    """
    xi = np.asarray(xi, float)
    dec = decompose_quasi_einstein(bundle.ricci, bundle.g, xi, tolerance)
    sigma, rho = extract_fluid_params(dec.a, dec.b, lam, kappa) if override is None else override
    eta = _eta(bundle.g, xi)
    T = energy_momentum(sigma, rho, bundle.g, eta)
    ein = max_abs(einstein_residual(bundle.ricci, bundle.scalar, bundle.g, T, lam, kappa))
    r = bundle.scalar
    norm = ricci_norm_check(bundle, lam, kappa, sigma, rho, xi, dec)
    return FluidPoint(
        point=tuple(float(v) for v in bundle.point),
        a=dec.a, b=dec.b, sigma=sigma, rho=rho, r=r,
        fit_residual=dec.fit_residual, valid=dec.valid,
        einstein_residual=ein,
        eq2_1_residual=abs(r - (4 * lam + kappa * (sigma - 3 * rho))),
        eq3_14_residual=abs(norm.s_xi_xi - (dec.b - dec.a)),
        norm=norm,
        energy=energy_conditions(sigma, rho, bundle.ricci, xi, tolerance),
    )


def fluid_suite(points: list[FluidPoint], tolerance: float) -> list[CheckResult]:
    """Checks that only make sense when S is quasi-Einstein w.r.t. xi."""
    ok = all(p.valid for p in points)
    fit = worst(p.fit_residual for p in points)
    gate = dict(applicable=ok, hypothesis="S = a g + b eta(x)eta", hypothesis_residual=fit)
    rel = [p.norm.difference / max(1.0, abs(p.norm.closed_form)) for p in points]
    return [
        CheckResult("Einstein field equation with cosmological constant", "eq1.2",
                    worst(p.einstein_residual for p in points), tolerance, **gate),
        CheckResult("scalar curvature r = 4 lambda + kappa (sigma - 3 rho)", "eq2.1",
                    worst(p.eq2_1_residual for p in points), tolerance, **gate),
        CheckResult("|Q|^2 = a r + b S(xi, xi)", "eq3.13",
                    worst(abs(p.norm.direct - p.norm.via_a_b) for p in points), tolerance, **gate),
        CheckResult("S(xi, xi) = b - a = -lambda + kappa (sigma + 3 rho)/2", "eq3.14",
                    worst(max(p.eq3_14_residual, abs(p.norm.s_xi_xi - p.norm.s_xi_xi_formula))
                          for p in points), tolerance, **gate),
        CheckResult("square length of the Ricci operator (closed form)", "thm3.11",
                    worst(rel), tolerance, detail={"relative": True}, **gate),
    ]
