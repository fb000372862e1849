"""Self-checks of the curvature engine on a scenario.

Partial derivatives are compared with central differences (step ``FD_STEP``)
of the next-lower analytic order; the tensor identities below hold for any
Levi-Civita connection and so must hold on every metric.
"""
from __future__ import annotations

import numpy as np

from .checks import CheckResult, worst
from .curvature import (
    VectorFieldSpec,
    lie_derivative_connection_jet,
    lie_derivative_riemann_commutation,
    lie_derivative_riemann_direct,
)
from .jets import DIM
from .tensor import max_abs

FD_STEP = 1e-5
FD_TOL = 1e-5
AGREEMENT_TOL = 1e-8

# nonlinear probe field, written in terms of the chart's own coordinate names
_PROBE = ("{1}*{2}", "sin({0}) + {3}", "{0}*{0} - {2}", "cos({1})*{3}")


def probe_field(coords) -> VectorFieldSpec:
    return VectorFieldSpec([t.format(*coords) for t in _PROBE], coords)


def _fd_error(field, point, order: int) -> float:
    """Worst relative error of analytic order-``order`` partials against
    central differences of the analytic order-(order-1) partials."""
    point = np.asarray(point, float)
    worst_err = 0.0
    lower = [()] if order == 1 else _multis(order - 1)
    for base in lower:
        for i in range(DIM):
            multi = tuple(sorted(base + (i,)))
            e = np.zeros(DIM)
            e[i] = FD_STEP
            fd = (field.partial(point + e, base) - field.partial(point - e, base)) / (2 * FD_STEP) \
                if base else (field.value(point + e) - field.value(point - e)) / (2 * FD_STEP)
            exact = field.partial(point, multi)
            err = np.abs(exact - fd) / np.maximum(1.0, np.abs(exact))
            worst_err = max(worst_err, float(np.max(err)))
    return worst_err


def _multis(order: int):
    if order == 1:
        return [(i,) for i in range(DIM)]
    return sorted({tuple(sorted(m + (i,))) for m in _multis(order - 1) for i in range(DIM)})


def riemann_symmetry_residuals(bundle) -> dict[str, float]:
    Rl = bundle.riemann_low                         # Rl[w, k, i, j] = g(R(d_i, d_j) d_k, d_w)
    R = bundle.riemann
    DR = bundle.nabla_riemann                       # DR[l, k, i, j, m] = nabla_m R^l_kij
    W = bundle.weyl
    first = R + np.einsum("lijk->lkij", R) + np.einsum("ljki->lkij", R)
    second = DR + np.einsum("lkjmi->lkijm", DR) + np.einsum("lkmij->lkijm", DR)
    return {
        "antisym_last": max_abs(Rl + np.swapaxes(Rl, 2, 3)),
        "antisym_first": max_abs(Rl + np.swapaxes(Rl, 0, 1)),
        "pair": max_abs(Rl - np.einsum("ijwk->wkij", Rl)),
        "bianchi1": max_abs(first),
        "bianchi2": max_abs(second),
        "weyl_trace": max(max_abs(np.einsum("lkli->ki", W)), max_abs(np.einsum("lkil->ki", W))),
    }


def engine_checks(scenario, tolerance: float | None = None) -> list[CheckResult]:
    tol = scenario.tolerance if tolerance is None else tolerance
    samples = scenario.samples
    fields = [("metric", scenario.metric_field)]
    fields.append(("xi", scenario.xi_field))
    if scenario.potential_field is not None:
        fields.append(("potential", scenario.potential_field))
    if scenario.alpha_field is not None:
        fields.append(("alpha", scenario.alpha_field))
    fd = worst(_fd_error(f, p, k) for _, f in fields for p in scenario.points for k in (1, 2, 3))
    sym = [riemann_symmetry_residuals(s.bundle) for s in samples]
    gamma_sym = worst(max_abs(s.bundle.gamma - np.swapaxes(s.bundle.gamma, 1, 2)) for s in samples)
    metric_compat = worst(max_abs(s.bundle.nabla(s.bundle.g_jet, "dd").value) for s in samples)
    ricci_sym = worst(max_abs(s.bundle.ricci - s.bundle.ricci.T) for s in samples)
    trace = worst(abs(float(np.trace(s.bundle.ricci_op)) - s.bundle.scalar) for s in samples)
    probe = probe_field(scenario.coordinates)
    probes = [("xi", [s.xi for s in samples]), ("probe", [s.bundle.field_jet(probe) for s in samples])]
    if scenario.potential_field is not None:
        probes.insert(1, ("potential", [s.V for s in samples]))
    lvsym, agree = 0.0, 0.0
    per_field = {}
    for name, jets in probes:
        a = 0.0
        for s, V in zip(samples, jets):
            K = lie_derivative_connection_jet(s.bundle, V).value
            lvsym = max(lvsym, max_abs(K - np.swapaxes(K, 1, 2)))
            a = max(a, max_abs(lie_derivative_riemann_commutation(s.bundle, V)
                               - lie_derivative_riemann_direct(s.bundle, V)))
        per_field[name] = a
        agree = max(agree, a)

    def entry(key):
        return worst(d[key] for d in sym)

    return [
        CheckResult("analytic partials (orders 1-3) match central differences", "engine.fd", fd, FD_TOL,
                    detail={"step": FD_STEP, "relative": True}),
        CheckResult("Christoffel symbols symmetric in lower indices", "engine.gamma", gamma_sym, tol),
        CheckResult("metric compatibility nabla g = 0", "engine.nabla_g", metric_compat, tol),
        CheckResult("Riemann antisymmetric in its last pair", "engine.R_antisym_last", entry("antisym_last"), tol),
        CheckResult("lowered Riemann antisymmetric in its first pair", "engine.R_antisym_first", entry("antisym_first"), tol),
        CheckResult("lowered Riemann pair symmetry", "engine.R_pair", entry("pair"), tol),
        CheckResult("first Bianchi identity", "engine.bianchi1", entry("bianchi1"), tol),
        CheckResult("second Bianchi identity", "engine.bianchi2", entry("bianchi2"), tol),
        CheckResult("Ricci tensor symmetric", "engine.ricci_sym", ricci_sym, tol),
        CheckResult("scalar curvature equals trace of Q", "engine.trace_Q", trace, tol),
        CheckResult("Weyl tensor trace-free", "eq3.1", entry("weyl_trace"), tol),
        CheckResult("L_V nabla symmetric (all test fields)", "eq3.11", lvsym, tol),
        CheckResult("L_V R: commutation formula agrees with direct Lie derivative (all test fields)", "eq4.10",
                    agree, max(tol, AGREEMENT_TOL), detail=per_field),
    ]
