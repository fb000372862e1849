"""Shared helpers and independent numeric oracles.

The oracles below never touch the package's jet or expression machinery:
metrics are plain Python callables and derivatives are central differences.
"""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from solitonlab.curvature import MetricField, SamplePoint, VectorFieldSpec, ExpressionField
from solitonlab.fluid import fluid_point
from solitonlab.scenario import parse_scenario

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"
COORDS = ("t", "x", "y", "z")

MINKOWSKI = [["-1", "0", "0", "0"], ["0", "1", "0", "0"], ["0", "0", "1", "0"], ["0", "0", "0", "1"]]
DESITTER = [["-1", "0", "0", "0"], ["0", "exp(2*t)", "0", "0"],
            ["0", "0", "exp(2*t)", "0"], ["0", "0", "0", "exp(2*t)"]]
SCHWARZSCHILD = [["-(1 - 2/r)", "0", "0", "0"], ["0", "1/(1 - 2/r)", "0", "0"],
                 ["0", "0", "r^2", "0"], ["0", "0", "0", "r^2*sin(th)^2"]]
SCHW_COORDS = ("t", "r", "th", "ph")
SCHW_POINT = (0.0, 5.0, math.pi / 3, math.pi / 4)
DS_POINTS = [(0.0, 0.0, 0.0, 0.0), (0.3, 1.0, -1.0, 0.5), (-0.4, -1.5, 0.2, 1.9)]


def desitter_np(p):
    e = math.exp(2 * p[0])
    return np.diag([-1.0, e, e, e])


def schwarzschild_np(p):
    r, th = p[1], p[2]
    f = 1 - 2 / r
    return np.diag([-f, 1 / f, r * r, (r * math.sin(th)) ** 2])


def skewed_np(p):
    """A non-diagonal Lorentzian metric with no symmetry."""
    t, x, y, z = p
    g = np.array([
        [-1 - 0.1 * x * x, 0.2 * math.sin(y), 0.05 * t, 0.0],
        [0.2 * math.sin(y), 1 + 0.1 * t * t, 0.1 * z, 0.03 * x * y],
        [0.05 * t, 0.1 * z, math.exp(0.2 * x), 0.0],
        [0.0, 0.03 * x * y, 0.0, 1 + 0.2 * math.cos(t)],
    ])
    return g


SKEWED = [
    ["-1 - 0.1*x^2", "0.2*sin(y)", "0.05*t", "0"],
    ["0.2*sin(y)", "1 + 0.1*t^2", "0.1*z", "0.03*x*y"],
    ["0.05*t", "0.1*z", "exp(0.2*x)", "0"],
    ["0", "0.03*x*y", "0", "1 + 0.2*cos(t)"],
]


def fd_partials(fn, p, h=1e-5):
    """dfn[..., i] = d fn / d x^i by central differences."""
    p = np.asarray(p, float)
    cols = []
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        cols.append((np.asarray(fn(p + e)) - np.asarray(fn(p - e))) / (2 * h))
    return np.stack(cols, axis=-1)


def christoffel_oracle(metric_np, p, h=1e-5):
    """Gamma^a_bc = 1/2 g^ad (d_b g_dc + d_c g_db - d_d g_bc)."""
    g = metric_np(p)
    dg = fd_partials(metric_np, p, h)               # dg[a, b, c] = d_c g_ab
    ginv = np.linalg.inv(g)
    low = 0.5 * (np.einsum("dcb->dbc", dg) + dg - np.einsum("bcd->dbc", dg))
    return np.einsum("ad,dbc->abc", ginv, low)


def riemann_oracle(metric_np, p, h=1e-4):
    """R^l_kij with R(d_i, d_j) d_k = R^l_kij d_l, by differencing the Christoffel oracle."""
    G = christoffel_oracle(metric_np, p)
    dG = fd_partials(lambda q: christoffel_oracle(metric_np, q), p, h)   # dG[l, a, b, i] = d_i Gamma^l_ab
    R = (np.einsum("ljki->lkij", dG) - np.einsum("likj->lkij", dG)
         + np.einsum("lim,mjk->lkij", G, G) - np.einsum("ljm,mik->lkij", G, G))
    return R


def samples(metric, points, xi=None, V=None, alpha=None, coords=COORDS):
    g = MetricField(metric, coords)
    xi_f = VectorFieldSpec(xi, coords) if xi is not None else None
    V_f = VectorFieldSpec(V, coords) if V is not None else None
    a_f = ExpressionField(alpha, "dd", coords) if alpha is not None else None
    return [SamplePoint.build(g, p, xi_f, V_f, a_f) for p in points]


def fluids(samps, lam=0.0, kappa=1.0, tol=1e-8):
    return [fluid_point(s.bundle, s.xi_value, lam, kappa, tol) for s in samps]


def scenario_doc(**kw):
    doc = {"metric": MINKOWSKI, "lambda": 0, "kappa": 1, "points": [[0, 0, 0, 0]]}
    doc.update(kw)
    return doc


def make_scenario(**kw):
    return parse_scenario(scenario_doc(**kw))


@pytest.fixture(scope="session")
def desitter_samples():
    return samples(DESITTER, DS_POINTS, xi=["1", "0", "0", "0"])


@pytest.fixture(scope="session")
def schwarzschild_bundle():
    from solitonlab.curvature import CurvatureBundle
    return CurvatureBundle(MetricField(SCHWARZSCHILD, SCHW_COORDS), SCHW_POINT)
