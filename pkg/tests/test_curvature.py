import math

import numpy as np
import pytest

from solitonlab.curvature import (
    CurvatureBundle,
    MetricField,
    VectorFieldSpec,
    christoffel,
    curvature_derivation,
    lie_derivative,
    lie_derivative_connection,
    lie_derivative_riemann_commutation,
    lie_derivative_riemann_direct,
    reference_observer,
    riemann,
)
from solitonlab.tensor import max_abs

from conftest import (
    COORDS, DESITTER, MINKOWSKI, SCHW_COORDS, SCHW_POINT, SCHWARZSCHILD, SKEWED,
    christoffel_oracle, desitter_np, fd_partials, riemann_oracle, schwarzschild_np, skewed_np,
)

CASES = [
    (DESITTER, COORDS, desitter_np, (0.3, 1.0, -2.0, 0.5)),
    (SCHWARZSCHILD, SCHW_COORDS, schwarzschild_np, SCHW_POINT),
    (SKEWED, COORDS, skewed_np, (0.3, 0.5, -0.7, 0.2)),
]


@pytest.mark.parametrize("metric,coords,fn,p", CASES)
def test_christoffel_matches_oracle(metric, coords, fn, p):
    G = christoffel(MetricField(metric, coords), p)
    assert G.valence == (1, 2)
    assert np.allclose(G.components, christoffel_oracle(fn, p), atol=1e-8)


@pytest.mark.parametrize("metric,coords,fn,p", CASES)
def test_riemann_matches_oracle(metric, coords, fn, p):
    R = riemann(MetricField(metric, coords), p).components
    assert np.allclose(R, riemann_oracle(fn, p), atol=1e-5)


def test_schwarzschild_christoffel_example():
    G = christoffel(MetricField(SCHWARZSCHILD, SCHW_COORDS), SCHW_POINT).components
    # Gamma^r_tt = m (r - 2m) / r^3
    assert G[1, 0, 0] == pytest.approx(3 / 125)


def test_desitter_curvature(desitter_samples):
    for s in desitter_samples:
        b = s.bundle
        g = b.g
        const = np.einsum("jk,li->lkij", g, np.eye(4)) - np.einsum("ik,lj->lkij", g, np.eye(4))
        assert max_abs(b.riemann - const) < 1e-12
        assert max_abs(b.ricci - 3 * g) < 1e-12
        assert b.scalar == pytest.approx(12.0)
        assert max_abs(b.weyl) < 1e-12
        assert max_abs(b.div_weyl) < 1e-10
    # R(d_t, d_x) d_x = +d_t at t = 0
    b0 = desitter_samples[0].bundle
    assert b0.riemann[0, 1, 0, 1] == pytest.approx(1.0)


def test_schwarzschild_vacuum_and_weyl(schwarzschild_bundle):
    b = schwarzschild_bundle
    assert max_abs(b.ricci) < 1e-12
    assert b.kretschmann == pytest.approx(48 / 5 ** 6, rel=1e-10)
    assert b.weyl_square == pytest.approx(48 / 5 ** 6, rel=1e-10)
    assert max_abs(b.weyl) > 1e-3
    assert max_abs(b.div_weyl) < 1e-10


def test_semi_symmetry_derivation(desitter_samples, schwarzschild_bundle):
    b = desitter_samples[1].bundle
    assert max_abs(curvature_derivation(b, "riemann")) < 1e-12
    assert max_abs(curvature_derivation(b, "ricci")) < 1e-12
    assert max_abs(curvature_derivation(schwarzschild_bundle, "riemann")) > 1e-4
    with pytest.raises(ValueError):
        curvature_derivation(b, "weyl")


def test_curvature_derivation_against_explicit_loop(schwarzschild_bundle):
    b = schwarzschild_bundle
    R, S = b.riemann, b.ricci
    out = curvature_derivation(b, "ricci")
    brute = np.zeros((4,) * 4)
    for a1, a2, x, y in np.ndindex(4, 4, 4, 4):
        brute[a1, a2, x, y] = -sum(R[m, a1, x, y] * S[m, a2] + R[m, a2, x, y] * S[a1, m] for m in range(4))
    assert np.allclose(out, brute)


def test_lie_derivative_of_metric_desitter():
    g = MetricField(DESITTER, COORDS)
    xi = VectorFieldSpec(["1", "0", "0", "0"], COORDS)
    for t in (0.0, 0.4):
        L = lie_derivative(CurvatureBundle(g, (t, 0.1, 0.2, 0.3)), g, xi).components
        assert np.allclose(L, 2 * np.diag([0, 1, 1, 1]) * math.exp(2 * t), atol=1e-12)


def test_lie_derivative_generic_against_partial_formula():
    """(L_V g)_ab = V^c d_c g_ab + g_cb d_a V^c + g_ac d_b V^c, all by finite differences."""
    g = MetricField(SKEWED, COORDS)
    texts = ["x*y", "sin(t) + z", "t^2 - y", "cos(x)*z"]
    V = VectorFieldSpec(texts, COORDS)
    p = np.array([0.3, 0.5, -0.7, 0.2])
    Vnp = lambda q: np.array([q[1] * q[2], math.sin(q[0]) + q[3], q[0] ** 2 - q[2], math.cos(q[1]) * q[3]])
    dg = fd_partials(skewed_np, p)
    dV = fd_partials(Vnp, p)                  # dV[c, a] = d_a V^c
    gp, v = skewed_np(p), Vnp(p)
    oracle = np.einsum("c,abc->ab", v, dg) + np.einsum("cb,ca->ab", gp, dV) + np.einsum("ac,cb->ab", gp, dV)
    got = lie_derivative(CurvatureBundle(g, p), g, V).components
    assert np.allclose(got, oracle, atol=1e-8)


def test_lie_derivative_connection_desitter_example():
    # for V = d_t with constant components, L_V Gamma = d_t Gamma; Gamma^t_xx = e^{2t}
    g = MetricField(DESITTER, COORDS)
    xi = VectorFieldSpec(["1", "0", "0", "0"], COORDS)
    for t in (0.0, 0.25):
        p = (t, 0.3, 0.1, -0.2)
        K = lie_derivative_connection(CurvatureBundle(g, p), xi).components
        oracle = fd_partials(lambda q: christoffel_oracle(desitter_np, q), p, 1e-4)[..., 0]
        assert np.allclose(K, oracle, atol=1e-6)
        assert K[0, 1, 1] == pytest.approx(2 * math.exp(2 * t))


@pytest.mark.parametrize("metric,coords,p", [(c[0], c[1], c[3]) for c in CASES])
@pytest.mark.parametrize("texts", [["1", "0", "0", "0"], ["x*y", "sin(t) + z", "t^2 - y", "cos(x)*z"]])
def test_lie_derivative_riemann_routes_agree(metric, coords, p, texts):
    texts = [t.replace("x", coords[1]).replace("y", coords[2]).replace("z", coords[3])
             if coords != COORDS else t for t in texts]
    g = MetricField(metric, coords)
    b = CurvatureBundle(g, p)
    V = b.field_jet(VectorFieldSpec(texts, coords))
    assert max_abs(lie_derivative_riemann_commutation(b, V) - lie_derivative_riemann_direct(b, V)) < 1e-8


def test_reference_observer_is_unit(schwarzschild_bundle):
    g = MetricField(SCHWARZSCHILD, SCHW_COORDS)
    u = reference_observer(g).value(SCHW_POINT)
    assert u @ schwarzschild_bundle.g @ u == pytest.approx(-1.0)


def test_minkowski_is_flat():
    b = CurvatureBundle(MetricField(MINKOWSKI, COORDS), (0.1, 0.2, 0.3, 0.4))
    assert max_abs(b.riemann) == 0
