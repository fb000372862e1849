"""Connection and curvature data from a closed-form metric.

Index conventions (all arrays are chart components at one point):

* ``gamma[k, i, j]``   = Gamma^k_{ij}
* ``riemann[l, k, i, j]`` = R^l_{kij}, with R(d_i, d_j) d_k = R^l_{kij} d_l and
  R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z
* ``riemann_low[w, k, i, j]`` = g(R(d_i, d_j) d_k, d_w)
* ``ricci[k, j]`` = R^i_{kij}  (de Sitter gives S = +3g)
* covariant derivatives append the derivative slot last:
  ``nabla(T)[..., m]`` = (nabla_m T)[...]
"""
from __future__ import annotations

from functools import cached_property
from typing import Sequence

import numpy as np

from . import expr as ex
from .jets import DIM, MAX_ORDER, MONOMIALS, NMONO, Jet, from_partials, inverse, jeinsum, multi_index
from .tensor import Tensor, invert_metric

_SLOT_LETTERS = "abcdefgh"


class ExpressionField:
    """Tensor field whose chart components are :class:`~solitonlab.expr.Expr` trees.

    ``variance`` is one character per slot: ``"u"`` contravariant, ``"d"`` covariant.
    """

    def __init__(self, components, variance: str, coords: Sequence[str]):
        arr = np.empty((DIM,) * len(variance), dtype=object)
        src = np.array(components, dtype=object)
        if src.shape != arr.shape:
            raise ValueError(f"field with variance {variance!r} needs shape {arr.shape}, got {src.shape}")
        for idx in np.ndindex(arr.shape):
            c = src[idx]
            arr[idx] = ex.parse(str(c), coords) if not isinstance(c, ex.Expr) else c
        self.exprs = arr
        self.variance = variance
        self.coords = tuple(coords)
        self._partials = {idx: ex.Partials(arr[idx]) for idx in np.ndindex(arr.shape)}

    @classmethod
    def from_text(cls, components, variance: str, coords: Sequence[str]):
        return cls(components, variance, coords)

    def value(self, point) -> np.ndarray:
        out = np.empty(self.exprs.shape)
        for idx, part in self._partials.items():
            out[idx] = part.value(point)
        return out

    def partial(self, point, multi: tuple[int, ...]) -> np.ndarray:
        out = np.empty(self.exprs.shape)
        for idx, part in self._partials.items():
            out[idx] = part.value(point, multi)
        return out

    def jet(self, point, order: int = MAX_ORDER) -> Jet:
        n = NMONO[order]
        raw = np.zeros(self.exprs.shape + (n,))
        for idx, part in self._partials.items():
            if part.is_constant:
                raw[idx + (0,)] = part.value(point)
                continue
            for k in range(n):
                raw[idx + (k,)] = part.value(point, multi_index(MONOMIALS[k]))
        return from_partials(raw, order)

    def text(self):
        return np.vectorize(ex.to_text, otypes=[object])(self.exprs).tolist()


class MetricField(ExpressionField):
    def __init__(self, components, coords: Sequence[str]):
        super().__init__(components, "dd", coords)


class VectorFieldSpec(ExpressionField):
    def __init__(self, components, coords: Sequence[str]):
        super().__init__(components, "u", coords)


def reference_observer(metric: MetricField) -> VectorFieldSpec:
    """Unit timelike field d_0 / sqrt(-g_00) (static observer of the chart)."""
    g00 = metric.exprs[0, 0]
    comp = ex.div(ex.ONE, ex.call("sqrt", ex.neg(g00)))
    return VectorFieldSpec([comp, ex.ZERO, ex.ZERO, ex.ZERO], metric.coords)


# --------------------------------------------------------------------------
# generic field calculus on jets


def _subs(n: int) -> str:
    return _SLOT_LETTERS[:n]


def covariant_derivative_jet(T: Jet, variance: str, gamma: Jet) -> Jet:
    """Levi-Civita covariant derivative of a tensor-field jet, new slot last."""
    s = _subs(len(variance))
    out = T.grad()
    for pos, kind in enumerate(variance):
        swapped = s[:pos] + "y" + s[pos + 1:]
        if kind == "u":
            out = out + jeinsum(f"{s[pos]}zy,{swapped}->{s}z", gamma, T)
        else:
            out = out - jeinsum(f"yz{s[pos]},{swapped}->{s}z", gamma, T)
    return out


def lie_derivative_jet(T: Jet, variance: str, V: Jet) -> Jet:
    """Lie derivative along V via partial derivatives of components."""
    s = _subs(len(variance))
    dV = V.grad()  # dV[a, m] = d_m V^a
    out = jeinsum(f"{s}z,z->{s}", T.grad(), V)
    for pos, kind in enumerate(variance):
        swapped = s[:pos] + "y" + s[pos + 1:]
        if kind == "u":
            out = out - jeinsum(f"{swapped},{s[pos]}y->{s}", T, dV)
        else:
            out = out + jeinsum(f"{swapped},y{s[pos]}->{s}", T, dV)
    return out


def directional(D: Jet, X) -> Jet:
    """Contract the trailing derivative slot of ``D`` with a vector (jet or array)."""
    s = _subs(len(D.shape) - 1)
    return jeinsum(f"{s}z,z->{s}", D, X)


# --------------------------------------------------------------------------
# bundle


class CurvatureBundle:
    """All curvature data of a metric field at one point, with field calculus."""

    def __init__(self, metric: MetricField, point, order: int = MAX_ORDER):
        self.metric = metric
        self.point = np.asarray(point, dtype=float)
        self.order = order
        self.g_jet = metric.jet(self.point, order)
        invert_metric(self.g_jet.value)  # raises on singular metric
        self.ginv_jet = inverse(self.g_jet)
        dg = self.g_jet.grad()  # dg[a, b, c] = d_c g_ab
        bracket = (
            jeinsum("jli->ijl", dg) + jeinsum("ilj->ijl", dg) - jeinsum("ijl->ijl", dg)
        )
        self.gamma_jet = 0.5 * jeinsum("kl,ijl->kij", self.ginv_jet, bracket)
        G = self.gamma_jet
        dG = G.grad()  # dG[l, j, k, i] = d_i Gamma^l_{jk}
        self.riemann_jet = (
            jeinsum("ljki->lkij", dG) - jeinsum("likj->lkij", dG)
            + jeinsum("lim,mjk->lkij", G, G) - jeinsum("ljm,mik->lkij", G, G)
        )
        self.ricci_jet = jeinsum("ikij->kj", self.riemann_jet)
        self.scalar_jet = jeinsum("kj,kj->", self.ginv_jet, self.ricci_jet)
        self.ricci_op_jet = jeinsum("ak,kj->aj", self.ginv_jet, self.ricci_jet)
        self.weyl_jet = self._weyl_jet()

    # values ---------------------------------------------------------------
    @cached_property
    def g(self) -> np.ndarray:
        return self.g_jet.value

    @cached_property
    def ginv(self) -> np.ndarray:
        return self.ginv_jet.value

    @cached_property
    def gamma(self) -> np.ndarray:
        return self.gamma_jet.value

    @cached_property
    def riemann(self) -> np.ndarray:
        return self.riemann_jet.value

    @cached_property
    def riemann_low(self) -> np.ndarray:
        return np.einsum("wl,lkij->wkij", self.g, self.riemann)

    @cached_property
    def ricci(self) -> np.ndarray:
        return self.ricci_jet.value

    @cached_property
    def scalar(self) -> float:
        return float(self.scalar_jet.value)

    @cached_property
    def ricci_op(self) -> np.ndarray:
        return self.ricci_op_jet.value

    @cached_property
    def weyl(self) -> np.ndarray:
        return self.weyl_jet.value

    def _weyl_jet(self) -> Jet:
        g, S, Q, r = self.g_jet, self.ricci_jet, self.ricci_op_jet, self.scalar_jet
        delta = np.eye(DIM)
        R = self.riemann_jet
        bracket = (
            jeinsum("jk,li->lkij", S, delta) - jeinsum("ik,lj->lkij", S, delta)
            + jeinsum("jk,li->lkij", g, Q) - jeinsum("ik,lj->lkij", g, Q)
        )
        metric_part = jeinsum("jk,li->lkij", g, delta) - jeinsum("ik,lj->lkij", g, delta)
        return R - 0.5 * bracket + jeinsum(",lkij->lkij", r, metric_part) / 6.0

    # derivatives -------------------------------------------------------------
    def nabla(self, T: Jet, variance: str) -> Jet:
        return covariant_derivative_jet(T, variance, self.gamma_jet)

    @cached_property
    def nabla_riemann(self) -> np.ndarray:
        return self.nabla(self.riemann_jet, "uddd").value

    @cached_property
    def nabla_ricci(self) -> np.ndarray:
        return self.nabla(self.ricci_jet, "dd").value

    @cached_property
    def nabla_weyl(self) -> np.ndarray:
        return self.nabla(self.weyl_jet, "uddd").value

    @cached_property
    def div_weyl(self) -> np.ndarray:
        """(div C)_{kij} = nabla_l C^l_{kij}."""
        return np.einsum("lkijl->kij", self.nabla_weyl)

    def field_jet(self, field: ExpressionField | None) -> Jet | None:
        if field is None:
            return None
        return field.jet(self.point, self.order)

    def lower(self, V: Jet) -> Jet:
        return jeinsum("ab,b->a", self.g_jet, V)

    @property
    def kretschmann(self) -> float:
        return float(np.einsum("wkij,wkij->", self.riemann_low, _raise_all(self.riemann_low, self.ginv)))

    @property
    def weyl_square(self) -> float:
        low = np.einsum("wl,lkij->wkij", self.g, self.weyl)
        return float(np.einsum("wkij,wkij->", low, _raise_all(low, self.ginv)))


def _raise_all(t: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    out = t
    for s in range(t.ndim):
        out = np.moveaxis(np.tensordot(out, ginv, axes=([s], [0])), -1, s)
    return out


# --------------------------------------------------------------------------
# operations


def christoffel(metric: MetricField, point) -> Tensor:
    b = CurvatureBundle(metric, point, order=2)
    return Tensor(b.gamma, (1, 2))


def riemann(metric: MetricField, point) -> Tensor:
    return Tensor(CurvatureBundle(metric, point, order=2).riemann, (1, 3))


def ricci(bundle: CurvatureBundle) -> Tensor:
    return Tensor(bundle.ricci, (0, 2))


def scalar_curvature(bundle: CurvatureBundle) -> float:
    return bundle.scalar


def ricci_operator(bundle: CurvatureBundle) -> Tensor:
    return Tensor(bundle.ricci_op, (1, 1))


def weyl(bundle: CurvatureBundle) -> Tensor:
    return Tensor(bundle.weyl, (1, 3))


def covariant_derivative(bundle: CurvatureBundle, field: ExpressionField) -> Tensor:
    D = bundle.nabla(bundle.field_jet(field), field.variance).value
    p = field.variance.count("u")
    if field.variance != "u" * p + "d" * (len(field.variance) - p):
        raise ValueError("expression fields must list contravariant slots first")
    return Tensor(D, (p, len(field.variance) - p + 1))


def lie_derivative(bundle: CurvatureBundle, field: ExpressionField, V: VectorFieldSpec) -> Tensor:
    L = lie_derivative_jet(bundle.field_jet(field), field.variance, bundle.field_jet(V)).value
    p = field.variance.count("u")
    return Tensor(L, (p, len(field.variance) - p))


def lie_derivative_connection_jet(bundle: CurvatureBundle, V: Jet) -> Jet:
    """(L_V nabla)^a_{bc} = nabla_b nabla_c V^a + R^a_{cmb} V^m.

    Slot ``b`` is X and slot ``c`` is Y in (L_V nabla)(X, Y).
    """
    DV = bundle.nabla(V, "u")          # DV[a, c] = nabla_c V^a
    DDV = bundle.nabla(DV, "ud")       # DDV[a, c, b] = nabla_b nabla_c V^a
    return jeinsum("acb->abc", DDV) + jeinsum("acmb,m->abc", bundle.riemann_jet, V)


def lie_derivative_connection(bundle: CurvatureBundle, V: VectorFieldSpec) -> Tensor:
    return Tensor(lie_derivative_connection_jet(bundle, bundle.field_jet(V)).value, (1, 2))


def lie_derivative_riemann_commutation(bundle: CurvatureBundle, V: Jet) -> np.ndarray:
    """(L_V R)(X,Y)Z = (nabla_X L_V nabla)(Y,Z) - (nabla_Y L_V nabla)(X,Z)."""
    K = lie_derivative_connection_jet(bundle, V)
    DK = bundle.nabla(K, "udd").value  # DK[a, b, c, z]
    return np.einsum("ljki->lkij", DK) - np.einsum("likj->lkij", DK)


def lie_derivative_riemann_direct(bundle: CurvatureBundle, V: Jet) -> np.ndarray:
    return lie_derivative_jet(bundle.riemann_jet, "uddd", V).value


def lie_derivative_riemann(bundle: CurvatureBundle, V: VectorFieldSpec) -> Tensor:
    return Tensor(lie_derivative_riemann_commutation(bundle, bundle.field_jet(V)), (1, 3))


def curvature_derivation(bundle: CurvatureBundle, target: str) -> np.ndarray:
    """R(X,Y).T for T the (0,4) Riemann or (0,2) Ricci tensor.

    Output slots are T's slots followed by X, Y:
    (R.T)_{a1..ak x y} = -sum_i R^m_{a_i x y} T_{a1..m..ak}.
    """
    R = bundle.riemann
    if target == "riemann":
        T = bundle.riemann_low
    elif target == "ricci":
        T = bundle.ricci
    else:
        raise ValueError(f"unknown derivation target {target!r}")
    s = _subs(T.ndim)
    out = np.zeros((DIM,) * (T.ndim + 2))
    for pos in range(T.ndim):
        swapped = s[:pos] + "m" + s[pos + 1:]
        out -= np.einsum(f"m{s[pos]}xy,{swapped}->{s}xy", R, T)
    return out


class SamplePoint:
    """Bundle plus the jets of the scenario's fields at one point."""

    def __init__(self, bundle: CurvatureBundle, xi: Jet | None = None,
                 V: Jet | None = None, alpha: Jet | None = None):
        self.bundle = bundle
        self.xi = xi
        self.V = V
        self.alpha = alpha

    @classmethod
    def build(cls, metric: MetricField, point, xi: ExpressionField | None = None,
              V: ExpressionField | None = None, alpha: ExpressionField | None = None):
        b = CurvatureBundle(metric, point)
        return cls(b, b.field_jet(xi), b.field_jet(V), b.field_jet(alpha))

    @property
    def point(self) -> np.ndarray:
        return self.bundle.point

    @cached_property
    def eta_jet(self) -> Jet:
        return self.bundle.lower(self.xi)

    @cached_property
    def eta(self) -> np.ndarray:
        return self.eta_jet.value

    @cached_property
    def xi_value(self) -> np.ndarray:
        return self.xi.value

    @cached_property
    def nabla_xi_jet(self) -> Jet:
        """D[a, x] = nabla_x xi^a."""
        return self.bundle.nabla(self.xi, "u")

    @cached_property
    def nabla_xi(self) -> np.ndarray:
        return self.nabla_xi_jet.value
