"""Torse-forming verification, identity suites and curvature classifiers.

Operator identities are evaluated on a fixed set of seven vector fields:
the four coordinate fields, xi, and two constant-coefficient directions
drawn from SplitMix64 with seed ``BASIS_SEED`` (coefficients uniform in
[-1, 1], rescaled to unit Euclidean length).
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .checks import CheckResult, worst
from .curvature import SamplePoint, curvature_derivation, directional, lie_derivative_connection_jet, lie_derivative_jet
from .jets import Jet
from .splitmix import uniforms
from .tensor import max_abs

BASIS_SEED = 0x5EED
SYMMETRY_TOL = 1e-12


def random_directions(seed: int = BASIS_SEED, count: int = 2) -> list[np.ndarray]:
    gen = uniforms(seed)
    out = []
    for _ in range(count):
        v = np.array([2.0 * next(gen) - 1.0 for _ in range(4)])
        out.append(v / np.linalg.norm(v))
    return out


_DIRECTIONS = random_directions()


def basis_vectors(sample: SamplePoint) -> np.ndarray:
    """(7, 4) array: coordinate fields, xi, two seeded directions."""
    return np.vstack([np.eye(4), sample.xi_value, *_DIRECTIONS])


def basis_jets(sample: SamplePoint) -> list[Jet]:
    consts = [Jet.constant(v, sample.xi.order) for v in (*np.eye(4), *_DIRECTIONS)]
    return consts[:4] + [sample.xi] + consts[4:]


# --------------------------------------------------------------------------
# torse-forming


@dataclass(frozen=True)
class TorseResult:
    residual: np.ndarray       # (1,1): nabla_x xi^a - delta^a_x - eta_x xi^a
    unit_check: float          # |g(xi, xi) + 1|
    best_f: float              # f minimising |nabla xi - f (Id + xi (x) eta)|
    basis_residual: float      # max over the basis fields

    @property
    def max_abs(self) -> float:
        return max_abs(self.residual)


def torse_forming_residual(sample: SamplePoint) -> TorseResult:
    D = sample.nabla_xi
    xi, eta = sample.xi_value, sample.eta
    P = np.eye(4) + np.outer(xi, eta)
    res = D - P
    denom = float(np.sum(P * P))
    best_f = float(np.sum(D * P) / denom) if denom > 0 else 0.0
    unit = abs(float(xi @ eta) + 1.0)
    B = basis_vectors(sample)
    return TorseResult(res, unit, best_f, max_abs(np.einsum("ax,px->pa", res, B)))


def torse_gate(samples: list[SamplePoint], tolerance: float, declared: bool = True) -> tuple[bool, float]:
    """(hypothesis holds, worst residual) for 'xi is unit torse-forming'."""
    if not samples or samples[0].xi is None:
        return False, float("nan")
    res = worst(max(r.max_abs, r.basis_residual, r.unit_check)
                for r in (torse_forming_residual(s) for s in samples))
    return declared and res <= tolerance, res


def torse_check(samples: list[SamplePoint], tolerance: float, declared: bool = True) -> list[CheckResult]:
    results = [torse_forming_residual(s) for s in samples]
    detail = {"best_f": [r.best_f for r in results]}
    reason = "" if declared else "no xi declared (reference observer)"
    return [
        CheckResult("xi is unit: g(xi, xi) = -1", "unit", worst(r.unit_check for r in results),
                    tolerance, applicable=declared, hypothesis=reason),
        CheckResult("torse-forming: nabla_X xi = X + eta(X) xi", "eq2.4",
                    worst(max(r.max_abs, r.basis_residual) for r in results), tolerance,
                    applicable=declared, hypothesis=reason, detail=detail),
    ]


# --------------------------------------------------------------------------
# torse-forming identity suites


def _on_basis(T: np.ndarray, B: np.ndarray, nargs: int) -> float:
    """max_abs of T with its last ``nargs`` slots fed every basis combination."""
    letters = "pqr"[:nargs]
    slots = "ijk"[:nargs]
    free = "abc"[: T.ndim - nargs]
    subs = f"{free}{slots}," + ",".join(f"{l}{s}" for l, s in zip(letters, slots)) + f"->{letters}{free}"
    return max_abs(np.einsum(subs, T, *([B] * nargs)))


def theorem_2_1_residuals(sample: SamplePoint) -> dict[str, float]:
    b = sample.bundle
    g, R, Rl = b.g, b.riemann, b.riemann_low
    xi, eta, D = sample.xi_value, sample.eta, sample.nabla_xi
    B = basis_vectors(sample)
    I = np.eye(4)
    Deta = b.nabla(sample.eta_jet, "d").value          # Deta[y, x] = (nabla_x eta)_y
    eq25 = Deta.T - g - np.outer(eta, eta)              # [x, y]
    eq26a = eta @ D                                     # eta(nabla_x xi), [x]
    eq26b = D @ xi                                      # nabla_xi xi, [a]
    eq27 = np.einsum("lkij,k->lij", R, xi) - np.einsum("j,li->lij", eta, I) + np.einsum("i,lj->lij", eta, I)
    eq28 = np.einsum("lkij,k,j->li", R, xi, xi) + I + np.outer(xi, eta)
    eq29 = (np.einsum("wkij,w->ijk", Rl, xi) - np.einsum("i,jk->ijk", eta, g)
            + np.einsum("j,ik->ijk", eta, g))
    Lg = lie_derivative_jet(b.g_jet, "dd", sample.xi).value
    eq210 = Lg - 2.0 * (g + np.outer(eta, eta))
    return {
        "eq2.5": _on_basis(eq25, B, 2),
        "eq2.6": max(_on_basis(eq26a, B, 1), max_abs(eq26b)),
        "eq2.7": _on_basis(eq27, B, 2),
        "eq2.8": _on_basis(eq28, B, 1),
        "eq2.9": _on_basis(eq29, B, 3),
        "eq2.10": _on_basis(eq210, B, 2),
    }


def theorem_2_2_residuals(sample: SamplePoint) -> dict[str, float]:
    b = sample.bundle
    g, R, Rl = b.g, b.riemann, b.riemann_low
    xi, D = sample.xi_value, sample.nabla_xi
    B = basis_vectors(sample)
    M = np.einsum("lkxj,k,j->lx", R, xi, xi)             # R(X, xi) xi
    A = np.einsum("ab,ax,by->xy", g, D, D)
    lhs2 = -np.einsum("ly,lx->xy", g, M)                 # -g(R(X,xi)xi, Y)
    lhs3 = -np.einsum("wxiy,w,i->xy", Rl, xi, xi)        # -g(R(xi,Y)X, xi)
    eq211 = max(_on_basis(A - lhs2, B, 2), _on_basis(A - lhs3, B, 2))
    GM = np.einsum("ab,ax->bx", g, M)                     # lowered R(X,xi)xi
    t1 = np.einsum("bx,by->xy", GM, D)
    eq212 = _on_basis(-lhs2 - 0.5 * (t1 + t1.T), B, 2)
    # eq2.13 needs full field calculus in Y (its covariant derivative enters)
    worst13 = 0.0
    for Y in basis_jets(sample):
        W = directional(sample.nabla_xi_jet, Y)           # nabla_Y xi
        nxW = directional(b.nabla(W, "u"), sample.xi).value
        nxY = directional(b.nabla(Y, "u"), sample.xi).value
        term = np.einsum("ab,a,bx->x", g, nxW, D) + np.einsum("bx,b->x", GM, nxY)
        worst13 = max(worst13, max_abs(B @ term))
    return {"eq2.11": eq211, "eq2.12": eq212, "eq2.13": worst13}


_T21_NAMES = {
    "eq2.5": "(nabla_X eta)(Y) = g(X,Y) + eta(X) eta(Y)",
    "eq2.6": "eta(nabla_X xi) = 0 and nabla_xi xi = 0",
    "eq2.7": "R(X,Y) xi = eta(Y) X - eta(X) Y",
    "eq2.8": "R(X,xi) xi = -X - eta(X) xi",
    "eq2.9": "eta(R(X,Y)Z) = eta(X) g(Y,Z) - eta(Y) g(X,Z)",
    "eq2.10": "(L_xi g)(X,Y) = 2[g(X,Y) + eta(X) eta(Y)]",
}
_T22_NAMES = {
    "eq2.11": "g(nabla_X xi, nabla_Y xi) = -g(R(X,xi)xi, Y) = -g(R(xi,Y)X, xi)",
    "eq2.12": "g(R(X,xi)xi, Y) = 1/2 {g(R(X,xi)xi, nabla_Y xi) + g(R(Y,xi)xi, nabla_X xi)}",
    "eq2.13": "g(nabla_xi nabla_Y xi, nabla_X xi) + g(R(X,xi)xi, nabla_xi Y) = 0",
}


def _suite(samples, fn, names, tolerance, declared):
    ok, hyp = torse_gate(samples, tolerance, declared)
    per = [fn(s) for s in samples]
    return [
        CheckResult(names[tag], tag, worst(p[tag] for p in per), tolerance, applicable=ok,
                    hypothesis="xi unit torse-forming", hypothesis_residual=hyp)
        for tag in names
    ]


def identity_suite_theorem_2_1(samples, tolerance: float, declared: bool = True) -> list[CheckResult]:
    return _suite(samples, theorem_2_1_residuals, _T21_NAMES, tolerance, declared)


def identity_suite_theorem_2_2(samples, tolerance: float, declared: bool = True) -> list[CheckResult]:
    return _suite(samples, theorem_2_2_residuals, _T22_NAMES, tolerance, declared)


# --------------------------------------------------------------------------
# curvature classifiers


def constant_curvature_basis(g: np.ndarray) -> np.ndarray:
    """E[l,k,i,j] = g_jk delta^l_i - g_ik delta^l_j."""
    I = np.eye(4)
    return np.einsum("jk,li->lkij", g, I) - np.einsum("ik,lj->lkij", g, I)


def constant_curvature_fit(bundle) -> tuple[float, float]:
    """Least-squares k0 in R(X,Y)Z = k0 {g(Y,Z)X - g(X,Z)Y}; returns (k0, residual)."""
    E = constant_curvature_basis(bundle.g)
    k0 = float(np.sum(E * bundle.riemann) / np.sum(E * E))
    return k0, max_abs(bundle.riemann - k0 * E)


@dataclass(frozen=True)
class QuasiConstantFit:
    m: float
    n: float
    fit_residual: float


def quasi_constant_basis(g: np.ndarray, A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Component tensors (index order [x, y, z, w]) of the m- and n-terms.

    The n-term uses the symmetrised last entry g(Y,W) A(X) A(Z).
    """
    G1 = np.einsum("yz,xw->xyzw", g, g) - np.einsum("xz,yw->xyzw", g, g)
    G2 = (np.einsum("xw,y,z->xyzw", g, A, A) - np.einsum("xz,y,w->xyzw", g, A, A)
          + np.einsum("yz,x,w->xyzw", g, A, A) - np.einsum("yw,x,z->xyzw", g, A, A))
    return G1, G2


def quasi_constant_curvature_fit(bundle, eta) -> QuasiConstantFit:
    # R(X,Y,Z,W) = g(R(X,Y)Z, W)
    R4 = np.einsum("wzxy->xyzw", bundle.riemann_low)
    G1, G2 = quasi_constant_basis(bundle.g, np.asarray(eta, float))
    A = np.stack([G1.ravel(), G2.ravel()], axis=1)
    coef, *_ = np.linalg.lstsq(A, R4.ravel(), rcond=None)
    m, n = (float(c) for c in coef)
    return QuasiConstantFit(m, n, max_abs(R4 - m * G1 - n * G2))


def semi_symmetry(bundle) -> tuple[float, float]:
    """(max_abs R.R, max_abs R.S)."""
    return max_abs(curvature_derivation(bundle, "riemann")), max_abs(curvature_derivation(bundle, "ricci"))


def conformal_flatness(bundle) -> tuple[float, float]:
    """(max_abs C, max_abs div C)."""
    return max_abs(bundle.weyl), max_abs(bundle.div_weyl)


@dataclass(frozen=True)
class ClassifierPoint:
    weyl: float
    div_weyl: float
    k0: float
    k0_residual: float
    qc: QuasiConstantFit
    rr: float
    rs: float
    einstein: float   # max_abs(S - r/4 g)


def classify_point(sample: SamplePoint) -> ClassifierPoint:
    b = sample.bundle
    w, dw = conformal_flatness(b)
    k0, kres = constant_curvature_fit(b)
    rr, rs = semi_symmetry(b)
    return ClassifierPoint(w, dw, k0, kres, quasi_constant_curvature_fit(b, sample.eta), rr, rs,
                           max_abs(b.ricci - b.scalar / 4.0 * b.g))


def classifier_suite(samples, fluid_points, lam: float, kappa: float, tolerance: float,
                     declared: bool = True) -> tuple[list[CheckResult], dict]:
    pts = [classify_point(s) for s in samples]
    torse_ok, torse_res = torse_gate(samples, tolerance, declared)
    weyl = worst(p.weyl for p in pts)
    flat = weyl <= tolerance
    hyp = dict(applicable=flat and torse_ok, hypothesis="C = 0 and xi unit torse-forming",
               hypothesis_residual=max(weyl, torse_res) if torse_res == torse_res else weyl)
    target = [(lam + kappa * f.sigma) / 3.0 for f in fluid_points]
    loop = worst(max(abs(f.b), p.k0_residual, abs(p.k0 - t))
                 for p, f, t in zip(pts, fluid_points, target))
    remark = worst(max(abs(p.qc.n), abs(p.qc.m - p.k0), abs(p.qc.m - t), p.qc.fit_residual)
                   for p, t in zip(pts, target))
    checks = [
        CheckResult("constant curvature (lambda + kappa sigma)/3 with b = 0", "thm3.2", loop, tolerance,
                    detail={"k0": [p.k0 for p in pts], "expected": target}, **hyp),
        CheckResult("quasi-constant curvature with n = 0, m = k0", "rem3.3", remark, tolerance,
                    detail={"m": [p.qc.m for p in pts], "n": [p.qc.n for p in pts],
                            "m_with_rho": [(lam + kappa * f.rho) / 3.0 for f in fluid_points]},
                    **hyp),
        CheckResult("Einstein: S = (r/4) g", "thm3.4", worst(p.einstein for p in pts), tolerance, **hyp),
        CheckResult("semi-symmetric R.R = 0 and Ricci semi-symmetric R.S = 0", "thm3.5",
                    worst(max(p.rr, p.rs) for p in pts), tolerance, **hyp),
    ]
    data = {
        "weyl_max_abs": weyl,
        "div_weyl_max_abs": worst(p.div_weyl for p in pts),
        "weyl_square": [s.bundle.weyl_square for s in samples],
        "kretschmann": [s.bundle.kretschmann for s in samples],
        "ricci_max_abs": worst(max_abs(s.bundle.ricci) for s in samples),
        "conformally_flat": flat,
        "k0": [p.k0 for p in pts],
        "k0_fit_residual": [p.k0_residual for p in pts],
        "constant_curvature": worst(p.k0_residual for p in pts) <= tolerance,
        "quasi_constant": [{"m": p.qc.m, "n": p.qc.n, "fit_residual": p.qc.fit_residual} for p in pts],
        "R_dot_R": worst(p.rr for p in pts),
        "R_dot_S": worst(p.rs for p in pts),
        "semi_symmetric": worst(p.rr for p in pts) <= tolerance,
        "ricci_semi_symmetric": worst(p.rs for p in pts) <= tolerance,
    }
    return checks, data


# --------------------------------------------------------------------------
# parallel tensors


def best_multiple_of_metric(alpha: np.ndarray, g: np.ndarray) -> tuple[float, float]:
    """c minimising max_abs(alpha - c g) (exact: checks every breakpoint)."""
    a, w = alpha.ravel(), g.ravel()
    mask = w != 0
    cands = list(a[mask] / w[mask])
    idx = np.flatnonzero(mask)
    for i, j in combinations(idx, 2):
        for s in (1.0, -1.0):
            den = w[i] - s * w[j]
            if den != 0:
                cands.append((a[i] - s * a[j]) / den)
    if not cands:
        return 0.0, max_abs(alpha)
    cands = np.array(cands)
    errs = np.max(np.abs(a[None, :] - cands[:, None] * w[None, :]), axis=1)
    k = int(np.argmin(errs))
    return float(cands[k]), float(errs[k])


def parallel_tensor_check(samples, fluid_points, lam: float, kappa: float, tolerance: float,
                          declared: bool = True) -> tuple[list[CheckResult], dict]:
    alphas = [s.alpha.value for s in samples]
    for a in alphas:
        if max_abs(a - a.T) > SYMMETRY_TOL * max(1.0, max_abs(a)):
            raise ValueError("alpha is not symmetric")
    nabla_alpha = worst(max_abs(s.bundle.nabla(s.alpha, "dd").value) for s in samples)
    parallel = nabla_alpha <= tolerance
    axx = [float(s.xi_value @ a @ s.xi_value) for s, a in zip(samples, alphas)]
    multiple = worst(max_abs(a + v * s.bundle.g) for s, a, v in zip(samples, alphas, axx))
    best = [best_multiple_of_metric(a, s.bundle.g) for s, a in zip(samples, alphas)]
    regular = worst(abs(lam + kappa * f.sigma) for f in fluid_points)
    weyl = worst(max_abs(s.bundle.weyl) for s in samples)
    torse_ok, _ = torse_gate(samples, tolerance, declared)
    branch = "constant-multiple" if multiple <= tolerance else (
        "lambda=-kappa*sigma" if regular <= tolerance else "none")
    dichotomy_ok = multiple <= tolerance or regular <= tolerance
    gate = dict(applicable=parallel and torse_ok and weyl <= tolerance,
                hypothesis="alpha parallel, C = 0, xi unit torse-forming",
                hypothesis_residual=max(nabla_alpha, weyl))
    checks = [
        CheckResult("alpha(xi, xi) is constant", "eq3.9", max(axx) - min(axx), tolerance,
                    applicable=parallel and declared, hypothesis="alpha parallel",
                    hypothesis_residual=nabla_alpha),
        CheckResult("either lambda = -kappa sigma or alpha = -alpha(xi,xi) g", "thm3.7",
                    min(multiple, regular), tolerance, passed=dichotomy_ok,
                    detail={"branch": branch, "constant_multiple_residual": multiple,
                            "lambda_plus_kappa_sigma": regular}, **gate),
    ]
    data = {
        "nabla_alpha_max_abs": nabla_alpha,
        "parallel": parallel,
        "alpha_xi_xi": axx,
        "recovered_constant": [-v for v in axx],
        "best_constant": [c for c, _ in best],
        "best_constant_residual": [e for _, e in best],
        "branch": branch if parallel else "not applicable",
    }
    return checks, data


# --------------------------------------------------------------------------
# Killing / affine Killing / Jacobi


@dataclass(frozen=True)
class KillingPoint:
    killing: float
    affine: float
    jacobi: float
    geodesic: float


def jacobi_operator(sample: SamplePoint, V: Jet) -> np.ndarray:
    """nabla_xi nabla_xi V + R(V, xi) xi."""
    b = sample.bundle
    W = directional(b.nabla(V, "u"), sample.xi)
    acc = directional(b.nabla(W, "u"), sample.xi).value
    return acc + np.einsum("lkij,i,j,k->l", b.riemann, V.value, sample.xi_value, sample.xi_value)


def killing_point(sample: SamplePoint, V: Jet) -> KillingPoint:
    b = sample.bundle
    return KillingPoint(
        killing=max_abs(lie_derivative_jet(b.g_jet, "dd", V).value),
        affine=max_abs(lie_derivative_connection_jet(b, V).value),
        jacobi=max_abs(jacobi_operator(sample, V)),
        geodesic=max_abs(sample.nabla_xi @ sample.xi_value),
    )


def killing_checks(samples, fluid_points, kappa: float, tolerance: float,
                   declared: bool = True) -> tuple[list[CheckResult], dict]:
    checks: list[CheckResult] = []
    data: dict = {}
    if samples[0].V is not None:
        pts = [killing_point(s, s.V) for s in samples]
        affine = worst(p.affine for p in pts)
        geo = worst(p.geodesic for p in pts)
        data["potential"] = {
            "killing_residual": worst(p.killing for p in pts),
            "affine_killing_residual": affine,
            "jacobi_residual": worst(p.jacobi for p in pts),
            "xi_geodesic_residual": geo,
        }
        data["potential"]["killing"] = data["potential"]["killing_residual"] <= tolerance
        data["potential"]["affine_killing"] = affine <= tolerance
        checks.append(CheckResult(
            "affine Killing V is a Jacobi field along xi-geodesics", "thm3.9",
            worst(p.jacobi for p in pts), tolerance,
            applicable=affine <= tolerance and geo <= tolerance,
            hypothesis="L_V nabla = 0 and nabla_xi xi = 0", hypothesis_residual=max(affine, geo)))
    # Lemma: xi Killing (and torse-forming) => nabla_xi Q = 0, (nabla_X Q) xi = -kappa(sigma+rho) nabla_X xi
    torse_ok, _ = torse_gate(samples, tolerance, declared)
    kill_xi = worst(max_abs(lie_derivative_jet(s.bundle.g_jet, "dd", s.xi).value) for s in samples)
    res_i, res_ii = [], []
    for s, f in zip(samples, fluid_points):
        DQ = s.bundle.nabla(s.bundle.ricci_op_jet, "ud").value     # DQ[a, c, x]
        res_i.append(max_abs(DQ @ s.xi_value))
        lhs = np.einsum("acx,c->ax", DQ, s.xi_value)
        res_ii.append(max_abs(lhs + kappa * (f.sigma + f.rho) * s.nabla_xi))
    checks.append(CheckResult(
        "xi Killing: nabla_xi Q = 0 and (nabla_X Q) xi = -kappa(sigma+rho) nabla_X xi", "lem3.10",
        max(worst(res_i), worst(res_ii)), tolerance,
        applicable=torse_ok and kill_xi <= tolerance,
        hypothesis="xi Killing and unit torse-forming", hypothesis_residual=kill_xi,
        detail={"nabla_xi_Q": worst(res_i), "nabla_Q_xi": worst(res_ii)}))
    data["xi_killing_residual"] = kill_xi
    return checks, data
