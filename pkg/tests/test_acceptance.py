"""Acceptance criteria 1-10, each at its stated tolerance.

Every test prints one ``ACCEPTANCE <n> PASS|FAIL`` line (shown even without -s)
before asserting, so a run doubles as the acceptance report.
"""
import math
import subprocess
import sys

import pytest

from solitonlab.engine import engine_checks
from solitonlab.fluid import fluid_point
from solitonlab.scenario import load_scenario
from solitonlab.soliton import f_operator_suite, general_v_suite, soliton_residual, xi_soliton_report
from solitonlab.structure import (
    basis_vectors,
    classifier_suite,
    constant_curvature_fit,
    identity_suite_theorem_2_1,
    identity_suite_theorem_2_2,
    parallel_tensor_check,
    quasi_constant_curvature_fit,
    semi_symmetry,
    torse_forming_residual,
)
from solitonlab.tensor import max_abs

from conftest import FIXTURES, MINKOWSKI, samples

NAMES = ("minkowski", "desitter", "schwarzschild", "gaussian")
SYMMETRY_TAGS = ("engine.R_antisym_last", "engine.R_antisym_first", "engine.R_pair",
                 "engine.bianchi1", "engine.bianchi2", "eq3.1")


@pytest.fixture(scope="module")
def scn():
    return {n: load_scenario(FIXTURES / f"{n}.scn") for n in NAMES}


@pytest.fixture
def verdict(capsys):
    def emit(n: int, ok: bool, msg: str):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n:>2} {'PASS' if ok else 'FAIL'}: {msg}")
        assert ok, msg
    return emit


def fp(scenario, lam=None, kappa=None):
    lam = scenario.lam if lam is None else lam
    kappa = scenario.kappa if kappa is None else kappa
    return [fluid_point(s.bundle, s.xi_value, lam, kappa, scenario.tolerance) for s in scenario.samples]


def test_criterion_01_engine_soundness(scn, verdict):
    fd, sym = 0.0, 0.0
    for s in scn.values():
        res = {c.tag: c.residual for c in engine_checks(s)}
        fd = max(fd, res["engine.fd"])
        sym = max(sym, *(res[t] for t in SYMMETRY_TAGS))
    verdict(1, fd <= 1e-5 and sym <= 1e-8,
            f"worst FD relative error {fd:.2e} (<= 1e-5), worst symmetry/Bianchi/Weyl trace {sym:.2e} (<= 1e-8)")


def test_criterion_02_torse_forming(scn, verdict):
    ds = max(torse_forming_residual(s).max_abs for s in scn["desitter"].samples)
    mk = [torse_forming_residual(s).max_abs for s in scn["minkowski"].samples]
    verdict(2, ds <= 1e-10 and all(r == 1.0 for r in mk),
            f"de Sitter residual {ds:.2e} (<= 1e-10), Minkowski residuals {mk} (exactly 1)")


def test_criterion_03_torse_identity_suites(scn, verdict):
    s = scn["desitter"].samples
    res = identity_suite_theorem_2_1(s, 1e-8) + identity_suite_theorem_2_2(s, 1e-8)
    worst = max(c.residual for c in res)
    ok = (len(s) == 18 and basis_vectors(s[0]).shape[0] == 7 and len(res) == 9
          and all(c.status == "pass" for c in res) and worst <= 1e-8)
    verdict(3, ok, f"{len(res)} identities on {len(s)} points over 7 basis fields, worst residual {worst:.2e}")


def test_criterion_04_fluid_loop(scn, verdict):
    ds = scn["desitter"]
    errs = []
    for f in fp(ds, 0.0, 1.0):
        errs += [abs(f.a - 3), abs(f.b), abs(f.sigma - 3), abs(f.rho + 3), abs(f.r - 12)]
        ok1 = f.eq2_1_residual <= 1e-9 and f.einstein_residual <= 1e-10
        ok1 &= abs(f.norm.direct - 36) <= 1e-8 and abs(f.norm.closed_form - 36) <= 1e-8
        errs.append(0.0 if ok1 else math.inf)
    for f in fp(ds, 1.0, 2.0):
        errs += [abs(f.sigma - 1), abs(f.rho + 1), abs(f.norm.direct - 36), abs(f.norm.closed_form - 36)]
    worst = max(errs)
    verdict(4, worst <= 1e-8, f"(a,b,sigma,rho,r) = (3,0,3,-3,12), trace(Q^2) = 36 at both constant pairs; worst error {worst:.2e}")


def test_criterion_05_classifiers(scn, verdict):
    ds = scn["desitter"]
    fps = fp(ds)
    _, data = classifier_suite(ds.samples, fps, ds.lam, ds.kappa, ds.tolerance)
    k0_err = q_err = ss = 0.0
    for s, f in zip(ds.samples, fps):
        k0, _ = constant_curvature_fit(s.bundle)
        k0_err = max(k0_err, abs(k0 - 1), abs(k0 - (ds.lam + ds.kappa * f.sigma) / 3))
        q = quasi_constant_curvature_fit(s.bundle, s.eta)
        q_err = max(q_err, abs(q.m - 1), abs(q.n))
        ss = max(ss, *semi_symmetry(s.bundle))
    sc = scn["schwarzschild"]
    _, sdata = classifier_suite(sc.samples, fp(sc), sc.lam, sc.kappa, sc.tolerance, declared=False)
    target = 48 / 5 ** 6
    w2 = abs(sdata["weyl_square"][0] - target) / target
    ok = (data["weyl_max_abs"] <= 1e-10 and k0_err <= 1e-9 and q_err <= 1e-8 and ss <= 1e-9
          and sdata["ricci_max_abs"] <= 1e-8 and w2 <= 1e-6)
    verdict(5, ok, f"de Sitter Weyl {data['weyl_max_abs']:.1e}, k0 err {k0_err:.1e}, (m,n) err {q_err:.1e}, "
                   f"R.R/R.S {ss:.1e}; Schwarzschild Ricci {sdata['ricci_max_abs']:.1e}, "
                   f"Weyl^2 {sdata['weyl_square'][0]:.4e} (rel err {w2:.1e})")


def test_criterion_06_parallel_tensor(scn, verdict):
    ds = scn["desitter"]
    checks, data = parallel_tensor_check(ds.samples, fp(ds), ds.lam, ds.kappa, ds.tolerance)
    err = max(abs(c - 5) for c in data["recovered_constant"])
    ok = data["parallel"] and data["branch"] == "constant-multiple" and err <= 1e-10
    ok &= all(c.status == "pass" for c in checks)
    verdict(6, ok, f"alpha = 5g parallel ({data['nabla_alpha_max_abs']:.1e}), branch {data['branch']}, "
                   f"recovered constant error {err:.1e}")


def test_criterion_07_xi_soliton(scn, verdict):
    ds = scn["desitter"]
    fps = fp(ds)
    v = xi_soliton_report(ds.samples, fps, ds.lam, ds.kappa, ds.tolerance)
    ba = max(abs(v.lam_soliton - (f.b - f.a)) for f in fps)
    assert ds.points[0][0] == 0
    ex0, n0 = v.detail["exactness_per_point"][0], v.detail["metric_square_norm"][0]
    ok = (abs(v.lam_soliton + 3) <= 1e-12 and ba <= 1e-12 and v.cls == "shrinking" and not v.exact
          and abs(ex0 - 2) <= 1e-9 and abs(n0 - 12) <= 1e-9)
    verdict(7, ok, f"Lambda {v.lam_soliton:.12g} (|Lambda-(b-a)| {ba:.1e}), {v.cls}, "
                   f"exactness residual {ex0:.6g} at t=0, |.|^2 {n0:.6g}, exact={v.exact}")


def test_criterion_08_general_soliton(scn, verdict):
    ga = scn["gaussian"]
    Lam = ga.soliton_lambda
    res = max(max_abs(soliton_residual(s, s.V, Lam)) for s in ga.samples)
    fps = fp(ga)
    fchecks, _ = f_operator_suite(ga.samples, fps, Lam, ga.tolerance)
    checks = general_v_suite(ga.samples, fps, Lam, ga.tolerance) + fchecks
    worst = max(c.residual for c in checks)
    required = {"eq4.8", "eq4.11", "eq4.12", "eq4.13", "eq4.21", "eq4.22", "eq4.26",
                "eq4.31", "eq4.32", "eq4.33", "eq4.34"}
    ok = res <= 1e-10 and worst <= 1e-9 and all(c.status == "pass" for c in checks)
    ok &= required <= {c.tag for c in checks}
    # rotation in the x-y plane: Killing, with nonzero F
    rot = samples(MINKOWSKI, [(0, 0, 0, 0), (0.3, 1, -1, 0.5)], xi=["1", "0", "0", "0"], V=["0", "-y", "x", "0"])
    rfp = [fluid_point(s.bundle, s.xi_value, 0.0, 1.0) for s in rot]
    rchecks, rdata = f_operator_suite(rot, rfp, 0.0, 1e-8)
    rchecks += general_v_suite(rot, rfp, 0.0, 1e-8)
    rot_ok = all(c.status == "pass" for c in rchecks) and rdata["F_max_abs"] > 0.5
    verdict(8, ok and rot_ok, f"Gaussian residual {res:.1e}, {len(checks)} suite checks worst {worst:.1e}; "
                              f"rotation field all pass={rot_ok} with |F| {rdata['F_max_abs']:.3g}")


def test_criterion_09_lie_riemann_routes(scn, verdict):
    worst, fields = 0.0, 0
    for s in scn.values():
        c = {c.tag: c for c in engine_checks(s)}["eq4.10"]
        worst = max(worst, c.residual)
        fields += len(c.detail)
    verdict(9, worst <= 1e-8, f"two L_V R routes agree to {worst:.1e} over {fields} fixture/field pairs")


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "solitonlab", *args], capture_output=True)


def test_criterion_10_cli_contract(tmp_path, verdict):
    same = True
    for n in NAMES:
        a, b = tmp_path / f"{n}.a.json", tmp_path / f"{n}.b.json"
        _cli("report", str(FIXTURES / f"{n}.scn"), "--out", str(a))
        _cli("report", str(FIXTURES / f"{n}.scn"), "--out", str(b))
        same &= a.read_bytes() == b.read_bytes() and len(a.read_bytes()) > 0
    bad = tmp_path / "bad.scn"
    bad.write_text("metric: [[1, 0], [0, 1]]\nlambda: 0\nkappa: 1\n")
    codes = {n: _cli("report", str(FIXTURES / f"{n}.scn")).returncode for n in NAMES}
    codes["invalid"] = _cli("report", str(bad)).returncode
    codes["missing"] = _cli("report", str(tmp_path / "nope.scn")).returncode
    want = {"minkowski": 1, "desitter": 0, "schwarzschild": 0, "gaussian": 0, "invalid": 2, "missing": 2}
    verdict(10, same and codes == want, f"byte-identical reports={same}, exit codes {codes}")
