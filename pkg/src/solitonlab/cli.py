"""Command-line front end: ``solitonlab <command> <scenario> [options]``.

Exit codes: 0 when every applicable check passes, 1 when some check fails,
2 on any input error (unreadable file, schema, parse, signature, unit xi).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from . import expr as ex
from .checks import jsonable
from .engine import engine_checks
from .fluid import FluidError, fluid_point, fluid_suite
from .scenario import Scenario, ScenarioError, load_scenario
from .soliton import classify, f_operator_suite, general_v_suite, resolve_lambda, soliton_residual, xi_soliton_report
from .structure import (
    classifier_suite,
    identity_suite_theorem_2_1,
    identity_suite_theorem_2_2,
    killing_checks,
    parallel_tensor_check,
    torse_check,
)
from .tensor import max_abs

COMMANDS = ("validate", "curvature", "fluid", "torse", "identities", "classify", "soliton", "report")
EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class Runner:
    """Runs the suites for one scenario; sections are computed lazily and once."""

    def __init__(self, scenario: Scenario):
        self.scn = scenario
        self.tol = scenario.tolerance
        self.declared = scenario.xi_declared
        self._fluid = None

    @property
    def fluid_points(self):
        if self._fluid is None:
            s = self.scn
            self._fluid = [fluid_point(p.bundle, p.xi_value, s.lam, s.kappa, self.tol) for p in s.samples]
        return self._fluid

    def curvature(self) -> dict:
        return {"checks": engine_checks(self.scn)}

    def fluid(self) -> dict:
        return {"table": [p.row() for p in self.fluid_points],
                "checks": fluid_suite(self.fluid_points, self.tol)}

    def torse(self) -> dict:
        return {"checks": torse_check(self.scn.samples, self.tol, self.declared)}

    def identities(self) -> dict:
        s = self.scn.samples
        return {"checks": identity_suite_theorem_2_1(s, self.tol, self.declared)
                + identity_suite_theorem_2_2(s, self.tol, self.declared)}

    def classify(self) -> dict:
        s, scn = self.scn.samples, self.scn
        checks, data = classifier_suite(s, self.fluid_points, scn.lam, scn.kappa, self.tol, self.declared)
        out = {"data": data}
        if scn.alpha is not None:
            pc, pdata = parallel_tensor_check(s, self.fluid_points, scn.lam, scn.kappa, self.tol, self.declared)
            checks += pc
            out["parallel"] = pdata
        kc, kdata = killing_checks(s, self.fluid_points, scn.kappa, self.tol, self.declared)
        out["killing"] = kdata
        out["checks"] = checks + kc
        return out

    def soliton(self) -> dict:
        s, scn = self.scn.samples, self.scn
        verdict = xi_soliton_report(s, self.fluid_points, scn.lam, scn.kappa, self.tol, self.declared)
        out = {"xi": verdict.to_dict(), "checks": list(verdict.checks)}
        if scn.potential is not None:
            Lam, source = resolve_lambda(scn.soliton_lambda, self.fluid_points, scn.lam, scn.kappa)
            fchecks, fdata = f_operator_suite(s, self.fluid_points, Lam, self.tol)
            out["potential"] = {"Lambda": Lam, "Lambda_source": source, **fdata}
            exact = max(max_abs(soliton_residual(p, p.V, Lam)) for p in s)
            out["potential"].update({"class": classify(Lam), "exactness_residual": exact,
                                     "exact": exact <= self.tol})
            out["checks"] += general_v_suite(s, self.fluid_points, Lam, self.tol) + fchecks
        return out


_SECTIONS = {
    "curvature": ("curvature",),
    "fluid": ("fluid",),
    "torse": ("torse",),
    "identities": ("torse", "identities"),
    "classify": ("classify",),
    "soliton": ("soliton",),
    "validate": (),
    "report": ("curvature", "torse", "fluid", "identities", "classify", "soliton"),
}


def run(command: str, scenario: Scenario) -> dict:
    """Structured report for ``command``; the layout mirrors what is printed."""
    runner = Runner(scenario)
    sections = {}
    for name in _SECTIONS[command]:
        sections[name] = getattr(runner, name)()
    checks = [c for sec in sections.values() for c in sec.get("checks", [])]
    failed = [c.tag for c in checks if c.status == "fail"]
    counts = {k: sum(c.status == k for c in checks) for k in ("pass", "fail", "vacuous")}
    report = {
        "tool": "solitonlab",
        "version": __version__,
        "command": command,
        "scenario": {
            "file": Path(scenario.source).name,
            "digest": scenario.digest,
            "points": len(scenario.points),
            "tolerance": scenario.tolerance,
            "seed": scenario.random_points.seed if scenario.random_points else None,
            "xi": "declared" if scenario.xi_declared else "reference observer",
        },
        "sections": {
            name: {k: ([c.to_dict() for c in v] if k == "checks" else v) for k, v in sec.items()}
            for name, sec in sections.items()
        },
        "status": "fail" if failed else "pass",
        "failed": failed,
        "counts": counts,
    }
    return jsonable(report)


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _fmt(x) -> str:
    return "n/a" if x is None else f"{x:.3e}"


def to_text(report: dict) -> str:
    sc = report["scenario"]
    lines = [f"solitonlab {report['command']}: {sc['file']} ({sc['points']} points, tol {sc['tolerance']:g}, xi {sc['xi']})",
             f"digest {sc['digest']}"]
    for name, sec in report["sections"].items():
        lines.append("")
        lines.append(f"== {name}")
        if name == "fluid":
            lines.append("   point                                    a          b          sigma      rho        r")
            for row in sec["table"]:
                pt = "(" + ", ".join(f"{v:.4g}" for v in row["point"]) + ")"
                lines.append(f"   {pt:<40} " + " ".join(f"{_fmt(row[k]):>10}" for k in ("a", "b", "sigma", "rho", "r")))
        if name == "classify":
            d = sec["data"]
            lines.append(f"   Weyl {_fmt(d['weyl_max_abs'])}, div Weyl {_fmt(d['div_weyl_max_abs'])}, "
                         f"k0 {d['k0'][0]:.6g} (fit {_fmt(max(d['k0_fit_residual']))}), "
                         f"R.R {_fmt(d['R_dot_R'])}, R.S {_fmt(d['R_dot_S'])}")
            if "parallel" in sec:
                par = sec["parallel"]
                lines.append(f"   alpha: nabla alpha {_fmt(par['nabla_alpha_max_abs'])}, branch {par['branch']}, "
                             f"recovered constant {par['recovered_constant'][0]:.6g}")
        if name == "soliton":
            xi = sec["xi"]
            lines.append(f"   V = xi: Lambda = {xi['Lambda']:.6g} ({xi['class']}), "
                         f"{'exact' if xi['exact'] else 'not exact'} (residual {_fmt(xi['exactness_residual'])}), "
                         f"case {xi['case']}")
            if "potential" in sec:
                p = sec["potential"]
                lines.append(f"   potential V: Lambda = {p['Lambda']:.6g} ({p['Lambda_source']}, {p['class']}), "
                             f"{'exact' if p['exact'] else 'not exact'} (residual {_fmt(p['exactness_residual'])})")
        for c in sec.get("checks", []):
            lines.append(f"   [{c['status'].upper():7}] {c['tag']:<22} {_fmt(c['residual']):>10}  {c['name']}")
    lines.append("")
    n = report["counts"]
    lines.append(f"overall: {report['status'].upper()} ({n['pass']} pass, {n['fail']} fail, {n['vacuous']} vacuous)")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="solitonlab", description="Verify curvature, fluid and soliton identities on a scenario.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("file", help="scenario file (YAML)")
    p.add_argument("--out", help="write the structured (JSON) report here")
    p.add_argument("--tolerance", type=float, help="override the scenario tolerance")
    p.add_argument("--seed", type=int, help="override the random-point seed")
    p.add_argument("--json", action="store_true", help="print the structured report instead of text")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = load_scenario(args.file, tolerance=args.tolerance, seed=args.seed)
        report = run(args.command, scenario)
    except (ScenarioError, FluidError, ex.ParseError, ex.DomainError) as err:
        print(f"solitonlab: input error: {err}", file=sys.stderr)
        return EXIT_INPUT
    text = to_json(report)
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text if args.json else to_text(report))
    return EXIT_FAIL if report["status"] == "fail" else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
