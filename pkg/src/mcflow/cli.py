"""Command-line driver.

    mcflow verify <system|path>     run the full structural suite + oracle
    mcflow derive <system|path>     print M, the one-forms and the potential
    mcflow integrate <system|path>  RK4 trajectory + conservation drift
    mcflow sample <system|path>     numeric sampling of check residuals
    mcflow check-file <path>        parse and verify a user .sys file

Exit codes: 0 all attempted checks hold, 1 a mathematical check failed,
2 parse/usage error, 3 singular or degenerate input.  Reports are plain
text by default; --json emits a single deterministic JSON document.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import __version__
from .algebra import (
    AlgebraError,
    Point3,
    RationalFunction,
    SingularPointError,
    ZeroDenominatorError,
)
from .calculus import VectorField3, ZeroLogArgumentError
from .mcframe import (
    Check,
    DegenerateFrameError,
    FrameError,
    HOLDS,
    InconsistencyError,
    InvalidFrameError,
    NOT_APPLICABLE,
    VerificationReport,
    bihamiltonian_verify,
    build_frame,
    conformal_transform,
    curl_identities,
    frobenius_residual,
    heisenberg_verify,
    potential_from_gamma,
    sigma_residual,
    sigma_residual_factored,
    verify_duality,
    verify_maurer_cartan,
    verify_sl2,
)
from .numeric import (
    NumericError,
    InconclusiveSample,
    SingularEvaluation,
    SingularityAbort,
    conservation_drift,
    rk4_integrate,
    sample_identity,
)
from .parser import ParseError, SystemSpec, parse_rational, parse_system
from .systems import (
    BUILTIN_NAMES,
    UnknownSystemError,
    builtin,
    concordance,
    dh_reduction_check,
    grading_check,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PARSE_ERROR = 2
EXIT_SINGULAR = 3


class _Resolved:
    """A system plus whatever structure could be derived for it."""

    def __init__(self, name, spec, frame=None, heisenberg=None, is_builtin=False):
        self.name = name
        self.spec = spec
        self.frame = frame
        self.heisenberg = heisenberg
        self.is_builtin = is_builtin
        self.bracket_report: VerificationReport | None = None


def _resolve(target: str) -> _Resolved:
    if target in BUILTIN_NAMES:
        system = builtin(target)
        return _Resolved(system.name, system.spec, system.frame, system.heisenberg, True)
    if not os.path.exists(target):
        raise ParseError(f"{target!r} is not a built-in system or an existing file")
    with open(target, encoding="utf-8") as handle:
        spec = parse_system(handle.read())
    resolved = _Resolved(spec.name, spec)
    if spec.u is not None and spec.w is not None:
        v = VectorField3(*spec.v, spec.variables)
        u = VectorField3(*spec.u, spec.variables)
        w = VectorField3(*spec.w, spec.variables)
        resolved.bracket_report = verify_sl2(v, u, w, spec.name)
        if resolved.bracket_report.ok:
            resolved.frame = build_frame(v, u, w, spec.name, check_brackets=False)
    return resolved


def _velocity(resolved: _Resolved) -> VectorField3:
    return VectorField3(*resolved.spec.v, resolved.spec.variables)


def _eps_integrals(spec: SystemSpec, eps: int):
    """Declared integrals, with the _plus/_minus pair restricted by eps."""
    skip = "_minus" if eps > 0 else "_plus"
    return tuple((name, h) for name, h in spec.integrals if skip not in name)


# ---------------------------------------------------------------------------
# report pipelines
# ---------------------------------------------------------------------------


def _frame_suite(resolved: _Resolved, args) -> VerificationReport:
    frame = resolved.frame
    report = resolved.bracket_report or verify_sl2(frame.v, frame.u, frame.w, resolved.name)

    hint = resolved.spec.multiplier_hint
    multiplier_checks = []
    if hint is not None:
        multiplier_checks.append(
            Check.from_residual(
                "multiplier.matches_hint", "M = declared multiplier", frame.M - hint
            )
        )
    report = report.merged(VerificationReport(resolved.name, tuple(multiplier_checks)))

    report = report.merged(
        verify_duality(frame),
        verify_maurer_cartan(frame.alpha, frame.beta, frame.gamma, resolved.name),
        curl_identities(frame),
    )

    frobenius_checks = [
        Check.from_residual(
            "frobenius.gamma", "gamma ^ d(gamma) = 0", frobenius_residual(frame.gamma)
        ),
        Check.from_residual(
            "frobenius.beta", "beta ^ d(beta) = 0", frobenius_residual(frame.beta)
        ),
    ]
    alpha_residual = frobenius_residual(frame.alpha)
    if alpha_residual.is_zero():
        frobenius_checks.append(
            Check("frobenius.alpha", "alpha ^ d(alpha) != 0", "fails",
                  alpha_residual, "alpha ^ d(alpha) == 0")
        )
    else:
        frobenius_checks.append(
            Check("frobenius.alpha", "alpha ^ d(alpha) != 0", HOLDS, alpha_residual)
        )
    report = report.merged(VerificationReport(resolved.name, tuple(frobenius_checks)))

    potential = potential_from_gamma(frame)
    report = report.merged(
        VerificationReport(
            resolved.name,
            (
                Check(
                    "potential.curl_scale",
                    f"curl(A) = s M v, s = {potential.scale}",
                    HOLDS,
                    VectorField3.zero(frame.M.chart),
                ),
            ),
        )
    )

    integrals = _eps_integrals(resolved.spec, args.eps)
    if len(integrals) >= 2:
        h1 = integrals[0][1]
        for label, h2 in integrals[1:]:
            report = report.merged(
                bihamiltonian_verify(frame.v, frame.M, h1, h2, resolved.name, label)
            )
    elif len(integrals) == 1:
        label, h = integrals[0]
        report = report.merged(
            VerificationReport(
                resolved.name,
                (
                    Check.from_residual(
                        f"integral.{label}",
                        f"iota_v d{label} = 0",
                        h.differential().interior(frame.v).coeffs[0],
                    ),
                ),
            )
        )

    if args.rho is not None or args.f is not None:
        chart = frame.M.chart
        rho = parse_rational(args.rho, chart) if args.rho else RationalFunction.const(1, chart)
        f = parse_rational(args.f, chart) if args.f else RationalFunction.const(0, chart)
        sigma = sigma_residual(frame.alpha, frame.gamma, frame.beta, rho, f)
        factored = sigma_residual_factored(frame.alpha, frame.gamma, frame.beta, rho, f)
        t_alpha, t_beta, t_gamma = conformal_transform(frame, rho)
        transformed = verify_maurer_cartan(t_alpha, t_beta, t_gamma, resolved.name)
        sigma_checks = (
            Check.from_residual(
                "sigma.integrability", "sigma ^ d(sigma) = 0 for candidate (rho, f)", sigma
            ),
            Check.from_residual(
                "sigma.factored_agreement",
                "sigma ^ d(sigma) matches its factored shape",
                sigma - factored,
            ),
            *(
                Check(f"conformal.{c.name}", c.anchor, c.status, c.residual_obj, c.residual)
                for c in transformed.checks
            ),
        )
        report = report.merged(VerificationReport(resolved.name, sigma_checks))

    if resolved.is_builtin:
        if resolved.name in ("dh_classic", "dh_symmetric"):
            report = report.merged(dh_reduction_check())
        if resolved.name == "dh_symmetric":
            report = report.merged(grading_check(builtin("dh_symmetric")))
    return report


def _frameless_suite(resolved: _Resolved, args) -> VerificationReport:
    checks = []
    v = _velocity(resolved)
    if resolved.bracket_report is not None and not resolved.bracket_report.ok:
        checks.extend(resolved.bracket_report.checks)
    for label, h in _eps_integrals(resolved.spec, args.eps):
        checks.append(
            Check.from_residual(
                f"integral.{label}",
                f"iota_v d{label} = 0",
                h.differential().interior(v).coeffs[0],
            )
        )
    hint = resolved.spec.multiplier_hint
    if hint is not None:
        from .calculus import div as div_op

        checks.append(
            Check.from_residual(
                "multiplier.invariance", "div(M v) = 0 for declared M", div_op(v.scale(hint))
            )
        )
    if resolved.is_builtin and resolved.name == "dh_classic":
        checks.extend(dh_reduction_check().checks)
    return VerificationReport(resolved.name, tuple(checks))


def _verification_report(resolved: _Resolved, args) -> VerificationReport:
    if resolved.heisenberg is not None:
        return heisenberg_verify(resolved.heisenberg)
    if resolved.frame is not None:
        return _frame_suite(resolved, args)
    return _frameless_suite(resolved, args)


# ---------------------------------------------------------------------------
# document assembly
# ---------------------------------------------------------------------------


def _check_rows(report: VerificationReport):
    return [
        {
            "system": report.system,
            "check": c.name,
            "anchor": c.anchor,
            "status": c.status,
            "residual": c.residual,
        }
        for c in report.checks
    ]


def _frame_section(resolved: _Resolved):
    spec = resolved.spec
    section = {
        "variables": list(spec.variables),
        "v": [str(c) for c in spec.v],
    }
    if spec.u is not None:
        section["u"] = [str(c) for c in spec.u]
    if spec.w is not None:
        section["w"] = [str(c) for c in spec.w]
    if spec.integrals:
        section["integrals"] = {name: str(h) for name, h in spec.integrals}
    return section


def _forms_section(resolved: _Resolved):
    if resolved.heisenberg is not None:
        hf = resolved.heisenberg
        return {
            "omega1": [str(c) for c in hf.omega1.coeffs],
            "omega2": [str(c) for c in hf.omega2.coeffs],
            "omega3": [str(c) for c in hf.omega3.coeffs],
        }
    if resolved.frame is None:
        return None
    frame = resolved.frame
    section = {
        "alpha": [str(c) for c in frame.alpha.coeffs],
        "beta": [str(c) for c in frame.beta.coeffs],
        "gamma": [str(c) for c in frame.gamma.coeffs],
    }
    try:
        potential = potential_from_gamma(frame)
        section["potential"] = {
            "A": [str(c) for c in potential.A.components],
            "scale": str(potential.scale),
        }
    except FrameError:
        section["potential"] = None
    return section


def _multiplier_section(resolved: _Resolved):
    if resolved.frame is None:
        hint = resolved.spec.multiplier_hint
        return {"M": str(hint)} if hint is not None else None
    m = resolved.frame.M
    return {"M": str(m), "inverse": str(m.reciprocal())}


def _concordance_section(resolved: _Resolved):
    if not resolved.is_builtin:
        return []
    entries = concordance(builtin(resolved.name))
    return [
        {
            "form": e.form,
            "component": e.component,
            "status": e.status,
            "computed": e.computed,
            "printed": e.printed,
            "difference": e.difference,
        }
        for e in entries
    ]


def _sample_checks(report: VerificationReport, args, names=None):
    rows = []
    all_pass = True
    for check in report.checks:
        if names is not None and check.name not in names:
            continue
        if check.residual_obj is None:
            continue
        expect_zero = check.status != NOT_APPLICABLE and not check.anchor.endswith("!= 0")
        if not expect_zero:
            continue
        try:
            verdict = sample_identity(
                check.residual_obj,
                n=args.points,
                box=args.box,
                seed=args.seed,
                name=check.name,
                tolerance=args.tol,
            )
        except InconclusiveSample:
            rows.append({"check": check.name, "points": 0, "max_residual": None,
                         "verdict": "inconclusive"})
            all_pass = False
            continue
        symbolically_zero = check.status == HOLDS
        agrees = verdict.passed == symbolically_zero
        rows.append(
            {
                "check": check.name,
                "points": verdict.points_tried,
                "max_residual": verdict.max_abs_residual,
                "verdict": "pass" if verdict.passed else "fail",
                "agrees_with_symbolic": agrees,
            }
        )
        if not agrees:
            all_pass = False
    return rows, all_pass


def _integration_section(resolved: _Resolved, args):
    v = _velocity(resolved)
    start = Point3.real(*args.start)
    trajectory = rk4_integrate(v, start, args.t, args.h)
    drifts = {}
    for label, h in _eps_integrals(resolved.spec, args.eps):
        drifts[label] = conservation_drift(h, trajectory)
    return {
        "from": list(args.start),
        "t_end": args.t,
        "h": args.h,
        "steps": len(trajectory.times) - 1,
        "final_state": list(trajectory.states[-1]),
        "drift": drifts,
    }


def _document(resolved, command, sections, exit_status):
    return {
        "tool": {"name": "mcflow", "version": __version__},
        "command": command,
        "system": resolved.name,
        "sections": sections,
        "exit_status": exit_status,
    }


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _cmd_verify(resolved: _Resolved, args):
    report = _verification_report(resolved, args)
    samples, oracle_ok = _sample_checks(report, args)
    status = EXIT_OK if report.ok and oracle_ok else EXIT_CHECK_FAILED
    sections = {
        "frame": _frame_section(resolved),
        "multiplier": _multiplier_section(resolved),
        "forms": _forms_section(resolved),
        "checks": _check_rows(report),
        "concordance": _concordance_section(resolved),
        "numeric": {"samples": samples},
    }
    return _document(resolved, "verify", sections, status), status


def _cmd_derive(resolved: _Resolved, args):
    sections = {
        "frame": _frame_section(resolved),
        "multiplier": _multiplier_section(resolved),
        "forms": _forms_section(resolved),
        "checks": [],
        "concordance": _concordance_section(resolved),
        "numeric": {},
    }
    if resolved.bracket_report is not None and not resolved.bracket_report.ok:
        sections["checks"] = _check_rows(resolved.bracket_report)
        return _document(resolved, "derive", sections, EXIT_CHECK_FAILED), EXIT_CHECK_FAILED
    return _document(resolved, "derive", sections, EXIT_OK), EXIT_OK


def _cmd_integrate(resolved: _Resolved, args):
    sections = {
        "frame": _frame_section(resolved),
        "multiplier": _multiplier_section(resolved),
        "forms": None,
        "checks": [],
        "concordance": [],
        "numeric": {"integration": _integration_section(resolved, args)},
    }
    return _document(resolved, "integrate", sections, EXIT_OK), EXIT_OK


def _cmd_sample(resolved: _Resolved, args):
    report = _verification_report(resolved, args)
    names = {args.check} if args.check else None
    if names is not None:
        known = {c.name for c in report.checks}
        if args.check not in known:
            raise ParseError(
                f"unknown check {args.check!r}; available: {', '.join(sorted(known))}"
            )
    samples, oracle_ok = _sample_checks(report, args, names)
    status = EXIT_OK if oracle_ok and all(r["verdict"] != "inconclusive" for r in samples) else EXIT_CHECK_FAILED
    sections = {
        "frame": _frame_section(resolved),
        "multiplier": None,
        "forms": None,
        "checks": _check_rows(report),
        "concordance": [],
        "numeric": {"samples": samples},
    }
    return _document(resolved, "sample", sections, status), status


_COMMANDS = {
    "verify": _cmd_verify,
    "derive": _cmd_derive,
    "integrate": _cmd_integrate,
    "sample": _cmd_sample,
    "check-file": _cmd_verify,
}


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------


def _render_text(doc) -> str:
    lines = [f"mcflow {doc['command']} {doc['system']}"]
    sections = doc["sections"]
    multiplier = sections.get("multiplier")
    if multiplier:
        lines.append(f"M = {multiplier['M']}")
        if "inverse" in multiplier:
            lines.append(f"1/M = {multiplier['inverse']}")
    forms = sections.get("forms")
    if forms:
        for name in ("alpha", "beta", "gamma", "omega1", "omega2", "omega3"):
            if name in forms:
                lines.append(f"{name} = ({', '.join(forms[name])})")
        potential = forms.get("potential")
        if potential:
            lines.append(f"A = ({', '.join(potential['A'])})   scale s = {potential['scale']}")
    for row in sections.get("checks", []):
        status = {HOLDS: "PASS", "fails": "FAIL", NOT_APPLICABLE: "N/A "}[row["status"]]
        line = f"{status} {row['check']:34s} {row['anchor']}"
        if row["residual"]:
            line += f"   residual: {row['residual']}"
        lines.append(line)
    for row in sections.get("concordance", []):
        if row["status"] == "match":
            lines.append(f"concordance {row['form']}[{row['component']}]: match")
        else:
            lines.append(
                f"concordance {row['form']}[{row['component']}]: MISMATCH "
                f"computed {row['computed']} vs printed {row['printed']}"
            )
    numeric = sections.get("numeric") or {}
    for row in numeric.get("samples", []):
        lines.append(
            f"oracle {row['check']:34s} {row['verdict']}"
            f" ({row['points']} points, max |residual| = {row['max_residual']})"
        )
    integration = numeric.get("integration")
    if integration:
        lines.append(
            f"trajectory from {tuple(integration['from'])} for t = {integration['t_end']}"
            f" (h = {integration['h']}, {integration['steps']} steps)"
        )
        for name, drift in integration["drift"].items():
            lines.append(f"drift {name}: {drift:.3e}")
    lines.append(f"exit {doc['exit_status']}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------


def _parse_triple(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated numbers")
    return tuple(float(Fraction(part.strip())) for part in parts)


def _parse_box(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected LO,HI")
    lo, hi = (float(part) for part in parts)
    if hi < lo:
        raise argparse.ArgumentTypeError("box upper bound below lower bound")
    return lo, hi


def _build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcflow",
        description="exact structural verification of 3D flows with companion frames",
    )
    parser.add_argument("--version", action="version", version=f"mcflow {__version__}")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("system", help="built-in system name or path to a .sys file")
    parser.add_argument("--json", action="store_true", help="emit one JSON document")
    parser.add_argument("--eps", choices=["+1", "-1"], default="+1",
                        help="select the +1 or -1 branch of paired integrals")
    parser.add_argument("--rho", help="conformal factor candidate (expression)")
    parser.add_argument("--f", help="perturbation candidate for the potential (expression)")
    parser.add_argument("--points", type=int, default=25, help="oracle sample points per check")
    parser.add_argument("--h", type=float, default=1e-3, help="integration step size")
    parser.add_argument("--t", type=float, default=0.2, help="integration horizon")
    parser.add_argument("--from", dest="start", type=_parse_triple, default=(1.0, 1.0, 1.0),
                        help="initial point x,y,z")
    parser.add_argument("--seed", type=int, default=0, help="oracle sampling seed")
    parser.add_argument("--box", type=_parse_box, default=(-3.0, 3.0),
                        help="sampling box LO,HI (applied to each axis)")
    parser.add_argument("--tol", type=float, default=1e-12, help="oracle zero tolerance")
    parser.add_argument("--check", help="restrict `sample` to one named check")
    return parser


def run(argv) -> tuple[dict | None, int, str | None]:
    """Execute a request; returns (document, exit code, diagnostic)."""
    parser = _build_arg_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 0
        return None, (EXIT_OK if code == 0 else EXIT_PARSE_ERROR), None
    args.eps = int(args.eps)
    try:
        resolved = _resolve(args.system)
        if args.command == "check-file" and resolved.is_builtin:
            raise ParseError("check-file expects a path to a .sys file")
        document, status = _COMMANDS[args.command](resolved, args)
        return document, status, None
    except ParseError as exc:
        return None, EXIT_PARSE_ERROR, f"parse error: {exc}"
    except (ZeroDenominatorError, ZeroLogArgumentError) as exc:
        return None, EXIT_PARSE_ERROR, f"parse error: {exc}"
    except (
        DegenerateFrameError,
        InconsistencyError,
        SingularPointError,
        SingularityAbort,
        SingularEvaluation,
        InconclusiveSample,
        NumericError,
        UnknownSystemError,
    ) as exc:
        return None, EXIT_SINGULAR, f"degenerate or singular input: {exc}"
    except (InvalidFrameError, FrameError, AlgebraError) as exc:
        return None, EXIT_CHECK_FAILED, f"check failed: {exc}"


def main(argv=None) -> int:
    document, status, diagnostic = run(sys.argv[1:] if argv is None else argv)
    if diagnostic is not None:
        print(diagnostic, file=sys.stderr)
        return status
    if document is None:
        return status
    args_json = "--json" in (sys.argv[1:] if argv is None else argv)
    if args_json:
        print(json.dumps(document, indent=2))
    else:
        print(_render_text(document))
    return status


def console_main() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    console_main()
