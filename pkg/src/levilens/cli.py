"""Command-line interface.

Exit codes: 0 success, 1 verification failure, 2 input error,
3 mathematical-domain error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from typing import Any, Sequence

import numpy as np

from .config import Tolerances
from .errors import DegenerateLevi, DomainError
from .geometry import (
    DefiningFunctionSpec,
    MetricSpec,
    condition_Y,
    condition_Z,
    levi_form,
)
from .heat_model import degeneracy_spectrum
from .form_algebra import FormOperator
from .kernels import (
    DEFAULT_EPSILON,
    assemble_expansion,
    direct_moment_sum,
    evaluate_expansion,
    scalar_operator,
)
from .oracles import DEFAULT_EPS_SCHEDULE
from .phase import (
    bergman_a_coeffs,
    bergman_leading,
    bergman_phase_jet,
    szego_leading_symbol,
    szego_phase_jet,
)
from .serialize import dumps, parse_complex, parse_complex_list, to_jsonable
from .verification import SUITES, run_suite

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_DOMAIN = 0, 1, 2, 3


class InputError(ValueError):
    """The request is malformed."""


def _read_request(path: str | None) -> dict:
    try:
        text = sys.stdin.read() if path in (None, "-") else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise InputError(f"cannot read input: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("request must be a JSON object")
    return data


def _tolerances(args, request: dict) -> Tolerances:
    opts = request.get("options", {}) or {}
    zero = args.tol_zero if args.tol_zero is not None else opts.get("tol_zero", Tolerances.zero)
    return Tolerances(
        zero=float(zero),
        herm=float(opts.get("tol_herm", Tolerances.herm)),
        surface=float(opts.get("tol_surface", Tolerances.surface)),
    )


def _geometry_inputs(request: dict) -> tuple[DefiningFunctionSpec, MetricSpec, np.ndarray]:
    if "defining" not in request:
        raise InputError("request needs a 'defining' object")
    spec = DefiningFunctionSpec.from_json(request["defining"])
    metric = MetricSpec.from_json(request.get("metric", "euclidean"), spec.n)
    if metric.n != spec.n:
        raise InputError("metric and defining function have different dimensions")
    point = request.get("point")
    if point is None:
        point = [0.0] * (2 * spec.n)
    point = np.asarray(point, dtype=float)
    if point.shape != (2 * spec.n,):
        raise InputError(f"point must have {2 * spec.n} real coordinates")
    return spec, metric, point


def _q(request: dict) -> int:
    q = request.get("q")
    if not isinstance(q, int) or isinstance(q, bool):
        raise InputError("request needs an integer 'q'")
    return q


def _eigenvalues_and_a(request: dict, tol: Tolerances) -> tuple[np.ndarray, np.ndarray | None]:
    """Eigenvalues from ``lambda`` or from a defining function at a point."""
    if "lambda" in request:
        lam = np.asarray([float(v) for v in request["lambda"]])
        a = parse_complex_list(request["a"]) if "a" in request else None
        return lam, a
    spec, metric, point = _geometry_inputs(request)
    data = levi_form(spec, metric, point, tol)
    if data.degenerate:
        raise DegenerateLevi(f"degenerate Levi form at the point: eigenvalues {data.eigenvalues.tolist()}")
    return data.eigenvalues, bergman_a_coeffs(metric, spec, point, tol)


def cmd_analyze(request: dict, tol: Tolerances) -> dict:
    spec, metric, point = _geometry_inputs(request)
    q = _q(request)
    data = levi_form(spec, metric, point, tol)
    report: dict[str, Any] = {"defining": spec.to_json(), "metric": metric.to_json(), "q": q, "levi": data.to_json()}
    if data.degenerate:
        raise DegenerateLevi(f"degenerate Levi form: eigenvalues {data.eigenvalues.tolist()}")
    lam = data.eigenvalues
    y = condition_Y(lam, q, tol.zero)
    z = condition_Z(lam, q, tol.zero)
    report["conditions"] = {"Y": y, "Z": z, "gamma_q_member": not z}
    report["degeneracy_spectra"] = {
        "positive_branch": degeneracy_spectrum(lam, q, 1, tol_zero=tol.zero).to_json(),
        "negative_branch": degeneracy_spectrum(lam, q, -1, tol_zero=tol.zero).to_json(),
    }
    return report


def cmd_phase(request: dict, tol: Tolerances) -> dict:
    kind = request.get("kind", "szego")
    lam, a = _eigenvalues_and_a(request, tol)
    if kind == "szego":
        c = parse_complex_list(request["c"]) if "c" in request else None
        jet = szego_phase_jet(lam, c)
    elif kind == "bergman":
        jet = bergman_phase_jet(lam, a)
    else:
        raise InputError(f"kind must be 'szego' or 'bergman', got {kind!r}")
    return {"eigenvalues": lam.tolist(), "phase": jet.to_json()}


def cmd_leading(request: dict, tol: Tolerances) -> dict:
    report = cmd_phase(request, tol)
    lam = np.asarray(report["eigenvalues"])
    q = _q(request)
    kind = request.get("kind", "szego")
    lead = szego_leading_symbol(lam, q, tol) if kind == "szego" else bergman_leading(lam, q, tol=tol)
    report["leading"] = lead.to_json()
    return report


def _operator_list(values) -> list[FormOperator]:
    out = []
    for v in values:
        if isinstance(v, dict):
            out.append(FormOperator.from_json(v))
        else:
            out.append(scalar_operator(parse_complex(v)))
    return out


def cmd_kernel_eval(request: dict, tol: Tolerances, truncation: int | None) -> dict:
    kind = request.get("kind", "szego")
    if "s_coeffs" in request:
        coeffs = _operator_list(request["s_coeffs"])
        n = request.get("n")
        if not isinstance(n, int):
            raise InputError("kernel-eval with 's_coeffs' needs an integer 'n'")
    else:
        lam, _ = _eigenvalues_and_a(request, tol)
        q = _q(request)
        lead = szego_leading_symbol(lam, q, tol) if kind == "szego" else bergman_leading(lam, q, tol=tol)
        coeffs = [lead.s0 if kind == "szego" else lead.a0]
        n = lead.n
    if truncation is not None:
        coeffs = coeffs[: truncation + 1]
    if "phi" not in request:
        raise InputError("kernel-eval needs 'phi'")
    phi = parse_complex(request["phi"])
    eps = float(request.get("epsilon", DEFAULT_EPSILON))
    include_smooth = bool(request.get("include_smooth", False))
    expansion = assemble_expansion(coeffs, n, kind, include_smooth=include_smooth)
    value = evaluate_expansion(expansion, phi, eps)
    report = {
        "phi": phi,
        "epsilon": eps,
        "expansion": expansion.to_json(),
        "value": value.to_json(),
    }
    if include_smooth:
        report["direct_moment_sum"] = direct_moment_sum(coeffs, n, kind, phi, eps).to_json()
    return report


def _flatten(obj: Any, prefix: str = "") -> list[tuple[str, Any]]:
    if isinstance(obj, dict):
        out = []
        for key in sorted(obj):
            out += _flatten(obj[key], f"{prefix}.{key}" if prefix else str(key))
        return out
    if isinstance(obj, list) and obj and not (len(obj) == 2 and all(isinstance(v, float) for v in obj)):
        out = []
        for k, v in enumerate(obj):
            out += _flatten(v, f"{prefix}[{k}]")
        return out
    return [(prefix, json.dumps(obj))]


def _operator_rows(report: dict) -> list[dict]:
    rows = []
    leading = report.get("leading", {})
    for name in ("s0", "b0", "a0", "F"):
        if name in leading:
            op = FormOperator.from_json(leading[name])
            rows += [{"operator": name, **row} for row in op.table()]
    return rows


def _write_csv(rows: list[dict], fields: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _emit(command: str, report: dict, fmt: str) -> str:
    if fmt == "json":
        return dumps(report) + "\n"
    if command == "leading":
        return _write_csv(_operator_rows(report), ["operator", "row", "col", "re", "im"])
    if command == "verify":
        rows = [
            {"criterion": r["criterion"], "pass": r["pass"], "seconds": r["seconds"], "title": r["title"]}
            for r in report["results"]
        ]
        return _write_csv(rows, ["criterion", "pass", "seconds", "title"])
    rows = [{"key": k, "value": v} for k, v in _flatten(to_jsonable(report))]
    return _write_csv(rows, ["key", "value"])


def _threads() -> int:
    raw = os.environ.get("LEVILENS_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise InputError(f"LEVILENS_THREADS must be an integer, got {raw!r}") from None


def _parse_schedule(text: str | None):
    if text is None:
        return DEFAULT_EPS_SCHEDULE
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise InputError(f"bad eps schedule {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="levilens", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", default="-", help="request JSON file, '-' for stdin")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--tol-zero", type=float, default=None, help="eigenvalue degeneracy threshold")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="Levi data, conditions Y/Z, degeneracy spectra")
    sub.add_parser("phase", parents=[common], help="second-order phase jet")
    sub.add_parser("leading", parents=[common], help="phase jet plus leading coefficients")
    ke = sub.add_parser("kernel-eval", parents=[common], help="evaluate a singularity expansion")
    ke.add_argument("--truncation", type=int, default=None, help="keep s^0..s^N")
    ver = sub.add_parser("verify", help="run acceptance suites")
    ver.add_argument("--suite", choices=sorted(SUITES), default="all")
    ver.add_argument("--format", choices=("json", "csv"), default="json")
    ver.add_argument("--eps-schedule", default=None, help="comma-separated decreasing eps values")
    ver.add_argument("--truncation", type=int, default=40, help="ball series truncation N")
    # negative control: scales the expected determinant constant
    ver.add_argument("--inject-det-perturbation", type=float, default=0.0, help=argparse.SUPPRESS)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if args.command == "verify":
            results = run_suite(
                args.suite,
                eps_schedule=_parse_schedule(args.eps_schedule),
                truncation=args.truncation,
                det_constant_scale=1.0 + args.inject_det_perturbation,
                threads=_threads(),
            )
            report = {"suite": args.suite, "results": [r.to_json() for r in results]}
            report["pass"] = all(r.passed for r in results)
            for r in results:
                print(r.line(), file=sys.stderr)
            sys.stdout.write(_emit("verify", report, args.format))
            return EXIT_OK if report["pass"] else EXIT_VERIFY
        request = _read_request(args.input)
        tol = _tolerances(args, request)
        if args.command == "analyze":
            report = cmd_analyze(request, tol)
        elif args.command == "phase":
            report = cmd_phase(request, tol)
        elif args.command == "leading":
            report = cmd_leading(request, tol)
        else:
            report = cmd_kernel_eval(request, tol, args.truncation)
        sys.stdout.write(_emit(args.command, report, args.format))
        return EXIT_OK
    except DomainError as exc:
        print(f"levilens: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except np.linalg.LinAlgError as exc:
        print(f"levilens: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (InputError, ValueError, KeyError, TypeError, IndexError) as exc:
        print(f"levilens: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
