"""Command-line orchestration: parse inputs, run checks, emit reports.

Commands: certify-delay, goodwin-check, goodwin-region, simulate,
parabolic-gap.  Every command reads a JSON input document (validated against
the shipped schema), writes report.json into the output directory, and
returns exit code 0 for a definitive result (certified or refuted), 1 for
invalid input (with a machine-readable error object on stdout), and 2 when
the checks could not be closed (inconclusive).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from importlib import resources

import jsonschema
import numpy as np

from . import __version__, ddesim, goodwin
from .charroots import (DelayLinearPart, NoConvergence, OnAxisRoot,
                        QuasiPolynomial, count_roots_right_of)
from .freqcheck import (LurjeDelaySystem, PoleOnLine, TailBoundUnavailable,
                        check_gain_condition)
from .parabolic import DiagonalParabolicModel, NoGap, spectral_gap_check

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INCONCLUSIVE = 2

logger = logging.getLogger("pbcert")


def _load_schema(name: str) -> dict:
    text = resources.files("pbcert.schemas").joinpath(name).read_text()
    return json.loads(text)


def _jsonify(obj):
    """Recursively convert numpy scalars/arrays for json.dump."""
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


class ValidationFailure(Exception):
    def __init__(self, field: str, message: str):
        super().__init__(message)
        self.field = field


def _emit_validation_error(exc: ValidationFailure) -> int:
    print(json.dumps({"error": "validation", "field": exc.field,
                      "message": str(exc)}, sort_keys=True))
    return EXIT_VALIDATION


def _read_input(path: str, expected_type: str | None) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ValidationFailure("input", f"cannot read input file: {exc}")
    except json.JSONDecodeError as exc:
        raise ValidationFailure("$", f"input is not valid JSON: {exc}")
    schema = _load_schema("input.schema.json")
    try:
        jsonschema.validate(data, schema)
    except jsonschema.ValidationError as exc:
        best = jsonschema.exceptions.best_match([exc])
        field = "/".join(str(p) for p in best.absolute_path) or "$"
        raise ValidationFailure(field, best.message)
    if expected_type is not None:
        actual = data.get("type", "diagonal_parabolic")
        if actual != expected_type:
            raise ValidationFailure(
                "type", f"expected a {expected_type!r} document, got {actual!r}")
    return data


def _write_report(out_dir: str, report: dict) -> str:
    report = _jsonify(report)
    jsonschema.validate(report, _load_schema("report.schema.json"))
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "report.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _base_report(command: str, config: dict, status: str) -> dict:
    return {
        "tool": {"name": "pbcert", "version": __version__},
        "command": command,
        "config": _jsonify(config),
        "status": status,
    }


def _hypotheses_entry(nu: float, j: int, margin: float, safety: float) -> dict:
    tag = "certified-by-frequency-theorem"
    return {
        "H1": {"status": tag, "nu": nu},
        "H2": {"status": tag, "j": j},
        "H3": {"status": tag, "nu": nu, "margin": margin, "safety": safety},
    }


# --------------------------------------------------------------------------
# commands

def _cmd_certify_delay(args) -> int:
    data = _read_input(args.input, "lurje_delay_system")
    try:
        part = DelayLinearPart([(t["delay"], t["matrix"]) for t in data["a_terms"]])
        system = LurjeDelaySystem(
            a=part, b=data["b"],
            c_terms=[(t["delay"], t["matrix"]) for t in data["c_terms"]],
            lipschitz=data["lambda"],
            m1=data.get("m1"), m2=data.get("m2"))
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise ValidationFailure("$", str(exc))
    nu = float(data["nu"])
    config = {"input": data, "safety": args.margin}

    status = "certified"
    notes = []
    root_counts = []
    sweeps = []
    j = None
    try:
        rc = count_roots_right_of(system.quasi_polynomial(), -nu)
        j = rc.count
        root_counts.append({"abscissa": -nu, "count": rc.count,
                            "margin": rc.margin, "method": rc.method})
        gain = check_gain_condition(system, nu, safety=args.margin)
        sweeps.append(gain.to_dict())
        if not gain.passed:
            status = "refuted"
            notes.append("gain condition failed on the sweep line")
        if data.get("j_expected") is not None and j != data["j_expected"]:
            status = "refuted"
            notes.append(f"dichotomy count {j} != expected {data['j_expected']}")
    except (OnAxisRoot, PoleOnLine) as exc:
        status = "refuted"
        notes.append(f"root on the sweep line: {exc}")
    except TailBoundUnavailable as exc:
        status = "inconclusive"
        notes.append(str(exc))
    except NoConvergence as exc:
        status = "inconclusive"
        notes.append(str(exc))

    report = _base_report("certify-delay", config, status)
    report["root_counts"] = root_counts
    report["sweeps"] = sweeps
    report["notes"] = notes
    if status == "certified":
        report["hypotheses"] = _hypotheses_entry(
            nu, j, sweeps[-1]["margin"], args.margin)
    _write_report(args.out, report)
    return EXIT_INCONCLUSIVE if status == "inconclusive" else EXIT_OK


def _classification_status(cls: goodwin.PointClassification) -> str:
    if cls.label != goodwin.UNCERTIFIED:
        return "certified"
    if cls.reason in goodwin.INCONCLUSIVE_REASONS:
        return "inconclusive"
    return "refuted"


def _cmd_goodwin_check(args) -> int:
    data = _read_input(args.input, "goodwin")
    rho_set = args.rho_set or data.get("rho_set")
    beta_set = args.beta_set or data.get("beta_set")
    cls = goodwin.classify_point(data["tau"], data["lambda"],
                                 rho_set, beta_set, safety=args.margin)
    status = _classification_status(cls)
    config = {"input": data, "rho_set": rho_set, "beta_set": beta_set,
              "safety": args.margin}
    report = _base_report("goodwin-check", config, status)
    report["classification"] = cls.to_dict()
    counts = []
    phi0_count = cls.reports.get("root_count_at_phi0")
    if phi0_count:
        counts.append({"abscissa": 0.0, "count": phi0_count["count"],
                       "margin": phi0_count["margin"],
                       "method": phi0_count["method"]})
    report["root_counts"] = counts
    if cls.witness_rho is not None:
        report["hypotheses"] = _hypotheses_entry(
            data["lambda"], 2, cls.margin, args.margin)
    _write_report(args.out, report)
    return EXIT_INCONCLUSIVE if status == "inconclusive" else EXIT_OK


def _cmd_goodwin_region(args) -> int:
    rho_set = args.rho_set
    beta_set = args.beta_set
    if args.input:
        data = _read_input(args.input, "goodwin")
        rho_set = rho_set or data.get("rho_set")
        beta_set = beta_set or data.get("beta_set")
    tau_lo, tau_hi, n_tau = args.tau_range
    lam_lo, lam_hi, n_lam = args.lambda_range
    grid = goodwin.sweep_region(
        (tau_lo, tau_hi), (lam_lo, lam_hi), (n_tau, n_lam),
        rho_set, beta_set, workers=args.workers, safety=args.margin)

    os.makedirs(args.out, exist_ok=True)
    grid.write_csv(os.path.join(args.out, "region.csv"))
    from .charts import render_region_svg
    render_region_svg(grid, os.path.join(args.out, "region.svg"))

    smith = goodwin.smith_rho()
    via_smith = int(np.sum(np.abs(grid.witness_rho - smith) < 1e-12))
    certified = int(np.sum(~np.isnan(grid.witness_rho)))
    config = dict(grid.config)
    config["workers"] = args.workers
    report = _base_report("goodwin-region", config, "ok")
    report["region"] = {
        "cells": int(grid.labels.size),
        "counts": grid.label_counts(),
        "certified_cells": certified,
        "certified_via_classical_rho": via_smith,
        "certified_via_scanned_rho": certified - via_smith,
        "files": ["region.csv", "region.svg"],
    }
    _write_report(args.out, report)
    return EXIT_OK


def _make_history(data: dict, tau: float, lam: float, seed: int) -> ddesim.History:
    spec = data.get("history") or {"kind": "stationary_perturbation"}
    kind = spec.get("kind")
    if kind == "constant":
        if "values" not in spec:
            raise ValidationFailure("history/values",
                                    "constant history needs 'values'")
        return ddesim.History.constant(spec["values"], tau)
    if kind == "stationary_perturbation":
        scale = float(spec.get("scale", 0.05))
        state = goodwin.stationary_point(lam) * (1.0 + scale)
        return ddesim.History.constant(state, tau)
    if kind == "random_box":
        beta = float(spec.get("beta", 1.5))
        lo, hi = goodwin.wbeta_bounds(beta, lam)
        rng = np.random.default_rng(seed)
        state = lo + (0.05 + 0.9 * rng.random(3)) * (hi - lo)
        return ddesim.History.constant(state, tau)
    raise ValidationFailure("history/kind", f"unknown history kind {kind!r}")


def _cmd_simulate(args) -> int:
    data = _read_input(args.input, "goodwin")
    tau, lam = float(data["tau"]), float(data["lambda"])
    horizon = args.horizon if args.horizon else 500.0 * tau
    step = args.step if args.step else tau / 128.0
    history = _make_history(data, tau, lam, args.seed)
    prob = ddesim.goodwin_problem(tau, lam, history)
    config = {"input": data, "horizon": horizon, "step": step,
              "seed": args.seed}

    os.makedirs(args.out, exist_ok=True)
    try:
        traj = ddesim.integrate(prob, step, horizon)
    except ddesim.NonfiniteState as exc:
        report = _base_report("simulate", config, "inconclusive")
        report["notes"] = [f"integration blew up: {exc}"]
        _write_report(args.out, report)
        return EXIT_INCONCLUSIVE
    traj.write_csv(os.path.join(args.out, "trajectory.csv"))
    verdict = ddesim.detect_limit(traj, goodwin.stationary_point(lam),
                                  ddesim.goodwin_section(lam))
    status = "ok" if verdict.kind != ddesim.INCONCLUSIVE else "inconclusive"
    report = _base_report("simulate", config, status)
    report["verdict"] = verdict.to_dict()
    report["verdict"]["files"] = ["trajectory.csv"]
    _write_report(args.out, report)
    return EXIT_OK if status == "ok" else EXIT_INCONCLUSIVE


def _cmd_parabolic_gap(args) -> int:
    data = _read_input(args.input, None)
    if data.get("type", "diagonal_parabolic") != "diagonal_parabolic":
        raise ValidationFailure("type", "expected a diagonal_parabolic document")
    try:
        model = DiagonalParabolicModel.from_dict(data)
        result = spectral_gap_check(model)
    except NoGap as exc:
        raise ValidationFailure("j", str(exc))
    except ValueError as exc:
        raise ValidationFailure("$", str(exc))
    status = "certified" if result.passed else "refuted"
    report = _base_report("parabolic-gap", {"input": data}, status)
    report["gap"] = result.to_dict()
    _write_report(args.out, report)
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing

def _parse_range(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("range must look like a:b:n")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 1:
        raise argparse.ArgumentTypeError("resolution must be >= 1")
    return lo, hi, n


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pbcert",
        description="Frequency-domain certification of delay and diagonal "
                    "parabolic systems.")
    parser.add_argument("--version", action="version",
                        version=f"pbcert {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("--input", required=True, help="input JSON document")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--margin", type=_positive_float, default=1e-6,
                       help="safety margin for strict inequalities")

    p = sub.add_parser("certify-delay",
                       help="certify a generic Lur'e-form delay system")
    common(p)
    p.set_defaults(func=_cmd_certify_delay)

    p = sub.add_parser("goodwin-check",
                       help="classify one (tau, lambda) Goodwin point")
    common(p)
    p.add_argument("--rho-set", type=_parse_floats, default=None)
    p.add_argument("--beta-set", type=_parse_floats, default=None)
    p.set_defaults(func=_cmd_goodwin_check)

    p = sub.add_parser("goodwin-region",
                       help="classify a (tau, lambda) lattice and chart it")
    p.add_argument("--input", default=None, help="optional goodwin JSON with "
                   "candidate sets")
    p.add_argument("--out", required=True)
    p.add_argument("--margin", type=_positive_float, default=1e-6)
    p.add_argument("--tau-range", type=_parse_range, default=(0.05, 3.0, 120),
                   help="a:b:n sweep range (default 0.05:3:120)")
    p.add_argument("--lambda-range", type=_parse_range,
                   default=(0.05, 1.5, 120))
    p.add_argument("--rho-set", type=_parse_floats, default=None)
    p.add_argument("--beta-set", type=_parse_floats, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_goodwin_region)

    p = sub.add_parser("simulate",
                       help="integrate a Goodwin point and detect its limit")
    common(p)
    p.add_argument("--horizon", type=_positive_float, default=None,
                   help="integration horizon (default 500*tau)")
    p.add_argument("--step", type=_positive_float, default=None,
                   help="step size, snapped to tau/k (default tau/128)")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for randomized histories")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("parabolic-gap",
                       help="spectral-gap check for a diagonal parabolic model")
    common(p)
    p.set_defaults(func=_cmd_parabolic_gap)
    return parser


def run(args) -> int:
    """Execute a parsed command; maps validation failures to exit code 1."""
    if getattr(args, "workers", 1) < 1:
        return _emit_validation_error(
            ValidationFailure("workers", "worker count must be >= 1"))
    try:
        return args.func(args)
    except ValidationFailure as exc:
        return _emit_validation_error(exc)


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("PBCERT_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
