"""
canon-szego — Main Entry Point
Orchestrates: load spec → compute → export
"""

import argparse
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

import numpy as np

# Add tools to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from tools import config
from tools.entropy import EXACT_TAIL, QUADRATURE, entropy_record
from tools.errors import CanonSzegoError, SpecError
from tools.export_payload import export_all, export_csv, export_json
from tools.hamiltonian import (
    Hamiltonian,
    det_one_reparametrize,
    eta_grid,
    szego_characteristic,
    to_dict,
    trace_normalize,
    validate,
)
from tools.krein_string import (
    StringSpec,
    hamiltonian_to_string,
    q_function,
    string_characteristic,
    string_to_dict,
    string_to_hamiltonian,
    szego_log_integral,
    t_points,
)
from tools.load_spec import load_any, load_hamiltonian, load_string
from tools.muckenhoupt import (
    a2l1,
    bound_report,
    int_characteristic,
    int_characteristic_quadrature,
    p1_witness,
    sequences_and_identity,
    split_interval_report,
    weight_from_hamiltonian,
)
from tools.verify_suite import run_verify_suite
from tools.weyl import m_function, spectral_density

logger = logging.getLogger("canon_szego")

COMMANDS = ("simulate", "density", "entropy", "szego", "a2", "string", "verify")
STRING_ACTIONS = ("convert", "analyze", "characteristic", "q")


def parse_grid(text: str) -> np.ndarray:
    """'a:b:n' -> n evenly spaced points from a to b."""
    parts = text.split(":")
    if len(parts) != 3:
        raise SpecError(f"grid must look like a:b:n, got {text!r}", field="--grid")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise SpecError(f"grid must look like a:b:n, got {text!r}", field="--grid") from None
    if not (math.isfinite(a) and math.isfinite(b)) or n < 1:
        raise SpecError("grid ends must be finite and n >= 1", field="--grid")
    return np.linspace(a, b, n)


def ordered_map(fn: Callable, items) -> list:
    """Map over items with the configured worker pool, keeping input order."""
    items = list(items)
    workers = config.thread_count()
    if workers == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _imag(args, default: float) -> float:
    return default if args.imag is None else args.imag


def _as_hamiltonian(spec) -> Hamiltonian:
    return string_to_hamiltonian(spec) if isinstance(spec, StringSpec) else spec


def artifact_stem(args) -> str:
    """<command>[_<input stem>], e.g. entropy_bump."""
    if not args.input:
        return args.command
    return f"{args.command}_{os.path.splitext(os.path.basename(args.input))[0]}"


def load_input(args):
    """a2 reads a Hamiltonian, string actions other than convert read a string."""
    if args.command == "a2":
        return load_hamiltonian(args.input)
    if args.command == "string" and args.action != "convert":
        return load_string(args.input)
    return load_any(args.input)


# ─── subcommands ─────────────────────────────────────────────────────────────


def cmd_simulate(args, spec) -> tuple[dict, list]:
    H = _as_hamiltonian(spec)
    xs = parse_grid(args.grid or "-5:5:11")

    def row(x):
        result = m_function(H, complex(x, _imag(args, 1.0)), tol=args.tol, route=args.route)
        return {"x": float(x), "y": _imag(args, 1.0), "m": result.m_value, "radius": result.radius,
                "route": result.route}

    rows = ordered_map(row, xs)
    return {"records": rows}, rows


def cmd_density(args, spec) -> tuple[dict, list]:
    H = _as_hamiltonian(spec)
    xs = parse_grid(args.grid or "-10:10:41")
    values = ordered_map(lambda x: spectral_density(H, float(x), eps=args.eps), xs)
    rows = [{"x": float(x), "w": w} for x, w in zip(xs, values)]
    return {"records": rows, "eps": args.eps}, rows


def cmd_entropy(args, spec) -> tuple[dict, list]:
    H = _as_hamiltonian(spec)
    validate(H)
    records = [entropy_record(H, args.r, EXACT_TAIL)]
    records.append(entropy_record(H, args.r, QUADRATURE, tol=args.tol))
    rows = [{"route": rec.route, "r": rec.r, "I": rec.I, "J": rec.J, "K": rec.K} for rec in records]
    exact, quad = records
    difference = 0.0 if exact.K == quad.K else abs(exact.K - quad.K)
    return {"records": rows, "route_difference": difference}, rows


def cmd_szego(args, spec) -> tuple[dict, list]:
    H = _as_hamiltonian(spec)
    report = szego_characteristic(H)
    eta = eta_grid(H, args.nmax)
    rows = []
    for n, e in enumerate(eta):
        row = {"n": n, "eta": e}
        if n < len(report["terms"]):
            row.update(int_h1=report["int_h1"][n], int_h2=report["int_h2"][n], term=report["terms"][n])
        rows.append(row)
    return {"value": report["value"], "eta": eta, "terms": report["terms"]}, rows


def cmd_a2(args, spec) -> tuple[dict, list]:
    H = _as_hamiltonian(spec)
    if any(p.det != 1 for p in list(H.pieces) + [H.tail]):
        H, _ = det_one_reparametrize(H)
        logger.info("   ↪ reparametrized to det H = 1")
    h = weight_from_hamiltonian(H)
    identity = sequences_and_identity(h)
    bounds = bound_report(h)
    p1 = p1_witness(h)
    szego = szego_characteristic(H)["value"]
    first = float(h.breakpoints[1]) if len(h.breakpoints) > 1 else 1.0
    summary = {
        "a2l1": a2l1(h),
        "szego": szego,
        "szego_over_a2l1": float(szego) / float(a2l1(h)) if a2l1(h) else None,
        "int_characteristic": int_characteristic(h),
        "int_characteristic_quadrature": int_characteristic_quadrature(h),
        "K": bounds["K"],
        "local_lower_bound": bounds["local_lower_bound"],
        "p1": p1,
        "Q": identity["Q"],
        "f": identity["f"],
        "v": identity["v"],
        "l1_identity_residual": identity["residual"],
        "ratio_constant": identity["ratio_constant"],
        "sqrt_constant": identity["sqrt_constant"],
        "split_interval": split_interval_report(h, 0.0, 2 * first, 0.5),
    }
    rows = [
        {"n": n, "Q": q, "f": f, "v": v}
        for n, (q, f, v) in enumerate(zip(identity["Q"], identity["f"], identity["v"]))
    ]
    return summary, rows


def cmd_string(args, spec) -> tuple[dict, list]:
    action = args.action
    if action == "convert":
        if isinstance(spec, StringSpec):
            H = string_to_hamiltonian(spec)
            result = {"kind": "hamiltonian", **to_dict(H)}
            rows = [{"start": s, "end": e, "h1": p.h11, "h2": p.h22} for s, e, p in H.segments()]
        else:
            H = trace_normalize(spec) if args.normalize else spec
            S = hamiltonian_to_string(H)
            result = {"kind": "string", **string_to_dict(S)}
            rows = [{"upto": u, "density": v} for u, v in S.density]
        return result, rows

    S = spec
    if action == "characteristic":
        report = string_characteristic(S)
        rows = [{"n": n, "t": report["t"][n], "dt": dt, "dM": dm, "term": term}
                for n, (dt, dm, term) in enumerate(zip(report["dt"], report["dM"], report["terms"]))]
        return {"value": report["value"], "terms": report["terms"]}, rows
    if action == "q":
        xs = parse_grid(args.grid or "-5:-1:5")
        if _imag(args, 0.0) == 0 and np.any(xs >= 0):
            raise SpecError("q is evaluated off [0, inf): use negative x or pass --imag", field="--grid")

        def row(x):
            z = complex(x, _imag(args, 0.0))
            return {"x": float(x), "y": z.imag, "q": q_function(S, z),
                    "q_hamiltonian": q_function(S, z, route="hamiltonian")}

        rows = ordered_map(row, xs)
        return {"records": rows}, rows

    H = string_to_hamiltonian(S)
    summary = {
        "length": S.length,
        "singular_mass": S.singular_mass,
        "tail_density": S.tail_density,
        "image": to_dict(H),
        "log_integral": szego_log_integral(S),
    }
    if S.length == math.inf and S.tail_density > 0:
        summary["t_points"] = t_points(S, args.nmax)
        summary["characteristic"] = string_characteristic(S)["value"]
    rows = [{"upto": u, "density": v} for u, v in S.density] + [{"pos": p, "mass": m} for p, m in S.atoms]
    return summary, rows


def cmd_verify(args, spec) -> tuple[dict, list]:
    result = run_verify_suite()
    return result, result["checks"]


HANDLERS = {
    "simulate": cmd_simulate,
    "density": cmd_density,
    "entropy": cmd_entropy,
    "szego": cmd_szego,
    "a2": cmd_a2,
    "string": cmd_string,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="canon-szego", description=__doc__.strip().splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--input", help="Hamiltonian or string spec (JSON)")
    parser.add_argument("--grid", help="real grid a:b:n")
    parser.add_argument("--imag", type=float, default=None,
                        help="imaginary part of z (simulate defaults to 1, string q to 0)")
    parser.add_argument("--tol", type=float, default=None, help="Weyl disk / quadrature tolerance")
    parser.add_argument("--route", choices=("auto", "exact", "disk"), default="auto")
    parser.add_argument("--format", choices=("json", "csv", "both"), default="json")
    parser.add_argument("--output", help="write the artifact here instead of stdout (a directory for --format both)")
    parser.add_argument("--eps", type=float, default=None, help="regularization for density without a det-positive tail")
    parser.add_argument("--nmax", type=int, default=8, help="number of grid points for szego and t_n")
    parser.add_argument("--r", type=float, default=0.0, help="shift for entropy")
    parser.add_argument("--action", choices=STRING_ACTIONS, default="analyze")
    parser.add_argument("--normalize", action="store_true", help="trace-normalize before string conversion")
    return parser


def run(argv: Optional[list] = None) -> int:
    """Run one command and return its exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=config.log_level(), format="%(message)s", stream=sys.stderr)

    try:
        logger.debug("config: %s", config.as_dict())
        if args.tol is not None and not args.tol > 0:
            raise SpecError(f"tolerance must be positive, got {args.tol}", field="--tol")
        if args.command == "simulate" and not _imag(args, 1.0) > 0:
            raise SpecError(f"simulate needs Im z > 0, got {args.imag}", field="--imag")
        if args.nmax < 0:
            raise SpecError("nmax must be >= 0", field="--nmax")

        logger.info("🚀 canon-szego %s — Starting...", args.command)
        spec = None
        if args.command != "verify":
            spec = load_input(args)
            logger.info("   ✅ Loaded: %s", args.input)

        payload, rows = HANDLERS[args.command](args, spec)
        payload = {"command": args.command, "input": args.input, **payload}
        if args.format == "both":
            paths = export_all(payload, rows, args.output or config.output_dir(), artifact_stem(args))
            logger.info("   ✅ JSON: %s", paths["json"])
            logger.info("   ✅ CSV: %s", paths["csv"])
        else:
            if args.format == "json":
                text = export_json(payload, args.output)
            else:
                text = export_csv(rows, args.output)
            if args.output:
                logger.info("   ✅ %s: %s", args.format.upper(), args.output)
            else:
                sys.stdout.write(text)
    except CanonSzegoError as exc:
        logger.error("❌ Error: %s", exc)
        return exc.exit_code
    except ValueError as exc:
        logger.error("❌ Error: %s", exc)
        return SpecError.exit_code

    if args.command == "verify":
        passed, total = payload["checks_passed"], payload["checks_run"]
        logger.info("🧮 Checks completed: %d/%d passed", passed, total)
        return 0 if passed == total else 1
    logger.info("🎉 Done")
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
