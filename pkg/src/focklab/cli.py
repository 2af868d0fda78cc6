"""Command-line front-end driven by JSON job specifications.

    focklab classify job.json
    focklab compare job.json f g
    focklab path job.json f g --grid 21 --verify
    focklab certify job.json f g
    focklab norms job.json f
    focklab selftest

Exit codes: 0 on success, 2 when an operator that must be bounded is
unbounded, 1 on I/O, schema or other input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from importlib.metadata import PackageNotFoundError, version

import jsonschema
import numpy as np

from .certify import (closedness_witness, monomial_tests, op_distance_lower_bound,
                      separation_certificate)
from .errors import DomainError, FockLabError, InputError, UnboundedError
from .fock import SymbolFn, fock_norm
from .homotopy import build_component_path, sample_path, verify_path
from .linalg import UNIT_TOL, operator_norm
from .operators import (AffineMap, Regime, WeightedSymbol, _regime, classify_composition,
                        complex_from_json, m_sup_estimate, weighted_norm_upper_bound)
from .topology import (component_key, matrices_equivalent, same_component_composition,
                       same_component_weighted)


def _version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0.0.0"


def load_schema(name: str = "jobspec.schema.json") -> dict:
    return json.loads(resources.files("focklab").joinpath("schema", name).read_text("utf-8"))


class SpecError(InputError):
    """Schema or consistency violation; ``path`` is a JSON path like ``$.operators.f.A``."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _check_dims(spec: dict) -> None:
    n = spec["n"]
    for name, op in spec["operators"].items():
        base = f"$.operators.{name}"
        A = op["A"]
        if len(A) != n or any(len(row) != n for row in A):
            raise SpecError(f"{base}.A", f"expected a {n}x{n} matrix")
        if "b" in op and len(op["b"]) != n:
            raise SpecError(f"{base}.b", f"expected length {n}")
        _check_terms(op.get("psi", []), n, f"{base}.psi")
    for name, terms in spec.get("functions", {}).items():
        _check_terms(terms, n, f"$.functions.{name}")


def _check_terms(terms, n, base):
    for k, t in enumerate(terms):
        if len(t["alpha"]) != n:
            raise SpecError(f"{base}[{k}].alpha", f"expected length {n}")
        if len(t["w"]) != n:
            raise SpecError(f"{base}[{k}].w", f"expected length {n}")


def validate_spec(spec) -> dict:
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(spec), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise SpecError(e.json_path, e.message)
    _check_dims(spec)
    return spec


def load_spec(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            spec = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SpecError("$", f"invalid JSON: {exc}") from exc
    return validate_spec(spec)


def operator_from_spec(spec: dict, name: str) -> WeightedSymbol:
    ops = spec["operators"]
    if name not in ops:
        raise SpecError(f"$.operators.{name}", "no such operator")
    op, n = ops[name], spec["n"]
    A = complex_from_json(op["A"])
    b = complex_from_json(op["b"]) if "b" in op else np.zeros(n, dtype=complex)
    psi = SymbolFn.from_json(n, op["psi"]) if "psi" in op else SymbolFn.constant(n)
    return WeightedSymbol(psi, AffineMap(A, b))


# ---------------------------------------------------------------------------
# commands


def _settings(spec, args):
    params = spec.get("params", {})

    def pick(flag, key, default):
        v = getattr(args, flag, None)
        return v if v is not None else params.get(key, default)

    return {"seed": pick("seed", "seed", 0), "tol": pick("tol", "tol", UNIT_TOL),
            "budget": pick("budget", "budget", None), "grid": pick("grid", "grid", 21),
            "assume_bounded": bool(getattr(args, "assume_bounded", False)
                                   or params.get("assume_bounded", False))}


def cmd_classify(spec, args, cfg):
    out = []
    for name in sorted(spec["operators"]):
        w = operator_from_spec(spec, name)
        rec = {"name": name}
        if w.is_composition:
            rec.update(classify_composition(w.phi, spec["p"], spec["q"], cfg["tol"]).to_json())
        else:
            rec["weighted"] = True
            rec["m_sup"] = m_sup_estimate(w, seed=cfg["seed"]).to_json()
        out.append(rec)
    return {"operators": out}


def _same_component(w1, w2, p, q, cfg) -> bool:
    if w1.is_composition and w2.is_composition:
        return same_component_composition(w1.phi, w2.phi, p, q, cfg["tol"])
    return same_component_weighted(w1, w2, p, q, assume_bounded=cfg["assume_bounded"],
                                   tol=cfg["tol"])


def _certificates(w1, w2, p, q, cfg) -> dict:
    out = {}
    le = _regime(p, q) is Regime.P_LE_Q
    tol = cfg["tol"]
    if (le and w1.is_composition and w2.is_composition
            and not matrices_equivalent(w1.phi.A, w2.phi.A, tol)):
        out["separation"] = separation_certificate(w1.phi, w2.phi, p, q, tol).to_json()
    if le:
        n1, n2 = operator_norm(w1.phi.A), operator_norm(w2.phi.A)
        if n1 >= 1 - tol > n2:
            out["closedness"] = closedness_witness(w1, w2, p, q, tol, cfg["seed"]).to_json()
        elif n2 >= 1 - tol > n1:
            out["closedness"] = closedness_witness(w2, w1, p, q, tol, cfg["seed"]).to_json()
    return out


def cmd_compare(spec, args, cfg):
    p, q = spec["p"], spec["q"]
    w1, w2 = operator_from_spec(spec, args.name1), operator_from_spec(spec, args.name2)
    same = _same_component(w1, w2, p, q, cfg)
    res = {"name1": args.name1, "name2": args.name2, "same_component": same,
           "key1": component_key(w1.phi.A, w1.phi.b, cfg["tol"]).to_json(),
           "key2": component_key(w2.phi.A, w2.phi.b, cfg["tol"]).to_json()}
    cert = None
    if not same:
        found = _certificates(w1, w2, p, q, cfg)
        res["certificates"] = found
        if "separation" in found:
            cert = found["separation"]["value"]
        elif "closedness" in found:
            cert = found["closedness"]["value"]
    res["certificate"] = cert
    return res


def cmd_certify(spec, args, cfg):
    p, q = spec["p"], spec["q"]
    w1, w2 = operator_from_spec(spec, args.name1), operator_from_spec(spec, args.name2)
    funcs = monomial_tests(w1.n, p, 2)
    lb = op_distance_lower_bound(w1, w2, p, q, functions=funcs, seed=cfg["seed"], screen=8)
    return {"name1": args.name1, "name2": args.name2, "distance_lower_bound": lb.to_json(),
            **_certificates(w1, w2, p, q, cfg)}


def cmd_norms(spec, args, cfg):
    p, q = spec["p"], spec["q"]
    name = args.name
    if name in spec.get("functions", {}):
        f = SymbolFn.from_json(spec["n"], spec["functions"][name])
        est = fock_norm(f, p, budget=cfg["budget"], seed=cfg["seed"])
        return {"name": name, "kind": "function", "p": p, "norm": est.to_json()}
    w = operator_from_spec(spec, name)
    est = weighted_norm_upper_bound(w, p, q, cfg["tol"], budget=cfg["budget"], seed=cfg["seed"])
    return {"name": name, "kind": "operator_upper_bound", "norm": est.to_json()}


def cmd_path(spec, args, cfg):
    p, q = spec["p"], spec["q"]
    w1, w2 = operator_from_spec(spec, args.name1), operator_from_spec(spec, args.name2)
    h = build_component_path(w1, w2, p, q, assume_bounded=cfg["assume_bounded"],
                             tol=cfg["tol"], seed=cfg["seed"])
    records = [{"kind": "header", **h.to_json()}]
    records += [{"kind": "sample", **s} for s in sample_path(h, cfg["grid"])]
    if args.verify:
        rep = verify_path(h, cfg["grid"], p, q, seed=cfg["seed"], tol=cfg["tol"])
        records.append({"kind": "verification", **rep.to_json()})
    return records


def cmd_selftest(spec, args, cfg):
    from .selftest import run_selftest
    return run_selftest(seed=cfg["seed"])


COMMANDS = {"classify": cmd_classify, "compare": cmd_compare, "path": cmd_path,
            "certify": cmd_certify, "norms": cmd_norms, "selftest": cmd_selftest}


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (overrides params.seed)")
    common.add_argument("--tol", type=float, default=None, help="unit singular value tolerance")
    common.add_argument("--budget", type=int, default=None, help="Monte Carlo sample budget")
    common.add_argument("--grid", type=int, default=None, help="path sampling grid size")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--assume-bounded", action="store_true",
                        help="assert boundedness of weighted operators")

    parser = argparse.ArgumentParser(prog="focklab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=_version())
    sub = parser.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("classify", parents=[common], help="classify every operator in a job")
    sp.add_argument("file")
    for cmd, text in (("compare", "decide whether two operators share a component"),
                      ("path", "emit a path between two operators as JSON lines"),
                      ("certify", "distance lower bounds between two operators")):
        sp = sub.add_parser(cmd, parents=[common], help=text)
        sp.add_argument("file")
        sp.add_argument("name1")
        sp.add_argument("name2")
        if cmd == "path":
            sp.add_argument("--verify", action="store_true", help="append a verification record")
    sp = sub.add_parser("norms", parents=[common], help="norm of a function or operator bound")
    sp.add_argument("file")
    sp.add_argument("name")
    sub.add_parser("selftest", parents=[common], help="run the built-in invariant suite")
    return parser


def _envelope(command, spec, cfg, result) -> dict:
    rec = {"command": command, "version": _version(), "seed": cfg["seed"], "result": result}
    if spec is not None:
        rec["p"], rec["q"] = spec["p"], spec["q"]
    return rec


def _dump(rec) -> str:
    return json.dumps(rec, sort_keys=True, ensure_ascii=False)


def run(argv=None) -> tuple[int, str]:
    """Run the CLI and return ``(exit code, output text)``."""
    args = build_parser().parse_args(argv)
    try:
        spec = None if args.command == "selftest" else load_spec(args.file)
        cfg = _settings(spec or {}, args)
        result = COMMANDS[args.command](spec, args, cfg)
    except UnboundedError as exc:
        return 2, _dump({"error": "unbounded", "message": str(exc)}) + "\n"
    except SpecError as exc:
        return 1, _dump({"error": "schema", "path": exc.path, "message": str(exc)}) + "\n"
    except (OSError, FockLabError, ValueError) as exc:
        return 1, _dump({"error": type(exc).__name__, "message": str(exc)}) + "\n"
    if args.command == "path":
        lines = [_dump(_envelope("path", spec, cfg, r)) for r in result]
        text = "\n".join(lines) + "\n"
    else:
        text = _dump(_envelope(args.command, spec, cfg, result)) + "\n"
    code = 0
    if args.command == "selftest" and result["failed"]:
        code = 1
    return code, text


def main(argv=None) -> int:
    code, text = run(argv)
    args = sys.argv[1:] if argv is None else argv
    out = None
    if "--out" in args:
        out = args[args.index("--out") + 1]
    if out and code == 0:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        (sys.stdout if code == 0 else sys.stderr).write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
