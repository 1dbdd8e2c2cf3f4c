"""Command line front end: ``cubic <verb> ...``.

Exit codes: 0 success, 1 a verification or classification failed, 2 bad input.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import analysis, combinatorics, constructors
from .analysis import DEFAULT_SEED, SearchOptions
from .tensor_core import (
    DEFAULT_TOL,
    CubicForm,
    from_dict,
    normalize_kappa,
    to_dict,
    verify_einstein,
)


class InputError(Exception):
    pass


def _read_text(source: str) -> str:
    if source == "-":
        return sys.stdin.read()
    return Path(source).read_text(encoding="utf-8")


def _is_file(source: str) -> bool:
    return source == "-" or Path(source).is_file()


def _load_json(source: str):
    try:
        return json.loads(_read_text(source))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read JSON from {source}: {exc}") from exc


def named_form(name: str) -> CubicForm:
    """Resolve names such as ``fano``, ``simplicial(5)``, ``cartan(8)``, ``sts:ag2_3``, ``frame:etf_6_16``."""
    m = re.fullmatch(r"(simplicial|cartan|pfaffian)\((\d+)\)", name)
    if m:
        family, k = m.group(1), int(m.group(2))
        build = {"simplicial": constructors.simplicial, "cartan": constructors.cartan_isoparametric,
                 "pfaffian": constructors.pfaffian_form}[family]
        return build(k)
    if name.startswith("sts:"):
        return combinatorics.triple_system_polynomial(combinatorics.ts_catalog(name[4:]))
    if name.startswith("frame:"):
        return combinatorics.frame_polynomial(combinatorics.frame_catalog(name[6:]))
    if name in constructors.CATALOG_NAMES:
        return constructors.catalog(name).form
    try:
        return combinatorics.triple_system_polynomial(combinatorics.ts_catalog(name))
    except KeyError:
        raise InputError(f"unknown polynomial name {name!r}") from None


def load_form(source: str) -> CubicForm:
    if _is_file(source):
        try:
            return from_dict(_load_json(source))
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    try:
        return named_form(source)
    except (ValueError, KeyError) as exc:
        raise InputError(str(exc)) from exc


def _emit(text: str, target: str | None) -> None:
    if target and target != "-":
        Path(target).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True)


def _options(args) -> SearchOptions:
    return SearchOptions(starts=args.starts, seed=args.seed)


def _report_text(d: dict, skip: tuple[str, ...] = ()) -> str:
    return "\n".join(f"{k}: {v}" for k, v in d.items() if k not in skip)


def cmd_construct(args) -> int:
    name = args.name
    if name == "simplicial":
        form = constructors.simplicial(args.dim or 2)
    elif name == "cartan":
        form = constructors.cartan_isoparametric(args.m or 1)
    elif name == "pfaffian":
        form = constructors.pfaffian_form(args.dim or 1)
    elif name == "split":
        form = constructors.split_example(args.p, args.q)
    elif name in ("triple", "parahurwitz", "affine", "extend"):
        if not args.input:
            raise InputError(f"{name} needs --input")
        base = load_form(args.input[0])
        if name == "triple":
            form = constructors.triple(base)
        elif name == "parahurwitz":
            form = constructors.parahurwitzification(base)
        elif name == "affine":
            form = constructors.affine_extension(base)
        else:
            form = constructors.extend(base, args.kappa or (base.dim + 1) * base.dim)
    elif name == "tensor":
        if not args.input or len(args.input) != 2:
            raise InputError("tensor needs two --input values")
        form = constructors.tensor_product(load_form(args.input[0]), load_form(args.input[1]))
    else:
        form = load_form(name)
    if args.kappa is not None and name != "extend":
        form = normalize_kappa(form, args.kappa)
    _emit(json.dumps(to_dict(form)), args.output)
    return 0


def cmd_verify(args) -> int:
    form = load_form(args.source)
    rep = verify_einstein(form, args.tol)
    d = rep.to_dict()
    d["dim"] = form.dim
    if args.json:
        _emit(_dump(d), args.output)
    else:
        _emit(_report_text(d, skip=("gram",)), args.output)
    return 0 if rep.is_einstein else 1


def cmd_analyze(args) -> int:
    form = load_form(args.source)
    opts = _options(args)
    want_all = not (args.critlines or args.mkc or args.cass or args.fingerprint)
    out: dict = {"dim": form.dim, "starts": opts.budget(form.dim), "seed": opts.seed}
    if want_all or args.critlines or args.mkc:
        lines, stable = analysis.critical_lines_stable(form, opts)
        if want_all or args.critlines:
            out["critical_lines"] = [line.to_dict() for line in lines]
            out["critical_line_count"] = len(lines)
            out["stable_under_doubling"] = stable
        if want_all or args.mkc:
            out["mkc"] = analysis.mkc(form, lines=lines)
    if (want_all or args.cass) and form.dim >= 3:
        out["cass_norm"] = analysis.cass_norm(form)
        out["cass_frobenius"] = float(np.linalg.norm(analysis.cass_tensor(form)))
    if want_all or args.fingerprint:
        out["fingerprint"] = analysis.fingerprint(form, opts).to_dict()
    if args.json:
        _emit(_dump(out), args.output)
    else:
        _emit(_report_text(out, skip=("critical_lines",)), args.output)
    return 0


def cmd_compare(args) -> int:
    a, b = load_form(args.first), load_form(args.second)
    for form in (a, b):
        if not verify_einstein(form, args.tol).is_einstein:
            _emit(_dump({"error": "input is not Einstein"}) if args.json else "input is not Einstein", args.output)
            return 1
    verdict = analysis.compare(a, b, _options(args))
    _emit(_dump({"verdict": verdict}) if args.json else verdict, args.output)
    return 0


def cmd_classify(args) -> int:
    form = load_form(args.source)
    try:
        result = analysis.classify_low_dim(form, _options(args))
    except ValueError as exc:
        _emit(_dump({"error": str(exc)}) if args.json else str(exc), args.output)
        return 1
    d = {"label": result.label, "mkc": result.mkc, "lambda": result.lam}
    _emit(_dump(d) if args.json else _report_text(d), args.output)
    return 0


def _load_ts(source: str) -> combinatorics.TripleSystem:
    if _is_file(source):
        try:
            return combinatorics.TripleSystem.from_dict(_load_json(source))
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    try:
        return combinatorics.ts_catalog(source)
    except KeyError as exc:
        raise InputError(str(exc)) from exc


def cmd_sts(args) -> int:
    ts = _load_ts(args.source)
    rep = combinatorics.validate_triple_system(ts)
    if args.action == "check":
        d = dict(rep.__dict__, points=ts.points)
        _emit(_dump(d) if args.json else _report_text(d), args.output)
        return 0 if rep.is_partial else 1
    if not (rep.is_partial and rep.is_regular):
        sys.stderr.write("triple system is not a regular partial Steiner system\n")
        return 1
    _emit(json.dumps(to_dict(combinatorics.triple_system_polynomial(ts))), args.output)
    return 0


def _load_frame(source: str) -> combinatorics.Frame:
    if _is_file(source):
        try:
            return combinatorics.Frame.from_dict(_load_json(source))
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    try:
        return combinatorics.frame_catalog(source)
    except KeyError as exc:
        raise InputError(str(exc)) from exc


def cmd_frame(args) -> int:
    frame = _load_frame(args.source)
    if args.action == "check":
        d = combinatorics.validate_frame(frame, args.tol).to_dict()
        _emit(_dump(d) if args.json else _report_text(d, skip=("norms",)), args.output)
        return 0 if d["tight"] else 1
    _emit(json.dumps(to_dict(combinatorics.frame_polynomial(frame))), args.output)
    return 0


def catalog_rows() -> list[dict]:
    """Every named object with its dimension and kappa (expected, else measured)."""
    rows = []
    for name in constructors.CATALOG_NAMES:
        entry = constructors.catalog(name)
        kappa = entry.kappa_expected
        if kappa is None:
            rep = verify_einstein(entry.form)
            kappa = rep.kappa if rep.is_einstein else None
        rows.append({"name": name, "dim": entry.dim, "kappa": kappa})
    for n in range(2, 10):
        rows.append({"name": "simplicial", "n": n, "dim": n,
                     "kappa": verify_einstein(constructors.simplicial(n)).kappa})
    for m in (1, 2, 4, 8):
        rows.append({"name": "cartan", "m": m, "dim": 3 * m + 2,
                     "kappa": verify_einstein(constructors.cartan_isoparametric(m)).kappa})
    for n in (1, 2):
        form = constructors.pfaffian_form(n)
        rows.append({"name": "pfaffian", "n": n, "dim": form.dim, "kappa": verify_einstein(form).kappa})
    for name in combinatorics.TS_NAMES:
        ts = combinatorics.ts_catalog(name)
        rep = combinatorics.validate_triple_system(ts)
        rows.append({"name": f"sts:{name}", "dim": ts.points, "kappa": 2.0 * rep.r})
    for name in ("two_distance_6_8", "etf_6_16", "etf_7_28"):
        form = combinatorics.frame_polynomial(combinatorics.frame_catalog(name))
        rows.append({"name": f"frame:{name}", "dim": form.dim, "kappa": verify_einstein(form).kappa})
    return rows


def _format_row(row: dict) -> str:
    parts = [row["name"]]
    for key in ("n", "m"):
        if key in row:
            parts.append(f"{key}={row[key]}")
    parts.append(f"dim={row['dim']}")
    kappa = row["kappa"]
    parts.append("kappa=none" if kappa is None else f"kappa={kappa:.12g}")
    return " ".join(parts)


def catalog_list() -> str:
    return "\n".join(_format_row(row) for row in catalog_rows())


def cmd_catalog_list(args) -> int:
    _emit(_dump(catalog_rows()) if args.json else catalog_list(), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="verification tolerance")
    common.add_argument("--starts", type=int, default=None, help="multistart budget (default max(200n, 2000))")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("-o", "--output", default=None, help="output file, '-' for stdout")

    ap = argparse.ArgumentParser(prog="cubic", description="Einstein cubic forms: construction and analysis")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("construct", parents=[common], help="build a named form or family member")
    p.add_argument("name", help="catalog name, or family: simplicial, cartan, pfaffian, split, "
                                "triple, parahurwitz, affine, extend, tensor")
    p.add_argument("--dim", type=int, help="dimension for simplicial, degree index for pfaffian")
    p.add_argument("--m", type=int, help="composition algebra dimension for cartan")
    p.add_argument("--p", type=int, default=1, help="planar blocks for split")
    p.add_argument("--q", type=int, default=1, help="three-variable blocks for split")
    p.add_argument("--kappa", type=float, help="rescale the result to this kappa")
    p.add_argument("--input", action="append", help="input form (file or name) for derived constructions")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", parents=[common], help="check the Einstein equations")
    p.add_argument("source")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("analyze", parents=[common], help="critical lines, mkc, cass, fingerprint")
    p.add_argument("source")
    p.add_argument("--critlines", action="store_true")
    p.add_argument("--mkc", action="store_true")
    p.add_argument("--cass", action="store_true")
    p.add_argument("--fingerprint", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("compare", parents=[common], help="try to separate two forms by invariants")
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("classify", parents=[common], help="normal form in dimensions 2, 3, 4")
    p.add_argument("source")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("sts", parents=[common], help="triple systems")
    p.add_argument("action", choices=["check", "poly"])
    p.add_argument("source")
    p.set_defaults(func=cmd_sts)

    p = sub.add_parser("frame", parents=[common], help="frames")
    p.add_argument("action", choices=["check", "poly"])
    p.add_argument("source")
    p.set_defaults(func=cmd_frame)

    p = sub.add_parser("catalog-list", parents=[common], help="list named forms with dim and kappa")
    p.set_defaults(func=cmd_catalog_list)
    return ap


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except (ValueError, KeyError, MemoryError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
