"""Command-line interface: operator assembly, algebra operations, and the
theorem checklist with machine-readable reports."""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import cache as cache_mod
from .checks import CHECK_IDS, CheckSpec, run_checklist
from .config import DEFAULTS, load_config
from .field import FieldModel
from .integrate import IntegratorOptions


def _int_list(text):
    return tuple(int(x) for x in text.split(","))


def _emit(data, out):
    blob = json.dumps(data, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(blob + "\n")
    else:
        print(blob)


def _field(args, cfg):
    return FieldModel(getattr(args, "model", "equichar") or "equichar", args.q)


def _options(args, cfg):
    depth = getattr(args, "depth", None)
    tol = getattr(args, "tol", None)
    return IntegratorOptions(
        depth_extra=depth if depth is not None else cfg["depth_extra"],
        tol_exp=tol if tol is not None else cfg["tol_exp"],
        geom_run=cfg["geom_run"],
        geom_guard=cfg["geom_guard"],
    )


def cmd_verify(args):
    cfg = load_config(args.config)
    spec = CheckSpec(
        check=args.check,
        qs=_int_list(args.q) if args.q else None,
        ns=_int_list(args.n) if args.n else None,
        rs=_int_list(args.r) if args.r else None,
        model=args.model,
        depth_extra=args.depth if args.depth is not None else cfg["depth_extra"],
        tol_exp=args.tol if args.tol is not None else cfg["tol_exp"],
        oracle=args.oracle,
        seed=args.seed if args.seed is not None else cfg["seed"],
        cache_dir=args.cache_dir or (cfg["cache_dir"] or None),
    )
    t0 = time.monotonic()
    report = run_checklist(spec)
    doc = report.to_json()
    doc["total_sec"] = round(time.monotonic() - t0, 3)
    _emit(doc, args.out)
    for res in report.results:
        print(f"{res['check']:<20} {json.dumps(res['params']):<55} {res['verdict']}",
              file=sys.stderr)
    return 0 if report.worst() in ("PASS-EXACT", "PASS-CERTIFIED") else 1


def cmd_op_matrix(args):
    cfg = load_config(args.config)
    field = _field(args, cfg)
    opts = _options(args, cfg)
    directory = args.cache_dir or (cfg["cache_dir"] or None)
    if args.transform == "cosine":
        m = cache_mod.cached_cosine(field, args.n, args.k, args.r, opts, directory)
    elif args.transform == "radon":
        p = args.p if args.p is not None else args.k
        qdim = args.qdim if args.qdim is not None else args.n - p
        m = cache_mod.cached_radon(field, args.n, p, qdim, args.r,
                                   containing=args.containing, directory=directory)
    elif args.transform == "fourier":
        m = cache_mod.cached_fourier(field, args.n, args.k, args.r, directory)
    else:
        raise SystemExit(f"unknown transform {args.transform}")
    _emit(m.to_json(), args.out)
    return 0


def _load_valuation(path):
    from .valuation import LevelValuation

    return LevelValuation.from_json(json.loads(Path(path).read_text()))


def cmd_product_eval(args):
    from .algebra import product

    cfg = load_config(args.config)
    phi = _load_valuation(args.phi)
    psi = _load_valuation(args.psi)
    opts = _options(args, cfg)
    result = product(phi, psi, opts)
    _emit(result.to_json(), args.out)
    return 0


def cmd_pushforward(args):
    from .algebra import LinearMap, pushforward, pushforward_is_level_exact

    cfg = load_config(args.config)
    v = _load_valuation(args.val)
    data = json.loads(Path(args.map).read_text())
    F = LinearMap.from_json(v.field, data)
    result = pushforward(F, v, args.path)
    doc = result.to_json()
    doc["level_exact"] = pushforward_is_level_exact(F, v)
    _emit(doc, args.out)
    return 0


def cmd_pairing(args):
    from .algebra import poincare_pairing

    cfg = load_config(args.config)
    field = _field(args, cfg)
    pm = poincare_pairing(field, args.n, args.i, args.r, _options(args, cfg))
    doc = {
        "n": args.n, "i": args.i, "q": args.q, "r": args.r,
        "dims": [pm.basis_left.dim, pm.basis_right.dim],
        "verdict": pm.verdict(),
        "entries": [[c.to_json() for c in row] for row in pm.entries],
    }
    _emit(doc, args.out)
    return 0


def cmd_cache(args):
    cfg = load_config(args.config)
    directory = args.cache_dir or (cfg["cache_dir"] or None)
    if args.action == "clear":
        n = cache_mod.clear(directory)
        print(f"removed {n} cached files")
    else:
        d = cache_mod.cache_dir(directory)
        files = list(d.glob("*.json"))
        print(f"{d}: {len(files)} cached files")
    return 0


def _add_common(sp):
    sp.add_argument("--config", default=None, help="key = value configuration file")
    sp.add_argument("--cache-dir", default=None)
    sp.add_argument("--out", default=None, help="write JSON here instead of stdout")


def build_parser():
    ap = argparse.ArgumentParser(prog="latticeval")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run theorem checks over a parameter grid")
    v.add_argument("check", choices=list(CHECK_IDS) + ["all"])
    v.add_argument("--q", default=None, help="comma list, e.g. 2,3")
    v.add_argument("--n", default=None, help="comma list, e.g. 2,3")
    v.add_argument("--r", default=None, help="comma list, e.g. 1,2")
    v.add_argument("--model", default="equichar", choices=["equichar", "mixedchar"])
    v.add_argument("--depth", type=int, default=None, help="refinement depth beyond the level")
    v.add_argument("--tol", type=int, default=None, help="interval tolerance exponent")
    v.add_argument("--oracle", action="store_true", help="Monte Carlo cross-checks")
    v.add_argument("--seed", type=int, default=None)
    _add_common(v)
    v.set_defaults(func=cmd_verify)

    op = sub.add_parser("op", help="assemble operator matrices")
    opsub = op.add_subparsers(dest="opcommand", required=True)
    m = opsub.add_parser("matrix")
    m.add_argument("--transform", required=True, choices=["cosine", "radon", "fourier"])
    m.add_argument("--q", type=int, required=True)
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--k", type=int, default=0)
    m.add_argument("--r", type=int, default=1)
    m.add_argument("--p", type=int, default=None, help="radon: source rank")
    m.add_argument("--qdim", type=int, default=None, help="radon: target rank")
    m.add_argument("--containing", action="store_true",
                   help="radon: average over containing summands")
    m.add_argument("--model", default="equichar", choices=["equichar", "mixedchar"])
    m.add_argument("--depth", type=int, default=None)
    m.add_argument("--tol", type=int, default=None)
    _add_common(m)
    m.set_defaults(func=cmd_op_matrix)

    pr = sub.add_parser("product", help="algebra product of two valuations")
    prsub = pr.add_subparsers(dest="prcommand", required=True)
    pe = prsub.add_parser("eval")
    pe.add_argument("--phi", required=True)
    pe.add_argument("--psi", required=True)
    pe.add_argument("--depth", type=int, default=None)
    pe.add_argument("--tol", type=int, default=None)
    _add_common(pe)
    pe.set_defaults(func=cmd_product_eval)

    pf = sub.add_parser("pushforward", help="push a twisted valuation along a map")
    pf.add_argument("--map", required=True)
    pf.add_argument("--val", required=True)
    pf.add_argument("--path", default="explicit", choices=["explicit", "definitional"])
    _add_common(pf)
    pf.set_defaults(func=cmd_pushforward)

    pg = sub.add_parser("pairing", help="duality pairing matrix")
    pg.add_argument("--n", type=int, required=True)
    pg.add_argument("--i", type=int, required=True)
    pg.add_argument("--q", type=int, required=True)
    pg.add_argument("--r", type=int, default=1)
    pg.add_argument("--model", default="equichar", choices=["equichar", "mixedchar"])
    pg.add_argument("--depth", type=int, default=None)
    pg.add_argument("--tol", type=int, default=None)
    _add_common(pg)
    pg.set_defaults(func=cmd_pairing)

    c = sub.add_parser("cache", help="inspect or clear the matrix cache")
    c.add_argument("action", choices=["info", "clear"])
    _add_common(c)
    c.set_defaults(func=cmd_cache)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
