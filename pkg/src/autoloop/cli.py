"""Command-line interface: ``autoloop <command> [flags]``.

Exit codes: 0 success, 1 validation or verification failure, 2 usage error.
Failures also print one JSON line ``{"error": ..., "message": ...}`` on stderr.
Reports go to stdout as JSON (sorted keys) unless ``--out`` is given.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

import numpy as np

from .errors import AutoloopError, BudgetExceeded, TooLarge
from .extension import (
    ORACLE_CAP,
    aut_order_theory,
    classify_p3,
    theory_iso,
)
from .formats import (
    CayleyFile,
    atomic_write,
    build_extension,
    build_generic,
    build_matrix,
    extension_W,
    load_cayley,
    regenerate,
    save_cayley,
)
from .infinite import bfs_closure, verify_infinite_identities
from .loops import (
    associator_subloop,
    element_profiles,
    find_isomorphisms,
    is_automorphic,
    is_homomorphism,
    loop_invariants,
)
from .qrv import DEFAULT_CAP

AUT_ORACLE_MAX_P = 3
AUTOMORPHIC_MAX_ORDER = 125
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def worker_count() -> int:
    raw = os.environ.get("AUTOLOOP_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"AUTOLOOP_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise UsageError("AUTOLOOP_THREADS must be at least 1")
    return n


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _fail(code: str, message: str, witness=None) -> None:
    line = {"error": code, "message": message}
    if witness is not None:
        line["witness"] = repr(witness)
    sys.stderr.write(json.dumps(line, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_construct(args) -> int:
    chosen = [name for name in ("a", "matrix", "spec") if getattr(args, name) is not None]
    if len(chosen) != 1:
        raise UsageError("construct needs exactly one of --a, --matrix, --spec")
    cap = 1 << 30 if args.force else DEFAULT_CAP
    if args.spec is not None:
        with open(args.spec, encoding="utf-8") as fh:
            spec = json.load(fh)
        if args.p is not None:
            spec["p"] = args.p
        if "p" not in spec:
            raise UsageError("the spec file has no p and --p was not given")
        cf = build_generic(spec, cap)
    else:
        if args.p is None:
            raise UsageError("--p is required")
        if args.a is not None:
            cf = build_extension(args.p, args.a, args.d, cap)
        else:
            cf = build_matrix(args.p, args.matrix, cap)
    if args.out:
        save_cayley(cf, args.out)
    else:
        sys.stdout.write(cf.to_json())
    return EXIT_OK


def _check_bridge(cf: CayleyFile) -> dict:
    bridge = cf.extra.get("bridge")
    if not bridge:
        return {"checked": False}
    target = build_extension(cf.p, bridge["target_a"])
    f = np.asarray(bridge["map"], dtype=np.int64)
    ok = len(set(f.tolist())) == cf.order == target.order and is_homomorphism(cf.loop(), target.loop(), f)
    return {"checked": True, "target_a": bridge["target_a"], "isomorphism": bool(ok)}


def cmd_verify(args) -> int:
    cf = load_cayley(args.file)
    Q = cf.loop()
    fresh = regenerate(cf)
    regenerates = fresh.to_json() == cf.to_json()
    report = {
        "file": os.path.basename(args.file),
        "construction": cf.construction,
        "loop_axioms": True,
        "regenerates": regenerates,
        "invariants": loop_invariants(Q).as_dict(),
        "asc_size": len(associator_subloop(Q)),
    }
    ok = regenerates
    if Q.order <= AUTOMORPHIC_MAX_ORDER or args.force:
        res = is_automorphic(Q, kinds=("T", "L", "R"))
        report["automorphic"] = res.ok
        if not res.ok:
            kind, targs, (y, z) = res.witness
            report["automorphic_witness"] = {"kind": kind, "args": [cf.elements[i] for i in targs],
                                             "pair": [cf.elements[y], cf.elements[z]]}
        ok = ok and res.ok
    else:
        report["automorphic"] = None
        report["automorphic_skipped"] = f"order {Q.order} above {AUTOMORPHIC_MAX_ORDER}; use --force"
    if cf.construction == "matrix":
        report["bridge"] = _check_bridge(cf)
        ok = ok and report["bridge"]["isomorphism"]
    _emit(_dump(report), args.out)
    if not ok:
        _fail("VerificationFailed", f"{args.file} failed verification")
        return EXIT_FAIL
    return EXIT_OK


def cmd_classify(args) -> int:
    if args.p is None:
        raise UsageError("--p is required")
    table = classify_p3(args.p, oracle=args.oracle, force=args.force, workers=worker_count())
    _emit(table.to_csv(), args.out)
    return EXIT_OK


def _invariant_table(cf: CayleyFile) -> dict:
    Q = cf.loop()
    inv = loop_invariants(Q)
    return {
        "order": Q.order,
        "exponent": inv.exponent,
        "center_size": len(inv.center),
        "is_commutative": inv.is_commutative,
        "is_group": inv.is_group,
        "element_orders": inv.element_orders,
        "asc_size": len(associator_subloop(Q)),
        "element_profiles": sorted(element_profiles(Q)),
    }


def _theory_W(cf: CayleyFile):
    """(ctx, W) for files whose loop is some Q_{k<K}(W) of the extension family."""
    if cf.construction == "extension":
        return extension_W(cf.p, cf.params["a"], cf.params.get("d"))
    if cf.construction == "matrix" and cf.extra.get("bridge"):
        return extension_W(cf.p, cf.extra["bridge"]["target_a"])
    return None


def cmd_iso(args) -> int:
    if len(args.files) != 2:
        raise UsageError("iso needs exactly two files")
    c0, c1 = (load_cayley(f) for f in args.files)
    report = {"files": [os.path.basename(f) for f in args.files]}
    p = max(c0.p, c1.p)
    if p > ORACLE_CAP and not args.force:
        t0, t1 = _theory_W(c0), _theory_W(c1)
        if t0 is None or t1 is None or t0[0] != t1[0]:
            raise TooLarge(f"p = {p} is above the oracle cap {ORACLE_CAP}; use --force")
        report["method"] = "theory"
        report["result"] = "isomorphic" if theory_iso(t0[0], t0[1], t1[1]) is not None else "non-isomorphic"
        _emit(_dump(report), args.out)
        return EXIT_OK
    report["method"] = "oracle"
    Q0, Q1 = c0.loop(), c1.loop()
    f = find_isomorphisms(Q0, Q1, "first")
    if f is not None:
        report["result"] = "isomorphic"
        report["bijection"] = [[c0.elements[i], c1.elements[int(j)]] for i, j in enumerate(f)]
    else:
        report["result"] = "non-isomorphic"
        i0, i1 = _invariant_table(c0), _invariant_table(c1)
        diff = next((k for k in i0 if i0[k] != i1[k]), None)
        if diff is None:
            a0, a1 = find_isomorphisms(Q0, Q0, "count"), find_isomorphisms(Q1, Q1, "count")
            if a0 != a1:
                diff, i0[diff], i1[diff] = "aut_order", a0, a1
        if diff is None:
            report["distinguishing_invariant"] = None
        else:
            report["distinguishing_invariant"] = {"name": diff, "values": [_plain(i0[diff]), _plain(i1[diff])]}
    _emit(_dump(report), args.out)
    return EXIT_OK


def _plain(v):
    if isinstance(v, dict):
        return {str(k): w for k, w in sorted(v.items())}
    return v


def cmd_aut(args) -> int:
    cf = load_cayley(args.file)
    report = {"file": os.path.basename(args.file), "order": cf.order}
    ok = True
    if cf.p <= AUT_ORACLE_MAX_P or args.force:
        Q = cf.loop()
        report["oracle_aut_order"] = find_isomorphisms(Q, Q, "count")
    else:
        report["oracle_aut_order"] = None
    theory = _theory_W(cf)
    if theory is not None:
        report["theory_aut_order"] = aut_order_theory(*theory)
        if report["oracle_aut_order"] is not None:
            report["agree"] = report["theory_aut_order"] == report["oracle_aut_order"]
            ok = report["agree"]
    _emit(_dump(report), args.out)
    if not ok:
        _fail("OracleDisagreement", "theory and oracle |Aut| differ")
        return EXIT_FAIL
    return EXIT_OK


def cmd_infinite(args) -> int:
    p = 3 if args.p is None else args.p
    ident = verify_infinite_identities(p)
    report = {
        "p": p,
        "identities": {
            "checked": len(ident.checks),
            "all_ok": ident.all_ok,
            "failures": [{"name": c.name, "detail": c.detail} for c in ident.failures()],
        },
    }
    try:
        closure = bfs_closure(p, depth=args.depth, budget=args.budget)
        error = None
    except BudgetExceeded as exc:
        closure, error = exc.partial, exc
    report["closure"] = closure.as_dict()
    _emit(_dump(report), args.out)
    if error is not None:
        raise error
    if not ident.all_ok or closure.violations:
        _fail("VerificationFailed", "identity failure or membership violation")
        return EXIT_FAIL
    return EXIT_OK


COMMANDS = {
    "construct": cmd_construct,
    "verify": cmd_verify,
    "classify": cmd_classify,
    "iso": cmd_iso,
    "aut": cmd_aut,
    "infinite": cmd_infinite,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="autoloop", description="Automorphic loops Q_{R,V}(W): build, verify, classify.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp):
        sp.add_argument("--out", help="write the result here (atomically) instead of stdout")
        sp.add_argument("--force", action="store_true", help="lift size caps on exhaustive checks")

    sp = sub.add_parser("construct", help="build a loop and write its Cayley file")
    sp.add_argument("--p", type=int)
    sp.add_argument("--a", type=int, help="W_a inside F_{p^2}")
    sp.add_argument("--d", type=int, help="non-residue defining F_{p^2} = F_p(sqrt d)")
    sp.add_argument("--matrix", help='2 x 2 matrix "r0c0,r0c1;r1c0,r1c1"')
    sp.add_argument("--spec", help="JSON backend description")
    common(sp)

    sp = sub.add_parser("verify", help="validate a Cayley file and report invariants")
    sp.add_argument("file")
    common(sp)

    sp = sub.add_parser("classify", help="isomorphism classes of the order p^3 loops")
    sp.add_argument("--p", type=int)
    sp.add_argument("--oracle", action="store_true", help="confirm by brute force on tables")
    common(sp)

    sp = sub.add_parser("iso", help="decide isomorphism of two Cayley files")
    sp.add_argument("files", nargs="*")
    common(sp)

    sp = sub.add_parser("aut", help="order of the automorphism group")
    sp.add_argument("file")
    common(sp)

    sp = sub.add_parser("infinite", help="identities and bounded closure for the infinite loops")
    sp.add_argument("--p", type=int)
    sp.add_argument("--depth", type=int, default=8)
    sp.add_argument("--budget", type=int, default=200_000)
    common(sp)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required: " + ", ".join(COMMANDS))
        return COMMANDS[args.command](args)
    except UsageError as exc:
        _fail("UsageError", str(exc))
        return EXIT_USAGE
    except (FileNotFoundError, IsADirectoryError, json.JSONDecodeError) as exc:
        _fail("UsageError", str(exc))
        return EXIT_USAGE
    except AutoloopError as exc:
        _fail(exc.code, str(exc), exc.witness)
        return EXIT_FAIL
    except ValueError as exc:
        _fail("UsageError", str(exc))
        return EXIT_USAGE


def entry() -> None:
    sys.exit(main())
