"""On-disk formats: Cayley tables as JSON, classification tables as CSV.

Both are written deterministically (fixed key order, fixed element order,
trailing newline) and atomically (temp file in the target directory, then
rename). A Cayley file stores its construction parameters, so the table can
be regenerated and compared bit for bit.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .algebra import Matrix, make_quadratic_context, parse_matrix
from .errors import AutoloopError, FormatVersionUnsupported, ValidationFailed
from .extension import enumerate_admissible_W, matrix_plane
from .loops import FiniteLoop, loop_from_table
from .qrv import DEFAULT_CAP, EndoBackend, make_backend, realize_cayley

CAYLEY_FORMAT = "autoloop-cayley-v1"
CLASSIFICATION_FORMAT = "autoloop-classification-v1"
CONSTRUCTIONS = ("extension", "matrix", "generic")


@dataclass
class CayleyFile:
    p: int
    construction: str
    params: dict
    elements: list  # string labels
    table: np.ndarray
    identity: int
    extra: dict = field(default_factory=dict)

    @property
    def order(self) -> int:
        return len(self.elements)

    def loop(self) -> FiniteLoop:
        return FiniteLoop(self.elements, self.table, self.identity)

    def to_json(self) -> str:
        head = {
            "format": CAYLEY_FORMAT,
            "p": self.p,
            "construction": self.construction,
            "params": self.params,
            "order": self.order,
            "identity": self.identity,
            "elements": self.elements,
        }
        head.update(self.extra)
        lines = ["{"]
        for k, v in head.items():
            lines.append(f"  {json.dumps(k)}: {json.dumps(v, sort_keys=True)},")
        rows = [json.dumps([int(x) for x in row], separators=(",", ":")) for row in self.table]
        lines.append('  "table": [')
        lines.extend(f"    {r}," for r in rows[:-1])
        lines.append(f"    {rows[-1]}")
        lines.append("  ]")
        lines.append("}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def extension_W(p: int, a: int, d: Optional[int] = None):
    """W_a inside F_{p^2}; for p = 2 the two admissible lines are k x and k(1 + x)."""
    ctx = make_quadratic_context(p, d)
    Ws = enumerate_admissible_W(ctx)
    return ctx, Ws[a % len(Ws)]


def _from_backend(B: EndoBackend, construction: str, params: dict, cap: int, extra=None) -> CayleyFile:
    Q = realize_cayley(B, cap)
    return CayleyFile(B.p, construction, params, [str(x) for x in Q.elements], Q.table, Q.identity,
                      extra or {})


def build_extension(p: int, a: int, d: Optional[int] = None, cap: int = DEFAULT_CAP) -> CayleyFile:
    ctx, W = extension_W(p, a, d)
    params = {"a": a % len(enumerate_admissible_W(ctx)), "d": ctx.d, "modulus": list(ctx.modulus),
              "basis": [list(b.coeffs) for b in W.basis]}
    return _from_backend(W.backend(), "extension", params, cap)


def build_matrix(p: int, A, cap: int = DEFAULT_CAP) -> CayleyFile:
    """Q_k(A) for a 2 x 2 matrix spanning an anisotropic plane, with its bridge onto Q_{k<K}(k theta)."""
    A = parse_matrix(A, p) if isinstance(A, str) else (A if isinstance(A, Matrix) else Matrix(A, p))
    plane = matrix_plane(p, A)
    params = {"matrix": [list(r) for r in A.rows]}
    bridge = {
        "theta": list(plane.theta.coeffs),
        "target_a": plane.target.param,
        "map": [int(x) for x in plane.bridge],
    }
    return _from_backend(plane.backend, "matrix", params, cap, {"bridge": bridge})


def build_generic(spec: dict, cap: int = DEFAULT_CAP) -> CayleyFile:
    B = make_backend(spec)
    params = {"variant": B.variant, **B.params()}
    return _from_backend(B, "generic", params, cap)


def regenerate(cf: CayleyFile, cap: Optional[int] = None) -> CayleyFile:
    """Rebuild a file from its stored parameters."""
    cap = max(cap or DEFAULT_CAP, cf.order)
    prm = cf.params
    if cf.construction == "extension":
        return build_extension(cf.p, prm["a"], prm.get("d"), cap)
    if cf.construction == "matrix":
        return build_matrix(cf.p, prm["matrix"], cap)
    if cf.construction == "generic":
        spec = dict(prm)
        spec["p"] = cf.p
        return build_generic(spec, cap)
    raise ValidationFailed(f"unknown construction {cf.construction!r}")


# ---------------------------------------------------------------------------
# I/O
# ---------------------------------------------------------------------------

def atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".autoloop-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_cayley(cf: CayleyFile, path: str) -> None:
    atomic_write(path, cf.to_json())


def parse_cayley(text: str) -> CayleyFile:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationFailed(f"not JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ValidationFailed("top level is not an object")
    fmt = raw.get("format")
    if fmt != CAYLEY_FORMAT:
        raise FormatVersionUnsupported(f"unsupported format {fmt!r}")
    missing = [k for k in ("p", "construction", "params", "order", "identity", "elements", "table") if k not in raw]
    if missing:
        raise ValidationFailed(f"missing fields: {', '.join(missing)}")
    if raw["construction"] not in CONSTRUCTIONS:
        raise ValidationFailed(f"unknown construction {raw['construction']!r}")
    try:
        Q = loop_from_table(raw["elements"], raw["table"])
    except AutoloopError as exc:
        raise ValidationFailed(f"{exc.code}: {exc}", cause=exc) from None
    except (ValueError, TypeError) as exc:
        raise ValidationFailed(str(exc), cause=exc) from None
    if Q.order != raw["order"]:
        raise ValidationFailed(f"order field {raw['order']} but table has {Q.order} rows")
    if Q.identity != raw["identity"]:
        raise ValidationFailed(f"identity field {raw['identity']} but the identity is {Q.identity}")
    extra = {k: v for k, v in raw.items()
             if k not in ("format", "p", "construction", "params", "order", "identity", "elements", "table")}
    return CayleyFile(int(raw["p"]), raw["construction"], raw["params"], list(raw["elements"]),
                      Q.table, Q.identity, extra)


def load_cayley(path: str) -> CayleyFile:
    with open(path, encoding="utf-8") as fh:
        return parse_cayley(fh.read())


def save_classification(table, path: str) -> None:
    atomic_write(path, table.to_csv())


def load_classification(path: str) -> list[dict]:
    """Rows of a classification CSV as dicts of strings."""
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline().strip()
        if first != f"# format={CLASSIFICATION_FORMAT}":
            raise FormatVersionUnsupported(f"unsupported classification header {first!r}")
        return list(csv.DictReader(fh))
