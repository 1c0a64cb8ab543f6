"""File formats: configurations, points, periodic families, moment problems, reports.

Configuration (JSON or YAML)::

    rank: 2
    families:
      - generator: [1, 0]
        prefix: [[-1/2, 0, 0], [-2, 0, 0]]     # [l1, Re lC, Im lC]
        tail: {kind: power, c: 1/2, delta: 2, lambda0: 0, sign: -1, cx: [0, 0]}

Exact rationals are written as strings ``"p/q"``; integers and floats as
plain numbers.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import yaml

from .config import FlatConfiguration, FlatFamily, ImQuaternion, TailLaw, number
from .errors import SchemaError
from .moment import MomentSolveProblem, kernel_basis
from .periodic import PeriodicFamily

SCHEMA_VERSION = 1


def encode_number(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    return x


def _field(obj, key, where, default=..., kind=None):
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected a mapping")
    if key not in obj:
        if default is ...:
            raise SchemaError(f"{where}.{key}: missing")
        return default
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise SchemaError(f"{where}.{key}: expected {kind.__name__ if isinstance(kind, type) else kind}")
    return val


def _num(x, where):
    try:
        return number(x)
    except SchemaError as exc:
        raise SchemaError(f"{where}: {exc}") from None


# ---------------------------------------------------------------------------
# configurations


def config_to_dict(cfg: FlatConfiguration) -> dict:
    fams = []
    for f in cfg.families:
        d = {"generator": list(f.generator),
             "prefix": [[encode_number(c) for c in p.components()] for p in f.prefix]}
        if f.tail is not None:
            t = f.tail
            d["tail"] = {"kind": t.kind, "c": encode_number(t.c), "delta": encode_number(t.delta),
                         "lambda0": encode_number(t.lambda0), "d": encode_number(t.d),
                         "sign": t.sign, "cx": [encode_number(c) for c in t.cx]}
        fams.append(d)
    return {"schema": SCHEMA_VERSION, "rank": cfg.rank, "families": fams}


def _tail_from(obj, where):
    kind = _field(obj, "kind", where, kind=str)
    kw = {}
    for key in ("c", "delta", "lambda0", "d"):
        if key in obj:
            kw[key] = _num(obj[key], f"{where}.{key}")
    if "sign" in obj:
        kw["sign"] = obj["sign"]
    if "cx" in obj:
        cx = obj["cx"]
        if not isinstance(cx, list) or len(cx) != 2:
            raise SchemaError(f"{where}.cx: expected [re, im]")
        kw["cx"] = tuple(_num(c, f"{where}.cx") for c in cx)
    unknown = set(obj) - {"kind", "c", "delta", "lambda0", "d", "sign", "cx"}
    if unknown:
        raise SchemaError(f"{where}: unknown keys {sorted(unknown)}")
    try:
        return TailLaw(kind, **kw)
    except SchemaError as exc:
        raise SchemaError(f"{where}: {exc}") from None


def config_from_dict(data) -> FlatConfiguration:
    rank = _field(data, "rank", "config", kind=int)
    raw = _field(data, "families", "config", kind=list)
    fams = []
    for j, fd in enumerate(raw):
        where = f"families[{j}]"
        gen = _field(fd, "generator", where, kind=list)
        if not all(isinstance(g, int) and not isinstance(g, bool) for g in gen):
            raise SchemaError(f"{where}.generator: expected integers")
        prefix = []
        for k, p in enumerate(_field(fd, "prefix", where, default=[], kind=list)):
            if not isinstance(p, list) or len(p) != 3:
                raise SchemaError(f"{where}.prefix[{k}]: expected [l1, Re lC, Im lC]")
            prefix.append(ImQuaternion(*(_num(c, f"{where}.prefix[{k}]") for c in p)))
        tail = fd.get("tail") if isinstance(fd, dict) else None
        tail = _tail_from(tail, f"{where}.tail") if tail is not None else None
        try:
            fams.append(FlatFamily(tuple(gen), tuple(prefix), tail))
        except SchemaError as exc:
            raise SchemaError(f"{where}: {exc}") from None
    return FlatConfiguration(rank, tuple(fams))


def _load_tree(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SchemaError(f"{path}: {exc.strerror}") from None
    try:
        if path.suffix.lower() in (".yaml", ".yml"):
            return yaml.safe_load(text)
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    except yaml.YAMLError as exc:
        raise SchemaError(f"{path}: {exc}") from None


def load_config(path) -> FlatConfiguration:
    return config_from_dict(_load_tree(path))


def dump_config(cfg: FlatConfiguration, path=None) -> str:
    text = json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


# ---------------------------------------------------------------------------
# points


def load_points(path, rank: int) -> list:
    """Points CSV with columns ``a1..an, re_b1..re_bn, im_b1..im_bn``.

    A header row is optional; without one a row holds either ``n`` values
    (``b = 0``) or all ``3n``. Missing ``b`` columns default to zero.
    """
    from .config import BasePoint

    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError(f"{path}: {exc.strerror}") from None
    rows = [(i, r) for i, r in enumerate(csv.reader(io.StringIO(text)), start=1)
            if r and any(c.strip() for c in r)]
    names = [f"a{i + 1}" for i in range(rank)] + [f"re_b{i + 1}" for i in range(rank)] \
        + [f"im_b{i + 1}" for i in range(rank)]
    idx = None
    if rows and rows[0][1][0].strip().lower().startswith("a"):
        header = [h.strip().lower() for h in rows.pop(0)[1]]
        idx = [header.index(c) if c in header else None for c in names]
        if any(i is None for i in idx[:rank]):
            raise SchemaError(f"{path}: header must name a1..a{rank}")
    pts = []
    for line, row in rows:
        where = f"{path}: line {line}"
        if idx is None:
            if len(row) not in (rank, 3 * rank):
                raise SchemaError(f"{where}: expected {rank} or {3 * rank} columns")
            cols = list(range(len(row))) + [None] * (3 * rank - len(row))
        else:
            cols = idx
        vals = [0 if i is None or i >= len(row) else _num(row[i], where) for i in cols]
        pts.append(BasePoint(tuple(vals[:rank]), tuple(vals[rank:2 * rank]), tuple(vals[2 * rank:])))
    return pts


# ---------------------------------------------------------------------------
# periodic families and moment problems


def load_periodic(path) -> tuple[int, list[PeriodicFamily]]:
    data = _load_tree(path)
    rank = _field(data, "rank", "periodic", kind=int)
    fams = []
    for j, fd in enumerate(_field(data, "periodic_families", "periodic", kind=list)):
        where = f"periodic_families[{j}]"
        cx = fd.get("cx_level", [0, 0]) if isinstance(fd, dict) else [0, 0]
        if not isinstance(cx, list) or len(cx) != 2:
            raise SchemaError(f"{where}.cx_level: expected [re, im]")
        try:
            fam = PeriodicFamily(tuple(_field(fd, "generator", where, kind=list)),
                                 _num(fd.get("base_level", 0), f"{where}.base_level"),
                                 _num(fd.get("spacing", 1), f"{where}.spacing"),
                                 complex(float(_num(cx[0], where)), float(_num(cx[1], where))))
        except SchemaError as exc:
            raise SchemaError(f"{where}: {exc}") from None
        if len(fam.generator) != rank:
            raise SchemaError(f"{where}.generator: expected length {rank}")
        fams.append(fam)
    return rank, fams


def _complex_list(vals, where):
    out = []
    for k, v in enumerate(vals):
        if isinstance(v, list) and len(v) == 2:
            out.append(complex(float(_num(v[0], where)), float(_num(v[1], where))))
        else:
            out.append(complex(float(_num(v, f"{where}[{k}]"))))
    return tuple(out)


def load_moment_problem(path) -> MomentSolveProblem:
    """Problem file with ``z``, ``w``, ``lambda1``, ``target`` and either
    ``kernel_basis`` or ``generators`` (kernel then computed)."""
    data = _load_tree(path)
    z = _complex_list(_field(data, "z", "problem", kind=list), "problem.z")
    w = _complex_list(_field(data, "w", "problem", kind=list), "problem.w")
    lam = tuple(_num(x, "problem.lambda1") for x in _field(data, "lambda1", "problem", kind=list))
    gens = data.get("generators")
    if "kernel_basis" in data:
        K = tuple(tuple(int(x) for x in v) for v in data["kernel_basis"])
    elif gens is not None:
        K = tuple(kernel_basis(gens))
    else:
        raise SchemaError("problem: needs kernel_basis or generators")
    tgt = tuple(_num(x, "problem.target") for x in _field(data, "target", "problem", kind=list))
    return MomentSolveProblem(z, w, lam, K, tgt,
                              generators=tuple(map(tuple, gens)) if gens is not None else None)


# ---------------------------------------------------------------------------
# reports


@dataclass
class RunManifest:
    command: str
    inputs: dict = field(default_factory=dict)
    parameters: dict = field(default_factory=dict)
    seed: int = 0

    COMMANDS = ("validate", "topology", "eval", "identities", "solve-moment", "periodic",
                "export-builtin")

    def __post_init__(self):
        if self.command not in self.COMMANDS:
            raise SchemaError(f"unknown command {self.command!r}")
        for k, v in self.parameters.items():
            if ("tol" in k or k == "h") and v is not None and not v > 0:
                raise SchemaError(f"{k} must be positive")
            if k in ("window", "trunc") and v is not None and v < 0:
                raise SchemaError(f"{k} must be non-negative")

    def as_dict(self) -> dict:
        return {"command": self.command, "inputs": self.inputs,
                "parameters": self.parameters, "seed": self.seed}


def _plain(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if hasattr(x, "tolist"):
        return _plain(x.tolist())
    return x


def render_report(manifest: RunManifest, body: dict) -> str:
    """Deterministic JSON: sorted keys, fixed separators."""
    out = {"manifest": manifest.as_dict(), **body}
    return json.dumps(_plain(out), indent=2, sort_keys=True) + "\n"
