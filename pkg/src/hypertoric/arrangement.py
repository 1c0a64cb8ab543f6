"""Real hyperplane arrangement of the flats with vanishing complex levels.

Vertices, chambers and the intersection poset are computed in exact
rational arithmetic; boundedness of a chamber is decided by its recession
cone, never by the analysis box.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

from . import lattice
from .config import FlatConfiguration, enumerate_flats, exact
from .errors import DomainError, PreconditionError, SchemaError
from .simplex import Infeasible, maximize


class Hyperplane(NamedTuple):
    normal: tuple
    level: Fraction
    flat_index: int

    def value(self, x):
        return sum(a * b for a, b in zip(self.normal, x)) - self.level


def build_arrangement(cfg: FlatConfiguration, window: int) -> list[Hyperplane]:
    planes = []
    for fl in enumerate_flats(cfg, window):
        if fl.level.cx_re != 0 or fl.level.cx_im != 0:
            raise DomainError(
                f"flat {fl.index}: complex levels nonzero; rotate or project first")
        planes.append(Hyperplane(fl.normal, exact(fl.level.re), fl.index))
    return planes


def _rank_n(planes):
    if not planes:
        raise SchemaError("empty arrangement has no ambient rank")
    return len(planes[0].normal)


def enumerate_vertices(planes: Sequence[Hyperplane]) -> list[tuple]:
    """Points where n planes with independent normals meet (exact, sorted)."""
    if not planes:
        return []
    n = _rank_n(planes)
    seen = set()
    for combo in itertools.combinations(planes, n):
        rows = [h.normal for h in combo]
        if lattice.det(rows) == 0:
            continue
        x = lattice.solve_particular(rows, [h.level for h in combo])
        seen.add(tuple(x))
    return sorted(seen)


# ---------------------------------------------------------------------------
# chambers


def normalize_box(box, n: int):
    if isinstance(box, (int, float, Fraction)):
        box = [(-box, box)] * n
    box = [(exact(lo), exact(hi)) for lo, hi in box]
    if len(box) != n or any(lo >= hi for lo, hi in box):
        raise SchemaError("box must give lo < hi for every coordinate")
    return box


@dataclass
class Chamber:
    signs: tuple
    vertices: list
    bounded: bool
    interior: tuple
    truncated: bool = False
    facets: list = field(default_factory=list)

    @property
    def sign_string(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.signs)

    def as_dict(self, planes=None) -> dict:
        out = {
            "signs": self.sign_string,
            "vertices": [[_jsonable(c) for c in v] for v in self.vertices],
            "bounded": self.bounded,
            "window_truncated": self.truncated,
        }
        if self.facets:
            out["facet_normals"] = [
                {"flat": planes[i].flat_index if planes else i,
                 "inward_normal": [self.signs[i] * c for c in planes[i].normal]}
                for i in self.facets
            ] if planes else self.facets
        return out


def _jsonable(x):
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else str(x)
    return x


def _interior_lp(planes, signs, box):
    n = len(box)
    A, b = [], []
    for h, s in zip(planes, signs):
        A.append([-s * u for u in h.normal] + [1])
        b.append(-s * h.level)
    for j, (lo, hi) in enumerate(box):
        e = [0] * n
        e[j] = 1
        A.append([-x for x in e] + [1])
        b.append(-lo)
        A.append(e + [1])
        b.append(hi)
    A.append([0] * n + [1])
    b.append(1)
    try:
        val, sol = maximize([0] * n + [1], A, b)
    except Infeasible:
        return None
    return tuple(sol[:n]) if val > 0 else None


def _is_bounded(planes, signs, n) -> bool:
    if not planes:
        return False
    A = [[-s * u for u in h.normal] for h, s in zip(planes, signs)]
    b = [0] * len(A)
    for j in range(n):
        e = [0] * n
        e[j] = 1
        A.append(e)
        b.append(1)
        A.append([-x for x in e])
        b.append(1)
    for j in range(n):
        for sgn in (1, -1):
            c = [0] * n
            c[j] = sgn
            val, _ = maximize(c, A, b)
            if val > 0:
                return False
    return True


def _on_closure(planes, signs, v) -> bool:
    return all(s * h.value(v) >= 0 for h, s in zip(planes, signs))


def _affine_dim(points) -> int:
    if not points:
        return -1
    p0 = points[0]
    diffs = [[a - b for a, b in zip(p, p0)] for p in points[1:]]
    return lattice.rank(diffs) if diffs else 0


def enumerate_chambers(planes: Sequence[Hyperplane], box) -> list[Chamber]:
    """All sign vectors realised by open regions meeting the open box."""
    planes = list(planes)
    if not planes:
        raise SchemaError("empty arrangement")
    n = _rank_n(planes)
    box = normalize_box(box, n)
    vertices = enumerate_vertices(planes)
    for v in vertices:
        if any(not (lo <= x <= hi) for x, (lo, hi) in zip(v, box)):
            raise PreconditionError(f"box too small: vertex {tuple(map(str, v))} lies outside")

    regions = [((), None)]
    for p in range(len(planes)):
        sub = planes[: p + 1]
        nxt = []
        for signs, _ in regions:
            plus = _interior_lp(sub, signs + (1,), box)
            if plus is None:
                # the region lies entirely on the negative side
                nxt.append((signs + (-1,), _interior_lp(sub, signs + (-1,), box)))
                continue
            nxt.append((signs + (1,), plus))
            minus = _interior_lp(sub, signs + (-1,), box)
            if minus is not None:
                nxt.append((signs + (-1,), minus))
        regions = nxt

    chambers = []
    for signs, interior in sorted(regions, key=lambda r: tuple(-s for s in r[0])):
        verts = [v for v in vertices if _on_closure(planes, signs, v)]
        bounded = _is_bounded(planes, signs, n)
        on_edge = any(x in (lo, hi) for v in verts for x, (lo, hi) in zip(v, box))
        facets = []
        for i, h in enumerate(planes):
            on = [v for v in verts if h.value(v) == 0]
            if _affine_dim(on) == n - 1:
                facets.append(i)
        chambers.append(Chamber(signs, verts, bounded, interior,
                                truncated=(not bounded) or on_edge, facets=facets))
    return chambers


# ---------------------------------------------------------------------------
# homotopy report


class PosetElement(NamedTuple):
    planes: tuple  # positions of every plane containing the subspace
    dim: int
    point: tuple


@dataclass
class HomotopyReport:
    polytopes: list
    adjacency: list  # (i, j, shared face dimension, shared vertex count)
    poset: list
    covers: list
    planes: list

    def as_dict(self) -> dict:
        return {
            "polytopes": [dict(c.as_dict(self.planes), id=i) for i, c in enumerate(self.polytopes)],
            "adjacency": [{"pair": [i, j], "shared_face_dim": d, "shared_vertices": s}
                          for i, j, d, s in self.adjacency],
            "poset": [{"flats": [self.planes[p].flat_index for p in e.planes],
                       "dim": e.dim} for e in self.poset],
            "covers": [list(c) for c in self.covers],
        }


def intersection_poset(planes: Sequence[Hyperplane]):
    """Nonempty intersections of the planes, ordered by inclusion.

    Each element is named by the full set of planes containing it. Returns
    ``(elements, covers)`` where ``covers`` lists ``(smaller, larger)``
    element positions differing by one in dimension.
    """
    planes = list(planes)
    if not planes:
        return [], []
    n = _rank_n(planes)

    def closure(idx):
        rows = [planes[i].normal for i in idx]
        x = lattice.solve_particular(rows, [planes[i].level for i in idx]) if rows else [Fraction(0)] * n
        if x is None:
            return None
        r = lattice.rank(rows) if rows else 0
        # a plane contains the subspace iff its normal is in the span and x lies on it
        full = tuple(i for i, h in enumerate(planes)
                     if h.value(x) == 0 and lattice.rank(rows + [h.normal]) == r)
        return full, n - r, tuple(x)

    top = PosetElement((), n, tuple([Fraction(0)] * n))
    elements = {(): top}
    frontier = [()]
    while frontier:
        new = []
        for key in frontier:
            for i in range(len(planes)):
                if i in key:
                    continue
                res = closure(key + (i,))
                if res is None or res[0] in elements:
                    continue
                elements[res[0]] = PosetElement(*res)
                new.append(res[0])
        frontier = new
    elems = sorted(elements.values(), key=lambda e: (-e.dim, e.planes))
    pos = {e.planes: k for k, e in enumerate(elems)}
    covers = []
    for e in elems:
        for f in elems:
            if f.dim == e.dim - 1 and set(e.planes) < set(f.planes):
                covers.append((pos[f.planes], pos[e.planes]))
    return elems, covers


def homotopy_report(planes: Sequence[Hyperplane], box, poset: bool = True) -> HomotopyReport:
    planes = list(planes)
    chambers = enumerate_chambers(planes, box)
    polys = [c for c in chambers if c.bounded and not c.truncated]

    def key(c):
        cen = [sum(float(v[j]) for v in c.vertices) / len(c.vertices) for j in range(len(c.vertices[0]))]
        return (math.hypot(*cen), c.signs)

    polys.sort(key=key)
    adjacency = []
    for i, j in itertools.combinations(range(len(polys)), 2):
        common = [v for v in polys[i].vertices if v in polys[j].vertices]
        if common:
            adjacency.append((i, j, _affine_dim(common), len(common)))
    elems, covers = intersection_poset(planes) if poset else ([], [])
    return HomotopyReport(polys, adjacency, elems, covers, planes)


def plot_data(planes: Sequence[Hyperplane], box, report: HomotopyReport | None = None) -> dict:
    """Line segments and shaded bounded chambers for a 2-d arrangement."""
    planes = list(planes)
    if _rank_n(planes) != 2:
        raise DomainError("plot data is only produced for 2-dimensional arrangements")
    box = normalize_box(box, 2)
    (x0, x1), (y0, y1) = box
    segments = []
    for h in planes:
        (a, b), c = h.normal, h.level
        pts = []
        if b != 0:
            for x in (x0, x1):
                pts.append((x, (c - a * x) / b))
        if a != 0:
            for y in (y0, y1):
                pts.append(((c - b * y) / a, y))
        pts = sorted({p for p in pts if x0 <= p[0] <= x1 and y0 <= p[1] <= y1})
        if len(pts) >= 2:
            segments.append({"flat": h.flat_index,
                             "points": [[float(v) for v in pts[0]], [float(v) for v in pts[-1]]]})
    if report is None:
        report = homotopy_report(planes, box, poset=False)
    polygons = []
    for c in report.polytopes:
        cx = sum(float(v[0]) for v in c.vertices) / len(c.vertices)
        cy = sum(float(v[1]) for v in c.vertices) / len(c.vertices)
        ring = sorted(c.vertices, key=lambda v: math.atan2(float(v[1]) - cy, float(v[0]) - cx))
        polygons.append([[float(v[0]), float(v[1])] for v in ring])
    return {"box": [[float(lo), float(hi)] for lo, hi in box],
            "segments": segments, "bounded_chambers": polygons}


# ---------------------------------------------------------------------------
# retraction onto the zero set of the complex moment map


def retraction_pair(t: float, x: float, y: float) -> tuple[float, float]:
    """Conjugate of ``(p, q) -> (p, t q)`` by ``(x, y) -> ((x^2-y^2)/2, xy)``."""
    if x < 0 or y < 0:
        raise DomainError("retraction_pair needs x, y >= 0")
    if not 0 <= t <= 1:
        raise DomainError("deformation parameter must lie in [0, 1]")
    if t == 1:
        return (x, y)
    p = 0.5 * (x - y) * (x + y)
    q = t * x * y
    R = math.hypot(p, q)
    # take the root of the non-cancelling sum, recover the other from j1*j2 = q
    if p >= 0:
        j1 = math.sqrt(p + R)
        j2 = q / j1 if j1 > 0 else 0.0
    else:
        j2 = math.sqrt(R - p)
        j1 = q / j2 if j2 > 0 else 0.0
    return (j1, j2)


def tau(x: float, y: float) -> tuple[float, float]:
    return (0.5 * (x - y) * (x + y), x * y)


def tau_inverse(p: float, q: float) -> tuple[float, float]:
    if q < 0:
        raise DomainError("tau inverse needs q >= 0")
    R = math.hypot(p, q)
    if p >= 0:
        x = math.sqrt(p + R)
        y = q / x if x > 0 else 0.0
    else:
        y = math.sqrt(R - p)
        x = q / y if y > 0 else 0.0
    return (x, y)


def deform_pair(t: float, z: complex, w: complex) -> tuple[complex, complex]:
    """Apply :func:`retraction_pair` to the moduli of ``(z, w)``, keeping phases.

    At ``z = 0`` (or ``w = 0``) the phase is taken to be 1.
    """
    x, y = abs(z), abs(w)
    j1, j2 = retraction_pair(t, x, y)
    pz = z / x if x > 0 else 1.0
    pw = w / y if y > 0 else 1.0
    return (complex(j1 * pz), complex(j2 * pw))


__all__ = [
    "Chamber", "HomotopyReport", "Hyperplane", "PosetElement", "build_arrangement",
    "deform_pair", "enumerate_chambers", "enumerate_vertices", "homotopy_report",
    "intersection_poset", "plot_data", "retraction_pair", "tau", "tau_inverse",
]
