"""Flat configurations: families of flats, convergence, smoothness.

A configuration is a list of :class:`FlatFamily` objects, each one a
primitive normal ``u`` shared by a (finite or infinite) sequence of
imaginary-quaternion levels. Levels are kept exact (ints or Fractions)
whenever the input is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import NamedTuple, Sequence

from . import lattice
from .errors import OrderingError, SchemaError

DEFAULT_TOL = 1e-9


def number(x):
    """Coerce to int / Fraction / float, accepting strings like ``"1/2"``."""
    if isinstance(x, bool):
        raise SchemaError(f"expected a number, got {x!r}")
    if isinstance(x, (int, Fraction)):
        return x if not (isinstance(x, Fraction) and x.denominator == 1) else int(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise SchemaError(f"non-finite value {x!r}")
        return x
    if isinstance(x, str):
        s = x.strip()
        try:
            if "/" in s or s.lstrip("+-").isdigit():
                return number(Fraction(s))
            return number(float(s))
        except (ValueError, ZeroDivisionError):
            raise SchemaError(f"cannot parse number {x!r}") from None
    raise SchemaError(f"expected a number, got {x!r}")


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction))


def exact(x) -> Fraction:
    """Exact rational value of a number (floats are taken at face value)."""
    return Fraction(x)


# ---------------------------------------------------------------------------
# quaternion levels


@dataclass(frozen=True)
class ImQuaternion:
    """Level ``(l1, l2 + i l3)``: real part ``l1``, complex part ``l2 + i l3``."""

    re: object = 0
    cx_re: object = 0
    cx_im: object = 0

    def __post_init__(self):
        for name in ("re", "cx_re", "cx_im"):
            object.__setattr__(self, name, number(getattr(self, name)))

    @property
    def re_part(self):
        return self.re

    @property
    def cx_part(self) -> complex:
        return complex(self.cx_re, self.cx_im)

    def components(self):
        return (self.re, self.cx_re, self.cx_im)

    def __abs__(self) -> float:
        return math.sqrt(float(self.re) ** 2 + float(self.cx_re) ** 2 + float(self.cx_im) ** 2)

    def negated(self) -> "ImQuaternion":
        return ImQuaternion(-self.re, -self.cx_re, -self.cx_im)


def _qmul(p, q):
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return (
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    )


def level_from_lift(lift) -> ImQuaternion:
    """``-1/2 conj(L) i L`` for a quaternion ``L = (w, x, y, z)``."""
    conj = (lift[0], -lift[1], -lift[2], -lift[3])
    q = _qmul(_qmul(conj, (0, 1, 0, 0)), lift)
    half = Fraction(-1, 2)
    return ImQuaternion(half * q[1], half * q[2], half * q[3])


# ---------------------------------------------------------------------------
# families


@dataclass(frozen=True)
class TailLaw:
    """Analytic continuation of a family's levels beyond its prefix.

    ``power``: real level ``lambda0 + sign * c * k**delta``.
    ``arithmetic``: real level ``lambda0 + d * k`` (growth exponent 1).
    The complex part is fixed at ``cx`` in both cases.
    """

    kind: str
    c: object = 1
    delta: object = 2
    lambda0: object = 0
    d: object = 1
    sign: int = 1
    cx: tuple = (0, 0)

    def __post_init__(self):
        if self.kind not in ("power", "arithmetic"):
            raise SchemaError(f"unknown tail kind {self.kind!r}")
        for name in ("c", "delta", "lambda0", "d"):
            object.__setattr__(self, name, number(getattr(self, name)))
        if self.sign not in (1, -1):
            raise SchemaError("tail sign must be +1 or -1")
        cx = tuple(number(x) for x in self.cx)
        if len(cx) != 2:
            raise SchemaError("tail cx must be [re, im]")
        object.__setattr__(self, "cx", cx)
        if self.kind == "power":
            if not self.c > 0:
                raise SchemaError("tail growth constant c must be positive")
            if not self.delta > 0:
                raise SchemaError("power tail exponent must be positive")
            if self.sign * self.lambda0 < 0:
                # keeps |level_k| >= c k^delta for every tail index
                raise SchemaError("tail lambda0 must not oppose the growth direction")
        else:
            if self.d == 0:
                raise SchemaError("arithmetic tail needs nonzero spacing d")
            object.__setattr__(self, "c", abs(self.d))
            object.__setattr__(self, "delta", 1)

    def level(self, k: int) -> ImQuaternion:
        if self.kind == "power":
            if isinstance(self.delta, int) and is_exact(self.c):
                grow = self.c * k**self.delta
            else:
                grow = float(self.c) * float(k) ** float(self.delta)
            re = self.lambda0 + self.sign * grow
        else:
            re = self.lambda0 + self.d * k
        return ImQuaternion(re, *self.cx)

    def magnitude_lower(self, k: int) -> float:
        """Lower bound for ``|level(k)|`` valid for every k >= 1."""
        if self.kind == "power":
            return float(self.c) * float(k) ** float(self.delta)
        return max(0.0, abs(float(self.d)) * k - abs(float(self.lambda0)))


@dataclass(frozen=True)
class FlatFamily:
    generator: tuple
    prefix: tuple = ()
    tail: TailLaw | None = None

    def __post_init__(self):
        g = lattice.int_vector(self.generator)
        object.__setattr__(self, "generator", g)
        if not lattice.is_primitive(g):
            raise SchemaError(f"generator {g} is not primitive")
        pre = tuple(p if isinstance(p, ImQuaternion) else ImQuaternion(*p) for p in self.prefix)
        object.__setattr__(self, "prefix", pre)
        if len(set(pre)) != len(pre):
            raise SchemaError(f"repeated level in family with generator {g}")
        if not pre and self.tail is None:
            raise SchemaError(f"family with generator {g} has no flats")
        if self.tail is not None:
            self._check_tail_distinct()

    def _check_tail_distinct(self):
        # tail levels are strictly monotone; collisions with the prefix can only
        # happen while the tail magnitude is below the largest prefix level
        top = max((abs(p) for p in self.prefix), default=0.0)
        seen = set(self.prefix)
        k = len(self.prefix) + 1
        while True:
            lvl = self.tail.level(k)
            if lvl in seen:
                raise SchemaError(f"tail level {lvl} repeats a prefix level")
            if abs(lvl) > top + 1:
                break
            k += 1

    @property
    def size(self) -> int | None:
        return None if self.tail is not None else len(self.prefix)

    def level(self, k: int) -> ImQuaternion:
        """Level of the k-th flat (1-based)."""
        if k < 1:
            raise IndexError(k)
        if k <= len(self.prefix):
            return self.prefix[k - 1]
        if self.tail is None:
            raise IndexError(k)
        return self.tail.level(k)

    def count(self, window: int) -> int:
        return window if self.tail is not None else min(window, len(self.prefix))


class Flat(NamedTuple):
    index: int
    family: int
    k: int
    normal: tuple
    level: ImQuaternion


@dataclass(frozen=True)
class ConvergenceCertificate:
    """Outcome of the summability test for ``sum (1 + |lambda_k|)^-1``."""

    passed: bool
    reason: str
    divergent_family: int | None = None
    families: tuple = ()

    def tail_bound(self, window: int) -> float:
        """Bound on the sum over flats beyond the first ``window`` per family."""
        if not self.passed:
            return math.inf
        total = 0.0
        for fam in self.families:
            total += _family_tail_bound(fam, window)
        return total

    def as_dict(self, window: int | None = None) -> dict:
        out = {"passed": self.passed, "reason": self.reason,
               "divergent_family": self.divergent_family}
        if window is not None:
            out["window"] = window
            out["tail_bound"] = self.tail_bound(window)
        return out


def _family_tail_bound(fam: FlatFamily, window: int) -> float:
    # explicit prefix terms beyond the window, then an integral comparison
    total = math.fsum(1.0 / (1.0 + abs(fam.prefix[k - 1]))
                      for k in range(window + 1, len(fam.prefix) + 1))
    if fam.tail is None:
        return total
    start = max(window, len(fam.prefix))
    c, delta = float(fam.tail.c), float(fam.tail.delta)
    if start == 0:
        # k = 1 term bounded directly, integral from 1 onwards
        return total + 1.0 / (1.0 + c) + 1.0 / (c * (delta - 1.0))
    return total + start ** (1.0 - delta) / (c * (delta - 1.0))


@dataclass(frozen=True)
class FlatConfiguration:
    rank: int
    families: tuple
    certificate: ConvergenceCertificate | None = field(default=None, compare=False)

    def __post_init__(self):
        if not isinstance(self.rank, int) or self.rank < 1:
            raise SchemaError("rank must be a positive integer")
        fams = tuple(f if isinstance(f, FlatFamily) else FlatFamily(**f) for f in self.families)
        object.__setattr__(self, "families", fams)
        if not fams:
            raise SchemaError("configuration has no families")
        for f in fams:
            if len(f.generator) != self.rank:
                raise SchemaError(f"generator {f.generator} does not have length {self.rank}")
        if not lattice.spans_full_rank([f.generator for f in fams], self.rank):
            raise SchemaError("generators do not span R^n")
        keys = set()
        for f in fams:
            for p in f.prefix:
                key = _flat_key(f.generator, p)
                if key in keys:
                    raise SchemaError(f"duplicate flat {f.generator}, {p}")
                keys.add(key)

    @property
    def finite(self) -> bool:
        return all(f.tail is None for f in self.families)

    @property
    def generators(self) -> tuple:
        out = []
        for f in self.families:
            if f.generator not in out:
                out.append(f.generator)
        return tuple(out)

    def certified(self) -> "FlatConfiguration":
        return replace(self, certificate=certify_convergence(self))


def _flat_key(u, lvl: ImQuaternion):
    # H(u, l) == H(-u, -l)
    first = next(x for x in u if x != 0)
    if first < 0:
        return (tuple(-x for x in u), tuple(-exact(c) for c in lvl.components()))
    return (tuple(u), tuple(exact(c) for c in lvl.components()))


def certify_convergence(cfg: FlatConfiguration) -> ConvergenceCertificate:
    for j, fam in enumerate(cfg.families):
        if fam.tail is None:
            continue
        if float(fam.tail.delta) <= 1.0:
            return ConvergenceCertificate(
                False,
                f"family {j}: tail grows like k^{fam.tail.delta}; "
                "sum of (1+|lambda_k|)^-1 diverges by comparison with the harmonic series",
                divergent_family=j,
            )
    reason = "finite configuration" if cfg.finite else "integral test on every tail law"
    return ConvergenceCertificate(True, reason, families=cfg.families)


def enumerate_flats(cfg: FlatConfiguration, window: int) -> list[Flat]:
    """First ``window`` flats of every family, interleaved level by level.

    The interleaving makes the list for a smaller window a prefix of the list
    for a larger one.
    """
    if window < 0:
        raise SchemaError("window must be non-negative")
    out = []
    for k in range(1, window + 1):
        for j, fam in enumerate(cfg.families):
            if fam.size is not None and k > fam.size:
                continue
            out.append(Flat(len(out), j, k, fam.generator, fam.level(k)))
        if all(f.size is not None and k >= f.size for f in cfg.families):
            break
    return out


# ---------------------------------------------------------------------------
# base points


@dataclass(frozen=True)
class BasePoint:
    """Point ``(a, b)`` of R^n x C^n; ``b`` is stored as real/imaginary parts."""

    a: tuple
    b_re: tuple
    b_im: tuple

    def __post_init__(self):
        for name in ("a", "b_re", "b_im"):
            object.__setattr__(self, name, tuple(number(x) for x in getattr(self, name)))
        if not (len(self.a) == len(self.b_re) == len(self.b_im)):
            raise SchemaError("point components have unequal lengths")

    @classmethod
    def make(cls, a, b=None) -> "BasePoint":
        a = tuple(a)
        if b is None:
            b = (0,) * len(a)
        re, im = [], []
        for z in b:
            if isinstance(z, complex):
                re.append(z.real)
                im.append(z.imag)
            elif isinstance(z, (tuple, list)):
                re.append(z[0])
                im.append(z[1])
            else:
                re.append(z)
                im.append(0)
        return cls(a, tuple(re), tuple(im))

    @property
    def rank(self) -> int:
        return len(self.a)

    @property
    def b(self) -> tuple:
        return tuple(complex(x, y) for x, y in zip(self.b_re, self.b_im))

    def as_floats(self):
        return ([float(x) for x in self.a], [complex(z) for z in self.b])

    def norm(self) -> float:
        return math.sqrt(sum(float(x) ** 2 for x in self.a + self.b_re + self.b_im))


def _dot(x, u):
    return sum(xi * ui for xi, ui in zip(x, u))


def offsets(point: BasePoint, flat: Flat):
    """``(<a,u> - l1, Re(<b,u> - lC), Im(<b,u> - lC))`` in the inputs' arithmetic."""
    u = flat.normal
    lvl = flat.level
    return (_dot(point.a, u) - lvl.re, _dot(point.b_re, u) - lvl.cx_re,
            _dot(point.b_im, u) - lvl.cx_im)


def flats_through(cfg: FlatConfiguration, point: BasePoint, window: int, tol=0) -> list[int]:
    """Indices of enumerated flats containing ``point`` (up to ``tol``)."""
    if point.rank != cfg.rank:
        raise SchemaError("point rank differs from configuration rank")
    if tol < 0:
        raise SchemaError("tolerance must be non-negative")
    out = []
    for fl in enumerate_flats(cfg, window):
        dr, dx, dy = offsets(point, fl)
        if abs(dr) <= tol and dx * dx + dy * dy <= tol * tol:
            out.append(fl.index)
    return out


# ---------------------------------------------------------------------------
# smoothness


class Violation(NamedTuple):
    condition: str  # "a" or "b"
    flats: tuple
    generators: tuple
    determinant: int | None


@dataclass
class SmoothnessReport:
    passed: bool
    window: int
    tol: float
    flats_checked: int
    consistent_subsets: int
    violations: list
    exhaustive: bool
    note: str = ("certificate covers only the enumerated flats; "
                 "flats beyond the window are not examined")

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "window": self.window,
            "tol": float(self.tol),
            "flats_checked": self.flats_checked,
            "consistent_subsets": self.consistent_subsets,
            "exhaustive": self.exhaustive,
            "violations": [
                {"condition": v.condition, "flats": list(v.flats),
                 "generators": [list(g) for g in v.generators],
                 "determinant": v.determinant}
                for v in self.violations
            ],
            "note": self.note,
        }


def _all_exact(flats) -> bool:
    return all(is_exact(c) for f in flats for c in f.level.components())


def check_smoothness(cfg: FlatConfiguration, window: int, tol=None,
                     exhaustive: bool = False) -> SmoothnessReport:
    """Check conditions (a) and (b) on the enumerated window.

    Subsets are grown depth first in lexicographic index order; a subset is
    only extended while its three component systems stay consistent, so
    parallel flats are never explored past the pair.
    """
    if cfg.certificate is None:
        raise OrderingError("certify_convergence must run before check_smoothness")
    if not cfg.certificate.passed:
        raise OrderingError(f"configuration failed convergence: {cfg.certificate.reason}")
    flats = enumerate_flats(cfg, window)
    if tol is None:
        tol = 0 if _all_exact(flats) else DEFAULT_TOL
    tol = exact(tol)
    keys = {}
    for fl in flats:
        key = _flat_key(fl.normal, fl.level)
        if key in keys:
            raise SchemaError(f"flats {keys[key]} and {fl.index} coincide")
        keys[key] = fl.index

    n = cfg.rank
    levels = [tuple(exact(c) for c in fl.level.components()) for fl in flats]
    violations: list[Violation] = []
    counter = [0]

    def extend(subset, basis, x0):
        # subset: chosen flat positions; basis: positions with independent
        # normals; x0: particular solutions of the three component systems
        for f in range(subset[-1] + 1 if subset else 0, len(flats)):
            u = flats[f].normal
            if lattice.rank([flats[i].normal for i in basis] + [u]) > len(basis):
                rows = [flats[i].normal for i in basis] + [u]
                nb = basis + [f]
                nx = [lattice.solve_particular(rows, [levels[i][c] for i in nb]) for c in range(3)]
            else:
                if any(abs(_dot(x0[c], u) - levels[f][c]) > tol for c in range(3)):
                    continue
                nb, nx = basis, x0
            sub = subset + [f]
            counter[0] += 1
            if len(sub) == n:
                gens = tuple(flats[i].normal for i in sub)
                d = lattice.det(gens)
                if abs(d) != 1:
                    violations.append(Violation("b", tuple(sub), gens, d))
            elif len(sub) == n + 1:
                gens = tuple(flats[i].normal for i in sub)
                violations.append(Violation("a", tuple(sub), gens, None))
            if violations and not exhaustive:
                return True
            if len(sub) <= n and extend(sub, nb, nx):
                return True
        return False

    extend([], [], [[Fraction(0)] * n for _ in range(3)])
    return SmoothnessReport(
        passed=not violations,
        window=window,
        tol=tol,
        flats_checked=len(flats),
        consistent_subsets=counter[0],
        violations=violations,
        exhaustive=exhaustive,
    )


# ---------------------------------------------------------------------------
# built-ins


def builtin_goto(n: int, K: int) -> FlatConfiguration:
    """Goto's configuration in rank n with K explicit levels per infinite family.

    Levels come from the quaternionic lifts ``m i`` and ``-m k`` (m >= 1)
    and ``0`` for the n finite flats; the resulting real levels are
    ``-m^2/2`` and ``+m^2/2`` on the normal ``e_1``.
    """
    if n < 1 or K < 1:
        raise SchemaError("builtin_goto needs n >= 1 and K >= 1")
    e = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    i_side = tuple(level_from_lift((0, m, 0, 0)) for m in range(1, K + 1))
    k_side = tuple(level_from_lift((0, 0, 0, -m)) for m in range(1, K + 1))
    half = Fraction(1, 2)
    fams = [
        FlatFamily(e[0], i_side, TailLaw("power", c=half, delta=2, sign=-1)),
        FlatFamily(e[0], k_side, TailLaw("power", c=half, delta=2, sign=1)),
        FlatFamily(tuple([1] * n), (level_from_lift((0, 0, 0, 0)),)),
    ]
    for r in range(1, n):
        fams.append(FlatFamily(tuple(-x for x in e[r]), (ImQuaternion(0, 0, 0),)))
    return FlatConfiguration(n, tuple(fams))
