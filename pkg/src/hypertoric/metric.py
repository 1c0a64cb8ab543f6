"""Potential, prepotential, connection and metric at a base point.

Conventions (coordinates ``(a, b)`` on R^n x C^n, ``b = x + i y``):

* ``s_k = 2(<a,u_k> - l1_k)``, ``v_k = <b,u_k> - lC_k``,
  ``r_k^2 = s_k^2 + 4|v_k|^2``.
* Prepotential ``F = 1/4 sum_k (s_k log(s_k + r_k) - r_k)`` so that
  ``F_{a_i a_j} = sum_k (u_k)_i (u_k)_j / r_k``.
* Complex derivatives are ``D_b = d/dx - i d/dy`` (twice the Wirtinger
  derivative). With this choice ``F_{a_i a_j} + F_{b_i conj(b_j)} = 0``.
* Taub-NUT term ``sum c_ij (a_i a_j - (b_i conj(b_j) + b_j conj(b_i)) / 4)``,
  which adds ``2c`` to the potential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .config import BasePoint, Flat, FlatConfiguration, enumerate_flats
from .errors import CoordinateSingularity, DomainError, NoCertifiedTail, SchemaError

KAPPA = 0.25


class FlatDatum(NamedTuple):
    index: int
    s: float
    v: complex
    r: float
    distance: float


def _terms(point: BasePoint, flat: Flat):
    a, b = point.as_floats()
    u = flat.normal
    s = 2.0 * (math.fsum(x * c for x, c in zip(a, u)) - float(flat.level.re))
    v = (complex(math.fsum(z.real * c for z, c in zip(b, u)),
                 math.fsum(z.imag * c for z, c in zip(b, u)))
         - flat.level.cx_part)
    r = math.hypot(s, 2.0 * v.real, 2.0 * v.imag)
    return s, v, r


def flat_data(point: BasePoint, cfg: FlatConfiguration, window: int) -> list[FlatDatum]:
    out = []
    for fl in enumerate_flats(cfg, window):
        s, v, r = _terms(point, fl)
        norm_u = math.sqrt(sum(c * c for c in fl.normal))
        out.append(FlatDatum(fl.index, s, v, r, r / (2.0 * norm_u)))
    return out


# ---------------------------------------------------------------------------
# potential


@dataclass
class PotentialResult:
    phi: np.ndarray
    truncation: int
    tail_bound: float
    exact: bool = False

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.phi)[0])


def _compensated_outer(n, pieces):
    # pieces: (weight, u); exactly rounded sums per entry via math.fsum
    acc = [[[] for _ in range(n)] for _ in range(n)]
    for wgt, u in pieces:
        for i in range(n):
            for j in range(i, n):
                if u[i] and u[j]:
                    acc[i][j].append(wgt * u[i] * u[j])
    phi = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            phi[i, j] = phi[j, i] = math.fsum(acc[i][j])
    return phi


def _tail_threshold_ok(cfg, window, rho):
    """Every flat beyond the window lies at least twice as far out as the point."""
    for fam in cfg.families:
        norm_u = math.sqrt(sum(c * c for c in fam.generator))
        reach = norm_u * rho
        for k in range(window + 1, len(fam.prefix) + 1):
            if abs(fam.prefix[k - 1]) <= 2 * reach:
                return False
        if fam.tail is not None:
            if fam.tail.magnitude_lower(max(window, len(fam.prefix)) + 1) <= 2 * reach:
                return False
    return True


def potential_tail_bound(cfg: FlatConfiguration, point: BasePoint, window: int) -> float:
    """Bound on the operator norm of the omitted part of the potential.

    Uses ``r_k >= 2(|l_k| - |u_k| |(a, b)|)`` and ``|l_k| >= c k^delta`` on
    tails, summed by comparison with an integral.
    """
    rho = point.norm()
    total = []
    for fam in cfg.families:
        norm_u2 = float(sum(c * c for c in fam.generator))
        reach = math.sqrt(norm_u2) * rho
        for k in range(window + 1, len(fam.prefix) + 1):
            gap = abs(fam.prefix[k - 1]) - reach
            if gap <= 0:
                raise NoCertifiedTail(f"flat {k} of family {fam.generator} is not beyond the point")
            total.append(norm_u2 / (2.0 * gap))
        if fam.tail is None:
            continue
        if float(fam.tail.delta) <= 1.0:
            raise NoCertifiedTail("tail law grows too slowly to bound the potential")
        c, delta = float(fam.tail.c), float(fam.tail.delta)
        start = max(window, len(fam.prefix))
        if start == 0:
            raise NoCertifiedTail("window too small for a certified tail")
        ratio = reach / (c * (start + 1) ** delta)
        if not ratio < 1:
            raise NoCertifiedTail("window too small for a certified tail")
        # for k > start: c k^d - A >= c k^d (1 - ratio); compare with the integral
        integral = start ** (1.0 - delta) / (c * (delta - 1.0)) / (1.0 - ratio)
        total.append(norm_u2 * integral / 2.0)
    return math.fsum(total)


def potential(point: BasePoint, cfg: FlatConfiguration, truncation: int,
              max_truncation: int | None = None, weights=None) -> PotentialResult:
    """``sum_k u_k u_k^T / r_k`` over the first ``truncation`` flats per family.

    The truncation is raised (up to ``max_truncation``) until every omitted
    flat is far enough from the point for the tail bound to apply.
    """
    if point.rank != cfg.rank:
        raise SchemaError("point rank differs from configuration rank")
    for fam in cfg.families:
        if fam.tail is not None and float(fam.tail.delta) <= 1.0:
            raise NoCertifiedTail("tail law grows too slowly to bound the potential")
    limit = max_truncation if max_truncation is not None else max(truncation, 1) * 64
    rho = point.norm()
    N = truncation
    while not _tail_threshold_ok(cfg, N, rho):
        N += 1
        if N > limit:
            raise NoCertifiedTail(f"no certified tail with truncation <= {limit}")
    pieces = []
    for fl in enumerate_flats(cfg, N):
        s, v, r = _terms(point, fl)
        if r == 0:
            raise CoordinateSingularity(f"coordinate singularity: point on flat {fl.index}", flat=fl.index)
        wgt = 1.0 if weights is None else float(weights.get(fl.index, 1.0))
        pieces.append((wgt / r, fl.normal))
    phi = _compensated_outer(cfg.rank, pieces)
    finite = cfg.finite and all(N >= len(f.prefix) for f in cfg.families)
    tail = 0.0 if finite else potential_tail_bound(cfg, point, N)
    return PotentialResult(phi, N, tail, exact=finite)


# ---------------------------------------------------------------------------
# prepotential and connection


@dataclass(frozen=True)
class TaubNutDeformation:
    c: tuple
    weights: dict | None = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise SchemaError("Taub-NUT matrix must be square")
        if not np.array_equal(c, c.T):
            raise SchemaError("Taub-NUT matrix must be symmetric")
        object.__setattr__(self, "c", tuple(map(tuple, c.tolist())))
        if self.weights is not None and any(w <= 0 for w in self.weights.values()):
            raise SchemaError("prepotential weights must be positive")

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.c)

    def prepotential(self, point: BasePoint) -> float:
        a, b = point.as_floats()
        c = self.matrix
        n = len(a)
        terms = []
        for i in range(n):
            for j in range(n):
                herm = (b[i] * b[j].conjugate() + b[j] * b[i].conjugate()).real
                terms.append(c[i, j] * (a[i] * a[j] - 0.25 * herm))
        return math.fsum(terms)


def _s_plus_r(fl, s, v, r) -> float:
    """``s + r`` without cancellation when ``s < 0``."""
    sr = s + r if s >= 0 else 4.0 * abs(v) ** 2 / (r - s) if r - s > 0 else 0.0
    if sr <= 0:
        raise CoordinateSingularity(
            f"branch singularity: s + r <= 0 for flat {fl.index}", flat=fl.index)
    return sr


def prepotential_truncated(point: BasePoint, cfg: FlatConfiguration | None, truncation: int,
                           deformation: TaubNutDeformation | None = None) -> float:
    """``1/4 sum_{k} (s_k log(s_k + r_k) - r_k)`` over the window (plus Taub-NUT)."""
    terms = []
    if cfg is not None:
        weights = deformation.weights if deformation is not None and deformation.weights else {}
        for fl in enumerate_flats(cfg, truncation):
            s, v, r = _terms(point, fl)
            sr = _s_plus_r(fl, s, v, r)
            wgt = float(weights.get(fl.index, 1.0))
            terms.append(wgt * KAPPA * (s * math.log(sr) - r if s != 0 else -r))
    if deformation is not None:
        terms.append(deformation.prepotential(point))
    return math.fsum(terms)


def connection(point: BasePoint, cfg: FlatConfiguration, truncation: int, weights=None) -> np.ndarray:
    """Coefficients ``C[j, k] = F_{a_j b_k}``.

    ``A_j = (i/2) sum_k (C_jk db_k - conj(C_jk) d conj(b_k))``; in real terms
    the ``dx_k`` coefficient of ``A_j`` is ``-Im C_jk`` and the ``dy_k``
    coefficient is ``-Re C_jk``.
    """
    n = cfg.rank
    acc = [[[] for _ in range(n)] for _ in range(n)]
    for fl in enumerate_flats(cfg, truncation):
        s, v, r = _terms(point, fl)
        if r == 0:
            raise CoordinateSingularity(f"coordinate singularity: point on flat {fl.index}", flat=fl.index)
        sr = _s_plus_r(fl, s, v, r)
        wgt = 1.0 if weights is None else float(weights.get(fl.index, 1.0))
        coef = wgt * 2.0 * v.conjugate() / (r * sr)
        u = fl.normal
        for j in range(n):
            for k in range(n):
                if u[j] and u[k]:
                    acc[j][k].append(coef * u[j] * u[k])
    C = np.zeros((n, n), dtype=complex)
    for j in range(n):
        for k in range(n):
            C[j, k] = complex(math.fsum(z.real for z in acc[j][k]),
                              math.fsum(z.imag for z in acc[j][k]))
    return C


def connection_forms(C: np.ndarray) -> np.ndarray:
    """Real n x 2n matrix: row j holds the (dx, dy) coefficients of ``A_j``."""
    return np.hstack([-C.imag, -C.real])


# ---------------------------------------------------------------------------
# metric


def gram_matrix(point: BasePoint, cfg: FlatConfiguration, truncation: int,
                deformation: TaubNutDeformation | None = None) -> np.ndarray:
    """4n x 4n metric in the coordinates ``(a, Re b, Im b, y)``."""
    weights = deformation.weights if deformation is not None else None
    pot = potential(point, cfg, truncation, weights=weights)
    phi = pot.phi
    if deformation is not None:
        phi = phi + 2.0 * deformation.matrix
    n = cfg.rank
    try:
        inv = np.linalg.inv(phi)
        np.linalg.cholesky(phi)
    except np.linalg.LinAlgError:
        raise DomainError("degenerate potential") from None
    C = connection(point, cfg, pot.truncation, weights=weights)
    M = np.zeros((n, 3 * n))
    M[:, n:] = connection_forms(C)
    base = np.kron(np.eye(3), phi)
    g = np.zeros((4 * n, 4 * n))
    g[: 3 * n, : 3 * n] = base + M.T @ inv @ M
    g[: 3 * n, 3 * n:] = -M.T @ inv
    g[3 * n:, : 3 * n] = -inv @ M
    g[3 * n:, 3 * n:] = inv
    return 0.5 * (g + g.T)


# ---------------------------------------------------------------------------
# finite-difference identities


def _shift(point: BasePoint, da=None, dx=None, dy=None) -> BasePoint:
    a, b = point.as_floats()
    a = list(a)
    re = [z.real for z in b]
    im = [z.imag for z in b]
    for vec, d in ((a, da), (re, dx), (im, dy)):
        if d is not None:
            for i, h in d.items():
                vec[i] += h
    return BasePoint(tuple(a), tuple(re), tuple(im))


def _second(f, point, kind_i, i, kind_j, j, h):
    def at(si, sj):
        shifts = {"a": {}, "x": {}, "y": {}}
        shifts[kind_i][i] = shifts[kind_i].get(i, 0.0) + si * h
        shifts[kind_j][j] = shifts[kind_j].get(j, 0.0) + sj * h
        return f(_shift(point, shifts["a"], shifts["x"], shifts["y"]))
    return (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * h * h)


class IdentityReport(NamedTuple):
    residual: float
    h: float
    faa: np.ndarray
    fbb: np.ndarray


def polyharmonic_check(point: BasePoint, cfg: FlatConfiguration | None, truncation: int,
                       h: float = 1e-4, deformation: TaubNutDeformation | None = None) -> IdentityReport:
    """Central-difference residual of ``F_{a_i a_j} + F_{b_i conj(b_j)}``."""
    if h <= 0:
        raise SchemaError("step h must be positive")
    n = point.rank

    def F(p):
        return prepotential_truncated(p, cfg, truncation, deformation)

    faa = np.zeros((n, n))
    fbb = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            faa[i, j] = _second(F, point, "a", i, "a", j, h)
            re = _second(F, point, "x", i, "x", j, h) + _second(F, point, "y", i, "y", j, h)
            im = _second(F, point, "x", i, "y", j, h) - _second(F, point, "y", i, "x", j, h)
            fbb[i, j] = complex(re, im)
    return IdentityReport(float(np.max(np.abs(faa + fbb))), h, faa, fbb)


def connection_fd(point: BasePoint, cfg: FlatConfiguration, truncation: int, h: float = 1e-4) -> np.ndarray:
    """Finite-difference ``F_{a_j b_k}`` with ``D_b = d/dx - i d/dy``."""
    n = cfg.rank

    def F(p):
        return prepotential_truncated(p, cfg, truncation)

    C = np.zeros((n, n), dtype=complex)
    for j in range(n):
        for k in range(n):
            C[j, k] = complex(_second(F, point, "a", j, "x", k, h),
                              -_second(F, point, "a", j, "y", k, h))
    return C


def monopole_check(point: BasePoint, cfg: FlatConfiguration, truncation: int, h: float = 1e-4) -> float:
    """Max deviation between analytic and finite-difference connection coefficients."""
    return float(np.max(np.abs(connection(point, cfg, truncation) - connection_fd(point, cfg, truncation, h))))


def potential_fd(point: BasePoint, cfg: FlatConfiguration, truncation: int, h: float = 1e-4) -> np.ndarray:
    n = cfg.rank

    def F(p):
        return prepotential_truncated(p, cfg, truncation)

    return np.array([[_second(F, point, "a", i, "a", j, h) for j in range(n)] for i in range(n)])


def admissible(point: BasePoint, cfg: FlatConfiguration, truncation: int,
               min_distance: float = 0.5, string_ratio: float = 0.2) -> bool:
    """Point is at distance ``>= min_distance`` from every enumerated flat and
    clear of the string loci (``s_k + r_k >= string_ratio * r_k``)."""
    for fl in enumerate_flats(cfg, truncation):
        s, _, r = _terms(point, fl)
        norm_u = math.sqrt(sum(c * c for c in fl.normal))
        if r < 2.0 * norm_u * min_distance or s + r < string_ratio * r:
            return False
    return True
