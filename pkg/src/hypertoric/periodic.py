"""Periodic (Ooguri-Vafa regularised) potentials."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import lattice
from .config import BasePoint, number
from .errors import CoordinateSingularity, DomainError, SchemaError
from .metric import PotentialResult


def _ov_terms(x: float, rho: float, N: int) -> list[float]:
    # summation order k = 0, 1, -1, 2, -2, ...
    ks = np.arange(1, N + 1, dtype=float)
    plus = 1.0 / np.hypot(x - ks, rho) - 1.0 / ks
    minus = 1.0 / np.hypot(x + ks, rho) - 1.0 / ks
    terms = [1.0 / math.hypot(x, rho)]
    terms.extend(np.column_stack([plus, minus]).ravel().tolist())
    return terms


def ov_tail_bound(x: float, rho: float, N: int) -> float:
    """Bound on the omitted ``|k| > N`` part of the regularised series.

    ``|1/d_k - 1/|k|| <= (|x| + rho) / (|k| (|k| - |x|))`` because ``d_k`` and
    ``|k|`` differ by at most ``|x| + rho``; summing both signs against an
    integral gives ``2 (|x| + rho) / (N - |x|)``.
    """
    if N <= abs(x):
        return math.inf
    return 2.0 * (abs(x) + rho) / (N - abs(x))


def ov_potential(x, w, N: int) -> tuple[float, float]:
    """``sum_{|k|<=N} 1/sqrt((x-k)^2 + |w|^2) - 1/|k|`` (no subtraction at k = 0).

    Returns ``(value, tail_bound)``.
    """
    if N < 1:
        raise SchemaError("N must be at least 1")
    x = float(x)
    rho = abs(complex(w))
    if rho == 0 and x == round(x) and abs(x) <= N:
        raise CoordinateSingularity(f"coordinate singularity: point on center {int(round(x))}",
                                    flat=int(round(x)))
    return math.fsum(_ov_terms(x, rho, N)), ov_tail_bound(x, rho, N)


def ov_laplacian(x: float, w: complex, N: int, h: float = 1e-3) -> float:
    """Central-difference Laplacian of the truncated series in ``(x, Re w, Im w)``."""
    w = complex(w)

    def f(dx=0.0, dre=0.0, dim=0.0):
        return ov_potential(x + dx, w + complex(dre, dim), N)[0]

    c = f()
    lap = (f(h) + f(-h) + f(0, h) + f(0, -h) + f(0, 0, h) + f(0, 0, -h) - 6 * c)
    return lap / (h * h)


@dataclass(frozen=True)
class PeriodicFamily:
    """Flats ``<a,u> = base_level + spacing * k`` (k in Z) with fixed complex level."""

    generator: tuple
    base_level: object = 0
    spacing: object = 1
    cx_level: complex = 0j

    def __post_init__(self):
        g = lattice.int_vector(self.generator)
        object.__setattr__(self, "generator", g)
        if not lattice.is_primitive(g):
            raise SchemaError(f"generator {g} is not primitive")
        object.__setattr__(self, "base_level", number(self.base_level))
        object.__setattr__(self, "spacing", number(self.spacing))
        if not self.spacing > 0:
            raise SchemaError("spacing must be positive")
        object.__setattr__(self, "cx_level", complex(self.cx_level))

    def reduced(self, point: BasePoint) -> tuple[float, complex]:
        """``(X, v)`` with ``X = (<a,u> - base_level) / spacing`` and ``v = <b,u> - cx_level``."""
        a, b = point.as_floats()
        u = self.generator
        X = (math.fsum(x * c for x, c in zip(a, u)) - float(self.base_level)) / float(self.spacing)
        v = sum((z * c for z, c in zip(b, u)), 0j) - self.cx_level
        return X, v


def periodic_potential(point: BasePoint, families, N: int, unit: bool = False) -> PotentialResult:
    """Regularised potential ``sum_j u_j u_j^T sum_k (1/r_{j,k} - 1/(2 d_j |k|))``.

    With ``r_{j,k} = 2 d_j sqrt((X_j - k)^2 + (|v_j|/d_j)^2)`` each family
    contributes ``u_j u_j^T ov(X_j, |v_j|/d_j) / (2 d_j)``. ``unit=True``
    drops the ``1/(2 d_j)`` factor so that a single unit-spaced family
    reproduces :func:`ov_potential` exactly.
    """
    families = list(families)
    if not families:
        raise SchemaError("no periodic families")
    n = point.rank
    if any(len(f.generator) != n for f in families):
        raise SchemaError("family generator length differs from point rank")
    acc = [[[] for _ in range(n)] for _ in range(n)]
    tail = []
    for j, fam in enumerate(families):
        X, v = fam.reduced(point)
        d = float(fam.spacing)
        W = abs(v) / d
        if W >= 1:
            raise DomainError(f"|v| >= 1 (in units of the spacing) for family {j}")
        try:
            val, tb = ov_potential(X, W, N)
        except CoordinateSingularity as exc:
            raise CoordinateSingularity(
                f"coordinate singularity: point on flat k={exc.flat} of family {j}", flat=(j, exc.flat)
            ) from None
        scale = 1.0 if unit else 1.0 / (2.0 * d)
        u = fam.generator
        norm_u2 = float(sum(c * c for c in u))
        tail.append(scale * norm_u2 * tb)
        for i in range(n):
            for k in range(n):
                if u[i] and u[k]:
                    acc[i][k].append(scale * val * u[i] * u[k])
    phi = np.array([[math.fsum(acc[i][k]) for k in range(n)] for i in range(n)])
    return PotentialResult(phi, N, math.fsum(tail), exact=False)


def fibration_report(b, families, tol: float = 0.0) -> dict:
    """Which complex flats pass through ``b`` and what degenerates over them."""
    families = list(families)
    b = [complex(z) for z in b]
    n = len(b)
    incident = []
    in_domain = True
    for j, fam in enumerate(families):
        v = sum((z * c for z, c in zip(b, fam.generator)), 0j) - fam.cx_level
        if abs(v) / float(fam.spacing) >= 1:
            in_domain = False
        if abs(v) <= tol:
            incident.append(j)
    report = {
        "rank": n,
        "in_domain": in_domain,
        "incident_families": incident,
        "collapsing_directions": [list(families[j].generator) for j in incident],
    }
    if not incident:
        report["fiber"] = f"generic fiber T^{2 * n}"
        report["degeneration"] = None
    elif n == 1:
        report["fiber"] = "nodal fiber: one circle pinched over each real flat"
        report["degeneration"] = "nodal"
    else:
        r = lattice.rank([families[j].generator for j in incident])
        report["fiber"] = (f"circles along {report['collapsing_directions']} collapse over the "
                           "real hyperplanes <a,u_j> = level")
        report["degeneration"] = f"T^{n} fibres collapse to T^{n - r} over the real flats"
    return report
