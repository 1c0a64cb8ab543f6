"""Pointwise moment-map geometry and the convex moment solver."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import lattice
from .arrangement import tau_inverse
from .config import BasePoint, FlatConfiguration, enumerate_flats, flats_through, offsets
from .errors import ConvergenceError, NonCoerciveError, SchemaError
from .lattice import GeneratorSet, independent_on_index_set

__all__ = [
    "BasePoint", "MomentSolveProblem", "MomentSolution", "StabilizerInfo",
    "discrete_stabilizer_check", "kernel_basis", "moment_solve", "point_lift",
    "stabilizer",
]


class StabilizerInfo(NamedTuple):
    incident: tuple
    rank: int
    fiber_dim: int

    @property
    def fixed_point(self) -> bool:
        return self.fiber_dim == 0


def stabilizer(point: BasePoint, cfg: FlatConfiguration, window: int, tol=0) -> StabilizerInfo:
    flats = enumerate_flats(cfg, window)
    inc = flats_through(cfg, point, window, tol)
    r = lattice.rank([flats[k].normal for k in inc]) if inc else 0
    return StabilizerInfo(tuple(inc), r, cfg.rank - r)


def point_lift(point: BasePoint, cfg: FlatConfiguration, window: int, tol=0) -> list[tuple[complex, complex]]:
    """A lift ``(z_k, w_k)`` for every enumerated flat.

    Solves ``|z|^2 - |w|^2 = 2(<a,u> - l1)`` and ``z w = <b,u> - lC``. Gauge:
    ``z`` real positive unless it vanishes, in which case ``w`` is real
    non-negative.
    """
    out = []
    for fl in enumerate_flats(cfg, window):
        dr, dx, dy = offsets(point, fl)
        if abs(dr) <= tol and dx * dx + dy * dy <= tol * tol:
            out.append((0j, 0j))
            continue
        c = complex(float(dx), float(dy))
        x, y = tau_inverse(float(dr), abs(c))
        if x > 0:
            out.append((complex(x), c / x))
        else:
            out.append((0j, complex(y)))
    return out


class DiscreteStabilizerResult(NamedTuple):
    discrete: bool
    incident: tuple
    witness: tuple  # dependent flat indices, empty when discrete

    def __bool__(self):
        return self.discrete


def discrete_stabilizer_check(cfg: FlatConfiguration, b: Sequence[complex], window: int,
                              tol=0) -> DiscreteStabilizerResult:
    """Independence of the normals of the complex flats through ``b``."""
    if len(b) != cfg.rank:
        raise SchemaError("b has the wrong length")
    flats = enumerate_flats(cfg, window)
    bre = [z.real if isinstance(z, complex) else z for z in b]
    bim = [z.imag if isinstance(z, complex) else 0 for z in b]
    inc = []
    for fl in flats:
        dx = sum(x * u for x, u in zip(bre, fl.normal)) - fl.level.cx_re
        dy = sum(x * u for x, u in zip(bim, fl.normal)) - fl.level.cx_im
        if dx * dx + dy * dy <= tol * tol:
            inc.append(fl.index)
    gs = GeneratorSet.from_normals([fl.normal for fl in flats])
    if independent_on_index_set(gs, inc):
        return DiscreteStabilizerResult(True, tuple(inc), ())
    # shortest dependent prefix of the incident list
    for m in range(1, len(inc) + 1):
        if not independent_on_index_set(gs, inc[:m]):
            return DiscreteStabilizerResult(False, tuple(inc), tuple(inc[:m]))
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# moment solver


def kernel_basis(generators: Sequence[Sequence[int]]) -> list[tuple]:
    """Integer basis of ``{t : sum_i t_i u_i = 0}``."""
    gens = [lattice.int_vector(u) for u in generators]
    rows = [tuple(u[j] for u in gens) for j in range(len(gens[0]))]
    return lattice.nullspace(rows, len(gens))


@dataclass(frozen=True)
class MomentSolveProblem:
    """Real moment equation restricted to a complexified orbit.

    ``kernel_basis`` rows are vectors of the kernel of ``e_i -> u_i``;
    ``target`` lists the target covector's values on those rows.
    """

    z: tuple
    w: tuple
    lambda1: tuple
    kernel_basis: tuple
    target: tuple
    indices: tuple = ()
    generators: tuple | None = None

    def __post_init__(self):
        L = len(self.z)
        if not (len(self.w) == len(self.lambda1) == L):
            raise SchemaError("z, w and lambda1 must have equal length")
        if not self.indices:
            object.__setattr__(self, "indices", tuple(range(L)))
        if len(self.indices) != L:
            raise SchemaError("indices length mismatch")
        K = tuple(tuple(v) for v in self.kernel_basis)
        object.__setattr__(self, "kernel_basis", K)
        if any(len(v) != L for v in K):
            raise SchemaError("kernel basis vectors must have one entry per index")
        if len(self.target) != len(K):
            raise SchemaError("target needs one value per kernel basis vector")
        if lattice.rank(K) != len(K) if K else False:
            raise SchemaError("kernel basis vectors are dependent")
        if self.generators is not None:
            gens = [lattice.int_vector(u) for u in self.generators]
            for v in K:
                image = [sum(ti * u[j] for ti, u in zip(v, gens)) for j in range(len(gens[0]))]
                if any(image):
                    raise SchemaError(f"kernel vector {v} is not annihilated by the generators")

    def arrays(self):
        z2 = np.abs(np.asarray(self.z, dtype=complex)) ** 2
        w2 = np.abs(np.asarray(self.w, dtype=complex)) ** 2
        lam = np.asarray([float(x) for x in self.lambda1])
        K = np.asarray([[float(x) for x in v] for v in self.kernel_basis]).reshape(len(self.kernel_basis), len(self.z))
        tgt = np.asarray([float(x) for x in self.target])
        return z2, w2, lam, K, tgt

    # the three maps below take coefficients c on the kernel basis

    def functional(self, c) -> float:
        z2, w2, lam, K, _ = self.arrays()
        y = K.T @ np.asarray(c, dtype=float)
        t = 2 * y
        terms = ((z2 - w2 + 2 * lam) * t + z2 * np.expm1(t) - z2 * t
                 + w2 * np.expm1(-t) + w2 * t)
        return 0.25 * math.fsum(terms)

    def mu(self, c) -> np.ndarray:
        """Moment map on the orbit, as values on the kernel basis."""
        z2, w2, lam, K, _ = self.arrays()
        y = K.T @ np.asarray(c, dtype=float)
        return K @ (0.5 * (z2 * np.exp(2 * y) - w2 * np.exp(-2 * y) + 2 * lam))

    def hessian(self, c) -> np.ndarray:
        z2, w2, _, K, _ = self.arrays()
        y = K.T @ np.asarray(c, dtype=float)
        weight = z2 * np.exp(2 * y) + w2 * np.exp(-2 * y)
        return (K * weight) @ K.T


class MomentSolution(NamedTuple):
    coefficients: np.ndarray
    y: np.ndarray
    residual: float
    iterations: int


def _null_covector(p: MomentSolveProblem):
    both = [i for i, (z, w) in enumerate(zip(p.z, p.w)) if z != 0 and w != 0]
    K = p.kernel_basis
    rows = [tuple(v[i] for v in K) for i in both]
    m = len(K)
    if not rows:
        return tuple(int(j == 0) for j in range(m)) if m else None
    null = lattice.nullspace(rows, m)
    return null[0] if null else None


def moment_solve(p: MomentSolveProblem, tol: float = 1e-10, max_iter: int = 200) -> MomentSolution:
    """Newton's method with backtracking on the convex functional.

    Minimises ``F(c) - target . c``; at the minimum the moment map equals
    the target. Falls back to a gradient step when the Hessian condition
    number exceeds 1e12.
    """
    m = len(p.kernel_basis)
    if m == 0:
        return MomentSolution(np.zeros(0), np.zeros(len(p.z)), 0.0, 0)
    direction = _null_covector(p)
    if direction is not None:
        raise NonCoerciveError(
            f"unbounded direction {direction}: the weights with z_i w_i != 0 do not span",
            direction=direction)
    _, _, _, K, tgt = p.arrays()

    def objective(c):
        return p.functional(c) - float(tgt @ c)

    c = np.zeros(m)
    g = p.mu(c) - tgt
    res = float(np.linalg.norm(g))
    it = 0
    while res > tol:
        if it >= max_iter:
            raise ConvergenceError(f"no convergence after {max_iter} iterations",
                                   residual=res, iterations=it)
        H = p.hessian(c)
        if np.linalg.cond(H) > 1e12:
            step = -g
        else:
            step = -np.linalg.solve(H, g)
        f0 = objective(c)
        slope = float(g @ step)
        s = 1.0
        while True:
            trial = c + s * step
            with np.errstate(over="ignore", invalid="ignore"):
                f1 = objective(trial)
                g1 = p.mu(trial) - tgt
            r1 = float(np.linalg.norm(g1))
            # near the optimum F is flat in double precision; a smaller
            # residual is then the only usable signal
            if math.isfinite(f1) and (f1 <= f0 + 1e-4 * s * slope or r1 < res):
                break
            s *= 0.5
            if s < 1e-12:
                raise ConvergenceError("line search failed", residual=res, iterations=it)
        c, g, res = trial, g1, r1
        it += 1
    return MomentSolution(c, K.T @ c, res, it)
