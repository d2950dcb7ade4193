"""The flex ladder: iterative linear solves that extend a first-order flex to
higher and higher order, certifying the rigidity order when dim K = 1.

Level l of the ladder solves R p_l = rhs_l where rhs_l collects the bilinear
terms of the order-l edge-length condition from the lower-level coefficients.
A solvable level extends the flex; the first unsolvable level l certifies
that a (1, l-1)-flex exists but no (1, l)-flex does, so the rigidity order is
l.  Solvability is a thresholded least-squares residual; residuals are kept
in the report so users can audit the margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimKNotOne
from .framework import PinnedFramework
from .linear import KernelDecomposition, kernel_decomposition, rigidity_matrix

DEFAULT_MAX_K = 32
DEFAULT_LADDER_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class PolyTrajectory:
    """Polynomial trajectory p(t) = p + sum_i coeffs[i-1] t^i in pinned
    coordinates; the base point is implicit.  coeffs[l-1] is the coefficient
    of t^l (Taylor coefficient, i.e. the l-th derivative divided by l!)."""

    coeffs: np.ndarray            # (degree, n_free)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim != 2:
            raise ValueError("coeffs must be a (degree, n_free) array")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0]

    @property
    def n_free(self) -> int:
        return self.coeffs.shape[1]

    def displacement(self, t: float) -> np.ndarray:
        """p(t) - p as a pinned-coordinate vector."""
        out = np.zeros(self.n_free)
        tp = 1.0
        for row in self.coeffs:
            tp *= t
            out += tp * row
        return out

    def prefix(self, degree: int) -> "PolyTrajectory":
        if not 1 <= degree <= self.degree:
            raise ValueError(f"prefix degree must be in 1..{self.degree}")
        return PolyTrajectory(self.coeffs[:degree])

    def reparam_scale(self, alpha: float) -> "PolyTrajectory":
        """Trajectory of t -> p(alpha t): coefficient l scales by alpha^l."""
        scale = np.array([alpha**l for l in range(1, self.degree + 1)])
        return PolyTrajectory(self.coeffs * scale[:, None])


@dataclass(frozen=True)
class LevelResidual:
    level: int
    residual: float
    threshold: float
    rhs_norm: float


@dataclass(frozen=True, eq=False)
class OrderReport:
    """Outcome of a rigidity-order computation.

    verdict is "order" (rigidity order .order certified), "flex-found"
    (a (1, max_k)-flex exists; no certificate up to max_k, likely flexible),
    or "inconclusive" (with .reason).  witness holds the flex coefficients
    that were found; residuals the per-level least-squares audit trail.
    """

    verdict: str
    order: int | None = None
    max_k: int | None = None
    reason: str | None = None
    method: str = "ladder"
    witness: PolyTrajectory | None = None
    residuals: tuple[LevelResidual, ...] = field(default=())
    dim_K: int | None = None

    def summary(self) -> str:
        if self.verdict == "order":
            return f"rigidity order {self.order} ({self.method})"
        if self.verdict == "flex-found":
            return f"no rigidity certificate up to k={self.max_k}; (1,{self.max_k})-flex found"
        return f"inconclusive: {self.reason}"


def _edge_diffs(pf: PinnedFramework, free_vec: np.ndarray) -> np.ndarray:
    """Per-edge difference vectors x_v - x_w of an embedded tangent vector."""
    full = pf.embed_tangent(free_vec)
    ev, ew = pf.base.edge_index_arrays()
    return full[ev] - full[ew]


def flex_rhs(pf: PinnedFramework, derivs, l: int) -> np.ndarray:
    """Right-hand side of the level-l flex equation R p_l = rhs_l.

    derivs supplies the derivative-convention coefficients p_1 .. p_{l-1}
    (pinned-coordinate vectors).  The edge-vw entry is
        -1/2 sum_{a=1}^{l-1} C(l,a) (p_a,v - p_a,w) . (p_{l-a},v - p_{l-a},w),
    the bilinear part of the l-th derivative of the squared edge lengths.
    For l = 1 the sum is empty and the rhs is zero.
    """
    if l < 1:
        raise ValueError("level must be >= 1")
    n_edges = pf.base.n_edges
    rhs = np.zeros(n_edges)
    diffs = [_edge_diffs(pf, np.asarray(v, dtype=float)) for v in derivs[: l - 1]]
    for a in range(1, l):
        rhs -= 0.5 * math.comb(l, a) * np.sum(diffs[a - 1] * diffs[l - a - 1], axis=1)
    return rhs


def _sign_fixed_unit(v: np.ndarray) -> np.ndarray:
    u = v / np.linalg.norm(v)
    nz = np.flatnonzero(np.abs(u) > 1e-12 * np.max(np.abs(u)))
    if nz.size and u[nz[0]] < 0:
        u = -u
    return u


def _taylor_witness(derivs) -> PolyTrajectory:
    rows = [np.asarray(v, dtype=float) / math.factorial(l + 1) for l, v in enumerate(derivs)]
    return PolyTrajectory(np.vstack(rows))


def solve_ladder(
    pf: PinnedFramework,
    kd: KernelDecomposition,
    max_k: int = DEFAULT_MAX_K,
    tol: float = DEFAULT_LADDER_TOL,
    p1: np.ndarray | None = None,
) -> OrderReport:
    """Run the flex ladder (requires dim K = 1).

    Sets p_1 to the unit kernel vector (first nonzero entry positive), then
    for l = 2..max_k solves min ||R x - rhs_l|| by the minimum-norm
    pseudoinverse, which lands in K-bar automatically.  A level whose
    residual exceeds tol * (1 + ||rhs_l||) has no solution: the report is
    Order(l) and the witness collects the coefficients through l - 1
    (converted to Taylor coefficients, so the witness polynomial is itself a
    (1, l-1)-flex).  If every level up to max_k solves, the report is
    flex-found with the degree-max_k witness.

    p1 overrides the initial flex direction (used to exercise scale
    equivariance); it must lie in K.
    """
    if kd.dim_K != 1:
        raise DimKNotOne(
            f"the ladder requires dim K = 1, got {kd.dim_K}; "
            "only the energy-based order tests apply"
        )
    if max_k < 2:
        raise ValueError("max_k must be >= 2")
    start = _sign_fixed_unit(kd.K_basis[:, 0]) if p1 is None else np.asarray(p1, dtype=float)
    derivs = [start]
    records = []
    for level in range(2, max_k + 1):
        rhs = flex_rhs(pf, derivs, level)
        rhs_norm = float(np.linalg.norm(rhs))
        x, residual = kd.solve_min_norm(rhs)
        threshold = tol * (1.0 + rhs_norm)
        records.append(LevelResidual(level, residual, threshold, rhs_norm))
        if residual > threshold:
            return OrderReport(
                verdict="order",
                order=level,
                max_k=max_k,
                method="ladder",
                witness=_taylor_witness(derivs),
                residuals=tuple(records),
                dim_K=1,
            )
        derivs.append(x)
    return OrderReport(
        verdict="flex-found",
        max_k=max_k,
        method="ladder",
        witness=_taylor_witness(derivs),
        residuals=tuple(records),
        dim_K=1,
    )


def rigidity_order(
    pf: PinnedFramework,
    max_k: int = DEFAULT_MAX_K,
    tol: float = DEFAULT_LADDER_TOL,
    kernel_tol: float = 1e-9,
    energy_family: str = "harmonic",
    seed: int = 0,
) -> OrderReport:
    """Decide the rigidity order of a pinned framework.

    dim K = 0 certifies order 1 outright.  dim K = 1 runs the flex ladder.
    For dim K > 1 the ladder does not apply; the 4th-derivative energy test
    is attempted, which can certify order 2 (absence of a second-order flex)
    but nothing beyond.
    """
    kd = kernel_decomposition(rigidity_matrix(pf), kernel_tol)
    if kd.dim_K == 0:
        return OrderReport(verdict="order", order=1, method="first-order", dim_K=0)
    if kd.dim_K == 1:
        return solve_ladder(pf, kd, max_k=max_k, tol=tol)

    from .critpoint import second_order_rigidity_test  # deferred: avoids an import cycle
    from .energy import EnergySpec

    spec = EnergySpec.for_framework(pf.base, energy_family)
    crit = second_order_rigidity_test(pf, spec, kd, seed=seed)
    if crit.classification == "strict-min":
        return OrderReport(
            verdict="order", order=2, method="order4-energy", dim_K=kd.dim_K
        )
    return OrderReport(
        verdict="inconclusive",
        reason="dimK>1 beyond order 2 requires symbolic methods",
        method="order4-energy",
        dim_K=kd.dim_K,
    )
