"""Stiff-bar energy families and exact high-order differentiation of the
energy along polynomial trajectories.

Four per-edge energy families are provided, each analytic with a strict
positive-curvature minimum at the edge rest length: harmonic springs,
the algebraic (squared-length) energy, Lennard-Jones, and Morse.  Energies,
gradients and Hessians are assembled analytically per edge; derivatives of
E(p(t)) along a polynomial trajectory are computed exactly with jet
arithmetic (the algebraic family never needs a square root, Lennard-Jones
uses jet reciprocals, Morse uses jet exp).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ZeroLengthEdge
from .framework import Framework, PinnedFramework
from .jets import Jet
from .ladder import PolyTrajectory
from .linear import KernelDecomposition

FAMILIES = ("harmonic", "algebraic", "lj", "morse")

_SIXTH_ROOT_HALF = 2.0 ** (-1.0 / 6.0)


@dataclass(frozen=True, eq=False)
class EnergySpec:
    """Per-edge parameters of one stiff-bar energy family.

    harmonic:  E = k/2 (l - d)^2
    algebraic: E = k/2 (l^2 - d^2)^2
    lj:        E = 4 eps ((sigma/l)^12 - (sigma/l)^6), minimum at 2^(1/6) sigma
    morse:     E = D (1 - exp(-a (l - d)))^2
    """

    family: str
    rest_lengths: np.ndarray
    stiffness: np.ndarray | None = None     # k_ij     (harmonic, algebraic)
    epsilon: np.ndarray | None = None       # eps_ij   (lj)
    sigma: np.ndarray | None = None         # sigma_ij (lj)
    depth: np.ndarray | None = None         # D_ij     (morse)
    width: np.ndarray | None = None         # a_ij     (morse)
    edges: tuple[tuple[int, int], ...] | None = None   # bound edge order, if known

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown energy family {self.family!r}; have {FAMILIES}")
        n = np.asarray(self.rest_lengths).size
        for name in ("rest_lengths", "stiffness", "epsilon", "sigma", "depth", "width"):
            v = getattr(self, name)
            if v is None:
                continue
            a = np.broadcast_to(np.asarray(v, dtype=float), (n,)).copy()
            if not np.all(a > 0):
                raise ValueError(f"{name} must be positive")
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def n_edges(self) -> int:
        return self.rest_lengths.size

    @classmethod
    def for_framework(
        cls,
        framework: Framework,
        family: str,
        stiffness: float = 1.0,
        epsilon: float = 1.0,
        depth: float = 1.0,
        width: float = 1.0,
    ) -> "EnergySpec":
        """Energy with each edge at rest at the framework's own lengths.
        For Lennard-Jones this means sigma_ij = d_ij 2^(-1/6)."""
        rest = framework.edge_lengths()
        edges = framework.edges
        if family in ("harmonic", "algebraic"):
            return cls(family, rest, stiffness=stiffness, edges=edges)
        if family == "lj":
            return cls(family, rest, epsilon=epsilon, sigma=rest * _SIXTH_ROOT_HALF, edges=edges)
        if family == "morse":
            return cls(family, rest, depth=depth, width=width, edges=edges)
        raise ValueError(f"unknown energy family {family!r}")

    def rest_energy(self) -> float:
        """Total energy at the rest configuration: 0 except Lennard-Jones,
        whose wells have depth epsilon each."""
        if self.family == "lj":
            return float(-np.sum(self.epsilon))
        return 0.0


# ---------------------------------------------------------------------------
# scalar derivatives per family
# ---------------------------------------------------------------------------

def _derivs012(spec: EnergySpec, lengths: np.ndarray):
    """Arrays (E, dE/dl, d2E/dl2) over edges at the given lengths."""
    d = spec.rest_lengths
    if spec.family == "harmonic":
        k = spec.stiffness
        dl = lengths - d
        return 0.5 * k * dl**2, k * dl, k.copy()
    if spec.family == "algebraic":
        k = spec.stiffness
        gap = lengths**2 - d**2
        return 0.5 * k * gap**2, 2.0 * k * lengths * gap, 6.0 * k * lengths**2 - 2.0 * k * d**2
    if spec.family == "lj":
        eps, sig = spec.epsilon, spec.sigma
        u = (sig / lengths) ** 6
        e = 4.0 * eps * (u**2 - u)
        e1 = (24.0 * eps / lengths) * (u - 2.0 * u**2)
        e2 = (24.0 * eps / lengths**2) * (26.0 * u**2 - 7.0 * u)
        return e, e1, e2
    eps_d, a = spec.depth, spec.width
    ex = np.exp(-a * (lengths - d))
    one_m = -np.expm1(-a * (lengths - d))
    e = eps_d * one_m**2
    e1 = 2.0 * eps_d * a * ex * one_m
    e2 = 2.0 * eps_d * a**2 * ex * (2.0 * ex - 1.0)
    return e, e1, e2


def _gap_and_slope(spec: EnergySpec, lengths: np.ndarray, dl: np.ndarray):
    """Cancellation-free (E(l) - E(d), dE/dl) given lengths and dl = l - d.

    Used by the growth probe, where E - E(rest) must stay accurate down to
    the square of the length perturbation.
    """
    d = spec.rest_lengths
    if spec.family == "harmonic":
        k = spec.stiffness
        return 0.5 * k * dl**2, k * dl
    if spec.family == "algebraic":
        k = spec.stiffness
        gap = dl * (lengths + d)
        return 0.5 * k * gap**2, 2.0 * k * lengths * gap
    if spec.family == "lj":
        eps, sig = spec.epsilon, spec.sigma
        u = (sig / lengths) ** 6
        return 4.0 * eps * (u - 0.5) ** 2, (24.0 * eps / lengths) * (u - 2.0 * u**2)
    eps_d, a = spec.depth, spec.width
    one_m = -np.expm1(-a * dl)
    ex = 1.0 - one_m
    return eps_d * one_m**2, 2.0 * eps_d * a * ex * one_m


# ---------------------------------------------------------------------------
# value / gradient / Hessian in pinned coordinates
# ---------------------------------------------------------------------------

def _free_flat_index(pf: PinnedFramework) -> np.ndarray:
    d = pf.dimension
    return np.array([v * d + a for v, a in pf.free_coords], dtype=int)


def _check_binding(spec: EnergySpec, pf: PinnedFramework) -> None:
    """Per-edge parameters are positional; evaluating a spec against a
    framework with a different edge list silently misassigns rest lengths,
    so refuse when the bound edge order disagrees."""
    if spec.rest_lengths.size != pf.base.n_edges:
        raise ValueError(
            f"energy spec has {spec.rest_lengths.size} edges, framework has {pf.base.n_edges}"
        )
    if spec.edges is not None and spec.edges != pf.base.edges:
        raise ValueError(
            "energy spec is bound to a different edge list than the framework; "
            "build it with EnergySpec.for_framework(pf.base, ...)"
        )


def energy_value_grad_hess(spec: EnergySpec, pf: PinnedFramework, q_free: np.ndarray | None = None):
    """Energy value, analytic gradient and Hessian at the pinned-coordinate
    point q (default: the rest configuration), all in free coordinates."""
    _check_binding(spec, pf)
    if q_free is None:
        q_free = pf.free_vector()
    pts = pf.embed_config(np.asarray(q_free, dtype=float))
    n, d = pts.shape
    ev, ew = pf.base.edge_index_arrays()
    diffs = pts[ev] - pts[ew]
    lengths = np.linalg.norm(diffs, axis=1)
    if np.any(lengths <= 0.0):
        raise ZeroLengthEdge("zero-length edge in the evaluated configuration")
    e, e1, e2 = _derivs012(spec, lengths)

    grad_full = np.zeros((n, d))
    hess_full = np.zeros((n * d, n * d))
    for idx, (v, w) in enumerate(pf.base.edges):
        u = diffs[idx] / lengths[idx]
        g = e1[idx] * u
        grad_full[v] += g
        grad_full[w] -= g
        proj = np.outer(u, u)
        block = e2[idx] * proj + (e1[idx] / lengths[idx]) * (np.eye(d) - proj)
        sv, sw = v * d, w * d
        hess_full[sv : sv + d, sv : sv + d] += block
        hess_full[sw : sw + d, sw : sw + d] += block
        hess_full[sv : sv + d, sw : sw + d] -= block
        hess_full[sw : sw + d, sv : sv + d] -= block

    free = _free_flat_index(pf)
    return float(np.sum(e)), grad_full.reshape(-1)[free], hess_full[np.ix_(free, free)]


def energy_gap_and_grad(spec: EnergySpec, pf: PinnedFramework, delta_free: np.ndarray):
    """E(p + delta) - E(p) and its gradient with respect to the free
    displacement, evaluated in a cancellation-free form.

    The squared-length change per edge is assembled as
    2 (p_v - p_w).(delta_v - delta_w) + |delta_v - delta_w|^2, which keeps
    the energy gap accurate down to the floating-point floor even when the
    displacement is many orders of magnitude smaller than the coordinates.
    """
    _check_binding(spec, pf)
    base = pf.base.vertices
    n, d = base.shape
    delta_full = pf.embed_tangent(np.asarray(delta_free, dtype=float))
    ev, ew = pf.base.edge_index_arrays()
    base_diff = base[ev] - base[ew]
    delta_diff = delta_full[ev] - delta_full[ew]
    rest = spec.rest_lengths
    m_gap = 2.0 * np.sum(base_diff * delta_diff, axis=1) + np.sum(delta_diff**2, axis=1)
    m_val = rest**2 + m_gap
    if np.any(m_val <= 0.0):
        raise ZeroLengthEdge("zero-length edge in the displaced configuration")
    lengths = np.sqrt(m_val)
    dl = m_gap / (lengths + rest)
    gap, slope = _gap_and_slope(spec, lengths, dl)

    coeff = slope / lengths
    grad_full = np.zeros((n, d))
    contrib = coeff[:, None] * (base_diff + delta_diff)
    np.add.at(grad_full, ev, contrib)
    np.add.at(grad_full, ew, -contrib)
    free = _free_flat_index(pf)
    return float(np.sum(gap)), grad_full.reshape(-1)[free]


# ---------------------------------------------------------------------------
# jets along polynomial trajectories
# ---------------------------------------------------------------------------

def _coordinate_jets(pf: PinnedFramework, traj: PolyTrajectory, order: int) -> np.ndarray:
    """(n, d) object-free array of jet coefficient rows for every coordinate
    of p(t) = p + traj(t); pinned coordinates are constants."""
    base = pf.base.vertices
    n, d = base.shape
    coeffs = np.zeros((n, d, order + 1))
    coeffs[:, :, 0] = base
    upto = min(traj.degree, order)
    for l in range(1, upto + 1):
        coeffs[:, :, l] = pf.embed_tangent(traj.coeffs[l - 1])
    return coeffs


def _edge_m_jets(pf: PinnedFramework, traj: PolyTrajectory, order: int) -> list[Jet]:
    """Squared-length jets m_ij(p(t)) per canonical edge."""
    coords = _coordinate_jets(pf, traj, order)
    out = []
    for v, w in pf.base.edges:
        acc = Jet.constant(0.0, order)
        for a in range(pf.dimension):
            diff = Jet(coords[v, a] - coords[w, a])
            acc = acc + diff * diff
        out.append(acc)
    return out


def _edge_energy_jet(spec: EnergySpec, idx: int, m_jet: Jet) -> Jet:
    """Jet of E_ij along the trajectory, from the squared-length jet."""
    dij = spec.rest_lengths[idx]
    if m_jet.c[0] <= 0.0:
        raise ZeroLengthEdge(f"edge {idx} has non-positive squared length along the trajectory")
    if spec.family == "harmonic":
        dl = m_jet.sqrt() - dij
        return 0.5 * spec.stiffness[idx] * (dl * dl)
    if spec.family == "algebraic":
        gap = m_jet - dij**2
        return 0.5 * spec.stiffness[idx] * (gap * gap)
    if spec.family == "lj":
        u = (spec.sigma[idx] ** 2 * m_jet.reciprocal()).power(3)
        return 4.0 * spec.epsilon[idx] * (u * u - u)
    one_m = -((-spec.width[idx]) * (m_jet.sqrt() - dij)).exp() + 1.0
    return spec.depth[idx] * (one_m * one_m)


def _edge_energy_dm_jet(spec: EnergySpec, idx: int, m_jet: Jet) -> Jet:
    """Jet of dE_ij/dm along the trajectory (m = squared length)."""
    dij = spec.rest_lengths[idx]
    if spec.family == "harmonic":
        rsq = m_jet.sqrt().reciprocal()
        return 0.5 * spec.stiffness[idx] * (1.0 - dij * rsq)
    if spec.family == "algebraic":
        return spec.stiffness[idx] * (m_jet - dij**2)
    if spec.family == "lj":
        minv = m_jet.reciprocal()
        u = (spec.sigma[idx] ** 2 * minv).power(3)
        return 12.0 * spec.epsilon[idx] * minv * (u - 2.0 * (u * u))
    l_jet = m_jet.sqrt()
    ex = ((-spec.width[idx]) * (l_jet - dij)).exp()
    one_m = 1.0 - ex
    return spec.depth[idx] * spec.width[idx] * (ex * one_m) * l_jet.reciprocal()


def energy_along_trajectory(spec: EnergySpec, pf: PinnedFramework, traj: PolyTrajectory, order: int) -> Jet:
    """Exact Taylor coefficients of t -> E(p(t)) - E(p) through the given
    order, where p(t) = p + sum_l traj.coeffs[l-1] t^l."""
    if order < 1:
        raise ValueError("order must be >= 1")
    _check_binding(spec, pf)
    total = Jet.constant(0.0, order)
    for idx, m_jet in enumerate(_edge_m_jets(pf, traj, order)):
        total = total + _edge_energy_jet(spec, idx, m_jet)
    c = total.c.copy()
    c[0] -= spec.rest_energy()
    return Jet(c, total.mag)


def gradient_along_trajectory(spec: EnergySpec, pf: PinnedFramework, traj: PolyTrajectory, order: int) -> np.ndarray:
    """Jets of the free-coordinate gradient of E along the trajectory:
    an (n_free, order+1) array of Taylor coefficient rows."""
    _check_binding(spec, pf)
    coords = _coordinate_jets(pf, traj, order)
    n, d = pf.base.vertices.shape
    grad = np.zeros((n, d, order + 1))
    for idx, ((v, w), m_jet) in enumerate(zip(pf.base.edges, _edge_m_jets(pf, traj, order))):
        dm = _edge_energy_dm_jet(spec, idx, m_jet)
        for a in range(pf.dimension):
            diff = Jet(coords[v, a] - coords[w, a])
            contrib = 2.0 * (dm * diff)
            grad[v, a] += contrib.c
            grad[w, a] -= contrib.c
    free = _free_flat_index(pf)
    return grad.reshape(n * d, order + 1)[free]


# ---------------------------------------------------------------------------
# flex classification and the Hessian-kernel identity
# ---------------------------------------------------------------------------

def classify_flex(pf: PinnedFramework, traj: PolyTrajectory, k_check: int, tol: float = 1e-8):
    """Activity and vanishing orders of a polynomial trajectory.

    Returns (j_active, k_vanish): j_active is the smallest l with a nonzero
    t^l coefficient; k_vanish is the largest k <= k_check such that all
    derivatives of the squared edge lengths through order k vanish at t = 0
    (coefficients below tol relative to the largest coefficient magnitude
    through k_check).
    """
    norms = np.linalg.norm(traj.coeffs, axis=1)
    active = np.flatnonzero(norms > tol)
    if active.size == 0:
        raise ValueError("trajectory is numerically zero")
    j_active = int(active[0]) + 1

    m_rows = np.array([j.c for j in _edge_m_jets(pf, traj, k_check)])
    per_order = np.max(np.abs(m_rows[:, 1:]), axis=0) if m_rows.size else np.zeros(k_check)
    # scale includes order 0 (the squared rest lengths), so a trajectory whose
    # inspected derivatives all vanish still gets a meaningful threshold
    scale = float(np.max(np.abs(m_rows))) if m_rows.size else 0.0
    k_vanish = 0
    for k in range(1, k_check + 1):
        if per_order[k - 1] <= tol * scale:
            k_vanish = k
        else:
            break
    return j_active, k_vanish


def principal_angles(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Principal angles between the column spans of two orthonormal bases."""
    if A.shape[1] == 0 or B.shape[1] == 0:
        return np.zeros(0)
    s = np.linalg.svd(A.T @ B, compute_uv=False)
    return np.arccos(np.clip(s, -1.0, 1.0))


def kernel_of_hessian_equals_K(
    spec: EnergySpec,
    pf: PinnedFramework,
    kd: KernelDecomposition,
    tol: float = 1e-8,
    angle_tol: float = 1e-6,
) -> bool:
    """Check that the numerical kernel of the energy Hessian at rest
    coincides with the first-order flex space K as subspaces."""
    _, _, hess = energy_value_grad_hess(spec, pf)
    lam, vec = np.linalg.eigh(hess)
    scale = float(np.max(np.abs(lam))) if lam.size else 0.0
    ker = vec[:, np.abs(lam) <= tol * max(scale, 1.0)]
    if ker.shape[1] != kd.dim_K:
        return False
    if kd.dim_K == 0:
        return True
    ang = principal_angles(ker, kd.K_basis)
    return bool(np.max(ang) < angle_tol)


# ---------------------------------------------------------------------------
# Faa di Bruno
# ---------------------------------------------------------------------------

def _partition_multiplicities(n: int):
    """Yield multiplicity tuples (j_1..j_n) with sum i * j_i = n."""

    def rec(remaining: int, largest: int):
        if remaining == 0:
            yield ()
            return
        for part in range(min(remaining, largest), 0, -1):
            for mult in range(remaining // part, 0, -1):
                for rest in rec(remaining - part * mult, part - 1):
                    yield ((part, mult),) + rest

    for combo in rec(n, n):
        j = [0] * n
        for part, mult in combo:
            j[part - 1] = mult
        yield tuple(j)


def faa_di_bruno_term(f_derivs, g_derivs, n: int) -> float:
    """n-th derivative of f(g(t)) at t = 0 by the partition-sum formula.

    f_derivs[m] is the m-th derivative of f at g(0); g_derivs[i] the i-th
    derivative of g at 0 (index 0 entries are the values, unused).  Intended
    for n <= 8, where it doubles as an independent check on jet composition;
    the enumeration itself has no hard cap.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    f_derivs = np.asarray(f_derivs, dtype=float)
    g_derivs = np.asarray(g_derivs, dtype=float)
    if f_derivs.size < n + 1 or g_derivs.size < n + 1:
        raise ValueError(f"need derivatives up to order {n}")
    total = 0.0
    for j in _partition_multiplicities(n):
        m = sum(j)
        denom = 1
        term = f_derivs[m]
        for i, ji in enumerate(j, start=1):
            if ji == 0:
                continue
            denom *= math.factorial(ji) * math.factorial(i) ** ji
            term *= g_derivs[i] ** ji
        total += (math.factorial(n) // denom) * term
    return float(total)
