"""Classification of degenerate critical points by a 4th-derivative test, and
its rigidity applications: the order-4 second-order-rigidity certificate and
the order-2k family test that cross-checks the flex ladder when dim K = 1.

The 4th-derivative test probes f along the trajectory family
x(t) = x0 t^2, y(t) = y0 t with (x0, y0) on the unit parameter sphere, where
the y-coordinates span the Hessian kernel.  The t^4 coefficient
a4(x0, y0) decides the critical point when it has a uniform sign over the
sphere; cubic kernel terms are screened first, since any y_i y_j y_k term
already forces a saddle.

a4 decomposes exactly as
    a4(x0, y0) = 1/2 x0' Hxx x0  +  sum_i x0_i Ci(y0, y0)  +  B(y0^4),
with Hxx positive definite on the non-kernel block.  The forms are assembled
once by polarization (each evaluation is one exact jet of f along a
polynomial trajectory), after which sphere sampling and projected-gradient
extremization run on closed-form values and gradients.  For fixed y0 the x0
part is a convex quadratic, which the rigidity tests exploit to minimize in
closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement, permutations

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .energy import EnergySpec, energy_along_trajectory, energy_value_grad_hess, gradient_along_trajectory
from .errors import DimKNotOne, NotACriticalPoint
from .framework import PinnedFramework
from .jets import Jet
from .ladder import PolyTrajectory
from .linear import KernelDecomposition, kernel_decomposition, rigidity_matrix

DEFAULT_CRIT_TOL = 1e-8
DEFAULT_STARTS = 64
SOBOL_SAMPLES = 4096
SOBOL_MAX_DIM = 4


# ---------------------------------------------------------------------------
# analytic targets
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PolynomialTarget:
    """Multivariate polynomial given as a monomial list: ((exps, coef), ...).

    Any constant term is treated as f(0) and ignored (the analysis applies to
    f - f(0)).  The gradient at the origin must vanish for the tests to
    apply.
    """

    n_vars: int
    monomials: tuple[tuple[tuple[int, ...], float], ...]

    def __post_init__(self):
        canon = []
        for exps, coef in self.monomials:
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.n_vars or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent vector {exps}")
            canon.append((exps, float(coef)))
        object.__setattr__(self, "monomials", tuple(canon))

    @property
    def dim(self) -> int:
        return self.n_vars

    def grad0(self) -> np.ndarray:
        g = np.zeros(self.n_vars)
        for exps, coef in self.monomials:
            if sum(exps) == 1:
                g[exps.index(1)] += coef
        return g

    def hessian0(self) -> np.ndarray:
        h = np.zeros((self.n_vars, self.n_vars))
        for exps, coef in self.monomials:
            if sum(exps) != 2:
                continue
            nz = [i for i, e in enumerate(exps) if e]
            if len(nz) == 1:
                h[nz[0], nz[0]] += 2.0 * coef
            else:
                i, j = nz
                h[i, j] += coef
                h[j, i] += coef
        return h

    def jet_along(self, rows: np.ndarray, order: int) -> Jet:
        """Exact jet of f along v(t) = sum_l rows[l-1] t^l (constant term of
        f dropped)."""
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        var_jets = [Jet.from_poly(0.0, rows[:, i], order) for i in range(self.n_vars)]
        total = Jet.constant(0.0, order)
        for exps, coef in self.monomials:
            if sum(exps) == 0:
                continue
            term = Jet.constant(coef, order)
            for i, e in enumerate(exps):
                if e:
                    term = term * var_jets[i].power(e)
            total = total + term
        return total


def polynomial_from_monomial_list(data, n_vars: int | None = None) -> PolynomialTarget:
    """Build a PolynomialTarget from [{"exps": [...], "coef": r}, ...]."""
    monos = [(tuple(item["exps"]), float(item["coef"])) for item in data]
    if n_vars is None:
        if not monos:
            raise ValueError("empty monomial list")
        n_vars = len(monos[0][0])
    return PolynomialTarget(n_vars, tuple(monos))


@dataclass(frozen=True, eq=False)
class FrameworkEnergyTarget:
    """f(dp) = E(p + dp) - E(p) for a stiff-bar energy at a pinned framework,
    as a critical-point target over the free pinned coordinates."""

    spec: EnergySpec
    pf: PinnedFramework

    @property
    def dim(self) -> int:
        return self.pf.n_free

    def grad0(self) -> np.ndarray:
        _, g, _ = energy_value_grad_hess(self.spec, self.pf)
        return g

    def hessian0(self) -> np.ndarray:
        _, _, h = energy_value_grad_hess(self.spec, self.pf)
        return h

    def jet_along(self, rows: np.ndarray, order: int) -> Jet:
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        return energy_along_trajectory(self.spec, self.pf, PolyTrajectory(rows), order)


class _Negated:
    """View of a target with flipped sign (for NSD Hessians)."""

    def __init__(self, target):
        self._t = target

    @property
    def dim(self):
        return self._t.dim

    def grad0(self):
        return -self._t.grad0()

    def hessian0(self):
        return -self._t.hessian0()

    def jet_along(self, rows, order):
        return -self._t.jet_along(rows, order)


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CritReport:
    """Result of a derivative test at a critical point.

    classification: "strict-min" | "strict-max" | "saddle" | "inconclusive".
    resolved_by records which stage decided: "hessian" (classical second
    derivative test), "cubic" (a kernel y_i y_j y_k term), "quartic" (the
    order-4 family), or "order2k-family".  a_min / a_max hold the extremized
    leading coefficient over the parameter sphere; arg points are reported in
    original coordinates as (velocity, curvature) = (t-part, t^2..t^k-part)
    of the extremizing trajectory.
    """

    classification: str
    resolved_by: str
    order: int
    nullity: int
    a_min: float | None = None
    a_max: float | None = None
    arg_min_velocity: np.ndarray | None = None
    arg_min_curvature: np.ndarray | None = None
    arg_max_velocity: np.ndarray | None = None
    arg_max_curvature: np.ndarray | None = None
    a3_witness: np.ndarray | None = None
    scale: float = 0.0
    notes: tuple[str, ...] = field(default=())


# ---------------------------------------------------------------------------
# quartic form assembly
# ---------------------------------------------------------------------------

def _a4_eval(target, X: np.ndarray, Y: np.ndarray, x0: np.ndarray, y0: np.ndarray) -> float:
    """One exact a4 evaluation: t^4 coefficient of f(X x0 t^2 + Y y0 t)."""
    dim = target.dim
    row1 = Y @ y0 if Y.shape[1] else np.zeros(dim)
    row2 = X @ x0 if X.shape[1] else np.zeros(dim)
    return float(target.jet_along(np.vstack([row1, row2]), 4).c[4])


def _cubic_kernel_form(target, Y: np.ndarray):
    """Cubic form C(y) = t^3 coefficient of f(Y y t) and its symmetric
    coefficient tensor, by polarization over the kernel basis."""
    m = Y.shape[1]

    def cval(y):
        return float(target.jet_along((Y @ y)[None, :], 3).c[3])

    tensor = np.zeros((m, m, m))
    evals = []
    eye = np.eye(m)
    cache: dict[tuple, float] = {}

    def cached(vec_key, vec):
        if vec_key not in cache:
            cache[vec_key] = cval(vec)
            evals.append((cache[vec_key], vec))
        return cache[vec_key]

    for i, j, k in combinations_with_replacement(range(m), 3):
        # 6 T_ijk = C(a+b+c) - C(a+b) - C(a+c) - C(b+c) + C(a) + C(b) + C(c)
        acc = 0.0
        subsets = [
            ((i, j, k), 1.0),
            ((i, j), -1.0), ((i, k), -1.0), ((j, k), -1.0),
            ((i,), 1.0), ((j,), 1.0), ((k,), 1.0),
        ]
        for ids, sign in subsets:
            vec = np.sum(eye[list(ids)], axis=0)
            acc += sign * cached(tuple(sorted(ids)), vec)
        t_val = acc / 6.0
        for perm in {(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)}:
            tensor[perm] = t_val
    return tensor, evals


def _quartic_kernel_tensor(target, X: np.ndarray, Y: np.ndarray):
    """Symmetric coefficient tensor of the pure kernel quartic B(y) = a4(0, y)."""
    m = Y.shape[1]
    eye = np.eye(m)
    cache: dict[tuple, float] = {}

    def bval(key, vec):
        if key not in cache:
            cache[key] = _a4_eval(target, X, Y, np.zeros(X.shape[1]), vec)
        return cache[key]

    tensor = np.zeros((m,) * 4)
    for ids in combinations_with_replacement(range(m), 4):
        # 24 T = sum over nonempty sub-multisets S of (-1)^(4-|S|) B(sum S)
        acc = 0.0
        npts = len(ids)
        for mask in range(1, 1 << npts):
            sel = [ids[b] for b in range(npts) if mask >> b & 1]
            vec = np.sum(eye[sel], axis=0)
            acc += (-1.0) ** (npts - len(sel)) * bval(tuple(sorted(sel)), vec)
        t_val = acc / 24.0
        for perm in set(permutations(ids)):
            tensor[perm] = t_val
    return tensor


@dataclass(frozen=True, eq=False)
class _QuarticForms:
    """Closed-form a4 over the parameter sphere:
    a4(x, y) = 1/2 x' Hxx x + sum_i x_i (y' C[i] y) + B(y,y,y,y)."""

    Hxx: np.ndarray        # (n, n)
    C: np.ndarray          # (n, m, m)
    B: np.ndarray          # (m, m, m, m) symmetric

    def value(self, x: np.ndarray, y: np.ndarray) -> float:
        v = 0.5 * x @ self.Hxx @ x
        if self.C.size:
            v += float(np.einsum("i,ijk,j,k->", x, self.C, y, y))
        if self.B.size:
            v += float(np.einsum("ijkl,i,j,k,l->", self.B, y, y, y, y))
        return float(v)

    def value_batch(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        out = 0.5 * np.einsum("bi,ij,bj->b", xs, self.Hxx, xs)
        if self.C.size:
            out += np.einsum("bi,ijk,bj,bk->b", xs, self.C, ys, ys)
        if self.B.size:
            out += np.einsum("ijkl,bi,bj,bk,bl->b", self.B, ys, ys, ys, ys)
        return out

    def grad(self, x: np.ndarray, y: np.ndarray):
        gx = self.Hxx @ x
        gy = np.zeros(y.size)
        if self.C.size:
            gx = gx + np.einsum("ijk,j,k->i", self.C, y, y)
            gy = gy + 2.0 * np.einsum("i,ijk,k->j", x, self.C, y)
        if self.B.size:
            gy = gy + 4.0 * np.einsum("ijkl,j,k,l->i", self.B, y, y, y)
        return gx, gy

    def grad_batch(self, xs: np.ndarray, ys: np.ndarray):
        gx = xs @ self.Hxx.T
        gy = np.zeros_like(ys)
        if self.C.size:
            gx = gx + np.einsum("ijk,bj,bk->bi", self.C, ys, ys)
            gy = gy + 2.0 * np.einsum("bi,ijk,bk->bj", xs, self.C, ys)
        if self.B.size:
            gy = gy + 4.0 * np.einsum("ijkl,bj,bk,bl->bi", self.B, ys, ys, ys)
        return np.hstack([gx, gy])

    def mixed_quadratic(self, y: np.ndarray) -> np.ndarray:
        """c(y) with c_i = y' C[i] y (the coefficient of x_i)."""
        if not self.C.size:
            return np.zeros(self.Hxx.shape[0])
        return np.einsum("ijk,j,k->i", self.C, y, y)

    def kernel_quartic(self, y: np.ndarray) -> float:
        if not self.B.size:
            return 0.0
        return float(np.einsum("ijkl,i,j,k,l->", self.B, y, y, y, y))


def _assemble_quartic_forms(target, X: np.ndarray, Y: np.ndarray, hess: np.ndarray) -> _QuarticForms:
    n, m = X.shape[1], Y.shape[1]
    hxx = X.T @ hess @ X if n else np.zeros((0, 0))
    b_tensor = _quartic_kernel_tensor(target, X, Y) if m else np.zeros((0,) * 4)
    c_forms = np.zeros((n, m, m))
    eye_m = np.eye(m)
    for i in range(n):
        ex = np.zeros(n)
        ex[i] = 1.0

        def mixed(y):
            plus = _a4_eval(target, X, Y, ex, y)
            minus = _a4_eval(target, X, Y, -ex, y)
            return 0.5 * (plus - minus)

        diag = np.array([mixed(eye_m[j]) for j in range(m)])
        for j in range(m):
            c_forms[i, j, j] = diag[j]
        for j in range(m):
            for k in range(j + 1, m):
                val = 0.5 * (mixed(eye_m[j] + eye_m[k]) - diag[j] - diag[k])
                c_forms[i, j, k] = val
                c_forms[i, k, j] = val
    return _QuarticForms(hxx, c_forms, b_tensor)


# ---------------------------------------------------------------------------
# sphere extremization
# ---------------------------------------------------------------------------

def _sphere_samples(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    pts = rng.standard_normal((count, dim))
    norms = np.linalg.norm(pts, axis=1)
    norms[norms == 0] = 1.0
    return pts / norms[:, None]


def _sobol_sphere(dim: int, count: int, seed: int) -> np.ndarray:
    sob = qmc.Sobol(d=dim, scramble=True, seed=seed)
    u = sob.random(count)
    z = ndtri(np.clip(u, 1e-12, 1 - 1e-12))
    norms = np.linalg.norm(z, axis=1)
    norms[norms == 0] = 1.0
    return z / norms[:, None]


def _project_tangent(z: np.ndarray, g: np.ndarray) -> np.ndarray:
    return g - (g @ z) * z


def _pgd_on_sphere(value_grad, z0: np.ndarray, max_iter: int = 400, gtol: float = 1e-14):
    """Projected gradient descent on the unit sphere with backtracking."""
    z = z0 / np.linalg.norm(z0)
    val, grad = value_grad(z)
    step = 1.0
    for _ in range(max_iter):
        g_tan = _project_tangent(z, grad)
        gn = np.linalg.norm(g_tan)
        if gn <= gtol * (1.0 + abs(val)):
            break
        accepted = False
        for _ in range(60):
            cand = z - step * g_tan
            cand /= np.linalg.norm(cand)
            c_val, c_grad = value_grad(cand)
            if c_val < val - 1e-4 * step * gn * gn:
                z, val, grad = cand, c_val, c_grad
                step *= 2.0
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
    return z, val


def _pgd_sphere_batch(forms: _QuarticForms, n: int, z0: np.ndarray, sign: float, rounds: int = 500):
    """Vectorized projected gradient descent on the sphere from a batch of
    starts, with per-start adaptive steps: an improving trial doubles the
    step, a failing one halves it and retries next round."""
    z = z0 / np.linalg.norm(z0, axis=1, keepdims=True)
    vals = sign * forms.value_batch(z[:, :n], z[:, n:])
    steps = np.full(z.shape[0], 1.0)
    for _ in range(rounds):
        grad = sign * forms.grad_batch(z[:, :n], z[:, n:])
        g_tan = grad - np.sum(grad * z, axis=1, keepdims=True) * z
        gnorm2 = np.sum(g_tan**2, axis=1)
        active = gnorm2 > (1e-14 * (1.0 + np.abs(vals))) ** 2
        if not np.any(active):
            break
        cand = z - steps[:, None] * g_tan
        cand /= np.linalg.norm(cand, axis=1, keepdims=True)
        c_vals = sign * forms.value_batch(cand[:, :n], cand[:, n:])
        improve = active & (c_vals < vals - 1e-4 * steps * gnorm2)
        z[improve] = cand[improve]
        vals[improve] = c_vals[improve]
        steps[improve] *= 2.0
        steps[~improve & active] *= 0.5
    best = int(np.argmin(vals))
    return z[best], sign * vals[best]


def _extremize_a4(forms: _QuarticForms, n: int, m: int, tol: float, n_starts: int, seed: int):
    """Min and max of a4 over the unit sphere in R^(n+m), heuristically:
    dense low-discrepancy samples in low dimension plus multistart projected
    gradient descent.  Returns (min, argmin, max, argmax, scale)."""
    dim = n + m
    rng = np.random.default_rng(seed)

    candidates = [np.eye(dim)[i] * s for i in range(dim) for s in (1.0, -1.0)]
    candidates = np.array(candidates)
    if dim <= SOBOL_MAX_DIM:
        candidates = np.vstack([candidates, _sobol_sphere(dim, SOBOL_SAMPLES, seed)])
    starts = _sphere_samples(dim, n_starts, rng)
    pool = np.vstack([candidates, starts])
    vals = forms.value_batch(pool[:, :n], pool[:, n:])
    scale = float(np.max(np.abs(vals))) if vals.size else 0.0

    order = np.argsort(vals)
    min_seeds = np.vstack([pool[order[:8]], starts])
    max_seeds = np.vstack([pool[order[-8:]], starts])
    best_min_arg, best_min = _pgd_sphere_batch(forms, n, min_seeds, 1.0)
    best_max_arg, best_max = _pgd_sphere_batch(forms, n, max_seeds, -1.0)
    scale = max(scale, abs(best_min), abs(best_max))
    return best_min, best_min_arg, best_max, best_max_arg, scale


# ---------------------------------------------------------------------------
# the 4th derivative test
# ---------------------------------------------------------------------------

def fourth_derivative_test(
    target,
    tol: float = DEFAULT_CRIT_TOL,
    n_starts: int = DEFAULT_STARTS,
    seed: int = 0,
) -> CritReport:
    """Classify the critical point of a target function at the origin.

    Stages: (1) eigendecompose the Hessian; a definite or indefinite Hessian
    resolves the point at second order.  (2) For a degenerate PSD Hessian,
    rotate so the kernel spans the y-coordinates and screen the cubic kernel
    form; a nonzero y_i y_j y_k coefficient is a saddle certificate.
    (3) Otherwise extremize a4 over the parameter sphere: a positive minimum
    certifies a strict local minimum, mixed signs a saddle, and a vanishing
    minimum leaves the test inconclusive, with the vanishing direction
    reported.  NSD Hessians are handled by negating the target.

    The sphere extremization is heuristic (multistart + sampling), so a
    strict-min verdict for a general polynomial target carries that caveat.
    """
    g0 = np.asarray(target.grad0(), dtype=float)
    if np.linalg.norm(g0) > tol:
        raise NotACriticalPoint(f"gradient norm {np.linalg.norm(g0):.3e} exceeds tol")

    hess = np.asarray(target.hessian0(), dtype=float)
    lam, vec = np.linalg.eigh(hess)
    h_scale = float(np.max(np.abs(lam))) if lam.size else 0.0
    thresh = tol * max(h_scale, 1.0)
    pos = lam > thresh
    neg = lam < -thresh
    zero = ~(pos | neg)
    m = int(np.sum(zero))

    if m == 0:
        if np.all(pos):
            cls = "strict-min"
        elif np.all(neg):
            cls = "strict-max"
        else:
            cls = "saddle"
        return CritReport(cls, "hessian", 2, 0, scale=h_scale)
    if np.any(pos) and np.any(neg):
        return CritReport("saddle", "hessian", 2, m, scale=h_scale)
    if np.any(neg):
        flipped = fourth_derivative_test(_Negated(target), tol, n_starts, seed)
        swap = {"strict-min": "strict-max", "strict-max": "strict-min"}
        return CritReport(
            swap.get(flipped.classification, flipped.classification),
            flipped.resolved_by,
            flipped.order,
            flipped.nullity,
            a_min=None if flipped.a_max is None else -flipped.a_max,
            a_max=None if flipped.a_min is None else -flipped.a_min,
            arg_min_velocity=flipped.arg_max_velocity,
            arg_min_curvature=flipped.arg_max_curvature,
            arg_max_velocity=flipped.arg_min_velocity,
            arg_max_curvature=flipped.arg_min_curvature,
            a3_witness=flipped.a3_witness,
            scale=flipped.scale,
            notes=flipped.notes + ("negated target (NSD Hessian)",),
        )

    X = vec[:, pos]
    Y = vec[:, zero]
    n = X.shape[1]

    tensor3, evals3 = _cubic_kernel_form(target, Y)
    scale3 = max((abs(v) for v, _ in evals3), default=0.0)
    if tensor3.size and np.max(np.abs(tensor3)) > tol * (1.0 + scale3):
        best_val, best_vec = max(evals3, key=lambda t: abs(t[0]))
        wit = Y @ (best_vec / np.linalg.norm(best_vec))
        return CritReport(
            "saddle", "cubic", 3, m, a3_witness=wit, scale=scale3,
            notes=("cubic kernel form is nonzero",),
        )

    forms = _assemble_quartic_forms(target, X, Y, hess)
    a_min, z_min, a_max, z_max, scale = _extremize_a4(forms, n, m, tol, n_starts, seed)
    tol_eff = tol * (1.0 + scale)

    def split(z):
        if z is None:
            return None, None
        vel = Y @ z[n:] if m else np.zeros(target.dim)
        cur = X @ z[:n] if n else np.zeros(target.dim)
        return vel, cur

    vel_min, cur_min = split(z_min)
    vel_max, cur_max = split(z_max)
    common = dict(
        a_min=a_min, a_max=a_max,
        arg_min_velocity=vel_min, arg_min_curvature=cur_min,
        arg_max_velocity=vel_max, arg_max_curvature=cur_max,
        scale=scale,
    )
    if a_min > tol_eff:
        return CritReport("strict-min", "quartic", 4, m, **common)
    if a_max < -tol_eff:
        return CritReport("strict-max", "quartic", 4, m, **common)
    if a_min < -tol_eff and a_max > tol_eff:
        return CritReport("saddle", "quartic", 4, m, **common)
    return CritReport(
        "inconclusive", "quartic", 4, m, **common,
        notes=("a4 attains (near-)zero on the parameter sphere",),
    )


# ---------------------------------------------------------------------------
# second-order rigidity via the order-4 family
# ---------------------------------------------------------------------------

def second_order_rigidity_test(
    pf: PinnedFramework,
    spec: EnergySpec,
    kd: KernelDecomposition | None = None,
    tol: float = DEFAULT_CRIT_TOL,
    n_starts: int = DEFAULT_STARTS,
    seed: int = 0,
) -> CritReport:
    """Order-4 test of the framework energy with x-coordinates spanning
    K-bar and y-coordinates spanning K.

    Because the family's x-part enters a4 as a convex quadratic with positive
    definite Hessian on K-bar, the x-minimization is done in closed form and
    only the kernel sphere is searched:
        mu(y) = B(y^4) - 1/2 c(y)' Hxx^-1 c(y),
    a homogeneous quartic whose strict positivity on the unit sphere of K is
    equivalent to positivity of a4 on the full parameter sphere.  A strict
    minimum certifies rigidity order 2.  The cubic kernel screen is retained
    for generality although it vanishes identically for stiff-bar energies.
    """
    if kd is None:
        kd = kernel_decomposition(rigidity_matrix(pf))
    m = kd.dim_K
    if m < 1:
        raise ValueError("second-order test needs dim K >= 1 (otherwise first-order rigid)")
    target = FrameworkEnergyTarget(spec, pf)
    hess = target.hessian0()
    X, Y = kd.Kbar_basis, kd.K_basis
    n = X.shape[1]

    tensor3, evals3 = _cubic_kernel_form(target, Y)
    scale3 = max((abs(v) for v, _ in evals3), default=0.0)
    if tensor3.size and np.max(np.abs(tensor3)) > tol * (1.0 + scale3):
        best_val, best_vec = max(evals3, key=lambda t: abs(t[0]))
        return CritReport(
            "saddle", "cubic", 3, m,
            a3_witness=Y @ (best_vec / np.linalg.norm(best_vec)),
            scale=scale3, notes=("cubic kernel form is nonzero",),
        )

    forms = _assemble_quartic_forms(target, X, Y, hess)
    hxx_inv = np.linalg.inv(forms.Hxx) if n else np.zeros((0, 0))

    def mu_value(y):
        c = forms.mixed_quadratic(y)
        return forms.kernel_quartic(y) - 0.5 * float(c @ hxx_inv @ c)

    def mu_value_grad(y):
        c = forms.mixed_quadratic(y)
        w = hxx_inv @ c
        val = forms.kernel_quartic(y) - 0.5 * float(c @ w)
        grad = 4.0 * np.einsum("ijkl,j,k,l->i", forms.B, y, y, y) if forms.B.size else np.zeros(y.size)
        if n:
            # d c_i / d y = 2 C_i y
            jac = 2.0 * np.einsum("ijk,k->ij", forms.C, y)
            grad = grad - jac.T @ w
        return val, grad

    rng = np.random.default_rng(seed)
    if m == 1:
        y_best, mu_min = np.array([1.0]), mu_value(np.array([1.0]))
        sampled = np.array([mu_min])
    else:
        pts = np.vstack([
            np.eye(m), -np.eye(m),
            _sobol_sphere(m, SOBOL_SAMPLES, seed) if m <= SOBOL_MAX_DIM else _sphere_samples(m, SOBOL_SAMPLES, rng),
            _sphere_samples(m, n_starts, rng),
        ])
        sampled = np.array([mu_value(y) for y in pts])
        order = np.argsort(sampled)
        mu_min, y_best = np.inf, None
        for y0 in np.vstack([pts[order[:8]], _sphere_samples(m, n_starts, rng)]):
            y, v = _pgd_on_sphere(mu_value_grad, y0)
            if v < mu_min:
                mu_min, y_best = v, y

    scale = float(np.max(np.abs(sampled)))
    c = forms.mixed_quadratic(y_best)
    x_best = -hxx_inv @ c if n else np.zeros(0)
    scale = max(scale, abs(forms.kernel_quartic(y_best)), abs(mu_min))
    tol_eff = tol * (1.0 + scale)

    norm = np.sqrt(1.0 + x_best @ x_best)
    vel = Y @ y_best / norm
    cur = X @ x_best / norm if n else np.zeros(pf.n_free)
    common = dict(
        a_min=mu_min, a_max=None,
        arg_min_velocity=vel, arg_min_curvature=cur, scale=scale,
        notes=("x-part minimized in closed form over K-bar",),
    )
    if mu_min > tol_eff:
        return CritReport("strict-min", "quartic", 4, m, **common)
    if mu_min < -tol_eff:
        return CritReport("saddle", "quartic", 4, m, **common)
    return CritReport("inconclusive", "quartic", 4, m, **common)


# ---------------------------------------------------------------------------
# order-2k family test (dim K = 1)
# ---------------------------------------------------------------------------

def order2k_family_test(
    pf: PinnedFramework,
    spec: EnergySpec,
    witness: PolyTrajectory,
    k: int,
    tol: float = DEFAULT_CRIT_TOL,
    kd: KernelDecomposition | None = None,
) -> CritReport:
    """2k-th derivative test along the family
        dp(t; y0, w) = y0 p1 t + y0^2 p2 t^2 + ... + y0^(k-1) p_(k-1) t^(k-1) + w t^k
    built from a K-bar-normalized (1, k-1)-flex witness, with (y0, w) on the
    unit sphere of R x K-bar.

    The t^2k coefficient is exactly
        a2k(y0, w) = y0^2k F + y0^k G.w + 1/2 w' Hxx w,
    with F the 2k-th energy coefficient along the witness, G the k-th
    coefficient of the energy gradient along it (restricted to K-bar), and
    Hxx the energy Hessian on K-bar (positive definite).  Substituting
    u = w / y0^k shows a2k is positive on the whole sphere iff
        mu = F - 1/2 G' Hxx^-1 G
    is positive (the y0 = 0 slice is covered by Hxx > 0), so the minimization
    is exact: no grid search is needed.  mu > tol certifies rigidity order k,
    matching the ladder verdict.
    """
    if kd is None:
        kd = kernel_decomposition(rigidity_matrix(pf))
    if kd.dim_K != 1:
        raise DimKNotOne(f"order-2k family test requires dim K = 1, got {kd.dim_K}")
    if k < 2:
        raise ValueError("k must be >= 2")
    if witness.degree < k - 1:
        raise ValueError(f"witness must supply coefficients through t^{k-1}")
    traj = witness.prefix(k - 1)
    lead = np.linalg.norm(traj.coeffs[0])
    if abs(lead - 1.0) > 1e-6:
        raise ValueError("witness leading coefficient must be a unit vector")

    e_jet = energy_along_trajectory(spec, pf, traj, 2 * k)
    f2k = float(e_jet.c[2 * k])
    grad_rows = gradient_along_trajectory(spec, pf, traj, k)
    g_vec = kd.Kbar_basis.T @ grad_rows[:, k]
    _, _, hess = energy_value_grad_hess(spec, pf)
    hxx = kd.Kbar_basis.T @ hess @ kd.Kbar_basis
    u_star = np.linalg.solve(hxx, -g_vec)
    correction = float(g_vec @ u_star + 0.5 * u_star @ hxx @ u_star)  # = -1/2 G' Hxx^-1 G <= 0
    mu = f2k + correction

    scale = max(abs(f2k), abs(correction))
    tol_eff = tol * (1.0 + scale)

    # map the reduced argmin (y0 = 1, w = u*) back onto the parameter sphere
    u_norm2 = float(u_star @ u_star)
    y0 = 1.0
    if u_norm2 > 0.0:
        for _ in range(200):
            f_val = y0**2 + y0 ** (2 * k) * u_norm2 - 1.0
            df = 2.0 * y0 + 2.0 * k * y0 ** (2 * k - 1) * u_norm2
            y_next = y0 - f_val / df
            if abs(y_next - y0) < 1e-16:
                y0 = y_next
                break
            y0 = min(max(y_next, 1e-12), 1.0)
    w_sphere = y0**k * u_star
    sphere_min = y0 ** (2 * k) * mu

    vel = y0 * traj.coeffs[0]
    cur = kd.Kbar_basis @ w_sphere
    common = dict(
        a_min=mu, a_max=None,
        arg_min_velocity=vel, arg_min_curvature=cur, scale=scale,
        notes=(
            f"a2k on the sphere attains {sphere_min:.6e} at y0={y0:.6f}",
            "w minimized in closed form; mu = F2k - 1/2 G' Hxx^-1 G",
        ),
    )
    if mu > tol_eff:
        return CritReport("strict-min", "order2k-family", 2 * k, 1, **common)
    if mu < -tol_eff:
        return CritReport("saddle", "order2k-family", 2 * k, 1, **common)
    return CritReport("inconclusive", "order2k-family", 2 * k, 1, **common)
