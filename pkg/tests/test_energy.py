import math

import numpy as np
import pytest

from rigidkit import (
    FAMILIES,
    EnergySpec,
    Framework,
    Jet,
    PolyTrajectory,
    ZeroLengthEdge,
    classify_flex,
    compose_series,
    energy_along_trajectory,
    energy_gap_and_grad,
    energy_value_grad_hess,
    faa_di_bruno_term,
    kernel_decomposition,
    kernel_of_hessian_equals_K,
    pin,
    rigidity_matrix,
)


# ---------------------------------------------------------------------------
# values, gradients, Hessians
# ---------------------------------------------------------------------------

def test_rest_configuration_values(triangle, triangle_pinned):
    for fam in FAMILIES:
        spec = EnergySpec.for_framework(triangle, fam)
        E, g, H = energy_value_grad_hess(spec, triangle_pinned)
        expected = -3.0 if fam == "lj" else 0.0
        assert E == pytest.approx(expected, abs=1e-12)
        assert np.linalg.norm(g) < 1e-12
        assert np.min(np.linalg.eigvalsh(H)) > -1e-10


def test_harmonic_stretch_quadratic():
    seg = Framework(2, np.array([[0.0, 0.0], [2.0, 0.0]]), [(0, 1)])
    pf, _ = pin(seg)
    spec = EnergySpec.for_framework(seg, "harmonic", stiffness=3.0)
    for delta in (0.1, -0.05, 0.3):
        E, _, _ = energy_value_grad_hess(spec, pf, np.array([2.0 + delta]))
        assert E == pytest.approx(0.5 * 3.0 * delta**2, rel=1e-12)


@pytest.mark.parametrize("fam", FAMILIES)
def test_gradient_matches_finite_differences(fam, triangle, triangle_pinned):
    spec = EnergySpec.for_framework(triangle, fam)
    rng = np.random.default_rng(10)
    q = triangle_pinned.free_vector() + 0.05 * rng.standard_normal(triangle_pinned.n_free)
    _, grad, hess = energy_value_grad_hess(spec, triangle_pinned, q)
    h = 1e-6
    fd_grad = np.zeros_like(grad)
    fd_hess = np.zeros_like(hess)
    for i in range(q.size):
        qp, qm = q.copy(), q.copy()
        qp[i] += h
        qm[i] -= h
        ep = energy_value_grad_hess(spec, triangle_pinned, qp)
        em = energy_value_grad_hess(spec, triangle_pinned, qm)
        fd_grad[i] = (ep[0] - em[0]) / (2 * h)
        fd_hess[:, i] = (ep[1] - em[1]) / (2 * h)
    assert np.linalg.norm(fd_grad - grad) / np.linalg.norm(grad) < 1e-6
    assert np.linalg.norm(fd_hess - hess) / np.linalg.norm(hess) < 1e-6


def test_gap_and_grad_matches_plain_energy(square, square_pinned):
    rng = np.random.default_rng(11)
    for fam in FAMILIES:
        spec = EnergySpec.for_framework(square, fam)
        delta = 0.03 * rng.standard_normal(square_pinned.n_free)
        gap, grad = energy_gap_and_grad(spec, square_pinned, delta)
        E, g_full, _ = energy_value_grad_hess(spec, square_pinned, square_pinned.free_vector() + delta)
        assert gap == pytest.approx(E - spec.rest_energy(), rel=1e-9, abs=1e-14)
        assert np.allclose(grad, g_full, atol=1e-9)


def test_zero_length_edge_raises(square, square_pinned):
    spec = EnergySpec.for_framework(square, "harmonic")
    q = square_pinned.free_vector().copy()
    # collapse vertex 2 onto vertex 1 = (1, 0): free coords are
    # (v1,x), (v2,x), (v2,y), (v3,x), (v3,y)
    q[1], q[2] = q[0], 0.0
    with pytest.raises(ZeroLengthEdge):
        energy_value_grad_hess(spec, square_pinned, q)


def test_spec_bound_to_edge_order(square, square_pinned, triangle):
    spec = EnergySpec.for_framework(triangle, "harmonic")
    with pytest.raises(ValueError):
        energy_value_grad_hess(spec, square_pinned)


# ---------------------------------------------------------------------------
# Hessian kernel = K
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("fam", FAMILIES)
def test_kernel_identity_triangle(fam, triangle, triangle_pinned):
    spec = EnergySpec.for_framework(triangle, fam)
    kd = kernel_decomposition(rigidity_matrix(triangle_pinned))
    assert kernel_of_hessian_equals_K(spec, triangle_pinned, kd)


@pytest.mark.parametrize("fam", FAMILIES)
def test_kernel_identity_half_flat_prism(fam, corpus_analysis):
    item = corpus_analysis["half_flat_prism"]
    spec = EnergySpec.for_framework(item["pf"].base, fam)
    assert kernel_of_hessian_equals_K(spec, item["pf"], item["kd"])


def test_kernel_identity_square_algebraic(square, square_pinned):
    spec = EnergySpec.for_framework(square, "algebraic")
    kd = kernel_decomposition(rigidity_matrix(square_pinned))
    assert kd.dim_K == 1
    assert kernel_of_hessian_equals_K(spec, square_pinned, kd)


# ---------------------------------------------------------------------------
# jets along trajectories
# ---------------------------------------------------------------------------

def test_constant_trajectory_zero_jet(square, square_pinned):
    spec = EnergySpec.for_framework(square, "morse")
    traj = PolyTrajectory(np.zeros((2, square_pinned.n_free)))
    jet = energy_along_trajectory(spec, square_pinned, traj, 6)
    assert np.allclose(jet.c, 0.0, atol=1e-15)


def test_square_flex_jet_harmonic_with_hand_oracle(square, square_pinned):
    # along p(t) = p + p' t with p' the square's unit flex, each edge has
    # m_e(t) = 1 + a_e t^2 with a_e = |p'_v - p'_w|^2, so
    # E(t) = sum_e (sqrt(1 + a_e t^2) - 1)^2 / 2 = sum_e a_e^2 t^4 / 8 + O(t^6)
    kd = kernel_decomposition(rigidity_matrix(square_pinned))
    p1 = kd.K_basis[:, 0]
    full = square_pinned.embed_tangent(p1)
    a = np.array([
        np.sum((full[v] - full[w]) ** 2) for v, w in square_pinned.base.edges
    ])
    spec = EnergySpec.for_framework(square, "harmonic")
    jet = energy_along_trajectory(spec, square_pinned, PolyTrajectory(p1[None, :]), 4)
    assert np.allclose(jet.c[:4], 0.0, atol=1e-14)
    assert jet.c[4] == pytest.approx(np.sum(a**2) / 8.0, rel=1e-12)
    assert jet.c[4] > 0
    # independent cross-check: centered 4th finite difference of E(p + t p')
    h = 1e-2
    weights = {-2: 1.0, -1: -4.0, 0: 6.0, 1: -4.0, 2: 1.0}
    acc = 0.0
    for off, wgt in weights.items():
        E, _, _ = energy_value_grad_hess(spec, square_pinned, square_pinned.free_vector() + off * h * p1)
        acc += wgt * E
    fd_c4 = acc / h**4 / math.factorial(4)
    assert fd_c4 == pytest.approx(jet.c[4], rel=1e-3)


def test_classify_flex_square(square_pinned):
    kd = kernel_decomposition(rigidity_matrix(square_pinned))
    p1 = kd.K_basis[:, 0]
    assert classify_flex(square_pinned, PolyTrajectory(p1[None, :]), 1) == (1, 1)
    # reparameterized p' t^2 + 0 t^3 is a (2,3)-flex
    zeros = np.zeros_like(p1)
    traj = PolyTrajectory(np.vstack([zeros, p1, zeros]))
    assert classify_flex(square_pinned, traj, 3) == (2, 3)


def test_classify_flex_half_flat_witness(corpus_analysis):
    item = corpus_analysis["half_flat_prism"]
    assert classify_flex(item["pf"], item["report"].witness, 6) == (1, 3)


def test_l_and_m_vanishing_orders_agree(corpus_analysis):
    # k-vanishing read off the length jets equals the squared-length reading
    from rigidkit.energy import _edge_m_jets

    for name, item in corpus_analysis.items():
        rep = item["report"]
        k = rep.order
        pf = item["pf"]
        m_jets = _edge_m_jets(pf, rep.witness, k)
        m_rows = np.array([j.c for j in m_jets])
        l_rows = np.array([(j.sqrt() - np.sqrt(j.c[0])).c for j in m_jets])
        tol = 1e-7 if name == "sphere_packing_1" else 1e-8
        for rows in (m_rows, l_rows):
            per_order = np.max(np.abs(rows[:, 1:]), axis=0)
            scale = np.max(np.abs(m_rows))
            vanish = 0
            for i, v in enumerate(per_order, start=1):
                if v <= tol * scale:
                    vanish = i
                else:
                    break
            assert vanish == k - 1, (name, rows is l_rows)


# ---------------------------------------------------------------------------
# Faa di Bruno
# ---------------------------------------------------------------------------

def test_faa_explicit_expansions_match_textbook_forms():
    rng = np.random.default_rng(12)
    f = rng.standard_normal(7)   # f[m] = m-th derivative at g(0)
    g = rng.standard_normal(7)   # g[i] = i-th derivative at 0
    explicit = {
        1: f[1] * g[1],
        2: f[1] * g[2] + f[2] * g[1] ** 2,
        3: f[1] * g[3] + 3 * f[2] * g[1] * g[2] + f[3] * g[1] ** 3,
        4: f[1] * g[4] + f[2] * (4 * g[1] * g[3] + 3 * g[2] ** 2)
           + f[3] * 6 * g[1] ** 2 * g[2] + f[4] * g[1] ** 4,
        5: f[1] * g[5] + f[2] * (5 * g[1] * g[4] + 10 * g[2] * g[3])
           + f[3] * (10 * g[1] ** 2 * g[3] + 15 * g[1] * g[2] ** 2)
           + f[4] * 10 * g[1] ** 3 * g[2] + f[5] * g[1] ** 5,
        6: f[1] * g[6] + f[2] * (6 * g[1] * g[5] + 15 * g[2] * g[4] + 10 * g[3] ** 2)
           + f[3] * (15 * g[1] ** 2 * g[4] + 60 * g[1] * g[2] * g[3] + 15 * g[2] ** 3)
           + f[4] * (20 * g[1] ** 3 * g[3] + 45 * g[1] ** 2 * g[2] ** 2)
           + f[5] * 15 * g[1] ** 4 * g[2] + f[6] * g[1] ** 6,
    }
    for n, expected in explicit.items():
        assert faa_di_bruno_term(f, g, n) == pytest.approx(expected, rel=1e-13)


def test_faa_vanishing_first_derivative():
    rng = np.random.default_rng(13)
    f = rng.standard_normal(3)
    g = rng.standard_normal(3)
    g[1] = 0.0
    assert faa_di_bruno_term(f, g, 2) == pytest.approx(f[1] * g[2], rel=1e-14)


def test_faa_agrees_with_jet_composition():
    rng = np.random.default_rng(14)
    for _ in range(100):
        n = rng.integers(1, 9)
        f = rng.standard_normal(n + 1)
        g = rng.standard_normal(n + 1)
        g_coeffs = np.array([g[i] / math.factorial(i) for i in range(n + 1)])
        comp = compose_series(f, Jet(g_coeffs))
        jet_val = comp.c[n] * math.factorial(n)
        direct = faa_di_bruno_term(f, g, n)
        assert jet_val == pytest.approx(direct, rel=1e-10, abs=1e-12)


def test_vanishing_composition_property():
    # if g is k-vanishing then f(g) is k-vanishing
    rng = np.random.default_rng(15)
    for _ in range(20):
        k = int(rng.integers(1, 6))
        order = 12
        g = np.zeros(order + 1)
        g[0] = rng.standard_normal()
        g[k + 1 :] = rng.standard_normal(order - k)
        f = rng.standard_normal(order + 1)
        comp = compose_series(f, Jet(g))
        assert np.max(np.abs(comp.c[1 : k + 1])) < 1e-12 * max(1.0, np.max(np.abs(comp.c)))


def test_leading_coefficient_formula():
    # g (k-1)-vanishing and f'(g0) = 0: coefficient 2k of f(g) equals
    # f'' g_k^2 / 2 in Taylor-coefficient form (= (1/(2 (k!)^2)) f'' (g^(k))^2)
    rng = np.random.default_rng(16)
    for _ in range(20):
        k = int(rng.integers(1, 6))
        order = 2 * k
        g = np.zeros(order + 1)
        g[0] = rng.standard_normal()
        g[k:] = rng.standard_normal(order - k + 1)
        f = rng.standard_normal(order + 1)
        f[1] = 0.0
        comp = compose_series(f, Jet(g))
        expected = 0.5 * f[2] * g[k] ** 2
        assert comp.c[2 * k] == pytest.approx(expected, rel=1e-10, abs=1e-12)


# ---------------------------------------------------------------------------
# flex <-> E-flex equivalence on the corpus
# ---------------------------------------------------------------------------

def test_flex_eflex_equivalence(corpus_analysis):
    # a (1, k-1)-flex is a (1, 2k-2) and a (1, 2k-1) E-flex but not (1, 2k)
    for name, item in corpus_analysis.items():
        if name == "sphere_packing_1":
            continue   # data-limited; covered with its own margins elsewhere
        rep = item["report"]
        k = rep.order
        for fam in ("harmonic", "lj"):
            spec = EnergySpec.for_framework(item["pf"].base, fam)
            jet = energy_along_trajectory(spec, item["pf"], rep.witness, 2 * k)
            scale = np.max(np.abs(jet.c))
            assert np.max(np.abs(jet.c[1 : 2 * k])) < 1e-8 * scale, (name, fam)
            assert jet.c[2 * k] > 1e-8 * scale, (name, fam)
