import json

import numpy as np
import pytest

from rigidkit import (
    DegenerateLeadingVertices,
    Framework,
    FrameworkValidationError,
    affine_span_dimension,
    corpus_items,
    framework_from_dict,
    framework_to_dict,
    load_corpus,
    load_framework,
    measure,
    permute_framework,
    pin,
    pin_with_permutation,
    save_framework,
)


def test_validation_rejects_self_loop():
    with pytest.raises(FrameworkValidationError):
        Framework(2, np.zeros((2, 2)) + [[0, 0], [1, 0]], [(0, 0)])


def test_validation_rejects_duplicate_edges():
    with pytest.raises(FrameworkValidationError):
        Framework(2, np.array([[0.0, 0], [1, 0]]), [(0, 1), (1, 0)])


def test_validation_rejects_out_of_range():
    with pytest.raises(FrameworkValidationError):
        Framework(2, np.array([[0.0, 0], [1, 0]]), [(0, 2)])


def test_validation_rejects_coincident_adjacent():
    with pytest.raises(FrameworkValidationError):
        Framework(2, np.array([[0.0, 0], [0, 0]]), [(0, 1)])


def test_coincident_nonadjacent_allowed():
    fw = Framework(2, np.array([[0.0, 0], [1, 0], [1, 0]]), [(0, 1), (0, 2)])
    assert fw.n_vertices == 3


def test_edges_canonicalized():
    fw = Framework(2, np.array([[0.0, 0], [1, 0], [0, 1]]), [(2, 0), (1, 0)])
    assert fw.edges == ((0, 1), (0, 2))


def test_affine_span_single_point():
    assert affine_span_dimension(np.array([[1.0, 2.0, 3.0]])) == 0


def test_affine_span_general_position():
    assert affine_span_dimension(np.array([[0.0, 0], [1, 0], [0.5, 1]])) == 2


def test_affine_span_collinear():
    assert affine_span_dimension(np.array([[0.0, 0], [1, 0], [2, 0]])) == 1


def test_affine_span_half_flat_prism():
    assert affine_span_dimension(load_corpus("half_flat_prism").vertices) == 2


def test_measure_unit_segment():
    seg = Framework(2, np.array([[0.0, 0], [1, 0]]), [(0, 1)])
    assert measure(seg, "lengths").values.tolist() == [1.0]
    assert measure(seg, "squared").values.tolist() == [1.0]


def test_measure_half_flat_prism_edge_56():
    fw = load_corpus("half_flat_prism")
    idx = fw.edges.index((4, 5))
    assert measure(fw, "lengths").values[idx] == pytest.approx(3.0, abs=1e-15)
    # vertices 5 and 6 sit at (-1, 0) and (2, 0)
    assert np.allclose(fw.vertices[4], [-1, 0])
    assert np.allclose(fw.vertices[5], [2, 0])


def test_pin_already_pinned_is_identity(triangle_pinned):
    pf2, iso = pin(triangle_pinned.base)
    assert np.array_equal(pf2.base.vertices, triangle_pinned.base.vertices)
    assert np.array_equal(iso.rotation, np.eye(2))
    assert np.array_equal(iso.translation, np.zeros(2))


def test_pin_idempotent(corpus_analysis):
    for item in corpus_analysis.values():
        pf = item["pf"]
        again, iso = pin(pf.base)
        assert np.array_equal(again.base.vertices, pf.base.vertices)


def test_pin_recovers_rotated_triangle():
    theta = np.deg2rad(30.0)
    rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    pts = np.array([[0.0, 0], [1, 0], [0.5, 1]])
    fw = Framework(2, pts @ rot.T, [(0, 1), (1, 2), (0, 2)])
    pf, iso = pin(fw)
    assert np.allclose(pf.base.vertices, pts, atol=1e-12)
    # the returned isometry maps the input onto the pinned coordinates
    assert np.allclose(iso.apply(fw.vertices), pf.base.vertices, atol=1e-12)


def test_pin_preserves_k33_lengths():
    fw = load_corpus("k33")
    pf, _ = pin(fw)
    assert np.allclose(
        measure(pf.base, "lengths").values, measure(fw, "lengths").values, atol=1e-12
    )


def test_measure_invariant_under_pin(corpus_analysis):
    for item in corpus_analysis.values():
        fw = item["framework"]
        pf, _, _ = pin_with_permutation(fw)
        before = np.sort(measure(fw, "lengths").values)
        after = np.sort(measure(pf.base, "lengths").values)
        assert np.allclose(before, after, atol=1e-10)


def test_pin_degenerate_leading_vertices_raises():
    # coned prism: its first four vertices are coplanar, so 3-pinning in the
    # given order must fail and auto-permutation must recover
    fw = load_corpus("coned_prism")
    with pytest.raises(DegenerateLeadingVertices):
        pin(fw)
    pf, _, perm = pin_with_permutation(fw)
    assert perm != list(range(fw.n_vertices))
    assert pf.span_dim == 3


def test_free_coordinate_count(corpus_analysis):
    for item in corpus_analysis.values():
        pf = item["pf"]
        n, d, ell = pf.base.n_vertices, pf.base.dimension, pf.span_dim
        pinned_count = d + sum(d - i for i in range(1, ell + 1))
        assert pf.n_free == n * d - pinned_count


def test_corpus_files_validate_and_span(corpus_analysis):
    for name, item in corpus_analysis.items():
        fw = item["framework"]
        assert affine_span_dimension(fw.vertices) == fw.dimension, name


def test_json_round_trip(tmp_path):
    fw = load_corpus("leonardo3")
    path = tmp_path / "leo.json"
    save_framework(fw, path)
    back = load_framework(path)
    assert back.dimension == fw.dimension
    assert back.edges == fw.edges
    assert np.array_equal(back.vertices, fw.vertices)


def test_json_edges_are_one_based(tmp_path):
    seg = Framework(2, np.array([[0.0, 0], [1, 0]]), [(0, 1)], labels=("a", "b"))
    data = framework_to_dict(seg)
    assert data["edges"] == [[1, 2]]
    assert data["labels"] == ["a", "b"]
    assert framework_from_dict(data).edges == ((0, 1),)


def test_malformed_json_raises(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"dimension": 2, "vertices": [[0, 0]]}))
    with pytest.raises(FrameworkValidationError):
        load_framework(path)


def test_permute_framework_round_trip():
    fw = load_corpus("k33")
    perm = [3, 1, 5, 0, 2, 4]
    pfw = permute_framework(fw, perm)
    assert sorted(np.sort(measure(pfw, "lengths").values)) == pytest.approx(
        sorted(np.sort(measure(fw, "lengths").values))
    )
    inv = [perm.index(v) for v in range(6)]
    back = permute_framework(pfw, inv)
    assert np.array_equal(back.vertices, fw.vertices)
    assert back.edges == fw.edges


def test_corpus_has_eight_frameworks():
    names = [name for name, _, _ in corpus_items()]
    assert len(names) == 8


def test_planar_framework_in_three_dimensions():
    # a triangle living in a 2-plane of R^3: pinning uses span 2, the free
    # coordinates collapse to the planar ones, and the order is 1
    from rigidkit import kernel_decomposition, rigidity_matrix, rigidity_order

    tri3 = Framework(
        3,
        np.array([[1.0, 1.0, 1.0], [2.0, 1.0, 2.0], [1.5, 2.5, 1.5]]),
        [(0, 1), (1, 2), (0, 2)],
    )
    pf, iso = pin(tri3)
    assert pf.span_dim == 2
    assert pf.n_free == 3
    kd = kernel_decomposition(rigidity_matrix(pf))
    assert kd.dim_K == 0
    rep = rigidity_order(pf)
    assert (rep.verdict, rep.order) == ("order", 1)
