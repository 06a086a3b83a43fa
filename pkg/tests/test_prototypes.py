# tests/test_prototypes.py
import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from protoverb.hierarchy import parse_hierarchy
from protoverb.prototypes import (
    PrototypeSet,
    cosine_matrix,
    cosine_sim,
    init_prototypes,
    normalize_rows,
    normalize_rows_backward,
    read_prototypes,
    similarities,
    write_prototypes,
)
from protoverb.utils import DegenerateVectorError, ShapeError


def test_init_shapes(pdtb2):
    ps = init_prototypes(pdtb2, d_p=8, seed=0)
    assert ps.levels == (1, 2)
    assert ps.level(1).shape == (4, 8)
    assert ps.level(2).shape == (11, 8)
    assert_array_equal(ps.level(2), init_prototypes(pdtb2, d_p=8, seed=0).level(2))


def test_init_rejects_tiny_dimension(pdtb2):
    with pytest.raises(ShapeError):
        init_prototypes(pdtb2, d_p=1)


def test_cosine_scale_invariance(rng):
    u, w = rng.normal(size=5), rng.normal(size=5)
    assert abs(cosine_sim(u, w) - cosine_sim(3.7 * u, 0.01 * w)) <= 1e-12
    assert cosine_sim(u, u) == pytest.approx(1.0)


def test_degenerate_vectors_raise(rng):
    with pytest.raises(DegenerateVectorError):
        cosine_sim(np.zeros(3), rng.normal(size=3))
    with pytest.raises(DegenerateVectorError):
        normalize_rows(np.array([[1.0, 0.0], [0.0, 1e-13]]))
    with pytest.raises(ShapeError):
        cosine_sim(np.ones(2), np.ones(3))


def test_cosine_matrix_agrees_with_pairwise(rng):
    A, B = rng.normal(size=(3, 4)), rng.normal(size=(5, 4))
    M = cosine_matrix(A, B)
    for i in range(3):
        for j in range(5):
            assert M[i, j] == pytest.approx(cosine_sim(A[i], B[j]), abs=1e-12)


def test_normalize_backward_is_tangent(rng):
    """Pulled-back gradients have no radial component."""

    X = rng.normal(size=(4, 6))
    X_hat, norms = normalize_rows(X)
    G = normalize_rows_backward(X_hat, norms, rng.normal(size=(4, 6)))
    for g, x in zip(G, X):
        assert abs(g @ x) <= 1e-8 * np.linalg.norm(g) * np.linalg.norm(x)


def test_similarities(pdtb2, rng):
    ps = init_prototypes(pdtb2, d_p=6, seed=1)
    v = rng.normal(size=6)
    assert_allclose(similarities(v, ps, 1), cosine_matrix(v[None, :], ps.level(1))[0])
    with pytest.raises(ShapeError):
        similarities(rng.normal(size=5), ps, 1)
    with pytest.raises(ShapeError):
        ps.level(3)


def test_prototype_file_is_lossless(tmp_path, small_h):
    ps = init_prototypes(small_h, d_p=5, seed=4)
    path = tmp_path / "prototypes.tsv"
    write_prototypes(ps, small_h, str(path))
    again = read_prototypes(str(path), small_h)
    for lvl in small_h.levels:
        assert_array_equal(again.level(lvl), ps.level(lvl))


def test_prototype_file_checks_class_names(tmp_path, small_h):
    ps = init_prototypes(small_h, d_p=5, seed=4)
    path = tmp_path / "prototypes.tsv"
    write_prototypes(ps, small_h, str(path))

    other = parse_hierarchy(
        ["1\tComparison\t\n", "1\tTemporal\t\n", "2\tContrast\tComparison\n",
         "2\tConcession\tComparison\n", "2\tSynchrony\tTemporal\n",
         "3\tJuxtaposition\tComparison.Contrast\n", "3\tOpposition\tComparison.Contrast\n"]
    )
    with pytest.raises(ShapeError, match="do not match"):
        read_prototypes(str(path), other)


def test_set_shape_checks(small_h, rng):
    with pytest.raises(ShapeError):
        PrototypeSet({1: rng.normal(size=(2, 3)), 2: rng.normal(size=(3, 4))})
    ps = PrototypeSet({1: rng.normal(size=(3, 4)), 2: rng.normal(size=(3, 4)), 3: rng.normal(size=(2, 4))})
    with pytest.raises(ShapeError):
        ps.check(small_h)

    copy = init_prototypes(small_h, d_p=4).copy()
    copy.matrices[1][0] = 0.0
    with pytest.raises(DegenerateVectorError):
        copy.check(small_h)


def test_sense_names_that_look_like_headers(tmp_path):
    h = parse_hierarchy(
        ["1\td_p\t\n", "1\tlevel\t\n", "2\td_p\td_p\n", "2\tOther\tlevel\n"]
    )
    ps = init_prototypes(h, d_p=3, seed=2)
    path = tmp_path / "prototypes.tsv"
    write_prototypes(ps, h, str(path))
    again = read_prototypes(str(path), h)
    for lvl in h.levels:
        assert_array_equal(again.level(lvl), ps.level(lvl))


def test_malformed_numbers_name_the_line(tmp_path, small_h):
    ps = init_prototypes(small_h, d_p=4, seed=0)
    path = tmp_path / "prototypes.tsv"
    write_prototypes(ps, small_h, str(path))
    lines = path.read_text().splitlines()
    lines[-1] = lines[-1].split("\t")[0] + "\t0.1 0.2 zero 0.4"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ShapeError, match=rf":{len(lines)}:"):
        read_prototypes(str(path), small_h)

    path.write_text("d_p\tfour\n")
    with pytest.raises(ShapeError, match=":1:"):
        read_prototypes(str(path))
