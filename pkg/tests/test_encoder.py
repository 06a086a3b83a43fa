# tests/test_encoder.py
import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from protoverb.corpus import RenderedPrompt
from protoverb.encoder import (
    encode,
    encode_backward,
    encode_batch,
    encode_batch_backward,
    export_external,
    ingest_external,
    init_encoder,
    parse_external,
    project,
    project_backward,
    tokenize,
)
from protoverb.gradcheck import check_grad
from protoverb.utils import ShapeError


def test_tokenize_is_deterministic_and_bounded():
    a = tokenize("The Cat, the  cat!", vocab_size=97)
    b = tokenize(RenderedPrompt(text="the cat the cat", mask_offset=0), vocab_size=97)
    assert a == b
    assert a[0] == a[2]
    assert all(0 <= t < 97 for t in a)


def test_encode_is_mean_then_projection():
    p = init_encoder(d_h=5, d_p=3, seed=1, vocab_size=11)
    h, v = encode(p, [2, 2, 7])
    assert_allclose(h, (2 * p.token_table[2] + p.token_table[7]) / 3)
    assert_allclose(v, p.projection @ h)


def test_encode_batch_matches_encode():
    p = init_encoder(d_h=6, d_p=4, seed=2, vocab_size=13)
    token_lists = [[1, 2], [3], [4, 4, 12]]
    H, V = encode_batch(p, token_lists)
    for i, tokens in enumerate(token_lists):
        h, v = encode(p, tokens)
        assert_allclose(H[i], h)
        assert_allclose(V[i], v)


def test_empty_tokens_rejected():
    p = init_encoder(d_h=4, d_p=3, seed=0, vocab_size=5)
    with pytest.raises(ShapeError):
        encode(p, [])
    with pytest.raises(ShapeError):
        encode_batch(p, [[1], []])


def test_init_is_seeded():
    a = init_encoder(d_h=4, d_p=3, seed=9, vocab_size=7)
    b = init_encoder(d_h=4, d_p=3, seed=9, vocab_size=7)
    assert_array_equal(a.token_table, b.token_table)
    assert_array_equal(a.projection, b.projection)


def test_batch_backward_against_finite_differences(rng):
    p = init_encoder(d_h=4, d_p=3, seed=5, vocab_size=9)
    token_lists = [[0, 3, 3], [8, 1], [3]]
    target = rng.normal(size=(3, 3))

    def f():
        _, V = encode_batch(p, token_lists)
        return float(np.sum(V * target))

    H, _ = encode_batch(p, token_lists)
    grads = encode_batch_backward(p, token_lists, H, target)
    check_grad(f, p.projection, grads["projection"], name="projection")
    check_grad(f, p.token_table, grads["token_table"], name="token_table")


def test_single_backward_matches_batch(rng):
    p = init_encoder(d_h=4, d_p=3, seed=5, vocab_size=9)
    g = rng.normal(size=3)
    single = encode_backward(p, [2, 5], g)
    H, _ = encode_batch(p, [[2, 5]])
    batch = encode_batch_backward(p, [[2, 5]], H, g[None, :])
    assert_allclose(single["projection"], batch["projection"])
    assert_allclose(single["token_table"], batch["token_table"])
    with pytest.raises(ShapeError):
        encode_backward(p, [2, 5], np.zeros(4))


def test_project_and_backward(rng):
    p = init_encoder(d_h=4, d_p=3, seed=5, vocab_size=2)
    H = rng.normal(size=(2, 4))
    assert_allclose(project(p, H), H @ p.projection.T)
    grads = project_backward(p, H, np.ones((2, 3)))
    assert not grads["token_table"].any()
    with pytest.raises(ShapeError):
        project(p, rng.normal(size=(2, 5)))


def test_external_round_trip_is_exact(tmp_path, rng):
    table = {f"en-{i:05d}": rng.normal(size=6) / 3.0 for i in range(1, 5)}
    path = tmp_path / "emb.tsv"
    export_external(table, str(path))
    again = ingest_external(str(path), d_h=6)
    assert list(again) == list(table)
    for k in table:
        assert_array_equal(again[k], table[k])


@pytest.mark.parametrize(
    "line, needle",
    [
        ("a\t1 2\n", "expected d_h=3"),
        ("a 1 2 3\n", "TAB"),
        ("a\t1 x 3\n", ":1:"),
        ("a\t1 nan 3\n", "non-finite"),
    ],
)
def test_external_errors(line, needle):
    with pytest.raises(ShapeError, match=needle):
        parse_external([line], d_h=3)


def test_external_duplicate_ids():
    with pytest.raises(ShapeError, match="duplicate"):
        parse_external(["a\t1 2 3\n", "a\t1 2 3\n"], d_h=3)
