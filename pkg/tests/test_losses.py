# tests/test_losses.py
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from protoverb.hierarchy import parent_of, parse_hierarchy
from protoverb.losses import (
    MISSING,
    Batch,
    LossToggles,
    ins_ins_at_level,
    loss_ins_ins,
    loss_ins_pro,
    loss_pro_pro,
    parent_rows,
    total_loss,
)
from protoverb.prototypes import init_prototypes
from protoverb.utils import HierarchyError, ShapeError

from conftest import random_hierarchy, random_paths

SEEDS = range(20)


# =============================================================================
# Brute-force oracles: one pair / term at a time
# =============================================================================
def _cos(u, w):
    return float(np.dot(u, w) / (np.linalg.norm(u) * np.linalg.norm(w)))


def brute_ins_ins(V, y, tau):
    total, anchors = 0.0, 0
    for i in range(len(V)):
        positives = [p for p in range(len(V)) if p != i and y[p] == y[i]]
        if not positives:
            continue
        denom = sum(math.exp(_cos(V[i], V[a]) / tau) for a in range(len(V)) if a != i)
        term = 0.0
        for p in positives:
            term -= math.log(math.exp(_cos(V[i], V[p]) / tau) / denom)
        total += term / len(positives)
        anchors += 1
    return total / anchors if anchors else 0.0


def brute_ins_pro(b, ps):
    N = len(b)
    total = 0.0
    for i in range(N):
        levels = [lvl for lvl, y in b.labels.items() if y[i] != MISSING]
        for lvl in levels:
            C = ps.level(lvl)
            sims = [_cos(b.vecs[i], c) / b.tau for c in C]
            gold = b.labels[lvl][i]
            log_p = sims[gold] - math.log(sum(math.exp(s) for s in sims))
            total -= log_p / (len(levels) * N)
    return total


def brute_pro_pro(ps, h, tau):
    terms = []
    for lvl in h.levels:
        if lvl < 2:
            continue
        fathers = ps.level(lvl - 1)
        for row, n in enumerate(h.nodes_at_level(lvl)):
            child = ps.level(lvl)[row]
            gold = h.row_of(parent_of(h, n))
            sims = [_cos(child, f) / tau for f in fathers]
            terms.append(-(sims[gold] - math.log(sum(math.exp(s) for s in sims))))
    return sum(terms) / len(terms)


def _random_case(seed, grandchildren=0):
    rng = np.random.default_rng(seed)
    h = random_hierarchy(rng, grandchildren=grandchildren)
    n = int(rng.integers(3, 9))
    d_p = int(rng.integers(3, 7))
    V = rng.normal(size=(n, d_p))
    paths = random_paths(h, n, rng)
    ps = init_prototypes(h, d_p=d_p, seed=seed)
    tau = float(rng.choice([0.1, 0.5, 1.0]))
    return h, Batch.from_paths(V, paths, h, tau), ps


# =============================================================================
# Oracle equivalence
# =============================================================================
@pytest.mark.parametrize("seed", SEEDS)
def test_ins_ins_matches_oracle(seed):
    h, b, _ = _random_case(seed)
    loss, _ = loss_ins_ins(b)
    assert abs(loss - brute_ins_ins(b.vecs, b.labels[2], b.tau)) <= 1e-9


@pytest.mark.parametrize("seed", SEEDS)
def test_ins_pro_matches_oracle(seed):
    h, b, ps = _random_case(seed)
    loss, _, _ = loss_ins_pro(b, ps)
    assert abs(loss - brute_ins_pro(b, ps)) <= 1e-9


@pytest.mark.parametrize("seed", SEEDS)
def test_pro_pro_matches_oracle(seed):
    h, b, ps = _random_case(seed, grandchildren=int(seed % 2))
    loss, _ = loss_pro_pro(ps, h, b.tau)
    assert abs(loss - brute_pro_pro(ps, h, b.tau)) <= 1e-9


def test_ins_ins_partial_levels(small_h, rng):
    """Levels 2 and 3 are averaged, each over the instances labelled there."""

    paths = [
        (0, 2, 5), (0, 2, 5), (0, 2, 6), (0, 3), (1, 4), (1, 4),
    ]
    V = rng.normal(size=(len(paths), 4))
    b = Batch.from_paths(V, paths, small_h, tau=0.5)
    expected_l2 = brute_ins_ins(V, b.labels[2], 0.5)
    idx = [0, 1, 2]
    expected_l3 = brute_ins_ins(V[idx], b.labels[3][idx], 0.5)
    loss, _ = loss_ins_ins(b)
    assert loss == pytest.approx((expected_l2 + expected_l3) / 2, abs=1e-12)


def test_ins_ins_without_positive_pairs(rng):
    loss, grad = ins_ins_at_level(rng.normal(size=(3, 4)), np.array([0, 1, 2]), 0.1)
    assert loss == 0.0
    assert not grad.any()


def test_ins_ins_needs_two_instances(rng):
    with pytest.raises(ShapeError):
        ins_ins_at_level(rng.normal(size=(1, 4)), np.array([0]), 0.1)


def test_pro_pro_needs_two_levels():
    h = parse_hierarchy(["1\tA\t\n", "1\tB\t\n"])
    ps = init_prototypes(h, d_p=3)
    with pytest.raises(HierarchyError):
        loss_pro_pro(ps, h, 0.1)


def test_parent_rows(pdtb2):
    rows = parent_rows(pdtb2, 2)
    assert rows.tolist() == [0, 0, 1, 1, 2, 2, 2, 2, 2, 3, 3]


def test_batch_validation(pdtb2, rng):
    with pytest.raises(ShapeError):
        Batch(vecs=rng.normal(size=(2, 3)), labels={1: np.array([0, 1])}, tau=0.0)
    with pytest.raises(ShapeError):
        Batch(vecs=rng.normal(size=(2, 3)), labels={1: np.array([0])})
    with pytest.raises(ShapeError):
        Batch.from_paths(rng.normal(size=(1, 3)), [()], pdtb2)


# =============================================================================
# Cosine geometry
# =============================================================================
@pytest.mark.parametrize("seed", range(5))
def test_losses_are_scale_invariant(seed):
    h, b, ps = _random_case(seed)
    base = total_loss(b, ps, h)

    V = b.vecs.copy()
    V[0] *= 4.2
    scaled_ps = ps.copy()
    scaled_ps.matrices[2][0] *= 0.3
    scaled_ps.matrices[1][-1] *= 17.0
    again = total_loss(Batch(vecs=V, labels=b.labels, tau=b.tau), scaled_ps, h)

    for term, value in base.terms().items():
        assert abs(value - again.terms()[term]) <= 1e-9


@pytest.mark.parametrize("seed", range(5))
def test_gradients_are_tangent(seed):
    h, b, ps = _random_case(seed, grandchildren=1)
    lb = total_loss(b, ps, h)

    def tangent(G, X):
        for g, x in zip(G, X):
            assert abs(g @ x) <= 1e-8 * np.linalg.norm(g) * np.linalg.norm(x) + 1e-300

    tangent(lb.grads["vecs"], b.vecs)
    for lvl, g in lb.grads["prototypes"].items():
        tangent(g, ps.level(lvl))


# =============================================================================
# Toggles
# =============================================================================
def test_disabled_terms_are_exactly_zero():
    h, b, ps = _random_case(3)
    only = total_loss(b, ps, h, LossToggles(ins_ins=False, pro_pro=False))
    assert only.l_ins_ins == 0.0
    assert only.l_pro_pro == 0.0
    assert only.l_total == only.l_ins_pro

    l_ins_pro, g_vecs, g_protos = loss_ins_pro(b, ps)
    assert_allclose(only.grads["vecs"], g_vecs)
    for lvl in ps.levels:
        assert_allclose(only.grads["prototypes"][lvl], g_protos[lvl])

    full = total_loss(b, ps, h)
    assert full.l_total == pytest.approx(full.l_ins_ins + full.l_ins_pro + full.l_pro_pro)
    assert full.l_pro_pro > 0.0


def test_ins_pro_rejects_unlabelled_and_wide_batches(pdtb2, rng):
    ps = init_prototypes(pdtb2, d_p=4)
    labels = {1: np.array([0, MISSING]), 2: np.array([0, MISSING])}
    with pytest.raises(ShapeError, match="no labels"):
        loss_ins_pro(Batch(vecs=rng.normal(size=(2, 4)), labels=labels), ps)

    labels = {1: np.array([0, 1]), 2: np.array([0, 2])}
    with pytest.raises(ShapeError, match="width"):
        loss_ins_pro(Batch(vecs=rng.normal(size=(2, 5)), labels=labels), ps)
