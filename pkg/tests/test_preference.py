import numpy as np
import pytest

from divmine.data import database_from_transactions, pattern_of
from divmine.preference import (
    AggregationConfig,
    FeatureLayout,
    RankedQuery,
    aggregate_weights,
    disc_features,
    extract_features,
    icv,
    layout_from_letters,
    learn_discriminating_pattern,
    learn_weights,
    pairwise_examples,
    phi_logistic,
)


def example1_query():
    """p1={4,6}, p2={1,6}, p3={0}, p4={3}; user order p2 > p1 > p3 > p4.

    The database realizes the stated relative frequencies over 100
    transactions: freq(p1)=0.54, freq(p2)=0.18, freq(p3)=0.36;
    freq(p4)=0.10 is unstated in the source example and chosen freely.
    """
    txns = []
    txns += [{1, 4, 6} for _ in range(9)]  # {4,6} and {1,6} together
    txns += [{4, 6} for _ in range(45)]  # {4,6} only -> 54 total
    txns += [{1, 6} for _ in range(9)]  # {1,6} -> 18 total
    txns += [{0} for _ in range(36)]
    txns += [{3} for _ in range(1)]
    # pad to 100 with a filler item; keep {3} at 10 transactions
    txns += [{3, 5} for _ in range(0)]
    assert len(txns) == 100
    db = database_from_transactions(txns)
    p1 = pattern_of(db, [4, 6])
    p2 = pattern_of(db, [1, 6])
    p3 = pattern_of(db, [0])
    p4 = pattern_of(db, [3])
    q = RankedQuery(patterns=(p1, p2, p3, p4), ranks=(2, 1, 3, 4))
    return db, q


def test_example1_database_frequencies():
    db, q = example1_query()
    p1, p2, p3, p4 = q.patterns
    assert p1.support == 54
    assert p2.support == 18
    assert p3.support == 36
    assert db.n_items == 7


def items_freq_layout(db):
    return FeatureLayout(
        n_items=db.n_items,
        n_transactions=db.n_transactions,
        items=True,
        transactions=False,
        length=False,
        frequency=True,
    )


def test_extract_features_example1():
    db, q = example1_query()
    layout = items_freq_layout(db)
    f1 = extract_features(q.patterns[0], db, layout)
    np.testing.assert_allclose(f1, [0, 0, 0, 0, 1, 0, 1, 0.54])
    f2 = extract_features(q.patterns[1], db, layout)
    np.testing.assert_allclose(f2 - f1, [0, 1, 0, 0, -1, 0, 0, -0.36])


def test_extract_features_empty_layout():
    db, q = example1_query()
    layout = FeatureLayout(
        n_items=db.n_items,
        n_transactions=db.n_transactions,
        items=False,
        transactions=False,
        length=False,
        frequency=False,
    )
    assert extract_features(q.patterns[0], db, layout).shape == (0,)


def test_pairwise_examples_counts_and_order():
    db, q = example1_query()
    layout = items_freq_layout(db)
    feats = [extract_features(p, db, layout) for p in q.patterns]
    ex = pairwise_examples(q, feats)
    assert len(ex) == 6
    # first example is F(rank1) - F(rank2) = F2 - F1
    np.testing.assert_allclose(ex[0], feats[1] - feats[0])


def test_pairwise_reversal_negates():
    db, q = example1_query()
    layout = items_freq_layout(db)
    feats = [extract_features(p, db, layout) for p in q.patterns]
    fwd = pairwise_examples(q, feats)
    rev_q = RankedQuery(patterns=q.patterns, ranks=tuple(5 - r for r in q.ranks))
    rev = pairwise_examples(rev_q, feats)
    np.testing.assert_allclose(np.sort(np.vstack(fwd), axis=0),
                               -np.sort(-np.vstack(rev), axis=0)[::-1] * -1 * -1)
    # simpler: the multisets are negations of each other
    assert {tuple(np.round(v, 9)) for v in fwd} == {
        tuple(np.round(-v, 9)) for v in rev
    }


def test_learn_weights_single_example():
    w = learn_weights(np.array([[0.0, 1.0, 0.0]]), lam=0.0, warm_start=np.zeros(3))
    assert w[1] > 0
    assert w[0] == 0 and w[2] == 0


def test_learn_weights_example1_sign_structure():
    db, q = example1_query()
    layout = items_freq_layout(db)
    feats = [extract_features(p, db, layout) for p in q.patterns]
    ex = np.array(pairwise_examples(q, feats))
    w = learn_weights(ex, lam=0.001, warm_start=np.zeros(layout.width))
    assert w[1] > 0  # item 1 appears only in the top pattern
    assert w[3] < 0  # item 3 appears only in the bottom pattern
    assert w[0] < 0  # item 0 only in rank-3 pattern
    item_weights = w[: db.n_items]
    assert int(np.argmax(item_weights)) == 6


def test_learn_weights_duplicate_set_direction_preserved():
    db, q = example1_query()
    layout = items_freq_layout(db)
    feats = [extract_features(p, db, layout) for p in q.patterns]
    ex = np.array(pairwise_examples(q, feats))
    w1 = learn_weights(ex, lam=0.001, warm_start=np.zeros(layout.width))
    w2 = learn_weights(
        np.vstack([ex, ex]), lam=0.001, warm_start=np.zeros(layout.width)
    )
    cos = np.dot(w1, w2) / (np.linalg.norm(w1) * np.linalg.norm(w2))
    assert cos > 0.99
    assert np.all(np.sign(np.round(w1, 6)) == np.sign(np.round(w2, 6)))


def test_learn_weights_deterministic():
    ex = np.array([[1.0, -0.5], [0.2, 0.4]])
    a = learn_weights(ex, 0.01, np.zeros(2))
    b = learn_weights(ex, 0.01, np.zeros(2))
    np.testing.assert_array_equal(a, b)


def test_phi_logistic_midpoint_and_range():
    f = np.array([1.0, 2.0])
    assert phi_logistic(f, np.zeros(2), 0.1) == pytest.approx(0.55)
    assert phi_logistic(f, np.array([1e4, 1e4]), 0.1) == pytest.approx(1.0, abs=1e-9)
    assert phi_logistic(f, np.array([-1e4, -1e4]), 0.1) == pytest.approx(0.1, abs=1e-9)


def test_phi_logistic_monotone_in_dot():
    rng = np.random.default_rng(0)
    for _ in range(200):
        f = rng.normal(size=4)
        w = rng.normal(size=4)
        eps = 1e-4
        hi = phi_logistic(f, w + eps * f / np.dot(f, f), 0.1)
        lo = phi_logistic(f, w, 0.1)
        assert hi >= lo - 1e-12


def test_phi_logistic_gradient_matches_finite_differences():
    rng = np.random.default_rng(1)
    a = 0.1
    for _ in range(50):
        f = rng.normal(size=5)
        w = rng.normal(size=5)
        z = np.dot(w, f)
        sig = 1 / (1 + np.exp(-z))
        analytic = (1 - a) * sig * (1 - sig) * f
        eps = 1e-6
        for j in range(5):
            wp, wm = w.copy(), w.copy()
            wp[j] += eps
            wm[j] -= eps
            fd = (phi_logistic(f, wp, a) - phi_logistic(f, wm, a)) / (2 * eps)
            assert fd == pytest.approx(analytic[j], rel=1e-5, abs=1e-8)


def test_icv_worked_examples():
    _, q = example1_query()
    assert icv({1}, q) == pytest.approx(3.0, abs=1e-9)
    assert icv({0}, q) == pytest.approx(1 / 3, abs=1e-9)
    assert icv({6}, q) == pytest.approx(4.0, abs=1e-9)


def test_icv_all_contain_is_zero():
    db = database_from_transactions([{0, 1}, {0, 2}])
    q = RankedQuery(
        patterns=(pattern_of(db, [0, 1]), pattern_of(db, [0, 2])), ranks=(1, 2)
    )
    assert icv({0}, q) == 0.0


def test_icv_matches_direct_formula_random():
    rng = np.random.default_rng(12)
    for _ in range(50):
        k = int(rng.integers(2, 8))
        n_items = int(rng.integers(2, 10))
        txns = [set(range(n_items)) for _ in range(2)]
        db = database_from_transactions(txns)
        pats = []
        seen = set()
        while len(pats) < k:
            items = tuple(
                sorted({int(i) for i in rng.choice(n_items, size=2, replace=False)})
            )
            if items in seen:
                continue
            seen.add(items)
            pats.append(pattern_of(db, items))
        ranks = tuple(int(r) + 1 for r in rng.permutation(k))
        q = RankedQuery(patterns=tuple(pats), ranks=ranks)
        y = {int(rng.integers(n_items))}
        in_ranks = [r for p, r in zip(pats, ranks) if y <= set(p.items)]
        out_ranks = [r for p, r in zip(pats, ranks) if not y <= set(p.items)]
        mu = np.mean(ranks)
        expected = 0.0
        if in_ranks:
            expected += len(in_ranks) * (mu - np.mean(in_ranks)) ** 2
        if out_ranks:
            expected += len(out_ranks) * (mu - np.mean(out_ranks)) ** 2
        assert icv(y, q) == pytest.approx(expected, abs=1e-9)


def test_learn_discriminating_pattern_example3():
    _, q = example1_query()
    assert learn_discriminating_pattern(q) == (6,)


def test_disc_candidate_union_not_better():
    _, q = example1_query()
    # {1, 6} is admissible (subset of p2) but its icv of 3 loses to 4
    assert icv({1, 6}, q) == pytest.approx(3.0, abs=1e-9)


def test_disc_singleton_floor():
    rng = np.random.default_rng(4)
    for _ in range(30):
        k = int(rng.integers(2, 6))
        n_items = 8
        db = database_from_transactions([set(range(n_items))] * 2)
        pats, seen = [], set()
        while len(pats) < k:
            size = int(rng.integers(1, 4))
            items = tuple(sorted({int(i) for i in rng.choice(n_items, size=size, replace=False)}))
            if items in seen:
                continue
            seen.add(items)
            pats.append(pattern_of(db, items))
        ranks = tuple(int(r) + 1 for r in rng.permutation(k))
        q = RankedQuery(patterns=tuple(pats), ranks=ranks)
        best = learn_discriminating_pattern(q)
        for p in pats:
            for i in p.items:
                assert icv(best, q) >= icv({i}, q) - 1e-12


def test_disc_single_pattern_query():
    db = database_from_transactions([{0, 2}])
    q = RankedQuery(patterns=(pattern_of(db, [0, 2]),), ranks=(1,))
    result = learn_discriminating_pattern(q)
    assert set(result) <= {0, 2} and result
    assert icv(result, q) == 0.0


def test_disc_features_example4():
    db, q = example1_query()
    p1, _, p3, _ = q.patterns
    # cover({6}) has 9 + 45 + 9 = 63 of 100 transactions
    vals = disc_features(p1, (6,), db)
    np.testing.assert_allclose(vals, [1.0, 0.63, 1 / 7])
    np.testing.assert_allclose(disc_features(p3, (6,), db), [0.0, 0.0, 0.0])
    np.testing.assert_allclose(
        disc_features(p1, p1.items, db), [1.0, 0.54, 2 / 7]
    )


def test_aggregate_weights_example5():
    db, q = example1_query()
    layout = items_freq_layout(db)
    w = np.array([-0.33, 0.99, 0, -0.99, 0.33, 0, 1.33, 0.15])
    agg = AggregationConfig(kind="linear", eta=0.2)
    out = aggregate_weights(w, layout, np.array([1.33, 0.84, 0.0]), (6,), db, agg)
    assert out[6] == pytest.approx(1.33 * (1 + 0.2 * 1.33))
    assert out[6] == pytest.approx(1.68382, abs=1e-3)
    assert out[7] == pytest.approx(0.1752)
    assert out[7] == pytest.approx(0.175, abs=1e-3)


def test_aggregate_weights_zero_disc_is_identity():
    db, q = example1_query()
    layout = items_freq_layout(db)
    w = np.arange(8, dtype=float)
    for kind in ("linear", "exponential"):
        agg = AggregationConfig(kind=kind, eta=0.3)
        out = aggregate_weights(w, layout, np.zeros(3), (6,), db, agg)
        np.testing.assert_allclose(out, w)


def test_aggregate_weights_touches_only_documented_slots():
    db, q = example1_query()
    layout = layout_from_letters("ITLF", db)
    rng = np.random.default_rng(5)
    w = rng.normal(size=layout.width)
    w[w == 0] = 0.5
    agg = AggregationConfig(kind="exponential", eta=0.2)
    p_disc = (6,)
    out = aggregate_weights(w, layout, np.array([0.7, -0.3, 0.2]), p_disc, db, agg)
    changed = set(np.nonzero(~np.isclose(out, w))[0])
    from divmine.data import cover_of

    expected = {layout.items_offset + 6}
    cov = cover_of(db, p_disc)
    t = 0
    while cov:
        expected.add(layout.transactions_offset + ((cov & -cov).bit_length() - 1))
        cov &= cov - 1
    expected |= {layout.frequency_offset, layout.length_offset}
    assert changed <= expected
    # slots whose factor differs from 1 must all change (weights nonzero)
    assert layout.frequency_offset in changed
    assert layout.length_offset in changed


def test_aggregation_config_validation():
    with pytest.raises(ValueError):
        AggregationConfig(kind="linear", eta=0.6)
    with pytest.raises(ValueError):
        AggregationConfig(kind="cubic", eta=0.2)


def test_layout_from_letters():
    db = database_from_transactions([{0, 1, 2}] * 3)
    layout = layout_from_letters("IF", db)
    assert layout.width == db.n_items + 1
    with pytest.raises(ValueError):
        layout_from_letters("XYZ", db)
