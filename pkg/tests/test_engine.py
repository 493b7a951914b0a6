import numpy as np

from divmine.data import database_from_transactions
from divmine.diversity import ClosedPatternPropagator, enumerate_closed
from divmine.engine import FREE, SearchModel, VarState, branch, solve

from oracles import closed_frequent_itemsets, random_db


class AlwaysFail:
    def propagate(self, state):
        return False


class NoOp:
    def propagate(self, state):
        return True


def fresh_state(db):
    return VarState(db.n_items, db.cols, db.full_cover)


def test_always_fail_enumerates_nothing():
    db = database_from_transactions([{0, 1}, {1}])
    model = SearchModel(n_items=db.n_items, propagators=[AlwaysFail()])
    seen = []
    solve(model, fresh_state(db), lambda s: seen.append(1) or True)
    assert seen == []


def test_noop_enumerates_all_assignments():
    db = database_from_transactions([{0, 1, 2}])
    model = SearchModel(n_items=3, propagators=[NoOp()])
    seen = []
    solve(model, fresh_state(db), lambda s: seen.append(tuple(s.values)) or True)
    assert len(seen) == 8
    assert len(set(seen)) == 8


def test_cap_early_exit():
    db = database_from_transactions([{0, 1, 2}])
    model = SearchModel(n_items=3, propagators=[NoOp()])
    seen = []
    solve(model, fresh_state(db), lambda s: seen.append(1) or True, cap=1)
    assert len(seen) == 1


def test_callback_stop():
    db = database_from_transactions([{0, 1, 2}])
    model = SearchModel(n_items=3, propagators=[NoOp()])
    seen = []
    solve(model, fresh_state(db), lambda s: (seen.append(1), len(seen) < 3)[1])
    assert len(seen) == 3


def test_branch_lowest_free():
    db = database_from_transactions([{0, 1, 2, 3, 4, 5}])
    state = fresh_state(db)
    state.assign(0, 0)
    state.assign(1, 1)
    state.assign(2, 0)
    state.assign(4, 1)
    assert branch(state) == 3
    state.assign(3, 0)
    assert branch(state) == 5


def test_trail_restores_state_exactly():
    db = database_from_transactions([{0, 1}, {1, 2}, {0, 2}])
    state = fresh_state(db)
    snapshot = (list(state.values), state.pos_mask, state.cover, state.free_count)
    mark = state.mark()
    state.assign(0, 1)
    state.assign(2, 0)
    state.assign(1, 1)
    state.undo_to(mark)
    assert (list(state.values), state.pos_mask, state.cover, state.free_count) == snapshot


def test_closed_enumeration_matches_power_set_oracle():
    rng = np.random.default_rng(42)
    for _ in range(25):
        db = random_db(rng, max_items=7, max_txns=10)
        theta = int(rng.integers(1, max(2, db.n_transactions // 2)))
        got = {p.items for p in enumerate_closed(db, theta)}
        assert got == closed_frequent_itemsets(db, theta)


def test_fixpoint_idempotent():
    rng = np.random.default_rng(9)
    for _ in range(20):
        db = random_db(rng, max_items=8, max_txns=8)
        prop = ClosedPatternPropagator(db, theta=2)
        state = fresh_state(db)
        model = SearchModel(n_items=db.n_items, propagators=[prop])
        from divmine.engine import _propagate_to_fixpoint

        if _propagate_to_fixpoint(model, state):
            before = list(state.values)
            assert _propagate_to_fixpoint(model, state)
            assert list(state.values) == before


def test_replay_determinism():
    db = database_from_transactions([{0, 1, 2}, {1, 2}, {0, 2}, {2, 3}])
    runs = []
    for _ in range(2):
        runs.append([p.items for p in enumerate_closed(db, theta=1)])
    assert runs[0] == runs[1]
