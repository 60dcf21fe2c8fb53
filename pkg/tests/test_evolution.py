import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import dense_walk_operator, random_state_amplitudes
from toruswalk.evolution import (
    CoinOperator,
    MarkedCoinSpec,
    apply_shift,
    evolve,
    grover_coin,
    step,
    step_marked,
)
from toruswalk.lattice import (
    LatticeGeometry,
    WalkState,
    make_global_uniform,
    make_localized_uniform_coin,
    measure,
)
from toruswalk.limiting import average_distribution
from toruswalk.spectral import fourier_evolve


def test_grover_coin_entries():
    g = grover_coin().matrix
    assert np.all(np.diag(g) == -0.5)
    assert np.all(g[~np.eye(4, dtype=bool)] == 0.5)


def test_grover_coin_action():
    g = grover_coin().matrix
    u = np.full(4, 0.5)
    assert np.allclose(g @ u, u)
    assert np.allclose(g @ np.array([1, 0, 0, 0]), [-0.5, 0.5, 0.5, 0.5])
    assert np.allclose(g @ g, np.eye(4), atol=1e-15)


def test_non_unitary_coin_rejected():
    with pytest.raises(ValueError):
        CoinOperator(np.ones((4, 4)))
    with pytest.raises(ValueError):
        CoinOperator(np.eye(3))


def _unit(geometry, coin_index, x, y):
    a = np.zeros((4, geometry.side, geometry.side), dtype=complex)
    a[coin_index, x, y] = 1
    return WalkState(geometry, a)


def test_shift_moves_plus_x():
    g = LatticeGeometry(5)
    out = apply_shift(_unit(g, 0, 4, 2)).amplitudes
    assert out[1, 0, 2] == 1 and np.count_nonzero(out) == 1


def test_shift_moves_minus_y():
    g = LatticeGeometry(5)
    out = apply_shift(_unit(g, 3, 1, 0)).amplitudes
    assert out[2, 1, 4] == 1 and np.count_nonzero(out) == 1


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_shift_is_involution(side, seed):
    a = random_state_amplitudes(np.random.default_rng(seed), side)
    s = WalkState(LatticeGeometry(side), a)
    assert np.array_equal(apply_shift(apply_shift(s)).amplitudes, a)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_step_is_unitary(side, seed):
    rng = np.random.default_rng(seed)
    g = LatticeGeometry(side)
    s = WalkState(g, random_state_amplitudes(rng, side))
    assert abs(step(s, grover_coin()).norm_squared() - 1) < 1e-12
    spec = MarkedCoinSpec(g, (int(rng.integers(side)), int(rng.integers(side))))
    assert abs(step_marked(s, spec).norm_squared() - 1) < 1e-12


@pytest.mark.parametrize("side", [3, 4, 5])
@pytest.mark.parametrize("marked", [None, (1, 2)])
def test_step_matches_dense_operator(side, marked, rng):
    g = LatticeGeometry(side)
    u = dense_walk_operator(side, marked)
    a = random_state_amplitudes(rng, side)
    s = WalkState(g, a)
    out = step(s, grover_coin()) if marked is None else step_marked(s, MarkedCoinSpec(g, marked))
    assert np.allclose(out.amplitudes.reshape(-1), u @ a.reshape(-1), atol=1e-14)


def test_locality(rng):
    g = LatticeGeometry(7)
    s = _unit(g, 0, 3, 3)
    s.amplitudes[:, 3, 3] = random_state_amplitudes(rng, 1)[:, 0, 0]
    p = measure(step(s, grover_coin())).probabilities
    support = set(zip(*np.nonzero(p > 1e-30)))
    assert support <= {(4, 3), (2, 3), (3, 4), (3, 2)}


def test_step_from_localized_reaches_neighbours():
    g = LatticeGeometry(5)
    p = measure(step(make_localized_uniform_coin(g), grover_coin())).probabilities
    for xy in [(1, 0), (4, 0), (0, 1), (0, 4)]:
        assert p[xy] == pytest.approx(0.25, abs=1e-15)


@pytest.mark.parametrize("side", [3, 5, 41])
def test_step_agrees_with_fourier_evolution(side):
    g = LatticeGeometry(side)
    s = make_localized_uniform_coin(g)
    for t in (1, 2, 7, 20):
        a = evolve(s, grover_coin(), t).amplitudes
        assert np.max(np.abs(a - fourier_evolve(g, t).amplitudes)) < 1e-10


@pytest.mark.slow
def test_norm_after_many_steps():
    g = LatticeGeometry(41)
    out = evolve(make_localized_uniform_coin(g), grover_coin(), 10_000)
    assert abs(out.norm_squared() - 1) < 1e-8


def test_marked_step_equals_grover_away_from_mark(rng):
    g = LatticeGeometry(5)
    a = random_state_amplitudes(rng, 5)
    a[:, 2, 2] = 0
    a /= np.linalg.norm(a)
    s = WalkState(g, a)
    assert np.array_equal(
        step_marked(s, MarkedCoinSpec(g, (2, 2))).amplitudes, step(s, grover_coin()).amplitudes
    )


def test_marked_step_on_marked_vertex_is_minus_grover():
    g = LatticeGeometry(5)
    s = make_localized_uniform_coin(g, 1, 3)
    marked = step_marked(s, MarkedCoinSpec(g, (1, 3))).amplitudes
    assert np.allclose(marked, -step(s, grover_coin()).amplitudes, atol=1e-15)


def test_marked_vertex_out_of_range():
    with pytest.raises(ValueError):
        MarkedCoinSpec(LatticeGeometry(5), (5, 0))


def test_evolve_zero_and_one(rng):
    g = LatticeGeometry(4)
    s = WalkState(g, random_state_amplitudes(rng, 4))
    same = evolve(s, grover_coin(), 0)
    assert np.array_equal(same.amplitudes, s.amplitudes)
    assert same.amplitudes is not s.amplitudes
    assert np.array_equal(evolve(s, grover_coin(), 1).amplitudes, step(s, grover_coin()).amplitudes)
    with pytest.raises(ValueError):
        evolve(s, grover_coin(), -1)


def test_observer_average_matches_average_distribution():
    g = LatticeGeometry(5)
    s = make_localized_uniform_coin(g)
    T = 200
    seen = []
    acc = measure(s).probabilities.copy()

    def observer(t, dist):
        seen.append(t)
        if t < T:
            acc.__iadd__(dist.probabilities)

    evolve(s, grover_coin(), T - 1, observer=observer)
    assert seen == list(range(1, T))
    expected = average_distribution(g, grover_coin(), s, T).probabilities
    assert np.max(np.abs(acc / T - expected)) < 1e-12


def test_marked_walk_norm_long_run():
    g = LatticeGeometry(11)
    out = evolve(make_global_uniform(g), MarkedCoinSpec(g, (3, 4)), 10_000)
    assert abs(out.norm_squared() - 1) < 1e-10


def test_norm_drift_is_reported(monkeypatch):
    import toruswalk.evolution as ev

    monkeypatch.setattr(ev, "_stepper", lambda coin: (lambda psi: psi * (1 + 1e-6)))
    s = make_localized_uniform_coin(LatticeGeometry(3))
    with pytest.raises(ev.UnitarityError, match="step 1"):
        ev.evolve(s, grover_coin(), 5)
    with pytest.raises(ev.UnitarityError):
        list(ev.iterate_probabilities(s, grover_coin(), 5))
