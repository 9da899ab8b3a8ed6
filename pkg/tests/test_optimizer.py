import numpy as np
import pytest

from netbell.builder import build_inequality
from netbell.errors import (
    PartyCountMismatchError,
    TooFewLeavesError,
    TooLargeForExhaustiveError,
    UnsupportedFcbiError,
)
from netbell.fcbi import CHAINED, CHSH, make_catalog
from netbell.networks import (
    chain5_strategy_for_tree5,
    chain_topology,
    chsh_inequality,
)
from netbell.optimizer import (
    BOUNDARY,
    classical_oracle,
    cross_evaluate,
    discriminate,
    evaluate_local_model,
    seesaw_network,
    uniform_visibility_threshold,
    visibility_window,
)
from netbell.qstate import WernerSpec, max_entangled, werner
from netbell.topology import build_topology


@pytest.fixture(scope="module")
def bilocal():
    topo = chain_topology(3)
    return chsh_inequality(topo)


def test_seesaw_bilocal_werner(bilocal):
    v = 0.9
    states = {1: werner(WernerSpec(v)), 2: werner(WernerSpec(v))}
    rep = seesaw_network(bilocal, states, restarts=8, seed=0)
    assert rep.converged
    assert rep.best_value == pytest.approx(np.sqrt(2.0) * v, abs=1e-6)


def test_seesaw_deterministic(bilocal):
    states = {1: max_entangled(), 2: max_entangled()}
    a = seesaw_network(bilocal, states, restarts=4, seed=7)
    b = seesaw_network(bilocal, states, restarts=4, seed=7)
    assert a.best_value == b.best_value
    assert a.history == b.history


def test_oracle_exhaustive_bilocal(bilocal):
    rep = classical_oracle(bilocal, mode="exhaustive")
    assert rep.best_value == 1.0
    # the reported model reproduces the reported value
    assert evaluate_local_model(bilocal, rep.best_config) == pytest.approx(1.0)


def test_oracle_random_below_exhaustive(bilocal):
    rep = classical_oracle(bilocal, mode="random", budget=3000, seed=2)
    assert rep.best_value <= 1.0 + 1e-9
    audited = evaluate_local_model(bilocal, rep.best_config)
    assert audited == pytest.approx(rep.best_value, abs=1e-12)


def test_oracle_exhaustive_cap():
    topo = chain_topology(3)
    ineq = build_inequality(
        topo, 13, {s: make_catalog(CHAINED, 13) for s in (1, 2)}
    )
    with pytest.raises(TooLargeForExhaustiveError):
        classical_oracle(ineq, mode="exhaustive")


def test_oracle_random_alphabet_cap(bilocal):
    with pytest.raises(TooLargeForExhaustiveError):
        classical_oracle(
            bilocal, cardinalities={1: 100, 2: 100}, mode="random", budget=10
        )


def test_oracle_unknown_mode(bilocal):
    with pytest.raises(ValueError):
        classical_oracle(bilocal, mode="annealing")


def test_explicit_cross_strategy(tree5, chain5):
    ineq = chsh_inequality(tree5)
    states = {s: max_entangled() for s in range(1, 5)}
    value = cross_evaluate(ineq, chain5, states, chain5_strategy_for_tree5())
    assert value == pytest.approx(np.sqrt(2.0), abs=1e-12)


def test_discriminate_tree_on_chain(tree5, chain5):
    ineq = chsh_inequality(tree5)
    states = {s: max_entangled() for s in range(1, 5)}
    rep = discriminate(ineq, chain5, states, restarts=8, seed=0)
    assert rep.best_value >= np.sqrt(2.0) - 1e-6
    assert rep.extra["verdict"] in ("BOUNDARY", "VIOLATED")


def test_discriminate_party_count_mismatch(tree5):
    ineq = chsh_inequality(tree5)
    with pytest.raises(PartyCountMismatchError):
        discriminate(ineq, chain_topology(4), {})


def test_discriminate_requires_two_input_map(six_party, tree5):
    ineq = build_inequality(
        six_party, 3, {s: make_catalog(CHAINED, 3) for s in (1, 3, 5)}
    )
    with pytest.raises(UnsupportedFcbiError):
        discriminate(ineq, six_party, {})


def test_visibility_window(tree5, chain5):
    win = visibility_window(tree5, chain5)
    assert win["a"]["threshold"] == pytest.approx(2.0 ** -0.375)
    assert win["b"]["threshold"] == pytest.approx(2.0 ** -0.25)
    assert win["window"] == (win["a"]["threshold"], win["b"]["threshold"])


def test_visibility_window_needs_leaves(tree5):
    triangle = build_topology(3, [(1, 2), (2, 3), (1, 3)])
    with pytest.raises(TooFewLeavesError):
        visibility_window(tree5, triangle)


def test_uniform_threshold_values():
    assert uniform_visibility_threshold(2, 2) == pytest.approx(1 / np.sqrt(2))
    assert uniform_visibility_threshold(3, 4) == pytest.approx(2.0 ** -0.375)
