import random
from fractions import Fraction as F

import pytest

from netcreate.equilibrium import run_dynamics, verify_collaborative
from netcreate.game import PaymentMatrix, realize_network, realized_edges
from netcreate.graphcore import build_host_graph, canonical_edge, complete_host
from conftest import random_connected_edges


def replay_edge_sets(host, init, traj):
    """Realized edge sets after the start and after every add/remove step."""
    current = set(realized_edges(host, init))
    sets = [frozenset(current)]
    for step in traj.steps:
        if step.action == "add":
            current.add(step.edge)
        elif step.action == "remove":
            current.discard(step.edge)
        else:
            continue
        sets.append(frozenset(current))
    return sets


def assert_sound(host, init, traj):
    prev = traj.initial_potential
    for step in traj.steps:
        if step.action in ("add", "remove"):
            assert step.potential < prev, step.dump()
        else:
            assert step.potential == prev
        prev = step.potential
    sets = replay_edge_sets(host, init, traj)
    assert len(sets) == len(set(sets))
    assert set(traj.final_edges) == set(sets[-1])


def test_triangle_cheap_alpha_builds_clique():
    host = complete_host(3, 1)
    traj = run_dynamics(host)
    assert traj.converged
    assert traj.final_edges == host.edges
    assert verify_collaborative(host, traj.final_payments).passed
    assert_sound(host, PaymentMatrix(), traj)


def test_triangle_dear_alpha_drops_one_edge():
    host = complete_host(3, 3)
    init = PaymentMatrix.split_evenly(host.edges, 3)
    traj = run_dynamics(host, init)
    assert traj.converged
    assert [s.action for s in traj.mutations] == ["remove"]
    assert len(traj.final_edges) == 2
    assert verify_collaborative(host, traj.final_payments).passed


def test_equilibrium_is_a_fixpoint():
    host = complete_host(5, 3)
    star = PaymentMatrix({(0, i): {i: 3} for i in range(1, 5)})
    traj = run_dynamics(host, star)
    assert traj.converged and traj.mutations == []
    assert traj.final_payments == star


@pytest.mark.parametrize("policy", ["round_robin", "random", "greedy"])
def test_policies_converge_to_equilibria(policy):
    rng = random.Random(7)
    for _ in range(5):
        n = rng.randint(3, 9)
        host = build_host_graph(n, random_connected_edges(rng, n, 0.3), F(rng.randint(1, 4 * n), 2))
        traj = run_dynamics(host, policy=policy, seed=rng.randint(0, 1000))
        assert traj.converged
        assert verify_collaborative(host, traj.final_payments).passed
        assert_sound(host, PaymentMatrix(), traj)


def test_random_policy_reproducible():
    host = complete_host(6, 2)
    a = run_dynamics(host, policy="random", seed=3)
    b = run_dynamics(host, policy="random", seed=3)
    assert a.dump() == b.dump()


def test_max_steps_flags_non_convergence():
    host = complete_host(6, 1)
    traj = run_dynamics(host, max_steps=4)
    assert not traj.converged
    assert traj.step_count == 4


def test_messy_initial_payments_are_cleaned():
    host = complete_host(4, 2)
    init = PaymentMatrix({(0, 1): {0: 5, 1: 5}, (2, 3): {2: F(1, 2)}})
    traj = run_dynamics(host, init)
    assert traj.converged
    assert verify_collaborative(host, traj.final_payments).passed


def test_trajectory_dump_format():
    traj = run_dynamics(complete_host(3, 1))
    first, second = traj.dump().splitlines()[:2]
    assert first == "1 edge(0,1) add 3/1 unreachable=4"
    assert second.split()[1:3] == ["edge(0,2)", "add"]
    assert second.split()[3] == "10/1"


def test_unknown_policy():
    with pytest.raises(ValueError):
        run_dynamics(complete_host(3, 1), policy="sideways")
