import math

import numpy as np
import pytest

from soficlab import groups
from soficlab.constraints import checkerboard, full_shift, hardcore, zero_potential
from soficlab.enumeration import SiteGraph, joint_distribution, log_partition, site_marginal
from soficlab.transfer import build_transfer

from oracles import (
    brute_cycle_partition,
    golden_pressure,
    hardcore_line_density,
    hardcore_line_pressure,
    hardcore_stationary_p0,
    lucas,
)

Z1 = groups.zd(1)


def _cycle_graph(m):
    return SiteGraph(m, [(v, 0, (v + 1) % m) for v in range(m)])


def test_trace_powers_match_lucas():
    st, pot = hardcore(1, 1.0)
    tm = build_transfer(st, pot)
    for m in range(3, 21):
        assert tm.log_trace_power(m) == pytest.approx(math.log(lucas(m)), abs=1e-9)


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_trace_matches_brute_enumeration(lam):
    st, pot = hardcore(1, lam)
    tm = build_transfer(st, pot)
    for m in (3, 4, 5, 8):
        assert tm.log_trace_power(m) == pytest.approx(math.log(brute_cycle_partition(m, lam)), abs=1e-9)


def test_pressure_eigenvalues():
    st, pot = hardcore(1, 1.0)
    assert build_transfer(st, pot).pressure() == pytest.approx(golden_pressure(), abs=1e-12)
    st2, pot2 = hardcore(1, 2.0)
    assert build_transfer(st2, pot2).pressure() == pytest.approx(math.log(2), abs=1e-12)


def test_stationary_against_closed_form():
    for lam in (0.5, 1.0, 2.0):
        st, pot = hardcore(1, lam)
        tm = build_transfer(st, pot)
        assert tm.stationary()[1] == pytest.approx(hardcore_line_density(lam), abs=1e-12)
        assert tm.stationary()[0] == pytest.approx(hardcore_stationary_p0(lam), abs=1e-12)


def test_conditional_center_vs_enumeration_anchored():
    """With pins on both sides the Markov screening is exact, so the transfer
    conditional must equal interval enumeration to machine precision."""
    st, pot = hardcore(1, 1.5)
    tm = build_transfer(st, pot)
    R = 4
    graph = SiteGraph(2 * R + 1, [(i, 0, i + 1) for i in range(2 * R)])
    rng = np.random.default_rng(1)
    seen = set()
    for _ in range(60):
        pins = {-R: int(rng.integers(0, 2)), R: int(rng.integers(0, 2))}
        for off in range(-R + 1, R):
            if off != 0 and rng.random() < 0.3:
                pins[off] = int(rng.integers(0, 2))
        key = tuple(sorted(pins.items()))
        if key in seen or any(pins.get(o) == 1 and pins.get(o + 1) == 1 for o in range(-R, R)):
            continue
        seen.add(key)
        p_transfer = tm.conditional_center(pins)
        p_enum = site_marginal(graph, st, pot, R, pins={o + R: v for o, v in pins.items()})
        assert np.allclose(p_transfer, p_enum, atol=1e-12)


def test_conditional_free_boundary_converges():
    """Unanchored enumeration approaches the transfer conditional as the pad
    grows, at the mixing rate."""
    st, pot = hardcore(1, 1.5)
    tm = build_transfer(st, pot)
    target = tm.conditional_center({-2: 1})
    errs = []
    for pad in (3, 5, 7):
        n2 = 2 * (2 + pad) + 1
        g2 = SiteGraph(n2, [(i, 0, i + 1) for i in range(n2 - 1)])
        p = site_marginal(g2, st, pot, 2 + pad, pins={-2 + 2 + pad: 1})
        errs.append(float(np.max(np.abs(p - target))))
    assert errs == sorted(errs, reverse=True)
    assert errs[-1] < 1e-3


def test_conditional_tables_match_single_queries():
    st, pot = hardcore(1, 1.0)
    tm = build_transfer(st, pot)
    tab = tm.conditional_tables(5)
    for dl, bl, dr, br in [(1, 0, 1, 0), (2, 1, 3, 0), (0, 0, 2, 1), (4, 0, 0, 0)]:
        pins = {}
        if dl:
            pins[-dl] = bl
        if dr:
            pins[dr] = br
        expect = tm.conditional_center(pins)
        got = tab[:, dl, bl, dr, br]
        assert np.allclose(got, expect, atol=1e-12)


def test_window_distribution_normalizes_and_matches_pairs():
    st, pot = hardcore(1, 2.0)
    tm = build_transfer(st, pot)
    d = tm.window_distribution(2)
    assert sum(d.values()) == pytest.approx(1.0, abs=1e-12)
    # marginal of the middle site equals the stationary law
    p1 = sum(p for w, p in d.items() if w[2] == 1)
    assert p1 == pytest.approx(hardcore_line_density(2.0), abs=1e-12)


def test_cycle_pair_marginal_vs_exact_table():
    st, pot = hardcore(1, 2.0)
    tm = build_transfer(st, pot)
    m = 6
    graph = _cycle_graph(m)
    joint = joint_distribution(graph, st, pot, [0, 1])
    pair = tm.cycle_pair_marginal(m)
    for (a, b), p in joint.items():
        assert p == pytest.approx(pair[a, b], abs=1e-12)


def test_sample_windows_statistics():
    st, pot = hardcore(1, 1.0)
    tm = build_transfer(st, pot)
    rng = np.random.default_rng(3)
    X = tm.sample_windows(2, 60_000, rng)
    freq = X[:, 2].mean()
    assert freq == pytest.approx(hardcore_line_density(1.0), abs=0.01)
    # no adjacent occupied pairs ever
    assert not np.any((X[:, :-1] == 1) & (X[:, 1:] == 1))


def test_checkerboard_odd_cycle_empty():
    cb = checkerboard(1)
    pot = zero_potential(2, 1)
    tm = build_transfer(cb, pot)
    assert tm.log_trace_power(5) == -math.inf
    assert tm.log_trace_power(6) == pytest.approx(math.log(2), abs=1e-9)


def test_full_shift_partition():
    st = full_shift(2, 1)
    pot = zero_potential(2, 1)
    g = _cycle_graph(10)
    assert log_partition(g, st, pot) == pytest.approx(10 * math.log(2), abs=1e-9)
