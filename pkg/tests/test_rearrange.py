import numpy as np
import pytest

from oracles import pairable_profile, polarize_oracle, schwarz_oracle
from sympass import (
    Domain,
    GridFunction,
    approximate_symmetrization,
    origin_polarizer,
    polarize,
    polarizer_pool,
    schwarz,
)
from sympass.rearrange import (
    Polarizer,
    PolarizerSequence,
    SymmetrizationConfig,
    approximate_curve,
    polarize_values,
    schwarz_values,
    theta,
)


def test_polarizer_validation():
    with pytest.raises(ValueError):
        Polarizer(normal=(0.5, 0.5), offset=0.0)  # not unit
    with pytest.raises(ValueError):
        Polarizer(normal=(1.0,), offset=-0.5)  # negative offset
    H = Polarizer.diagonal(1, -1, offset=0.0)
    assert np.hypot(*H.normal) == pytest.approx(1.0)


def test_polarize_frozen_example():
    # nodes at x = -1, 0, 1; keep side x <= 0
    d = Domain(1, 1.0, 3)
    u = GridFunction(d, np.array([2.0, 1.0, 3.0]))
    out = polarize(u, origin_polarizer(1))
    assert np.array_equal(out.values, [3.0, 1.0, 2.0])


def test_polarize_multiset_and_idempotent(dom65, rng):
    pool = polarizer_pool(dom65)
    for _ in range(200):
        u = rng.standard_normal(65)
        H = pool[rng.integers(0, len(pool))]
        out = polarize_values(dom65, u, H)
        assert np.array_equal(np.sort(out), np.sort(np.abs(u)))
        assert np.array_equal(polarize_values(dom65, out, H), out)


def test_polarize_matches_geometric_oracle(rng):
    for dom in (Domain(1, 8.0, 33), Domain(2, 3.0, 9)):
        pool = polarizer_pool(dom)
        for _ in range(100):
            u = rng.standard_normal(dom.size)
            H = pool[rng.integers(0, len(pool))]
            assert np.array_equal(
                polarize_values(dom, u, H), polarize_oracle(dom, u, H)
            )


def test_polarize_contractive_on_moduli(dom65, rng):
    h = dom65.spacing
    pool = polarizer_pool(dom65)
    for _ in range(200):
        u = rng.standard_normal(65)
        v = rng.standard_normal(65)
        H = pool[rng.integers(0, len(pool))]
        pu = polarize_values(dom65, u, H)
        pv = polarize_values(dom65, v, H)
        for p in (2.0, 4.0):
            after = (np.sum(np.abs(pu - pv) ** p) * h) ** (1 / p)
            before = (np.sum(np.abs(np.abs(u) - np.abs(v)) ** p) * h) ** (1 / p)
            assert after <= before + 1e-12


def test_pool_sizes():
    assert len(polarizer_pool(Domain(1, 8.0, 65))) == 2 * 64
    # 2D: 4*(n-1) axis planes plus 4*(n-1) node-aligned diagonals
    assert len(polarizer_pool(Domain(2, 3.0, 9))) == 8 * 8


def test_schwarz_frozen_example():
    d = Domain(1, 1.0, 3)
    u = GridFunction(d, np.array([0.0, 1.0, 2.0]))
    assert np.array_equal(schwarz(u).values, [0.5, 2.0, 0.5])


def test_schwarz_matches_sorting_oracle(rng):
    for dom in (Domain(1, 8.0, 33), Domain(2, 3.0, 9)):
        for _ in range(100):
            u = rng.standard_normal(dom.size)
            assert np.array_equal(
                schwarz_values(dom, u), schwarz_oracle(dom, u)
            )


def test_schwarz_idempotent_and_radial(dom2d, rng):
    u = rng.standard_normal(dom2d.size)
    s = schwarz_values(dom2d, u)
    # re-averaging a constant shell of cardinality 12 drifts by one ulp
    assert np.allclose(schwarz_values(dom2d, s), s, rtol=0, atol=5e-15)
    r2 = dom2d.radius_sq_scaled()
    order = np.argsort(r2, kind="stable")
    sr, rr = s[order], r2[order]
    for a in range(len(sr) - 1):
        if rr[a + 1] > rr[a]:
            assert sr[a + 1] <= sr[a] + 1e-15


def test_schwarz_commutes_with_polarization(dom65, rng):
    pool = polarizer_pool(dom65)
    for _ in range(100):
        u = rng.standard_normal(65)
        H = pool[rng.integers(0, len(pool))]
        pu = polarize_values(dom65, u, H)
        assert np.array_equal(schwarz_values(dom65, pu), schwarz_values(dom65, u))


def test_theta_modulus(dom65, rng):
    u = GridFunction(dom65, rng.standard_normal(65))
    assert np.array_equal(theta(u).values, np.abs(u.values))


def test_greedy_symmetrization_on_pairable_profile(dom65, rng):
    cfg = SymmetrizationConfig(candidate_count=32, tolerance=1e-3, max_iterations=500)
    for trial in range(10):
        u = GridFunction(dom65, pairable_profile(rng, 65))
        res = approximate_symmetrization(u, cfg, seed=trial)
        assert res.reached
        ds = np.asarray(res.distances)
        assert np.all(np.diff(ds) <= 1e-12)  # nonincreasing
        assert len(res.word) <= cfg.max_iterations
        # replaying the word on |u| reproduces the result exactly
        replay = PolarizerSequence(res.word.items).apply(theta(u))
        assert np.array_equal(replay.values, res.function.values)


def test_greedy_preserves_multiset(dom65, rng):
    u = GridFunction(dom65, rng.standard_normal(65))
    res = approximate_symmetrization(u, seed=5)
    assert np.array_equal(
        np.sort(res.function.values), np.sort(np.abs(u.values))
    )


def test_approximate_curve_invariants(dom65, rng):
    from sympass.minimax import Path

    m = 9
    nodes = []
    for t in np.linspace(0.0, 1.0, m):
        bump = np.abs(rng.standard_normal(65)) * t
        nodes.append(GridFunction(dom65, bump))
    path = Path(nodes=tuple(nodes))
    H0 = origin_polarizer(1)
    out, word, trace = approximate_curve(
        path, band_indices=range(1, m - 1), H0=H0, delta=0.05, seed=0
    )
    assert word.items[0] == H0
    assert len(out) == m
    # endpoints receive only H0
    assert np.array_equal(
        out.nodes[0].values, polarize_values(dom65, nodes[0].values, H0)
    )
    assert np.array_equal(
        out.nodes[-1].values, polarize_values(dom65, nodes[-1].values, H0)
    )
    # each interior node keeps its multiset
    for k in range(1, m - 1):
        assert np.array_equal(
            np.sort(out.nodes[k].values), np.sort(np.abs(nodes[k].values))
        )
    assert np.all(np.diff(np.asarray(trace)) <= 1e-12)
    assert out.approx_failed == (trace[-1] > 0.05)


def test_approximate_curve_validation(dom65):
    from sympass.minimax import Path

    good = Path(
        nodes=tuple(GridFunction(dom65, np.full(65, float(k))) for k in range(4))
    )
    H0 = origin_polarizer(1)
    with pytest.raises(ValueError, match="interior"):
        approximate_curve(good, band_indices=[0], H0=H0, delta=0.1)
    with pytest.raises(ValueError, match="nonempty"):
        approximate_curve(good, band_indices=[], H0=H0, delta=0.1)
    bad = Path(nodes=(GridFunction(dom65, -np.ones(65)),) + good.nodes[1:])
    with pytest.raises(ValueError, match="nonnegative"):
        approximate_curve(bad, band_indices=[1], H0=H0, delta=0.1)
