import numpy as np
import pytest

from graphpurify.graphs import A, B, bicolor, edge_color, path, ring, star, torus
from graphpurify.mc.core import (
    BandaidSpec,
    GraphContext,
    IndependentSampler,
    NoiseModel,
    TableSampler,
    apply_mcnot,
    mcnot_vectors,
    pauli_toggle,
)
from graphpurify.mc.creation import CreationSampler, creation_distribution, simulate_creation_transmission
from graphpurify.mc.estimate import batch_rng, estimate_correlators
from graphpurify.mc.exact import (
    all_correlators,
    correlator,
    postselection_subprotocol_exact,
    product_distribution,
    three_copy_subprotocol_exact,
)
from graphpurify.mc.protocols import (
    DegreeMismatch,
    run_bandaid_round,
    run_postselection_round,
    run_three_copy_round,
)
from graphpurify.recursion import creation_purity, postselect_zflip_map, three_copy_map


def test_pauli_toggles():
    g = ring(6)
    assert pauli_toggle(g, 2, "Z") == {2}
    assert pauli_toggle(g, 2, "X") == {1, 3}
    assert pauli_toggle(g, 2, "Y") == {1, 2, 3}
    assert pauli_toggle(g, 2, "I") == set()


def test_mcnot_bit_map():
    g = ring(4)
    col = bicolor(g)
    s, t = mcnot_vectors(g, col, A, [1, 0, 0, 1], [0, 1, 1, 1])
    # target gets the source's A bits, source gets the target's B bits
    assert list(t) == [1, 1, 1, 1]
    assert list(s) == [1, 1, 0, 0]
    ctx = GraphContext(g, col)
    src = np.array([[1], [0], [0], [1]], bool)
    tgt = np.array([[0], [1], [1], [1]], bool)
    apply_mcnot(ctx, A, src, tgt)
    assert src[:, 0].tolist() == [1, 1, 0, 0] and tgt[:, 0].tolist() == [1, 1, 1, 1]


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel(p2=1.2)
    with pytest.raises(ValueError):
        BandaidSpec(1.5)
    with pytest.raises(ValueError):
        TableSampler(2, np.array([0.5, 0.5, 0.5, 0.5]))


def test_table_sampler_matches_distribution():
    probs = np.array([0.4, 0.1, 0.2, 0.3])
    bits = TableSampler(2, probs).sample(np.random.default_rng(0), 200_000)
    idx = bits[0].astype(int) + 2 * bits[1].astype(int)
    freq = np.bincount(idx, minlength=4) / idx.size
    assert np.allclose(freq, probs, atol=5e-3)


def test_estimate_is_worker_independent():
    g = ring(6)
    ctx = GraphContext(g, bicolor(g))
    sampler = IndependentSampler.uniform(6, 0.05)

    def run(rng, size):
        return run_three_copy_round(ctx, sampler, NoiseModel(0, 0.001), rng, size)

    kw = dict(samples=30_000, seed=3, n=6, batch_size=7_000)
    one = estimate_correlators(run, [1, 2, 3], workers=1, **kw)
    four = estimate_correlators(run, [1, 2, 3], workers=4, **kw)
    assert one.to_csv() == four.to_csv()
    other = estimate_correlators(run, [1, 2, 3], samples=30_000, seed=4, n=6, batch_size=7_000)
    assert other.to_csv() != one.to_csv()


def test_batch_streams_are_distinct():
    a = batch_rng(1, 0).random(4)
    b = batch_rng(1, 1).random(4)
    assert not np.allclose(a, b)
    assert np.allclose(a, batch_rng(1, 0).random(4))


def test_estimate_report_formats():
    g = ring(6)
    ctx = GraphContext(g, bicolor(g))
    sampler = IndependentSampler.uniform(6, 0.1)
    rep = estimate_correlators(
        lambda rng, s: run_postselection_round(ctx, sampler, NoiseModel(), rng, s, A), [1, 3], 20_000, 9, 6
    )
    assert rep.attempted == 20_000 and 0 < rep.accepted < 20_000
    assert rep.acceptance_rate == pytest.approx(((1 + 0.8**2) / 2) ** 3, abs=0.01)
    lines = rep.to_csv().splitlines()
    assert lines[0] == "correlator,mean,stderr,samples" and len(lines) == 3
    assert '"accepted"' in rep.to_json()


def test_postselection_acceptance_exact_vs_closed_form():
    g = ring(6)
    col = bicolor(g)
    x = 0.8
    dist = product_distribution(6, (1 - x) / 2)
    out, acc = postselection_subprotocol_exact(g, col, dist, NoiseModel(), "A")
    assert correlator(out, 1) == pytest.approx(postselect_zflip_map("A", "P1")(x))
    assert correlator(out, 2) == pytest.approx(postselect_zflip_map("B", "P1")(x))
    assert acc == pytest.approx(((1 + x * x) / 2) ** 3)


def test_exact_three_copy_matches_closed_form():
    g = ring(6)
    col = bicolor(g)
    x, p2 = 0.9, 0.002
    dist = product_distribution(6, (1 - x) / 2)
    corr = all_correlators(three_copy_subprotocol_exact(g, col, dist, NoiseModel(0, p2), "A"))
    assert corr[1] == pytest.approx(three_copy_map("A", "P1", 2, p2)(x), abs=1e-12)
    assert corr[2] == pytest.approx(three_copy_map("B", "P1", 2, p2)(x), abs=1e-12)


def test_walsh_hadamard_agrees_with_direct():
    rng = np.random.default_rng(1)
    w = rng.random(16)
    dist = w / w.sum()
    wh = all_correlators(dist)
    assert all(wh[m] == pytest.approx(correlator(dist, m)) for m in range(16))


@pytest.mark.parametrize("g", [ring(6), star(3), path(3)])
def test_creation_distribution_closed_form(g):
    d = creation_distribution(g, edge_color(g), 0.03, 0.01)
    corr = all_correlators(d)
    for v in range(g.n):
        if g.is_regular():
            assert corr[1 << v] == pytest.approx(creation_purity(g.max_degree, 0.03, 0.01), abs=1e-12)
        else:
            assert 0 < corr[1 << v] <= 1


def test_creation_mc_matches_exact():
    g = star(3)
    ec = edge_color(g)
    exact = all_correlators(creation_distribution(g, ec, 0.02, 0.02))
    state = simulate_creation_transmission(g, ec, 0.02, 0.02, np.random.default_rng(2), 400_000)
    for v in range(g.n):
        m = 1 - 2 * state[v].mean()
        assert abs(m - exact[1 << v]) < 4 * np.sqrt((1 - m * m) / 400_000)
    assert CreationSampler(g, ec, 0.0, 0.0).sample(np.random.default_rng(0), 10).sum() == 0


def test_bandaid_needs_regular_graph():
    g = path(3)
    ctx = GraphContext(g, bicolor(g))
    with pytest.raises(DegreeMismatch):
        run_bandaid_round(ctx, IndependentSampler.uniform(3, 0.1), BandaidSpec(1.0), NoiseModel(), np.random.default_rng(0), 10)


def test_bandaid_perfect_inputs_perfect_bandaids():
    g = torus(4, 4)
    ctx = GraphContext(g, bicolor(g))
    state = run_bandaid_round(ctx, IndependentSampler.uniform(16, 0.3), BandaidSpec(1.0), NoiseModel(), np.random.default_rng(0), 1000)
    assert not state.any()
