import pytest

from graphpurify.analysis import (
    ATTRACTIVE,
    REPULSIVE,
    InvalidFamily,
    alpha_threshold,
    concatenation_trace,
    descartes_sign_count,
    find_fixed_points,
    has_nontrivial_attractor,
    p_threshold_from_alpha,
    threshold_scan,
    three_copy_alpha_maps,
    three_copy_family,
    uniqueness_audit,
    weight2_map,
)
from graphpurify.recursion import three_copy_map


def test_fixed_points_of_ideal_maps():
    rep = find_fixed_points(three_copy_map("A", "full"))
    locs = rep.locations
    assert locs[0] == 0.0 and locs[-1] == pytest.approx(1.0)
    assert [p.stability for p in rep.fixed_points] == [ATTRACTIVE, REPULSIVE, ATTRACTIVE]


def test_fixed_points_of_line():
    rep = find_fixed_points(lambda x: x * x)
    assert rep.locations == [0.0, 1.0]
    assert rep.fixed_points[1].stability == REPULSIVE


def test_trace():
    t = concatenation_trace(three_copy_map("B", "full"), 0.95, 3)
    assert len(t) == 4 and all(b >= a for a, b in zip(t, t[1:]))
    with pytest.raises(ValueError):
        concatenation_trace(lambda x: x, 1.5, 1)


def test_attractor_detection():
    assert has_nontrivial_attractor(three_copy_map("A", "full", 2, 0.003))
    assert not has_nontrivial_attractor(three_copy_map("A", "full", 2, 0.004))


def test_alpha_and_p_thresholds_agree():
    a = alpha_threshold()
    for d in (2, 4):
        scan = threshold_scan(three_copy_family(d)).p_th
        assert p_threshold_from_alpha(a, d) == pytest.approx(scan, abs=2e-6)
    assert all(has_nontrivial_attractor(m) for m in three_copy_alpha_maps(a + 1e-5))


def test_threshold_scan_errors():
    with pytest.raises(InvalidFamily):
        threshold_scan(lambda p: lambda x: x * x * 0.5)
    with pytest.raises(InvalidFamily):
        threshold_scan(lambda p: three_copy_map("A", "full"), p_max=0.01)


def test_descartes():
    assert descartes_sign_count([1, -3, 0, 2]) == 2
    assert descartes_sign_count([1, 2, 3]) == 0
    with pytest.raises(ValueError):
        descartes_sign_count([0, 0])
    with pytest.raises(ValueError):
        descartes_sign_count([0, 1])


def test_weight2_map_factorizes_at_fixed_point():
    f = weight2_map(2, 0.0, 1.0)
    assert f(1.0) == pytest.approx(1.0)
    rep = uniqueness_audit(2, 0.001)
    assert rep.ok and rep.in_interval
    assert rep.pair_fixed_point == pytest.approx(rep.single_fixed_point**2, abs=1e-8)
