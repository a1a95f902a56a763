import numpy as np
import pytest

from graphpurify.generalized import ExpectationTable, MissingEntry, generalized_p1_update
from graphpurify.graphs import CorrelatorIndex, bicolor, path, ring, torus
from graphpurify.mc.core import NoiseModel
from graphpurify.mc.exact import all_correlators, three_copy_subprotocol_exact
from graphpurify.recursion import three_copy_map


def test_weight_one_matches_closed_forms():
    g = torus(4, 4)
    col = bicolor(g)
    for p2 in (0.0, 0.002):
        t = ExpectationTable.product(g, col, 0.9)
        a = CorrelatorIndex.of_vertices([0], col)
        b = CorrelatorIndex.of_vertices([1], col)
        assert generalized_p1_update(t, a, p2) == pytest.approx(three_copy_map("A", "P1", 4, p2)(0.9))
        assert generalized_p1_update(t, b, p2) == pytest.approx(three_copy_map("B", "P1", 4, p2)(0.9))
        assert generalized_p1_update(t, b, p2, "B") == pytest.approx(three_copy_map("B", "P2", 4, p2)(0.9))


def test_missing_entry_names_mask():
    g = ring(4)
    col = bicolor(g)
    c = CorrelatorIndex.of_vertices([0], col)
    with pytest.raises(MissingEntry, match=c.to_hex()):
        generalized_p1_update(ExpectationTable(g, col, {}), c)


def test_accessed_entries_stay_local():
    g = torus(4, 4)
    col = bicolor(g)
    t = ExpectationTable.product(g, col, 0.95)
    generalized_p1_update(t, CorrelatorIndex.of_vertices([0, 10], col))
    assert all(c.a_mask & ~CorrelatorIndex.of_vertices([0, 10], col).a_mask == 0 for c in t.accessed)


def test_table_validation():
    g = ring(4)
    col = bicolor(g)
    with pytest.raises(ValueError):
        ExpectationTable(g, col, {CorrelatorIndex(1, 0): 1.5})
    with pytest.raises(ValueError):
        ExpectationTable(g, col, {CorrelatorIndex(0, 0): 0.5})
    with pytest.raises(ValueError):
        generalized_p1_update(ExpectationTable.product(g, col, 0.9), CorrelatorIndex(1, 0), p2=2.0)


def test_three_path_all_weights():
    g = path(3)
    col = bicolor(g)
    rng = np.random.default_rng(12)
    w = rng.random(8)
    dist = w / w.sum()
    table = ExpectationTable.from_correlators(g, col, all_correlators(dist))
    for color in ("A", "B"):
        out = all_correlators(three_copy_subprotocol_exact(g, col, dist, NoiseModel(0, 0.02), color))
        for m in range(1, 8):
            c = CorrelatorIndex.from_vertex_mask(m, col)
            assert generalized_p1_update(table, c, 0.02, color) == pytest.approx(out[m], abs=1e-13)
