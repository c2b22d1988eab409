"""Crossover operators: fixpoints, mixing laws, structural recombination."""

import numpy as np
import pytest
from hypothesis import given, settings as hsettings, strategies as st

from pcgp.crossover import (
    aligned_node,
    apply_crossover,
    output_graph,
    proportional,
    random_node,
    single_point,
    subgraph,
)
from pcgp.decode import DecodeSettings, decode
from pcgp.errors import ConfigError, UnsupportedOperatorError
from pcgp.execute import run_supervised
from pcgp.functions import default_functions
from pcgp.genome import GenomeMode, SizeBounds, flatten, make_genome, random_genome, validate_genome
from pcgp.mutate import invert_connection_position

FSET = default_functions()
SET = DecodeSettings(input_start=-1.0)


def rnd(mode, n_nodes, seed, n_in=2, n_out=2):
    return random_genome(mode, n_in, n_out, n_nodes, np.random.default_rng(seed))


# ------------------------------------------------------------ mate checks

def test_incompatible_parents_rejected():
    a = rnd(GenomeMode.CGP, 5, 0)
    with pytest.raises(ValueError):
        single_point(a, rnd(GenomeMode.PCGP, 5, 1), np.random.default_rng(0))
    with pytest.raises(ValueError):
        random_node(a, rnd(GenomeMode.CGP, 5, 1, n_in=3), np.random.default_rng(0))


def test_positional_only_operators_reject_plain_genomes():
    a, b = rnd(GenomeMode.CGP, 5, 0), rnd(GenomeMode.CGP, 5, 1)
    rng = np.random.default_rng(0)
    with pytest.raises(UnsupportedOperatorError):
        aligned_node(a, b, rng)
    with pytest.raises(UnsupportedOperatorError):
        output_graph(a, b, SET, FSET, rng)
    with pytest.raises(UnsupportedOperatorError):
        subgraph(a, b, SET, FSET, rng)


def test_apply_crossover_unknown_name():
    a, b = rnd(GenomeMode.CGP, 5, 0), rnd(GenomeMode.CGP, 5, 1)
    with pytest.raises(ConfigError):
        apply_crossover(a, b, "bogus", SET, FSET, np.random.default_rng(0))


# ------------------------------------------------------------ single point

def test_single_point_cut_zero_clones_a_parent():
    a, b = rnd(GenomeMode.CGP, 4, 0), rnd(GenomeMode.CGP, 6, 1)
    seen = set()
    for seed in range(20):
        child = single_point(a, b, np.random.default_rng(seed), cut=0)
        flat = tuple(flatten(child))
        assert flat in (tuple(flatten(a)), tuple(flatten(b)))
        seen.add(flat == tuple(flatten(a)))
    assert seen == {True, False}  # both owners occur


def test_single_point_enumerated_cuts():
    a, b = rnd(GenomeMode.PCGP, 2, 3), rnd(GenomeMode.PCGP, 3, 4)
    fa, fb = flatten(a), flatten(b)
    header, stride = 2 + 2, 5
    for j in range(3):  # min(2,3)+1 boundaries
        cut = header + j * stride
        for seed in range(10):
            child = single_point(a, b, np.random.default_rng(seed), cut=cut)
            want_ab = np.concatenate([fa[:cut], fb[cut:]])
            want_ba = np.concatenate([fb[:cut], fa[cut:]])
            # child comes out sorted; sort the raw expectations the same way
            sorted_ab = flatten(make_genome(a.mode, 2, 2, want_ab[4:].reshape(-1, 5),
                                            want_ab[2:4], want_ab[:2]))
            sorted_ba = flatten(make_genome(a.mode, 2, 2, want_ba[4:].reshape(-1, 5),
                                            want_ba[2:4], want_ba[:2]))
            assert flatten(child).tolist() in (sorted_ab.tolist(), sorted_ba.tolist())


def test_single_point_child_node_count_follows_suffix_owner():
    a, b = rnd(GenomeMode.CGP, 5, 7), rnd(GenomeMode.CGP, 9, 8)
    counts = {single_point(a, b, np.random.default_rng(s)).n_nodes for s in range(60)}
    assert counts == {5, 9}


def test_single_point_self_fixpoint():
    for seed in range(30):
        a = rnd(GenomeMode.PCGP, 6, seed)
        child = single_point(a, a, np.random.default_rng(seed + 100))
        assert flatten(child).tolist() == flatten(a).tolist()


def test_single_point_rejects_non_boundary_cut():
    a, b = rnd(GenomeMode.CGP, 4, 0), rnd(GenomeMode.CGP, 4, 1)
    with pytest.raises(ValueError):
        single_point(a, b, np.random.default_rng(0), cut=3)


# ------------------------------------------------------------ random node

def test_random_node_counts():
    rng = np.random.default_rng(0)
    assert random_node(rnd(GenomeMode.CGP, 10, 1), rnd(GenomeMode.CGP, 10, 2), rng).n_nodes == 10
    assert random_node(rnd(GenomeMode.CGP, 1, 3), rnd(GenomeMode.CGP, 1, 4), rng).n_nodes == 1
    assert random_node(rnd(GenomeMode.CGP, 5, 5), rnd(GenomeMode.CGP, 9, 6), rng).n_nodes == 2 + 5


def test_random_node_self_fixpoint_positional():
    for seed in range(30):
        a = rnd(GenomeMode.PCGP, 8, seed)
        child = random_node(a, a, np.random.default_rng(seed + 50))
        assert flatten(child).tolist() == flatten(a).tolist()


def test_random_node_self_is_permutation_for_plain_mode():
    a = rnd(GenomeMode.CGP, 8, 11)
    child = random_node(a, a, np.random.default_rng(12))
    got = sorted(map(tuple, child.nodes.tolist()))
    want = sorted(map(tuple, a.nodes.tolist()))
    assert got == want


# ------------------------------------------------------------ aligned node

def pnode(p, x=0.0, y=0.0, f=0.1, c=0.5):
    return [p, x, y, f, c]


def test_aligned_node_pairs_by_proximity():
    a = make_genome(GenomeMode.PCGP, 1, 1, [pnode(0.1, c=0.11), pnode(0.9, c=0.19)],
                    [0.5], [0.5])
    b = make_genome(GenomeMode.PCGP, 1, 1, [pnode(0.12, c=0.21), pnode(0.88, c=0.29)],
                    [0.5], [0.5])
    for seed in range(20):
        child = aligned_node(a, b, np.random.default_rng(seed))
        assert child.n_nodes == 2
        first, second = sorted(child.nodes[:, 0])
        assert first in (0.1, 0.12) and second in (0.88, 0.9)


def test_aligned_node_leftover_rule_bounds_count():
    a, b = rnd(GenomeMode.PCGP, 3, 0), rnd(GenomeMode.PCGP, 5, 1)
    counts = {aligned_node(a, b, np.random.default_rng(s)).n_nodes for s in range(60)}
    assert counts <= {3, 4, 5}
    assert min(counts) == 3 and max(counts) == 5


def test_aligned_node_self_fixpoint():
    for seed in range(30):
        a = rnd(GenomeMode.PCGP, 7, seed)
        child = aligned_node(a, a, np.random.default_rng(seed + 500))
        assert flatten(child).tolist() == flatten(a).tolist()


# ------------------------------------------------------------ proportional

def test_proportional_injected_endpoints_exact():
    a, b = rnd(GenomeMode.PCGP, 5, 1), rnd(GenomeMode.PCGP, 5, 2)
    low = flatten(a).size
    keep_a = proportional(a, b, np.random.default_rng(0), weights=np.zeros(low))
    assert flatten(keep_a).tolist() == sorted_flat(a)
    keep_b = proportional(a, b, np.random.default_rng(0), weights=np.ones(low))
    assert flatten(keep_b).tolist() == sorted_flat(b)


def sorted_flat(g):
    return flatten(make_genome(g.mode, g.n_in, g.n_out, g.nodes, g.outputs, g.inputs)).tolist()


def test_proportional_midpoint_value():
    a = make_genome(GenomeMode.CGP, 1, 1, np.full((1, 4), 0.2), [0.2])
    b = make_genome(GenomeMode.CGP, 1, 1, np.full((1, 4), 0.6), [0.6])
    child = proportional(a, b, np.random.default_rng(0), weights=np.full(5, 0.5))
    assert flatten(child).tolist() == pytest.approx([0.4] * 5, abs=1e-12)


def test_proportional_self_fixpoint_any_weights():
    for seed in range(30):
        a = rnd(GenomeMode.CGP, 6, seed)
        child = proportional(a, a, np.random.default_rng(seed + 1))
        assert flatten(child).tolist() == flatten(a).tolist()


def test_proportional_tail_from_longer_parent():
    a, b = rnd(GenomeMode.CGP, 2, 1), rnd(GenomeMode.CGP, 4, 2)
    child = proportional(a, b, np.random.default_rng(3))
    assert child.n_nodes == 4
    low = flatten(a).size
    assert flatten(child)[low:].tolist() == flatten(b)[low:].tolist()


def test_proportional_blend_stays_in_parent_interval():
    rng = np.random.default_rng(9)
    for _ in range(20):
        a, b = rnd(GenomeMode.CGP, 6, int(rng.integers(1e6))), rnd(GenomeMode.CGP, 6, int(rng.integers(1e6)))
        child = proportional(a, b, rng)
        fa, fb, fc = flatten(a), flatten(b), flatten(child)
        assert np.all(fc >= np.minimum(fa, fb)) and np.all(fc <= np.maximum(fa, fb))


# ----------------------------------------------------------- output graph

def two_trace_parents():
    s = SET
    a_in = [0.9, 0.1]     # input positions -0.9, -0.1
    a_nodes = [
        pnode(0.2, invert_connection_position(-0.9, 0.2, s),
              invert_connection_position(-0.9, 0.2, s), c=0.11),          # A0 -> in0
        pnode(0.6, invert_connection_position(0.2, 0.6, s),
              invert_connection_position(-0.9, 0.6, s), c=0.12),          # A1 -> A0, in0
    ]
    a = make_genome(GenomeMode.PCGP, 2, 2, a_nodes, [0.8, 0.0], a_in)
    b_in = [0.85, 0.15]   # input positions -0.85, -0.15
    b_nodes = [
        pnode(0.3, c=0.21),
        pnode(0.7, invert_connection_position(-0.15, 0.7, s),
              invert_connection_position(-0.15, 0.7, s), c=0.22),         # B1 -> in1
    ]
    b = make_genome(GenomeMode.PCGP, 2, 2, b_nodes, [0.0, (0.7 + 1.0) / 2.0], b_in)
    return a, b


def test_output_graph_disjoint_traces():
    a, b = two_trace_parents()
    child = output_graph(a, b, SET, FSET, np.random.default_rng(0),
                         output_choices=[0, 1])
    assert child.n_nodes == 3
    assert sorted(np.round(child.nodes[:, 0], 6).tolist()) == [0.2, 0.6, 0.7]
    assert child.outputs.tolist() == [0.8, (0.7 + 1.0) / 2.0]
    # in0 used only via a's trace, in1 only via b's: both inherited directly
    assert child.inputs.tolist() == [0.9, 0.15]


def test_output_graph_all_from_one_parent():
    a, b = two_trace_parents()
    child = output_graph(a, b, SET, FSET, np.random.default_rng(0),
                         output_choices=[0, 0])
    for row in child.nodes.tolist():
        assert row in a.nodes.tolist()
    assert child.outputs.tolist() == a.outputs.tolist()


def test_output_graph_self_cross_keeps_behavior():
    rng = np.random.default_rng(77)
    for _ in range(10):
        a = random_genome(GenomeMode.PCGP, 2, 2, 10, rng)
        s = DecodeSettings(recurrency=float(rng.random() * 0.8), input_start=-0.5)
        child = output_graph(a, a, s, FSET, rng)
        x = rng.uniform(-1, 1, (6, 2))
        got = run_supervised(decode(child, s, FSET), child, x)
        want = run_supervised(decode(a, s, FSET), a, x)
        assert got.tolist() == want.tolist()


def test_output_graph_truncates_at_size_max():
    rng = np.random.default_rng(5)
    a = random_genome(GenomeMode.PCGP, 2, 2, 30, rng)
    b = random_genome(GenomeMode.PCGP, 2, 2, 30, rng)
    child = output_graph(a, b, SET, FSET, rng, bounds=SizeBounds(0, 4))
    assert child.n_nodes <= 4


# --------------------------------------------------------------- subgraph

def chain(positions, seed, n_in=1, n_out=1):
    s = SET
    rows = []
    prev = None
    rng = np.random.default_rng(seed)
    for p in positions:
        x = invert_connection_position(prev, p, s) if prev is not None else 0.0
        rows.append(pnode(p, x, 0.0, c=float(rng.random())))
        prev = p
    return make_genome(GenomeMode.PCGP, n_in, n_out, rows, rng.random(n_out), [1.0] * n_in)


def test_subgraph_union_of_selected_components():
    a = chain([0.2, 0.4], 1)
    b = chain([0.3, 0.5, 0.7], 2)
    both = subgraph(a, b, SET, FSET, np.random.default_rng(0),
                    select_a=[True], select_b=[True])
    assert both.n_nodes == 5
    none = subgraph(a, b, SET, FSET, np.random.default_rng(0),
                    select_a=[False], select_b=[False])
    assert none.n_nodes == 0


def test_subgraph_self_cross_under_forced_selection():
    a = chain([0.2, 0.4, 0.6], 3)
    n_comp = max(decode(a, SET, FSET).components) + 1
    child = subgraph(a, a, SET, FSET, np.random.default_rng(9),
                     select_a=[True] * n_comp, select_b=[False] * n_comp)
    assert flatten(child).tolist() == flatten(a).tolist()


def test_subgraph_truncates_at_size_max():
    a = chain([0.1, 0.3, 0.5], 4)
    b = chain([0.2, 0.4, 0.6], 5)
    child = subgraph(a, b, SET, FSET, np.random.default_rng(1),
                     bounds=SizeBounds(0, 4), select_a=[True], select_b=[True])
    assert child.n_nodes == 4


# ------------------------------------------------------------- properties

@hsettings(max_examples=60, deadline=None)
@given(st.sampled_from(["single_point", "random_node", "aligned_node",
                        "proportional", "output_graph", "subgraph"]),
       st.integers(0, 2**31 - 1))
def test_children_always_valid(op, seed):
    rng = np.random.default_rng(seed)
    mode = GenomeMode.PCGP if op in ("aligned_node", "output_graph", "subgraph") \
        else (GenomeMode.CGP if rng.random() < 0.5 else GenomeMode.PCGP)
    a = random_genome(mode, 2, 2, int(rng.integers(0, 12)), rng)
    b = random_genome(mode, 2, 2, int(rng.integers(0, 12)), rng)
    child = apply_crossover(a, b, op, DecodeSettings(input_start=-0.5), FSET, rng,
                            bounds=SizeBounds(0, 20))
    validate_genome(child)
    assert child.n_nodes <= 20


def test_operators_deterministic_under_seed():
    a, b = rnd(GenomeMode.PCGP, 8, 0), rnd(GenomeMode.PCGP, 6, 1)
    for op in ("single_point", "random_node", "aligned_node",
               "proportional", "output_graph", "subgraph"):
        c1 = apply_crossover(a, b, op, SET, FSET, np.random.default_rng(42))
        c2 = apply_crossover(a, b, op, SET, FSET, np.random.default_rng(42))
        assert flatten(c1).tolist() == flatten(c2).tolist(), op
