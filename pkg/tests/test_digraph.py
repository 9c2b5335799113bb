import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qkernel.digraph import (
    C3,
    C4,
    DOMC3,
    SHARED_SINK,
    GraphEncoding,
    VertexSet,
    arc_bit,
    build,
    decode,
    encode,
    enumerate_all,
    has_odd_directed_cycle,
    induced_subgraph,
    is_source_free,
    neighbors,
    parse_edge_list,
    serialize_edge_list,
    space_size,
    strongly_connected_components,
    to_dot,
)
from qkernel.errors import CapExceeded, OutOfRange, ParseError, SelfLoop
from qkernel.generators import random_digraph

from . import oracles


@st.composite
def digraphs(draw, max_n=6):
    n = draw(st.integers(0, max_n))
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    arcs = draw(st.lists(st.sampled_from(pairs), max_size=len(pairs))) if pairs else []
    return build(n, arcs)


class TestVertexSet:
    def test_iterates_ascending(self):
        assert list(VertexSet([5, 1, 3, 1])) == [1, 3, 5]

    def test_membership_and_len(self):
        s = VertexSet({0, 2})
        assert 0 in s and 1 not in s and len(s) == 2
        assert -1 not in s and "x" not in s

    def test_equality_with_plain_sets(self):
        assert VertexSet({0, 2}) == {0, 2}
        assert VertexSet() == set()
        assert VertexSet({1}) != {0}

    def test_algebra(self):
        a, b = VertexSet({0, 1, 2}), VertexSet({1, 3})
        assert a | b == {0, 1, 2, 3}
        assert a & b == {1}
        assert a - b == {0, 2}
        assert VertexSet({1}) <= a
        assert not b <= a

    def test_immutable(self):
        with pytest.raises(AttributeError):
            VertexSet({1}).mask = 3


class TestBuild:
    def test_c3(self):
        assert C3.n == 3
        assert C3.arcs() == [(0, 1), (1, 2), (2, 0)]

    def test_self_loop_rejected(self):
        with pytest.raises(SelfLoop):
            build(2, [(0, 0)])

    def test_out_of_range_rejected(self):
        with pytest.raises(OutOfRange):
            build(2, [(0, 2)])

    def test_duplicates_collapse(self):
        assert build(3, [(0, 1), (0, 1), (1, 2), (2, 0)]) == C3


class TestNeighbors:
    def test_examples(self):
        assert neighbors(C3, 0, "out") == {1}
        assert neighbors(C3, 0, "in") == {2}
        assert neighbors(C4, 2, "out") == {3}

    def test_out_of_range(self):
        with pytest.raises(OutOfRange):
            neighbors(C3, 3, "out")

    @given(digraphs())
    def test_in_out_consistent(self, D):
        for u in range(D.n):
            for v in range(D.n):
                assert (u in neighbors(D, v, "in")) == (v in neighbors(D, u, "out"))


def test_source_free_examples():
    assert is_source_free(C3)
    assert not is_source_free(build(2, [(0, 1)]))
    assert is_source_free(build(0, []))
    assert not is_source_free(build(1, []))


class TestInducedSubgraph:
    def test_two_vertices_of_c4(self):
        sub, mapping = induced_subgraph(C4, {2, 3})
        assert sub == build(2, [(0, 1)])
        assert mapping == {2: 0, 3: 1}

    def test_identity(self):
        sub, mapping = induced_subgraph(C3, {0, 1, 2})
        assert sub == C3
        assert mapping == {0: 0, 1: 1, 2: 2}

    def test_empty(self):
        sub, mapping = induced_subgraph(C3, set())
        assert sub.n == 0 and mapping == {}

    def test_out_of_range(self):
        with pytest.raises(OutOfRange):
            induced_subgraph(C3, {5})


class TestOddCycle:
    def test_examples(self):
        assert has_odd_directed_cycle(C3)
        assert not has_odd_directed_cycle(C4)
        assert has_odd_directed_cycle(DOMC3)

    def test_domc3_against_cycle_enumeration(self):
        cycles = oracles.directed_cycles(DOMC3)
        assert (0, 1, 2) in cycles
        assert oracles.has_odd_cycle(DOMC3)

    @pytest.mark.parametrize("n", [0, 1, 2, 3, 4])
    def test_exhaustive_agreement(self, n):
        for _, D in enumerate_all(n):
            assert has_odd_directed_cycle(D) == oracles.has_odd_cycle(D)

    def test_random_n6_agreement(self):
        rng = random.Random(6)
        for i in range(1000):
            D = random_digraph(6, i, arc_prob=rng.choice([0.15, 0.25, 0.4]))
            assert has_odd_directed_cycle(D) == oracles.has_odd_cycle(D)

    def test_two_cycle_is_even(self):
        assert not has_odd_directed_cycle(build(2, [(0, 1), (1, 0)]))

    def test_scc_partition(self):
        comps = strongly_connected_components(DOMC3)
        assert comps == [0b1111]
        comps = strongly_connected_components(build(3, [(0, 1), (1, 0), (1, 2)]))
        assert sorted(comps) == [0b011, 0b100]


class TestEncoding:
    def test_bit_positions(self):
        assert arc_bit(3, 0, 1) == 0
        assert arc_bit(3, 0, 2) == 1
        assert arc_bit(3, 1, 0) == 2
        assert arc_bit(3, 2, 1) == 5

    def test_single_arc_codes(self):
        for u in range(4):
            for v in range(4):
                if u != v:
                    assert encode(build(4, [(u, v)])).code == 1 << arc_bit(4, u, v)

    def test_domc3_code(self):
        expected = sum(1 << arc_bit(4, u, v) for u, v in DOMC3.arcs())
        assert encode(DOMC3) == GraphEncoding(4, expected)

    @pytest.mark.parametrize("n", [0, 1, 2, 3, 4])
    def test_bijection_exhaustive(self, n):
        seen = set()
        for enc, D in enumerate_all(n):
            assert encode(D) == enc
            assert decode(n, enc.code) == D
            seen.add(D)
        assert len(seen) == space_size(n)

    @given(st.integers(0, 5).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, space_size(n) - 1))))
    def test_bijection_n5(self, n_code):
        n, code = n_code
        assert encode(decode(n, code)).code == code

    def test_code_out_of_range(self):
        with pytest.raises(ValueError):
            GraphEncoding(2, 4)


class TestEnumerateAll:
    def test_counts(self):
        assert len(list(enumerate_all(1))) == 1
        assert len(list(enumerate_all(2))) == 4
        assert len(list(enumerate_all(3))) == 64

    def test_ascending_and_round_trip(self):
        codes = [enc.code for enc, _ in enumerate_all(3)]
        assert codes == list(range(64))

    def test_cap(self):
        with pytest.raises(CapExceeded):
            next(enumerate_all(7))
        with pytest.raises(CapExceeded):
            next(enumerate_all(4, cap=3))


class TestEdgeList:
    def test_parse(self):
        assert parse_edge_list("3 3\n0 1\n1 2\n2 0\n") == C3

    def test_serialize(self):
        assert serialize_edge_list(C3) == "3 3\n0 1\n1 2\n2 0\n"

    def test_serialize_sorts(self):
        D = build(3, [(2, 0), (0, 2), (1, 0)])
        assert serialize_edge_list(D) == "3 3\n0 2\n1 0\n2 0\n"

    def test_out_of_range(self):
        with pytest.raises(OutOfRange):
            parse_edge_list("2 1\n0 2\n")

    def test_self_loop(self):
        with pytest.raises(SelfLoop):
            parse_edge_list("2 1\n1 1\n")

    def test_comments(self):
        assert parse_edge_list("# the 3-cycle\n3 3\n# arcs\n0 1\n1 2\n2 0\n") == C3

    @pytest.mark.parametrize(
        "text, line",
        [("3 2\n0 1\n", 0), ("3 1\n0 x\n", 2), ("3\n", 1), ("3 1\n0 1\n1 2\n", 3), ("", 0)],
    )
    def test_parse_errors_carry_line(self, text, line):
        with pytest.raises(ParseError) as exc:
            parse_edge_list(text)
        assert exc.value.line == line

    @given(digraphs(max_n=7))
    def test_round_trip(self, D):
        assert parse_edge_list(serialize_edge_list(D)) == D


class TestDot:
    def test_highlight(self):
        dot = to_dot(C4, {0, 2})
        assert dot.startswith("digraph G {")
        assert dot.rstrip().endswith("}")
        assert "  0 [style=filled fillcolor=black fontcolor=white];" in dot
        assert "  1;" in dot
        assert "  3 -> 0;" in dot
        assert dot.count("->") == 4

    def test_highlight_out_of_range(self):
        with pytest.raises(OutOfRange):
            to_dot(C3, {3})


@settings(max_examples=50)
@given(digraphs())
def test_digraph_hash_eq(D):
    assert D == build(D.n, D.arcs())
    assert hash(D) == hash(build(D.n, D.arcs()))


def test_shared_sink_shape():
    assert SHARED_SINK.arcs() == [(0, 2), (1, 2), (2, 0), (2, 1)]
