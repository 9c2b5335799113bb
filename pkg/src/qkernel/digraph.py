"""Digraph value type, vertex sets, encodings, text formats and structural queries.

Vertices are dense integers ``0..n-1``. Both vertex sets and adjacency rows
are stored as Python int bitmasks (bit ``v`` set means vertex ``v`` is
present), which keeps subset enumeration and set algebra cheap.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator
from collections.abc import Set as AbstractSet
from dataclasses import dataclass
from typing import Union

from .errors import CapExceeded, OutOfRange, ParseError, SelfLoop

DEFAULT_ENUMERATION_CAP = 6


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the indices of set bits in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def lowest_bit(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


class VertexSet(AbstractSet):
    """Immutable set of vertex ids backed by a bitmask.

    Iteration is always in ascending id order. Compares equal to any other
    set-like object with the same members.
    """

    __slots__ = ("mask",)

    def __init__(self, members: Iterable[int] = ()):
        if isinstance(members, VertexSet):
            mask = members.mask
        else:
            mask = 0
            for v in members:
                if v < 0:
                    raise OutOfRange(v, 0)
                mask |= 1 << v
        object.__setattr__(self, "mask", mask)

    @classmethod
    def from_mask(cls, mask: int) -> "VertexSet":
        if mask < 0:
            raise ValueError("negative mask")
        vs = cls.__new__(cls)
        object.__setattr__(vs, "mask", mask)
        return vs

    def __setattr__(self, name, value):
        raise AttributeError("VertexSet is immutable")

    def __contains__(self, v: object) -> bool:
        return isinstance(v, int) and v >= 0 and bool(self.mask >> v & 1)

    def __iter__(self) -> Iterator[int]:
        return iter_bits(self.mask)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __hash__(self) -> int:
        return hash(self.mask)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, VertexSet):
            return self.mask == other.mask
        if isinstance(other, AbstractSet):
            return len(self) == len(other) and all(v in self for v in other)
        return NotImplemented

    def __le__(self, other):
        if isinstance(other, VertexSet):
            return self.mask & ~other.mask == 0
        return super().__le__(other)

    def __or__(self, other):
        return VertexSet.from_mask(self.mask | VertexSet(other).mask)

    def __and__(self, other):
        return VertexSet.from_mask(self.mask & VertexSet(other).mask)

    def __sub__(self, other):
        return VertexSet.from_mask(self.mask & ~VertexSet(other).mask)

    __ror__ = __or__
    __rand__ = __and__

    def __repr__(self) -> str:
        return "VertexSet({" + ", ".join(map(str, self)) + "})"

    def to_list(self) -> list[int]:
        return list(iter_bits(self.mask))

    def min(self) -> int:
        if not self.mask:
            raise ValueError("min() of empty VertexSet")
        return lowest_bit(self.mask)


SetLike = Union[VertexSet, Iterable[int]]


class Digraph:
    """Finite loopless digraph on vertices ``0..n-1``.

    ``out_masks[u]`` has bit ``v`` set iff ``u -> v``. In-neighbour masks are
    derived once at construction. Instances are immutable and hashable.
    """

    __slots__ = ("n", "out_masks", "in_masks")

    def __init__(self, n: int, out_masks: Iterable[int]):
        out = tuple(out_masks)
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        if len(out) != n:
            raise ValueError(f"expected {n} adjacency rows, got {len(out)}")
        full = (1 << n) - 1
        inn = [0] * n
        for u, row in enumerate(out):
            if row >> u & 1:
                raise SelfLoop(u)
            if row & ~full:
                raise OutOfRange(max(iter_bits(row)), n)
            bit = 1 << u
            for v in iter_bits(row):
                inn[v] |= bit
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "out_masks", out)
        object.__setattr__(self, "in_masks", tuple(inn))

    def __setattr__(self, name, value):
        raise AttributeError("Digraph is immutable")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Digraph):
            return NotImplemented
        return self.n == other.n and self.out_masks == other.out_masks

    def __hash__(self) -> int:
        return hash((self.n, self.out_masks))

    def __repr__(self) -> str:
        return f"Digraph(n={self.n}, arcs={self.arcs()})"

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    @property
    def out_adj(self) -> tuple[VertexSet, ...]:
        return tuple(VertexSet.from_mask(m) for m in self.out_masks)

    @property
    def in_adj(self) -> tuple[VertexSet, ...]:
        return tuple(VertexSet.from_mask(m) for m in self.in_masks)

    def arcs(self) -> list[tuple[int, int]]:
        """All arcs in lexicographic order."""
        return [(u, v) for u, row in enumerate(self.out_masks) for v in iter_bits(row)]

    @property
    def arc_count(self) -> int:
        return sum(row.bit_count() for row in self.out_masks)

    def has_arc(self, u: int, v: int) -> bool:
        self.check_vertex(u)
        self.check_vertex(v)
        return bool(self.out_masks[u] >> v & 1)

    def check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise OutOfRange(v, self.n)

    def mask_of(self, vertices: SetLike) -> int:
        """Bitmask of ``vertices``, raising OutOfRange for ids outside the graph."""
        mask = vertices.mask if isinstance(vertices, VertexSet) else VertexSet(vertices).mask
        if mask >> self.n:
            raise OutOfRange(max(iter_bits(mask)), self.n)
        return mask

    def out_union(self, mask: int) -> int:
        """Union of out-neighbourhoods of the vertices in ``mask``."""
        out = self.out_masks
        acc = 0
        while mask:
            low = mask & -mask
            acc |= out[low.bit_length() - 1]
            mask ^= low
        return acc


def build(n: int, arcs: Iterable[tuple[int, int]]) -> Digraph:
    """Digraph on ``n`` vertices with exactly the given arcs (duplicates collapse)."""
    if n < 0:
        raise ValueError("vertex count must be nonnegative")
    out = [0] * n
    for u, v in arcs:
        for x in (u, v):
            if not 0 <= x < n:
                raise OutOfRange(x, n)
        if u == v:
            raise SelfLoop(u)
        out[u] |= 1 << v
    return Digraph(n, out)


def neighbors(D: Digraph, u: int, direction: str = "out") -> VertexSet:
    D.check_vertex(u)
    if direction == "out":
        return VertexSet.from_mask(D.out_masks[u])
    if direction == "in":
        return VertexSet.from_mask(D.in_masks[u])
    raise ValueError(f"direction must be 'out' or 'in', not {direction!r}")


def is_source_free(D: Digraph) -> bool:
    return all(D.in_masks)


def induced_subgraph(D: Digraph, W: SetLike) -> tuple[Digraph, dict[int, int]]:
    """Subgraph induced by ``W`` relabelled to ``0..|W|-1`` in ascending order."""
    wmask = D.mask_of(W)
    old_ids = list(iter_bits(wmask))
    mapping = {old: new for new, old in enumerate(old_ids)}
    out = []
    for old in old_ids:
        row = 0
        for v in iter_bits(D.out_masks[old] & wmask):
            row |= 1 << mapping[v]
        out.append(row)
    return Digraph(len(old_ids), out), mapping


def strongly_connected_components(D: Digraph) -> list[int]:
    """SCCs as bitmasks (iterative Tarjan), in reverse topological order."""
    n = D.n
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[int] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, iter_bits(D.out_masks[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter_bits(D.out_masks[w])))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = 0
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp |= 1 << w
                    if w == v:
                        break
                comps.append(comp)
    return comps


def has_odd_directed_cycle(D: Digraph) -> bool:
    """True iff ``D`` contains a directed cycle of odd length.

    A strongly connected digraph has an odd directed cycle exactly when its
    underlying undirected graph is not bipartite, so each SCC is 2-coloured.
    """
    for comp in strongly_connected_components(D):
        if comp & (comp - 1) == 0:
            continue
        color: dict[int, int] = {}
        for start in iter_bits(comp):
            if start in color:
                continue
            color[start] = 0
            frontier = [start]
            while frontier:
                v = frontier.pop()
                for w in iter_bits((D.out_masks[v] | D.in_masks[v]) & comp):
                    if w not in color:
                        color[w] = color[v] ^ 1
                        frontier.append(w)
                    elif color[w] == color[v]:
                        return True
    return False


# --- encodings -------------------------------------------------------------


@dataclass(frozen=True, order=True)
class GraphEncoding:
    """Labeled digraph on ``n`` vertices as an integer in ``[0, 2**(n(n-1)))``.

    Arc ``(u, v)`` occupies bit ``u*(n-1) + (v if v < u else v-1)``, so bits
    ``u*(n-1) .. u*(n-1)+n-2`` form the out-row of ``u`` with column ``u`` removed.
    """

    n: int
    code: int

    def __post_init__(self):
        if self.n < 0 or not 0 <= self.code < space_size(self.n):
            raise ValueError(f"code {self.code} out of range for n={self.n}")

    def to_digraph(self) -> Digraph:
        return decode(self.n, self.code)


def space_size(n: int) -> int:
    return 1 << (n * (n - 1))


def arc_bit(n: int, u: int, v: int) -> int:
    return u * (n - 1) + (v if v < u else v - 1)


def _expand_row(row: int, u: int) -> int:
    # reinsert a zero column at position u
    return (row & ((1 << u) - 1)) | ((row >> u) << (u + 1))


def _compress_row(mask: int, u: int) -> int:
    return (mask & ((1 << u) - 1)) | ((mask >> (u + 1)) << u)


def decode_masks(n: int, code: int) -> tuple[int, ...]:
    if n == 0:
        return ()
    width = n - 1
    row_mask = (1 << width) - 1
    return tuple(_expand_row((code >> (u * width)) & row_mask, u) for u in range(n))


def decode(n: int, code: int) -> Digraph:
    if not 0 <= code < space_size(n):
        raise ValueError(f"code {code} out of range for n={n}")
    return Digraph(n, decode_masks(n, code))


def encode(D: Digraph) -> GraphEncoding:
    width = D.n - 1
    code = 0
    for u, row in enumerate(D.out_masks):
        code |= _compress_row(row, u) << (u * width)
    return GraphEncoding(D.n, code)


def enumerate_all(n: int, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[tuple[GraphEncoding, Digraph]]:
    """Every labeled digraph on ``n`` vertices, in ascending code order."""
    if n > cap:
        raise CapExceeded(f"enumeration of n={n} exceeds cap {cap}")
    for code in range(space_size(n)):
        yield GraphEncoding(n, code), Digraph(n, decode_masks(n, code))


# --- text formats ----------------------------------------------------------


def parse_edge_list(text: str) -> Digraph:
    """Parse the ``n m`` header + ``u v`` arc-line format; ``#`` lines and blank lines are skipped."""
    header = None
    arcs: list[tuple[int, int]] = []
    expected = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ParseError(lineno, f"expected two integers, got {line!r}")
        try:
            a, b = int(fields[0]), int(fields[1])
        except ValueError:
            raise ParseError(lineno, f"expected two integers, got {line!r}") from None
        if header is None:
            if a < 0 or b < 0:
                raise ParseError(lineno, "negative count in header")
            header = (a, b)
            expected = b
            continue
        if len(arcs) >= expected:
            raise ParseError(lineno, f"more than the declared {expected} arcs")
        n = header[0]
        for x in (a, b):
            if not 0 <= x < n:
                raise OutOfRange(x, n)
        if a == b:
            raise SelfLoop(a)
        arcs.append((a, b))
    if header is None:
        raise ParseError(0, "missing 'n m' header")
    if len(arcs) != expected:
        raise ParseError(0, f"declared {expected} arcs, found {len(arcs)}")
    return build(header[0], arcs)


def serialize_edge_list(D: Digraph) -> str:
    arcs = D.arcs()
    lines = [f"{D.n} {len(arcs)}"] + [f"{u} {v}" for u, v in arcs]
    return "\n".join(lines) + "\n"


def to_dot(D: Digraph, highlight: SetLike = ()) -> str:
    """DOT source for ``D``; highlighted vertices are drawn filled black."""
    marked = D.mask_of(highlight)
    lines = ["digraph G {"]
    for v in range(D.n):
        if marked >> v & 1:
            lines.append(f"  {v} [style=filled fillcolor=black fontcolor=white];")
        else:
            lines.append(f"  {v};")
    lines.extend(f"  {u} -> {v};" for u, v in D.arcs())
    lines.append("}")
    return "\n".join(lines) + "\n"


# --- shared fixtures -------------------------------------------------------

C2 = build(2, [(0, 1), (1, 0)])
C3 = build(3, [(0, 1), (1, 2), (2, 0)])
C4 = build(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
SHARED_SINK = build(3, [(0, 2), (1, 2), (2, 0), (2, 1)])
DOMC3 = build(4, [(3, 0), (3, 1), (3, 2), (0, 1), (1, 2), (2, 0), (0, 3)])

FIXTURES = {
    "C2": C2,
    "C3": C3,
    "C4": C4,
    "SHARED_SINK": SHARED_SINK,
    "DOMC3": DOMC3,
}
