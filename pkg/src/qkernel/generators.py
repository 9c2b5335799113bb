"""Seeded deterministic digraph generators.

Every random choice comes from one SplitMix64 stream seeded with ``seed``,
consumed in a fixed order:

* ``random`` / ``random_source_free``: one draw per ordered pair ``(u, v)``,
  ``u != v``, in arc-bit order (``u`` ascending, then ``v`` ascending); the arc
  is present iff the draw is below ``floor(arc_prob * 2**64)``.
  ``random_source_free`` then visits each in-degree-0 vertex ``v`` in
  ascending order, draws ``r`` and adds the arc from ``u = r mod (n-1)``
  (shifted up by one when ``u >= v``).
* ``tournament``: one draw per pair ``i < j`` in lexicographic order; the top
  bit clear means ``i -> j``, set means ``j -> i``.
"""

from __future__ import annotations

import numpy as np

from .digraph import Digraph, _expand_row, build, iter_bits
from .errors import Unsatisfiable
from .rng import SplitMix64, probability_threshold

KINDS = ("cycle", "tournament", "random", "random_source_free", "path_of_2cycles")


def generate(kind: str, n: int, seed: int = 0, arc_prob=0.5) -> Digraph:
    if n < 0:
        raise ValueError("n must be nonnegative")
    if kind == "cycle":
        return cycle(n)
    if kind == "path_of_2cycles":
        return path_of_2cycles(n)
    if kind == "tournament":
        return tournament(n, seed)
    if kind == "random":
        return random_digraph(n, seed, arc_prob)
    if kind == "random_source_free":
        return random_source_free(n, seed, arc_prob)
    raise ValueError(f"unknown generator kind {kind!r}; expected one of {', '.join(KINDS)}")


def cycle(n: int) -> Digraph:
    """Directed n-cycle. n=1 gives the single vertex, n=2 the 2-cycle."""
    if n < 2:
        return build(n, [])
    return build(n, [(i, (i + 1) % n) for i in range(n)])


def path_of_2cycles(n: int) -> Digraph:
    """Path 0 - 1 - ... - n-1 with every edge replaced by a 2-cycle."""
    arcs = []
    for i in range(n - 1):
        arcs += [(i, i + 1), (i + 1, i)]
    return build(n, arcs)


def tournament(n: int, seed: int) -> Digraph:
    rng = SplitMix64(seed)
    arcs = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.next() >> 63:
                arcs.append((j, i))
            else:
                arcs.append((i, j))
    return build(n, arcs)


def _random_rows(n: int, rng: SplitMix64, arc_prob) -> list[int]:
    threshold = probability_threshold(arc_prob)
    if n < 2:
        return [0] * n
    width = n - 1
    draws = rng.block(n * width)
    if threshold >> 64:
        hits = np.ones(n * width, dtype=bool)
    else:
        hits = draws < np.uint64(threshold)
    packed = np.packbits(hits.reshape(n, width), axis=1, bitorder="little")
    return [_expand_row(int.from_bytes(packed[u].tobytes(), "little"), u) for u in range(n)]


def random_digraph(n: int, seed: int, arc_prob=0.5) -> Digraph:
    """Each ordered pair is an arc independently with probability ``arc_prob``."""
    return Digraph(n, _random_rows(n, SplitMix64(seed), arc_prob))


def random_source_free(n: int, seed: int, arc_prob=0.5) -> Digraph:
    if n == 1:
        raise Unsatisfiable("a single vertex cannot be source-free without a self-loop")
    rng = SplitMix64(seed)
    rows = _random_rows(n, rng, arc_prob)
    covered = 0
    for row in rows:
        covered |= row
    for v in iter_bits(((1 << n) - 1) & ~covered):
        u = rng.below(n - 1)
        if u >= v:
            u += 1
        rows[u] |= 1 << v
    return Digraph(n, rows)
