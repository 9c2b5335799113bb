"""Independence, kernels, quasi-kernels, inward domination and EPONs.

For a set S and a member u, an *external private out-neighbour* (EPON) of u
is a vertex v outside S with u -> v whose only in-neighbour inside S is u.

Each public predicate has a ``*_mask`` twin taking raw adjacency tuples and
bitmasks; the solvers and the explorer call those directly in hot loops.
"""

from __future__ import annotations

from collections.abc import Iterator, Mapping
from typing import Optional

from .digraph import Digraph, SetLike, VertexSet, iter_bits, lowest_bit
from .errors import NoEpon, NotAMember


# --- mask level ------------------------------------------------------------


def union_out(out: tuple[int, ...], mask: int) -> int:
    acc = 0
    while mask:
        low = mask & -mask
        acc |= out[low.bit_length() - 1]
        mask ^= low
    return acc


def independent_mask(out, mask: int) -> bool:
    # loopless, so any arc inside the set lands on a member
    return union_out(out, mask) & mask == 0


def kernel_mask(out, mask: int, full: int) -> bool:
    reach = union_out(out, mask)
    return reach & mask == 0 and (mask | reach) == full


def quasi_kernel_mask(out, mask: int, full: int) -> bool:
    one = union_out(out, mask)
    if one & mask:
        return False
    return (mask | one | union_out(out, one)) == full


def inward_dominated_mask(out, inn, mask: int) -> bool:
    entering = 0
    for w in iter_bits(mask):
        entering |= inn[w]
    entering &= ~mask
    return entering & ~union_out(out, mask) == 0


def epons_mask(out, inn, S: int, u: int) -> int:
    bit = 1 << u
    found = 0
    for v in iter_bits(out[u] & ~S):
        if inn[v] & S == bit:
            found |= 1 << v
    return found


def has_epon_mask(out, inn, S: int, u: int) -> bool:
    bit = 1 << u
    for v in iter_bits(out[u] & ~S):
        if inn[v] & S == bit:
            return True
    return False


def non_epon_mask(out, inn, K: int) -> int:
    result = 0
    for u in iter_bits(K):
        if not has_epon_mask(out, inn, K, u):
            result |= 1 << u
    return result


def injection_mask(out, inn, S: int) -> dict[int, int]:
    witness = {}
    for u in iter_bits(S):
        found = epons_mask(out, inn, S, u)
        if not found:
            raise NoEpon(u)
        witness[u] = lowest_bit(found)
    return witness


# --- public API ------------------------------------------------------------


def is_independent(D: Digraph, S: SetLike) -> bool:
    return independent_mask(D.out_masks, D.mask_of(S))


def is_kernel(D: Digraph, K: SetLike) -> bool:
    return kernel_mask(D.out_masks, D.mask_of(K), D.full_mask)


def is_quasi_kernel(D: Digraph, Q: SetLike) -> bool:
    return quasi_kernel_mask(D.out_masks, D.mask_of(Q), D.full_mask)


def is_inward_dominated(D: Digraph, Q: SetLike) -> bool:
    """Every outside in-neighbour of a member of Q has an in-neighbour in Q.

    Checks only this condition; whether Q is a quasi-kernel is a separate test.
    """
    return inward_dominated_mask(D.out_masks, D.in_masks, D.mask_of(Q))


def epons(D: Digraph, S: SetLike, u: int) -> VertexSet:
    mask = D.mask_of(S)
    D.check_vertex(u)
    if not mask >> u & 1:
        raise NotAMember(u)
    return VertexSet.from_mask(epons_mask(D.out_masks, D.in_masks, mask, u))


def non_epon_members(D: Digraph, K: SetLike) -> VertexSet:
    return VertexSet.from_mask(non_epon_mask(D.out_masks, D.in_masks, D.mask_of(K)))


class EponWitnessMap(Mapping):
    """Total map from the members of a set to one chosen EPON each.

    Privacy makes any such choice injective, so the map pairs every member
    with a distinct outside vertex and thereby certifies ``2|S| <= n``.
    """

    def __init__(self, entries: Mapping[int, int]):
        self._entries = dict(sorted(entries.items()))

    def __getitem__(self, u: int) -> int:
        return self._entries[u]

    def __iter__(self) -> Iterator[int]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __repr__(self) -> str:
        return f"EponWitnessMap({self._entries})"

    def violation(self, D: Digraph, S: SetLike) -> Optional[str]:
        """First reason the map fails to certify the bound for S, or None."""
        mask = D.mask_of(S)
        if set(self._entries) != set(iter_bits(mask)):
            return "keys differ from the set"
        seen = set()
        for u, v in self._entries.items():
            if not 0 <= v < D.n:
                return f"value {v} out of range"
            if mask >> v & 1:
                return f"value {v} lies inside the set"
            if v in seen:
                return f"value {v} used twice"
            seen.add(v)
            if not epons_mask(D.out_masks, D.in_masks, mask, u) >> v & 1:
                return f"{v} is not an EPON of {u}"
        return None


def epon_injection(D: Digraph, S: SetLike) -> EponWitnessMap:
    """Map each member of S to its least EPON.

    Raises NoEpon carrying the least member that has none.
    """
    return EponWitnessMap(injection_mask(D.out_masks, D.in_masks, D.mask_of(S)))


# --- explanations used by the CLI ---------------------------------------------


def independence_violation(D: Digraph, S: SetLike) -> Optional[tuple[int, int]]:
    """Least arc with both ends in S, if any."""
    mask = D.mask_of(S)
    for u in iter_bits(mask):
        hit = D.out_masks[u] & mask
        if hit:
            return u, lowest_bit(hit)
    return None


def undominated_vertex(D: Digraph, K: SetLike) -> Optional[int]:
    mask = D.mask_of(K)
    missing = D.full_mask & ~(mask | D.out_union(mask))
    return lowest_bit(missing) if missing else None


def uncovered_vertex(D: Digraph, Q: SetLike) -> Optional[int]:
    mask = D.mask_of(Q)
    one = D.out_union(mask)
    missing = D.full_mask & ~(mask | one | D.out_union(one))
    return lowest_bit(missing) if missing else None


def inward_violation(D: Digraph, Q: SetLike) -> Optional[tuple[int, int]]:
    """Least arc v -> w with w in Q, v outside Q and no member of Q hitting v."""
    mask = D.mask_of(Q)
    hit = D.out_union(mask)
    for w in iter_bits(mask):
        bad = D.in_masks[w] & ~mask & ~hit
        if bad:
            return lowest_bit(bad), w
    return None
