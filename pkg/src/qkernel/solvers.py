"""Brute-force oracles, the recursive quasi-kernel construction and kernel shrinking.

``shrink_kernel`` starts from a kernel of a source-free digraph and removes,
one at a time, members that have no EPON with respect to the working set.
Every intermediate set stays an independent, inward dominated quasi-kernel,
and once every member has an EPON the injective EPON witness bounds the set
by half the vertex count. The result is a ShrinkCertificate that
``verify_certificate`` re-checks from scratch.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Callable, Iterator, Optional

from .digraph import (
    Digraph,
    GraphEncoding,
    SetLike,
    VertexSet,
    build,
    encode,
    is_source_free,
    iter_bits,
    lowest_bit,
)
from .domination import (
    EponWitnessMap,
    epons_mask,
    independent_mask,
    injection_mask,
    inward_dominated_mask,
    kernel_mask,
    non_epon_mask,
    quasi_kernel_mask,
    union_out,
)
from .errors import CapExceeded, CertificateMismatch, InvariantViolation, PreconditionFailed

TABLE_MAX_N = 16


@dataclass(frozen=True)
class SolveLimits:
    max_n_bruteforce: int = 24
    time_budget: Optional[float] = None  # seconds

    def __post_init__(self):
        if not 0 <= self.max_n_bruteforce <= 64:
            raise ValueError("max_n_bruteforce must fit in a machine word")


DEFAULT_LIMITS = SolveLimits()


@lru_cache(maxsize=None)
def _ordered_masks(n: int) -> tuple[int, ...]:
    return tuple(_iter_ordered(n))


def _iter_ordered(n: int) -> Iterator[int]:
    for k in range(n + 1):
        for combo in combinations(range(n), k):
            mask = 0
            for v in combo:
                mask |= 1 << v
            yield mask


def subsets_by_size(n: int) -> Iterator[int]:
    """All subsets of ``range(n)`` as masks, by size then lexicographically."""
    if n <= 12:
        return iter(_ordered_masks(n))
    return _iter_ordered(n)


def out_union_table(out: tuple[int, ...]) -> list[int]:
    """``table[m]`` = union of out-rows of the members of ``m``, for every mask."""
    table = [0] * (1 << len(out))
    for m in range(1, len(table)):
        low = m & -m
        table[m] = table[m ^ low] | out[low.bit_length() - 1]
    return table


def _reach_fn(out: tuple[int, ...]) -> Callable[[int], int]:
    if len(out) <= TABLE_MAX_N:
        return out_union_table(out).__getitem__
    return lambda m: union_out(out, m)


def _bounded(n: int, limits: SolveLimits) -> Iterator[int]:
    if n > limits.max_n_bruteforce:
        raise CapExceeded(f"brute force on n={n} exceeds cap {limits.max_n_bruteforce}")
    if limits.time_budget is None:
        yield from subsets_by_size(n)
        return
    deadline = time.monotonic() + limits.time_budget
    for i, m in enumerate(subsets_by_size(n)):
        if i & 4095 == 0 and time.monotonic() > deadline:
            raise CapExceeded(f"time budget of {limits.time_budget}s exhausted")
        yield m


def kernel_masks(out: tuple[int, ...], limits: SolveLimits = DEFAULT_LIMITS) -> list[int]:
    n = len(out)
    full = (1 << n) - 1
    reach = _reach_fn(out)
    found = []
    for m in _bounded(n, limits):
        r = reach(m)
        if not r & m and (m | r) == full:
            found.append(m)
    return found


def min_quasi_kernel_mask(out: tuple[int, ...], limits: SolveLimits = DEFAULT_LIMITS) -> int:
    n = len(out)
    full = (1 << n) - 1
    reach = _reach_fn(out)
    for m in _bounded(n, limits):
        r = reach(m)
        if not r & m and (m | r | reach(r)) == full:
            return m
    raise AssertionError("every digraph has a quasi-kernel")


def enumerate_kernels(D: Digraph, limits: SolveLimits = DEFAULT_LIMITS) -> list[VertexSet]:
    """All kernels of D ordered by (size, lexicographic); empty iff D has none."""
    return [VertexSet.from_mask(m) for m in kernel_masks(D.out_masks, limits)]


def find_kernel(D: Digraph, limits: SolveLimits = DEFAULT_LIMITS) -> Optional[VertexSet]:
    """A minimum kernel (first in size/lexicographic order), or None."""
    full = D.full_mask
    reach = _reach_fn(D.out_masks)
    for m in _bounded(D.n, limits):
        r = reach(m)
        if not r & m and (m | r) == full:
            return VertexSet.from_mask(m)
    return None


def min_quasi_kernel(D: Digraph, limits: SolveLimits = DEFAULT_LIMITS) -> VertexSet:
    return VertexSet.from_mask(min_quasi_kernel_mask(D.out_masks, limits))


def chvatal_mask(out: tuple[int, ...], inn: tuple[int, ...]) -> int:
    # Unrolled recursion: peel the lowest remaining vertex together with its
    # out-neighbours, then decide membership on the way back up.
    remaining = (1 << len(out)) - 1
    peeled = []
    while remaining:
        v = lowest_bit(remaining)
        peeled.append(v)
        remaining &= ~((1 << v) | out[v])
    q = 0
    for v in reversed(peeled):
        if not inn[v] & q:
            q |= 1 << v
    return q


def chvatal_quasi_kernel(D: Digraph) -> VertexSet:
    """Quasi-kernel built by the classical recursion.

    Take the lowest vertex v, solve the subgraph induced by the vertices that
    are neither v nor out-neighbours of v, and add v unless some vertex of
    that solution already has an arc into v.
    """
    return VertexSet.from_mask(chvatal_mask(D.out_masks, D.in_masks))


# --- shrinking ---------------------------------------------------------------


@dataclass(frozen=True)
class Removal:
    vertex: int
    s_set: VertexSet


@dataclass(frozen=True)
class Verdicts:
    independent: bool
    quasi_kernel: bool
    inward_dominated: bool
    size_bound: bool

    def all(self) -> bool:
        return self.independent and self.quasi_kernel and self.inward_dominated and self.size_bound

    def to_dict(self) -> dict[str, bool]:
        return {
            "independent": self.independent,
            "quasi_kernel": self.quasi_kernel,
            "inward_dominated": self.inward_dominated,
            "size_bound": self.size_bound,
        }


@dataclass(frozen=True)
class ShrinkCertificate:
    n: int
    arcs: tuple[tuple[int, int], ...]
    initial_kernel: VertexSet
    removals: tuple[Removal, ...]
    final_set: VertexSet
    witness: Optional[EponWitnessMap]
    verdicts: Verdicts = field(default_factory=lambda: Verdicts(False, False, False, False))

    @property
    def encoding(self) -> GraphEncoding:
        return encode(self.digraph())

    def digraph(self) -> Digraph:
        return build(self.n, self.arcs)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "arcs": [[u, v] for u, v in self.arcs],
            "initial_kernel": self.initial_kernel.to_list(),
            "removals": [{"vertex": r.vertex, "s_set": r.s_set.to_list()} for r in self.removals],
            "final": self.final_set.to_list(),
            "witness": {str(u): v for u, v in (self.witness or {}).items()},
            "verdicts": self.verdicts.to_dict(),
        }

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: dict) -> "ShrinkCertificate":
        v = data["verdicts"]
        return cls(
            n=int(data["n"]),
            arcs=tuple(sorted((int(a), int(b)) for a, b in data["arcs"])),
            initial_kernel=VertexSet(data["initial_kernel"]),
            removals=tuple(Removal(int(r["vertex"]), VertexSet(r["s_set"])) for r in data["removals"]),
            final_set=VertexSet(data["final"]),
            witness=EponWitnessMap({int(u): int(x) for u, x in data["witness"].items()}),
            verdicts=Verdicts(
                bool(v["independent"]),
                bool(v["quasi_kernel"]),
                bool(v["inward_dominated"]),
                bool(v["size_bound"]),
            ),
        )

    @classmethod
    def from_json(cls, text: str) -> "ShrinkCertificate":
        return cls.from_dict(json.loads(text))


def select_removal(out, inn, s_mask: int) -> int:
    """Least member of S with no EPON relative to S itself, else least member of S."""
    for u in iter_bits(s_mask):
        if not epons_mask(out, inn, s_mask, u):
            return u
    return lowest_bit(s_mask)


def _certificate(D, initial, removals, final, witness, verdicts) -> ShrinkCertificate:
    return ShrinkCertificate(
        n=D.n,
        arcs=tuple(D.arcs()),
        initial_kernel=VertexSet.from_mask(initial),
        removals=tuple(Removal(u, VertexSet.from_mask(s)) for u, s in removals),
        final_set=VertexSet.from_mask(final),
        witness=witness,
        verdicts=verdicts,
    )


def shrink_kernel(D: Digraph, K: SetLike, verify: bool = True) -> ShrinkCertificate:
    """Shrink the kernel K of a source-free digraph to a quasi-kernel of size <= n//2.

    With ``verify`` on, every removal is followed by a check that the working
    set is still an independent, inward dominated quasi-kernel and that its set
    of EPON-less members shrank strictly. Any failed check raises
    InvariantViolation with the certificate built so far.
    """
    out, inn, full = D.out_masks, D.in_masks, D.full_mask
    initial = D.mask_of(K)
    if not is_source_free(D):
        raise PreconditionFailed("not_source_free")
    if not kernel_mask(out, initial, full):
        raise PreconditionFailed("not_a_kernel")

    removals: list[tuple[int, int]] = []
    q = initial
    s = non_epon_mask(out, inn, q)

    def fail(check: str):
        partial = _certificate(D, initial, removals, q, None, _verdicts(out, inn, q, full, D.n))
        raise InvariantViolation(check, partial)

    while s:
        u = select_removal(out, inn, s)
        removals.append((u, s))
        q &= ~(1 << u)
        s_next = non_epon_mask(out, inn, q)
        if verify:
            if not independent_mask(out, q):
                fail("independent")
            if not quasi_kernel_mask(out, q, full):
                fail("quasi_kernel")
            if not inward_dominated_mask(out, inn, q):
                fail("inward_dominated")
            if s_next & ~s or s_next.bit_count() >= s.bit_count():
                fail("non_epon_set_decrease")
        s = s_next

    verdicts = _verdicts(out, inn, q, full, D.n)
    if not verdicts.all():
        fail(next(k for k, ok in verdicts.to_dict().items() if not ok))
    witness = EponWitnessMap(injection_mask(out, inn, q))
    return _certificate(D, initial, removals, q, witness, verdicts)


def _verdicts(out, inn, q: int, full: int, n: int) -> Verdicts:
    return Verdicts(
        independent=independent_mask(out, q),
        quasi_kernel=quasi_kernel_mask(out, q, full),
        inward_dominated=inward_dominated_mask(out, inn, q),
        size_bound=q.bit_count() <= n // 2,
    )


def verify_certificate(D: Digraph, cert: ShrinkCertificate) -> bool:
    """Recompute every claim in ``cert`` against D; raise CertificateMismatch on the first failure."""
    out, inn, full = D.out_masks, D.in_masks, D.full_mask
    if cert.n != D.n or tuple(sorted(cert.arcs)) != tuple(D.arcs()):
        raise CertificateMismatch("graph")
    initial = D.mask_of(cert.initial_kernel)
    if not kernel_mask(out, initial, full):
        raise CertificateMismatch("initial_kernel")

    q = initial
    prev_size = None
    for step, r in enumerate(cert.removals):
        bit = 1 << r.vertex
        if not q & bit:
            raise CertificateMismatch("removals", f"step {step}: vertex {r.vertex} not in working set")
        expected = non_epon_mask(out, inn, q)
        if D.mask_of(r.s_set) != expected:
            raise CertificateMismatch("s_set", f"step {step}")
        if not expected & bit:
            raise CertificateMismatch("removals", f"step {step}: vertex {r.vertex} has an EPON")
        if prev_size is not None and expected.bit_count() >= prev_size:
            raise CertificateMismatch("s_set", f"step {step}: no strict decrease")
        prev_size = expected.bit_count()
        q &= ~bit

    final = D.mask_of(cert.final_set)
    if not independent_mask(out, final):
        raise CertificateMismatch("independence")
    if not quasi_kernel_mask(out, final, full):
        raise CertificateMismatch("quasi_kernel")
    if not inward_dominated_mask(out, inn, final):
        raise CertificateMismatch("inward_dominated")
    if final.bit_count() > D.n // 2:
        raise CertificateMismatch("size_bound", f"{final.bit_count()} > {D.n // 2}")
    if final != q:
        raise CertificateMismatch("final_set", "does not equal initial kernel minus removals")
    if cert.witness is None:
        raise CertificateMismatch("witness", "missing")
    problem = cert.witness.violation(D, cert.final_set)
    if problem:
        raise CertificateMismatch("witness", problem)
    if not cert.verdicts.all():
        raise CertificateMismatch("verdicts")
    return True
