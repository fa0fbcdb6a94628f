"""Instance families used by the tests, benchmarks, and the CLI."""

from __future__ import annotations

import random
from typing import Iterable, Sequence

from .instance import Instance, make_instance


def _ne(dom: Sequence[int]) -> list[tuple[int, int]]:
    return [(a, b) for a in dom for b in dom if a != b]


def _ge(dom: Sequence[int]) -> list[tuple[int, int]]:
    return [(a, b) for a in dom for b in dom if a >= b]


def _le(dom: Sequence[int]) -> list[tuple[int, int]]:
    return [(a, b) for a in dom for b in dom if a <= b]


def _eq(dom: Sequence[int]) -> list[tuple[int, int]]:
    return [(a, a) for a in dom]


def figure1a() -> Instance:
    """Four boolean variables: x1 = x2, x3 = x4, x2 or x3, x1 or x4.

    Globally consistent, yet only value 0 is removable, and only by
    snake substitution.
    """
    dom = (0, 1)
    orp = [(0, 1), (1, 0), (1, 1)]
    return make_instance(
        "figure1a",
        [dom] * 4,
        {(0, 1): _eq(dom), (2, 3): _eq(dom), (1, 2): orp, (0, 3): orp},
    )


def figure1b() -> Instance:
    """Three variables over {0,1,2}: x1 != x2, x1 != x3, x2 >= x3.

    Nothing is neighbourhood substitutable, but conditioned substitution
    removes 0 from D(x2) and 2 from D(x3).
    """
    dom = (0, 1, 2)
    return make_instance(
        "figure1b",
        [dom] * 3,
        {(0, 1): _ne(dom), (0, 2): _ne(dom), (1, 2): _ge(dom)},
    )


def figure1c() -> Instance:
    """Four variables over {0..3}: x1 differs from the rest, x2 <= x3,
    x2 >= x4, x4 <= x3.  Reducible to singletons by snake-conditioned
    substitution alone."""
    dom = (0, 1, 2, 3)
    return make_instance(
        "figure1c",
        [dom] * 4,
        {
            (0, 1): _ne(dom),
            (0, 2): _ne(dom),
            (0, 3): _ne(dom),
            (1, 2): _le(dom),
            (1, 3): _ge(dom),
            (2, 3): _ge(dom),  # x4 <= x3
        },
    )


def two_var_cns_vs_ns(d: int) -> Instance:
    """Two variables with (x1 = x2) or (x2 = 0).

    D(x1) = {1..d-1}, D(x2) = {0..d-1}.  Eliminating 0 from D(x2) first
    (legal under conditioned substitution) blocks everything else, while
    giving plain substitution priority removes 2(d-1) - 1 values.
    """
    if d < 2:
        raise ValueError("two_var_cns_vs_ns needs d >= 2")
    dom1 = tuple(range(1, d))
    dom2 = tuple(range(d))
    pairs = [(a, b) for a in dom1 for b in dom2 if a == b or b == 0]
    return make_instance(f"cns-vs-ns-d{d}", [dom1, dom2], {(0, 1): pairs})


def set_cover_instance(universe: Iterable[int], sets: Sequence[Iterable[int]]) -> Instance:
    """Set-picker instance: x1 ranges over set indices 1..m, x2 over the
    universe, and (x1, x2) is allowed when the set contains the element.

    x3 and x4 duplicate x2 through an equality triangle, which pins every
    universe value: only D(x1) can ever shrink, and an index stays
    removable exactly while the other sets still cover the universe.

    Universe elements are relabelled 1..|U| in sorted order.
    """
    uni = sorted(set(universe))
    if not uni:
        raise ValueError("universe must be non-empty")
    members = [frozenset(s) for s in sets]
    if not members:
        raise ValueError("need at least one set")
    for idx, s in enumerate(members):
        if not s <= set(uni):
            raise ValueError(f"set {idx + 1} is not a subset of the universe")
    covered = frozenset().union(*members)
    if covered != frozenset(uni):
        raise ValueError("the sets must cover the universe")
    label = {u: pos + 1 for pos, u in enumerate(uni)}
    m = len(members)
    dom1 = tuple(range(1, m + 1))
    domu = tuple(range(1, len(uni) + 1))
    pick = [(i, label[u]) for i in dom1 for u in uni if u in members[i - 1]]
    return make_instance(
        f"setcover-u{len(uni)}-m{m}",
        [dom1, domu, domu, domu],
        {
            (0, 1): pick,
            (1, 2): _eq(domu),
            (1, 3): _eq(domu),
            (2, 3): _eq(domu),
        },
    )


def geq_chain(length: int) -> Instance:
    """Chain x1 >= x2 >= ... over domain {1,2,3}, ends tied by an equality.

    The end tie makes the untouched chain inert: without it the first
    variable's values are substitutable by larger ones (and the last's by
    smaller ones) and the chain collapses from the ends.  Seeding the
    removal of value 2 at either end makes 2 removable from every domain,
    one variable at a time.
    """
    if length < 1:
        raise ValueError("geq_chain needs at least one variable")
    dom = (1, 2, 3)
    if length == 1:
        return make_instance("geq-chain-1", [dom], {})
    if length == 2:
        # >= combined with the end tie leaves just the diagonal
        return make_instance("geq-chain-2", [dom] * 2, {(0, 1): _eq(dom)})
    constraints: dict[tuple[int, int], list[tuple[int, int]]] = {
        (t, t + 1): _ge(dom) for t in range(length - 1)
    }
    constraints[(0, length - 1)] = _eq(dom)
    return make_instance(f"geq-chain-{length}", [dom] * length, constraints)


def random_instance(
    n: int, d: int, density: float, tightness: float, seed: int
) -> Instance:
    """Seeded random instance: each pair becomes a constraint with
    probability ``density``, and each value pair of a constraint is allowed
    with probability ``tightness``.

    A sampled constraint that allows everything is dropped, so tightness 1
    yields an unconstrained instance.
    """
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    if not (0.0 <= density <= 1.0 and 0.0 <= tightness <= 1.0):
        raise ValueError("density and tightness must lie in [0, 1]")
    rng = random.Random(seed)
    dom = tuple(range(d))
    constraints = {}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() >= density:
                continue
            pairs = [(a, b) for a in dom for b in dom if rng.random() < tightness]
            constraints[(i, j)] = pairs
    name = f"random-n{n}-d{d}-p{density:g}-t{tightness:g}-s{seed}"
    return make_instance(name, [dom] * n, constraints)
