"""Arc consistency and plain neighbourhood substitution to convergence.

establish_ac is the classic arc-revision worklist.  ns_to_convergence keeps
the block counters (counters.build_ns) and deletes any value all of whose
replacement blocks have disappeared, requeueing candidates as blocks vanish.
Both are deterministic: worklists are FIFO and every scan runs ascending.
"""

from __future__ import annotations

import time
from collections import deque

from . import counters
from .instance import Instance
from .trace import (
    AC,
    NS,
    AcWitness,
    EliminationRecord,
    NsWitness,
    ReductionReport,
    Trace,
)


def is_arc_consistent(inst: Instance) -> bool:
    """True when every current value has a support at every neighbour."""
    for i in range(inst.n):
        for j in inst.neighbors(i):
            row = inst.rows[(i, j)]
            cur = inst.domain_set(j)
            for b in inst.domains[i]:
                if not (row[b] & cur):
                    return False
    return True


def require_arc_consistent(inst: Instance, caller: str) -> None:
    if not is_arc_consistent(inst):
        raise ValueError(
            f"{caller} needs an arc-consistent instance; run establish_ac first"
        )


def establish_ac(inst: Instance) -> tuple[Instance, Trace]:
    """Remove unsupported values until arc consistent or a domain empties.

    Returns the reduced instance and the trace of removals; a wiped-out
    domain shows up as ``unsatisfiable`` on the result.
    """
    domains = [list(dom) for dom in inst.domains]
    sets = [set(dom) for dom in inst.domains]
    queue: deque[tuple[int, int]] = deque()
    for i, j in inst.edges:
        queue.append((i, j))
        queue.append((j, i))
    queued = set(queue)
    steps: list[EliminationRecord] = []
    while queue:
        i, j = queue.popleft()
        queued.discard((i, j))
        row = inst.rows[(i, j)]
        removed = False
        for b in list(domains[i]):
            if row[b] & sets[j]:
                continue
            domains[i].remove(b)
            sets[i].discard(b)
            steps.append(
                EliminationRecord(len(steps) + 1, AC, i, b, AcWitness(unsupported_at=j))
            )
            removed = True
        if not removed:
            continue
        if not domains[i]:
            break
        for k in inst.neighbors(i):
            if k != j and (k, i) not in queued:
                queue.append((k, i))
                queued.add((k, i))
    return inst.restrict(domains), Trace(inst.name, steps)


def ns_to_convergence(inst: Instance) -> tuple[Instance, Trace, ReductionReport]:
    """Eliminate values substitutable by a same-domain value that is blocked
    nowhere, until no such value remains.

    The input must be arc consistent (ValueError otherwise).  Candidate
    triples (variable, value, substitute) are processed FIFO; a stale triple
    whose value or substitute is gone is skipped.
    """
    require_arc_consistent(inst, "ns_to_convergence")
    start = time.perf_counter_ns()
    tables = counters.build_ns(inst)
    updates = tables.probes
    debug = counters.debug_recompute_enabled()

    work: deque[tuple[int, int, int]] = deque()
    for i in range(inst.n):
        for b in inst.domains[i]:
            for a in inst.domains[i]:
                if a != b and not tables.block_vars[(i, b, a)]:
                    work.append((i, b, a))
                    updates += 1

    cur = inst
    steps: list[EliminationRecord] = []
    while work:
        r, u, v = work.popleft()
        dom = cur.domain_set(r)
        if u not in dom or v not in dom:
            continue
        cur = cur.remove_value(r, u)
        steps.append(
            EliminationRecord(len(steps) + 1, NS, r, u, NsWitness(substitute=v))
        )
        # blocks through u disappear at r's neighbours
        for k in cur.neighbors(r):
            row = cur.rows[(k, r)]
            dom_k = cur.domains[k]
            for d in dom_k:
                if u not in row[d]:
                    continue
                for e in dom_k:
                    if e == d or u in row[e]:
                        continue
                    cell = (k, d, e, r)
                    tables.nb_blocks[cell] -= 1
                    updates += 1
                    left = tables.nb_blocks[cell]
                    if left < 0:
                        raise RuntimeError(f"nb_blocks{cell} went negative")
                    if left == 0:
                        holders = tables.block_vars[(k, d, e)]
                        holders.remove(r)
                        updates += 1
                        if not holders:
                            work.append((k, d, e))
                            updates += 1
        if debug:
            counters.verify_tables(
                cur, nb_blocks=tables.nb_blocks, block_vars=tables.block_vars
            )

    micros = (time.perf_counter_ns() - start) // 1000
    report = ReductionReport(
        instance=inst.name,
        rules=(NS,),
        eliminations={NS: len(steps)},
        updates=updates,
        micros=micros,
        initial_domain_sizes=tuple(len(d) for d in inst.domains),
        final_domain_sizes=tuple(len(d) for d in cur.domains),
    )
    return cur, Trace(inst.name, steps), report
