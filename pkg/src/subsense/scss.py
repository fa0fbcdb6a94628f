"""Snake-conditioned snake substitution to convergence, plus trace replay.

SCSS is the strongest of the elimination rules here: b at x_i goes when,
for some conditioning neighbour x_j, every c compatible with b has a snake
cover a (a takes c directly or has a sub for it, and stops at most at x_j).
It needs no arc-consistency precondition; unsupported values fall out as
vacuous cases.

The engine keeps block / sub / stop counters, stop-variable sets, and the
snake-cover tables of counters.build_scss.  Deleting u from D(x_r) runs
five update passes (blocks, subs, stops, snake covers, conditioning sets);
the cascade helpers mirror the counter definitions and fire only on 0-to-1
count transitions, where a value's contribution actually flips.  Cells
indexed by u are read before they go stale and never written during the
pass.

Variables with no constraints at all sit outside the edge-indexed tables,
so a pre-pass reduces their domains directly (any value substitutes for
any other when nothing is constrained).
"""

from __future__ import annotations

import time
from collections import deque

from . import counters, oracle
from .counters import subset1
from .instance import Instance
from .trace import (
    AC,
    CNS,
    NS,
    SCSS,
    SS,
    AcWitness,
    EliminationRecord,
    ReductionReport,
    ScssCover,
    ScssWitness,
    Trace,
)


def check_scss(inst: Instance) -> list[tuple[int, int, int]]:
    """All (variable, value, conditioning) triples eliminable right now.

    Builds the counter tables for the current domains without mutating
    anything; a triple qualifies when every conditioning value compatible
    with the value has a snake cover.
    """
    tables = counters.build_scss(inst)
    found = []
    for i in range(inst.n):
        for b in inst.domains[i]:
            for j in inst.neighbors(i):
                if not tables.not_snake_covered[(i, b, j)]:
                    found.append((i, b, j))
    return found


class _Run:
    def __init__(self, inst: Instance):
        self.inst = inst
        self.tables = counters.build_scss(inst)
        self.updates = self.tables.probes
        self.work: deque[tuple[int, int, int]] = deque()
        self.steps: list[EliminationRecord] = []
        self.debug = counters.debug_recompute_enabled()
        self.unsat = False
        for i in range(inst.n):
            for b in inst.domains[i]:
                for j in inst.neighbors(i):
                    if not self.tables.not_snake_covered[(i, b, j)]:
                        self.work.append((i, b, j))
                        self.updates += 1

    def run(self) -> None:
        self._reduce_unconstrained()
        while self.work:
            r, u, t = self.work.popleft()
            if u not in self.inst.domain_set(r):
                continue
            if self.tables.not_snake_covered[(r, u, t)]:
                continue
            witness = self._witness(r, u, t)
            self.inst = self.inst.remove_value(r, u)
            self.steps.append(
                EliminationRecord(len(self.steps) + 1, SCSS, r, u, witness)
            )
            if not self.inst.domains[r]:
                self.unsat = True
                break
            self._propagate(r, u)
            if self.debug:
                self._verify()

    def _reduce_unconstrained(self) -> None:
        # the counter tables only cover constrained variables; a variable
        # with no edges keeps one value and sheds the rest
        if self.inst.n < 2:
            return
        for i in range(self.inst.n):
            if self.inst.neighbors(i):
                continue
            while len(self.inst.domains[i]) > 1:
                b = self.inst.domains[i][0]
                witness = self._unconstrained_witness(i, b)
                self.inst = self.inst.remove_value(i, b)
                self.steps.append(
                    EliminationRecord(len(self.steps) + 1, SCSS, i, b, witness)
                )
                if self.debug:
                    self._verify()

    def _unconstrained_witness(self, i: int, b: int) -> ScssWitness:
        # condition on the smallest other variable; with no constraints on
        # x_i every compatibility check is vacuous
        inst = self.inst
        j = next(v for v in range(inst.n) if v != i)
        a = next(v for v in inst.domains[i] if v != b)
        ms = [m for m in inst.neighbors(j) if m != i]
        covers: dict[int, ScssCover] = {}
        for c in inst.domains[j]:
            for g in inst.domains[j]:
                if all(inst.arrow(j, m, c, g) for m in ms):
                    covers[c] = ScssCover(a, g, {})
                    break
            else:
                raise RuntimeError(
                    f"no conditioning swap for x{j}={c} at unconstrained x{i}"
                )
        return ScssWitness(conditioning=j, covers=covers)

    # -- witness construction ------------------------------------------------

    def _witness(self, r: int, u: int, t: int) -> ScssWitness:
        inst, tables = self.inst, self.tables
        row = inst.rows[(r, t)]
        row_u = row[u]
        swap_cache: dict[int, dict[int, dict[int, int]]] = {}
        covers: dict[int, ScssCover] = {}
        for c in inst.domains[t]:
            if c not in row_u:
                continue
            for a in inst.domains[r]:
                if a == u or not subset1(tables.stop_vars[(r, a, u)], t):
                    continue
                if c not in row[a] and tables.nb_subs[(r, a, t, c)] == 0:
                    continue
                if a not in swap_cache:
                    swap_cache[a] = self._swaps(r, u, a, t)
                g = self._conditioning_swap(r, t, a, c)
                covers[c] = ScssCover(a, g, swap_cache[a])
                break
            else:
                raise RuntimeError(
                    f"no snake cover for x{t}={c} while eliminating x{r}={u}"
                )
        return ScssWitness(conditioning=t, covers=covers)

    def _conditioning_swap(self, r: int, t: int, a: int, c: int) -> int:
        row_a = self.inst.rows[(r, t)][a]
        for g in self.inst.domains[t]:
            if g not in row_a:
                continue
            if g == c or subset1(self.tables.block_vars[(t, c, g)], r):
                return g
        raise RuntimeError(f"no conditioning swap for x{t}={c} toward {a}")

    def _swaps(self, r: int, u: int, a: int, t: int) -> dict[int, dict[int, int]]:
        swaps: dict[int, dict[int, int]] = {}
        for k in self.inst.neighbors(r):
            if k == t:
                continue
            row = self.inst.rows[(r, k)]
            row_u = row[u]
            row_a = row[a]
            needed: dict[int, int] = {}
            for d in self.inst.domains[k]:
                if d not in row_u or d in row_a:
                    continue
                for e in self.inst.domains[k]:
                    if e in row_a and subset1(self.tables.block_vars[(k, d, e)], r):
                        needed[d] = e
                        break
                else:
                    raise RuntimeError(
                        f"no replacement at x{k} for {d} when x{r}={u} yields to {a}"
                    )
            if needed:
                swaps[k] = needed
        return swaps

    # -- propagation ----------------------------------------------------------

    def _propagate(self, r: int, u: int) -> None:
        inst = self.inst
        tables = self.tables
        # 1. blocks through u disappear at r's neighbours
        for k in inst.neighbors(r):
            row = inst.rows[(k, r)]
            dom_k = inst.domains[k]
            for d in dom_k:
                if u not in row[d]:
                    continue
                for e in dom_k:
                    if e != d and u not in row[e]:
                        self._block_gone(k, d, e, r)
        # 2. u no longer counts as a sub at r
        for i in inst.neighbors(r):
            row = inst.rows[(i, r)]
            for a in inst.domains[i]:
                row_a = row[a]
                if u not in row_a:
                    continue
                for d in inst.domains[r]:
                    if d in row_a:
                        continue
                    if subset1(tables.block_vars[(r, d, u)], i):
                        self._dec_nb_subs(i, a, r, d)
        # 3. u no longer counts as a stop at r
        for i in inst.neighbors(r):
            row = inst.rows[(i, r)]
            for a in inst.domains[i]:
                if u in row[a] or tables.nb_subs[(i, a, r, u)] != 0:
                    continue
                for b in inst.domains[i]:
                    if u in row[b]:
                        self._dec_nb_stops(i, a, b, r)
        # 4. u no longer snake-covers r's remaining values
        for j in inst.neighbors(r):
            row = inst.rows[(r, j)]
            row_u = row[u]
            eligible = [
                b
                for b in inst.domains[r]
                if subset1(tables.stop_vars[(r, u, b)], j)
            ]
            if not eligible:
                continue
            for c in inst.domains[j]:
                if c not in row_u and tables.nb_subs[(r, u, j, c)] == 0:
                    continue
                for b in eligible:
                    self._dec_nb_snake_covers(r, b, j, c)
        # 5. u no longer serves as a conditioning value at r
        for i in inst.neighbors(r):
            for b in inst.domains[i]:
                values = tables.not_snake_covered[(i, b, r)]
                if u in values:
                    values.remove(u)
                    self.updates += 1
                    if not values:
                        self.work.append((i, b, r))
                        self.updates += 1

    def _block_gone(self, k: int, d: int, e: int, l: int) -> None:
        tables = self.tables
        cell = (k, d, e, l)
        tables.nb_blocks[cell] -= 1
        self.updates += 1
        if tables.nb_blocks[cell] < 0:
            raise RuntimeError(f"nb_blocks{cell} went negative")
        if tables.nb_blocks[cell]:
            return
        holders = tables.block_vars[(k, d, e)]
        holders.remove(l)
        self.updates += 1
        if not holders:
            for i in self.inst.neighbors(k):
                if i != l:
                    self._sub_appeared(i, k, d, e)
        elif len(holders) == 1:
            (i,) = tuple(holders)
            self._sub_appeared(i, k, d, e)

    def _sub_appeared(self, i: int, k: int, d: int, e: int) -> None:
        # block_vars(k,d,e) newly fits within {i}: e becomes a sub for d
        row = self.inst.rows[(i, k)]
        for a in self.inst.domains[i]:
            row_a = row[a]
            if d not in row_a and e in row_a:
                self._inc_nb_subs(i, a, k, d)

    # -- cascade helpers -------------------------------------------------------

    def _inc_nb_subs(self, i: int, a: int, k: int, d: int) -> None:
        tables = self.tables
        cell = (i, a, k, d)
        tables.nb_subs[cell] += 1
        self.updates += 1
        if tables.nb_subs[cell] != 1:
            return
        inst = self.inst
        row = inst.rows[(i, k)]
        # d stops stopping replacements by a ...
        for b in inst.domains[i]:
            if d in row[b]:
                self._dec_nb_stops(i, a, b, k)
        # ... and a starts snake-covering conditioning value d at x_k
        for b in inst.domains[i]:
            if b != a and subset1(tables.stop_vars[(i, a, b)], k):
                self._inc_nb_snake_covers(i, b, k, d)

    def _dec_nb_subs(self, i: int, a: int, k: int, d: int) -> None:
        tables = self.tables
        cell = (i, a, k, d)
        tables.nb_subs[cell] -= 1
        self.updates += 1
        if tables.nb_subs[cell] < 0:
            raise RuntimeError(f"nb_subs{cell} went negative")
        if tables.nb_subs[cell]:
            return
        inst = self.inst
        row = inst.rows[(i, k)]
        # d resumes stopping replacements by a ...
        for b in inst.domains[i]:
            if d in row[b]:
                self._inc_nb_stops(i, a, b, k)
        # ... and a stops snake-covering conditioning value d at x_k
        for b in inst.domains[i]:
            if b != a and subset1(tables.stop_vars[(i, a, b)], k):
                self._dec_nb_snake_covers(i, b, k, d)

    def _inc_nb_stops(self, i: int, a: int, b: int, k: int) -> None:
        tables = self.tables
        cell = (i, a, b, k)
        tables.nb_stops[cell] += 1
        self.updates += 1
        if tables.nb_stops[cell] != 1:
            return
        holders = tables.stop_vars[(i, a, b)]
        holders.add(k)
        self.updates += 1
        if len(holders) == 1:
            # the set was empty: a stops covering b everywhere except x_k
            for j in self.inst.neighbors(i):
                if j != k:
                    self._cover_scope_lost(i, a, b, j)
        elif len(holders) == 2:
            (j,) = tuple(v for v in holders if v != k)
            self._cover_scope_lost(i, a, b, j)

    def _dec_nb_stops(self, i: int, a: int, b: int, k: int) -> None:
        tables = self.tables
        cell = (i, a, b, k)
        tables.nb_stops[cell] -= 1
        self.updates += 1
        if tables.nb_stops[cell] < 0:
            raise RuntimeError(f"nb_stops{cell} went negative")
        if tables.nb_stops[cell]:
            return
        holders = tables.stop_vars[(i, a, b)]
        holders.remove(k)
        self.updates += 1
        if len(holders) == 1:
            (j,) = tuple(holders)
            self._cover_scope_gained(i, a, b, j)
        elif not holders:
            for j in self.inst.neighbors(i):
                if j != k:
                    self._cover_scope_gained(i, a, b, j)

    def _cover_scope_gained(self, i: int, a: int, b: int, j: int) -> None:
        # stop_vars(i,a,b) newly fits within {j}: a snake-covers b there
        row_a = self.inst.rows[(i, j)][a]
        nb_subs = self.tables.nb_subs
        for c in self.inst.domains[j]:
            if c in row_a or nb_subs[(i, a, j, c)] > 0:
                self._inc_nb_snake_covers(i, b, j, c)

    def _cover_scope_lost(self, i: int, a: int, b: int, j: int) -> None:
        row_a = self.inst.rows[(i, j)][a]
        nb_subs = self.tables.nb_subs
        for c in self.inst.domains[j]:
            if c in row_a or nb_subs[(i, a, j, c)] > 0:
                self._dec_nb_snake_covers(i, b, j, c)

    def _inc_nb_snake_covers(self, i: int, b: int, j: int, c: int) -> None:
        tables = self.tables
        cell = (i, b, j, c)
        tables.nb_snake_covers[cell] += 1
        self.updates += 1
        if tables.nb_snake_covers[cell] != 1:
            return
        if c not in self.inst.rows[(i, j)][b]:
            return
        values = tables.not_snake_covered[(i, b, j)]
        values.remove(c)
        self.updates += 1
        if not values:
            self.work.append((i, b, j))
            self.updates += 1

    def _dec_nb_snake_covers(self, i: int, b: int, j: int, c: int) -> None:
        tables = self.tables
        cell = (i, b, j, c)
        tables.nb_snake_covers[cell] -= 1
        self.updates += 1
        if tables.nb_snake_covers[cell] < 0:
            raise RuntimeError(f"nb_snake_covers{cell} went negative")
        if tables.nb_snake_covers[cell] == 0 and c in self.inst.rows[(i, j)][b]:
            tables.not_snake_covered[(i, b, j)].add(c)
            self.updates += 1

    def _verify(self) -> None:
        tables = self.tables
        counters.verify_tables(
            self.inst,
            nb_blocks=tables.nb_blocks,
            block_vars=tables.block_vars,
            nb_subs=tables.nb_subs,
            nb_stops=tables.nb_stops,
            stop_vars=tables.stop_vars,
            nb_snake_covers=tables.nb_snake_covers,
            not_snake_covered=tables.not_snake_covered,
        )


def scss_to_convergence(inst: Instance) -> tuple[Instance, Trace, ReductionReport]:
    """Apply snake-conditioned snake substitution until no eliminable value
    remains.

    No precondition: the rule subsumes support-based removal, so values
    without support fall out along the way.  If a domain empties the run
    stops and the report is flagged unsatisfiable.
    """
    start = time.perf_counter_ns()
    run = _Run(inst)
    run.run()
    micros = (time.perf_counter_ns() - start) // 1000
    trace = Trace(inst.name, run.steps)
    report = ReductionReport(
        instance=inst.name,
        rules=(SCSS,),
        eliminations={SCSS: len(run.steps)},
        updates=run.updates,
        micros=micros,
        initial_domain_sizes=tuple(len(d) for d in inst.domains),
        final_domain_sizes=tuple(len(d) for d in run.inst.domains),
        unsatisfiable=run.unsat,
    )
    return run.inst, trace, report


# -- replay -------------------------------------------------------------------


class ReplayError(ValueError):
    """A claimed elimination step failed certification."""


def _certify_ac(inst: Instance, i: int, b: int, j):
    candidates = [j] if j is not None else inst.neighbors(i)
    for k in candidates:
        row = inst.rows.get((i, k))
        if row is not None and not (row[b] & inst.domain_set(k)):
            return AcWitness(unsupported_at=k)
    return None


def replay_sequence(inst: Instance, steps, rules=None):
    """Apply a claimed elimination sequence, certifying every step at its
    moment.

    ``steps`` holds (variable, value) or (variable, value, conditioning)
    tuples; ``rules`` is an optional parallel list of rule names, default
    ``scss``.  Conditioned rules are certified against the given
    conditioning variable when one is present, otherwise against any.
    Returns the reduced instance and a trace carrying the certifying
    witnesses; raises ReplayError naming the first step that fails.
    """
    steps = list(steps)
    if rules is None:
        rules = [SCSS] * len(steps)
    rules = list(rules)
    if len(rules) != len(steps):
        raise ValueError("need exactly one rule per step")
    cur = inst
    records: list[EliminationRecord] = []
    for pos, step in enumerate(steps, start=1):
        step = tuple(step)
        if len(step) == 2:
            i, b = step
            j = None
        elif len(step) == 3:
            i, b, j = step
        else:
            raise ValueError(f"step {pos}: expected (variable, value[, conditioning])")
        rule = rules[pos - 1]
        if not 0 <= i < cur.n:
            raise ReplayError(f"step {pos} ({rule}): no variable with index {i}")
        label = f"step {pos} ({rule} at {cur.names[i]}={b})"
        if b not in cur.domain_set(i):
            raise ReplayError(f"{label}: value not in the current domain")
        if rule == AC:
            witness = _certify_ac(cur, i, b, j)
        elif rule == NS:
            witness = oracle.is_ns(cur, i, b)
        elif rule == SS:
            witness = oracle.is_ss(cur, i, b)
        elif rule == CNS:
            witness = (
                oracle.cns_with_conditioning(cur, i, b, j)
                if j is not None
                else oracle.is_cns(cur, i, b)
            )
        elif rule == SCSS:
            witness = (
                oracle.scss_with_conditioning(cur, i, b, j)
                if j is not None
                else oracle.is_scss(cur, i, b)
            )
        else:
            raise ValueError(f"step {pos}: unknown rule {rule!r}")
        if witness is None:
            raise ReplayError(f"{label}: the rule does not hold at this point")
        cur = cur.remove_value(i, b)
        records.append(EliminationRecord(pos, rule, i, b, witness))
    return cur, Trace(inst.name, records)
