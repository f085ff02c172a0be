"""Complete SAT search used by the oracle layer.

Three engines, all exact:
  * SatSolver - conflict-driven clause learning core (two watched literals,
    first-UIP learning, phase saving).  Projected model enumeration walks
    the projection variables chronologically and uses assumption-based
    solves at the leaves; learned clauses are implied by the formula, so
    no blocking clauses over the projection are ever added.
  * count_models - Davis-Putnam counter with batch unit propagation,
    free-variable shortcut and connected-component splitting.
  * truth_table_models - brute 2^n sweep, kept as an independent oracle
    for the other two.
"""

from __future__ import annotations

import heapq
from collections import Counter
from typing import Iterable, Optional, Sequence


class SatSolver:
    def __init__(self, num_vars: int, clauses: Iterable[Sequence[int]]):
        self.nv = num_vars
        self.val: list[int] = [0] * (num_vars + 1)  # 0 free, 1 true, -1 false
        self.level: list[int] = [0] * (num_vars + 1)
        self.reason: list[Optional[int]] = [None] * (num_vars + 1)
        self.phase: list[int] = [-1] * (num_vars + 1)
        self.activity: list[float] = [0.0] * (num_vars + 1)
        self.var_inc = 1.0
        self.heap: list[tuple[float, int]] = []
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.clauses: list[list[int]] = []
        self.watchers: list[list[int]] = [[] for _ in range(2 * num_vars + 1)]
        self.root_units: list[int] = []
        self.has_empty = False
        self.ok = True
        for c in clauses:
            c = list(dict.fromkeys(c))
            if not c:
                self.has_empty = True
            elif len(c) == 1:
                self.root_units.append(c[0])
            else:
                self._attach(c)
        for v in range(1, num_vars + 1):
            heapq.heappush(self.heap, (0.0, v))

    # -- infrastructure -------------------------------------------------

    def _attach(self, c: list[int]) -> int:
        idx = len(self.clauses)
        self.clauses.append(c)
        self.watchers[c[0] + self.nv].append(idx)
        self.watchers[c[1] + self.nv].append(idx)
        return idx

    def _lit_val(self, lit: int) -> int:
        v = self.val[abs(lit)]
        return v if lit > 0 else -v

    def _bump(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for u in range(1, self.nv + 1):
                self.activity[u] *= 1e-100
            self.var_inc *= 1e-100
        heapq.heappush(self.heap, (-self.activity[v], v))

    def _decision_level(self) -> int:
        return len(self.trail_lim)

    def _enqueue(self, lit: int, reason: Optional[int]) -> None:
        v = abs(lit)
        self.val[v] = 1 if lit > 0 else -1
        self.level[v] = self._decision_level()
        self.reason[v] = reason
        self.trail.append(lit)

    def _new_level(self, lit: int) -> None:
        self.trail_lim.append(len(self.trail))
        self._enqueue(lit, None)

    def _cancel_until(self, target_level: int) -> None:
        if self._decision_level() <= target_level:
            return
        bound = self.trail_lim[target_level]
        for lit in self.trail[bound:]:
            v = abs(lit)
            self.phase[v] = self.val[v]
            self.val[v] = 0
            heapq.heappush(self.heap, (-self.activity[v], v))
        del self.trail[bound:]
        del self.trail_lim[target_level:]
        self.qhead = min(self.qhead, len(self.trail))

    def _propagate(self) -> Optional[int]:
        """Returns the index of a conflicting clause, or None."""
        val = self.val
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            falsified = -lit
            watch = self.watchers[falsified + self.nv]
            i = 0
            while i < len(watch):
                ci = watch[i]
                c = self.clauses[ci]
                if c[0] == falsified:
                    c[0], c[1] = c[1], c[0]
                first = c[0]
                fv = val[abs(first)]
                if (fv if first > 0 else -fv) == 1:
                    i += 1
                    continue
                moved = False
                for j in range(2, len(c)):
                    lj = c[j]
                    vj = val[abs(lj)]
                    if (vj if lj > 0 else -vj) != -1:
                        c[1], c[j] = c[j], c[1]
                        self.watchers[lj + self.nv].append(ci)
                        watch[i] = watch[-1]
                        watch.pop()
                        moved = True
                        break
                if moved:
                    continue
                if fv != 0:  # first is false: whole clause false
                    return ci
                self._enqueue(first, ci)
                i += 1
        return None

    def _analyze(self, confl: int) -> tuple[list[int], int]:
        """First-UIP conflict analysis; returns (learned clause, backjump
        level) with the asserting literal in front."""
        learned: list[int] = []
        seen = [False] * (self.nv + 1)
        counter = 0
        lit = None
        index = len(self.trail)
        cur_level = self._decision_level()
        reason_lits = list(self.clauses[confl])
        while True:
            for q in reason_lits:
                v = abs(q)
                if not seen[v] and self.level[v] > 0:
                    seen[v] = True
                    self._bump(v)
                    if self.level[v] >= cur_level:
                        counter += 1
                    else:
                        learned.append(q)
            while True:
                index -= 1
                lit = self.trail[index]
                if seen[abs(lit)]:
                    break
            counter -= 1
            seen[abs(lit)] = False
            if counter == 0:
                break
            r = self.reason[abs(lit)]
            reason_lits = [q for q in self.clauses[r] if q != lit]
        learned.insert(0, -lit)
        if len(learned) == 1:
            return learned, 0
        bj = max(self.level[abs(q)] for q in learned[1:])
        # put a literal of the backjump level second, for watching
        for k in range(1, len(learned)):
            if self.level[abs(learned[k])] == bj:
                learned[1], learned[k] = learned[k], learned[1]
                break
        return learned, bj

    def _pick(self) -> Optional[int]:
        while self.heap:
            act, v = self.heap[0]
            if self.val[v] == 0 and act == -self.activity[v]:
                return v
            heapq.heappop(self.heap)
        return None

    def _solve_under(self, assumptions: Sequence[int]) -> bool:
        """CDCL search with the given assumption literals.

        On True the satisfying assignment is on the trail; on False the
        state is rewound to decision level 0.  Learned clauses persist.
        """
        if self.has_empty or not self.ok:
            return False
        self._cancel_until(0)
        for lit in self.root_units:
            if self._lit_val(lit) == -1:
                self.ok = False
                return False
            if self._lit_val(lit) == 0:
                self._enqueue(lit, None)
        n_assumed = 0
        while True:
            confl = self._propagate()
            if confl is not None:
                if self._decision_level() == 0:
                    self.ok = False
                    return False
                learned, bj = self._analyze(confl)
                self._cancel_until(bj)
                if len(learned) == 1:
                    if self._lit_val(learned[0]) == -1:
                        self.ok = False
                        return False
                    if self._lit_val(learned[0]) == 0:
                        self._enqueue(learned[0], None)
                else:
                    idx = self._attach(learned)
                    self._enqueue(learned[0], idx)
                self.var_inc *= 1.05
                n_assumed = min(n_assumed, self._decision_level())
                continue
            if n_assumed < len(assumptions):
                lit = assumptions[n_assumed]
                v = self._lit_val(lit)
                if v == -1:
                    self._cancel_until(0)
                    return False
                n_assumed += 1
                if v == 0:
                    self._new_level(lit)
                else:
                    self.trail_lim.append(len(self.trail))
                continue
            v = self._pick()
            if v is None:
                return True
            self._new_level(v if self.phase[v] >= 0 else -v)

    def solve(self, assumptions: Sequence[int] = ()) -> bool:
        result = self._solve_under(list(assumptions))
        self._cancel_until(0)
        return result

    def enumerate_projected(self, projection: Sequence[int],
                            limit: Optional[int] = None
                            ) -> tuple[set[frozenset[int]], bool]:
        """All projections of models onto the given variables.

        The projection variables are walked chronologically; one
        assumption-based solve decides each branch, and a found model's
        own projection is followed first so successful branches are free.
        """
        proj = list(projection)
        result: set[frozenset[int]] = set()
        complete = True

        def model_values() -> dict[int, bool]:
            return {v: self.val[v] == 1 for v in proj}

        def rec(prefix: list[int], model: Optional[dict[int, bool]]) -> bool:
            nonlocal complete
            if limit is not None and len(result) >= limit:
                complete = False
                return False
            if model is None:
                if not self._solve_under(prefix):
                    return True
                model = model_values()
            i = len(prefix)
            if i == len(proj):
                result.add(frozenset(v for v in proj if model[v]))
                return True
            v = proj[i]
            favored = v if model[v] else -v
            if not rec(prefix + [favored], model):
                return False
            return rec(prefix + [-favored], None)

        rec([], None)
        self._cancel_until(0)
        return result, complete


def _propagate_units(clauses: list[list[int]]) -> Optional[tuple[list[list[int]], int]]:
    """Exhaustive unit propagation on a clause list copy.

    Returns (residual clauses, assigned count) or None on conflict.
    Units are collected and applied a whole batch per pass.
    """
    assigned: dict[int, int] = {}
    work = clauses
    while True:
        batch: set[int] = set()
        for c in work:
            if len(c) == 1:
                lit = c[0]
                if -lit in batch:
                    return None
                batch.add(lit)
        if not batch:
            return work, len(assigned)
        for lit in batch:
            if assigned.get(abs(lit), lit) != lit:
                return None
            assigned[abs(lit)] = lit
        nxt = []
        for c in work:
            keep = []
            satisfied = False
            for l in c:
                if l in batch:
                    satisfied = True
                    break
                if -l not in batch:
                    keep.append(l)
            if satisfied:
                continue
            if not keep:
                return None
            nxt.append(keep)
        work = nxt


def _components(clauses: list[list[int]]) -> list[list[list[int]]]:
    parent: dict[int, int] = {}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c in clauses:
        vs = [abs(l) for l in c]
        for v in vs:
            parent.setdefault(v, v)
        for v in vs[1:]:
            ra, rb = find(vs[0]), find(v)
            if ra != rb:
                parent[ra] = rb
    groups: dict[int, list[list[int]]] = {}
    for c in clauses:
        groups.setdefault(find(abs(c[0])), []).append(c)
    return list(groups.values())


def _count(clauses: list[list[int]], cache: dict) -> int:
    """Model count over exactly the variables occurring in clauses.

    Branches the lowest variable id first: ids follow the emission order
    (inputs of one decomposition node before the next), so together with
    connected-component splitting and the component cache this behaves
    like dynamic programming along the guiding decomposition.
    """
    before = {abs(l) for c in clauses for l in c}
    prop = _propagate_units(clauses)
    if prop is None:
        return 0
    residual, nassigned = prop
    after = {abs(l) for c in residual for l in c}
    free = len(before) - nassigned - len(after)
    if not residual:
        return 1 << free
    total = 1 << free
    for comp in _components(residual):
        key = frozenset(tuple(sorted(c)) for c in comp)
        sub = cache.get(key)
        if sub is None:
            v = min(abs(l) for c in comp for l in c)
            sub = (_count(comp + [[v]], cache)
                   + _count(comp + [[-v]], cache))
            cache[key] = sub
        if sub == 0:
            return 0
        total *= sub
    return total


def count_models(num_vars: int, clauses: Iterable[Sequence[int]],
                 assumptions: Sequence[int] = ()) -> int:
    """Exact number of models over all num_vars variables."""
    cls = [list(c) for c in clauses]
    cls.extend([a] for a in assumptions)
    for c in cls:
        if not c:
            return 0
    mentioned = {abs(l) for c in cls for l in c}
    silent = num_vars - len(mentioned)
    import sys
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 4 * num_vars + 1000))
    try:
        return _count(cls, {}) << silent
    finally:
        sys.setrecursionlimit(old)


def truth_table_models(num_vars: int, clauses: Iterable[Sequence[int]]):
    """Yield every model as a frozenset of true variables (2^n sweep)."""
    cls = [list(c) for c in clauses]
    for bits in range(1 << num_vars):
        model = frozenset(v for v in range(1, num_vars + 1)
                          if (bits >> (v - 1)) & 1)
        ok = True
        for c in cls:
            if not any((l > 0) == (abs(l) in model) for l in c):
                ok = False
                break
        if ok:
            yield model
    return
