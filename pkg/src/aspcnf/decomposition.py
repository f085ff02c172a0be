"""Tree decompositions: validation, heuristics, nice form, rule assignment.

Node ids are small integers (1-based in PACE files).  A decomposition is
stored as bags plus a parent map; it is never mutated after construction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .graphs import UndirectedGraph
from .program import Program


class InvalidTd(ValueError):
    pass


class UncoveredRule(ValueError):
    def __init__(self, rule_index: int):
        super().__init__(f"no bag covers rule {rule_index}")
        self.rule_index = rule_index


class TreeDecomposition:
    def __init__(self, bags: dict[int, frozenset[int]],
                 parent: dict[int, Optional[int]], root: int):
        self.bags = {t: frozenset(b) for t, b in bags.items()}
        self.parent = dict(parent)
        self.root = root
        if root not in self.bags:
            raise InvalidTd(f"root {root} has no bag")
        if set(self.bags) != set(self.parent):
            raise InvalidTd("bag/parent node sets differ")
        self._children: dict[int, list[int]] = {t: [] for t in self.bags}
        seen = 0
        for t, par in self.parent.items():
            if par is None:
                if t != root:
                    raise InvalidTd(f"non-root node {t} has no parent")
                continue
            self._children[par].append(t)
            seen += 1
        if seen != len(self.bags) - 1:
            raise InvalidTd("parent map does not describe a tree")
        for t in self._children:
            self._children[t].sort()
        self.declared_width = max((len(b) for b in self.bags.values()), default=0) - 1

    def children(self, t: int) -> list[int]:
        return self._children[t]

    @property
    def width(self) -> int:
        return self.declared_width

    def nodes(self) -> list[int]:
        return sorted(self.bags)

    def post_order(self) -> list[int]:
        order: list[int] = []
        stack = [self.root]
        while stack:
            t = stack.pop()
            order.append(t)
            stack.extend(self._children[t])
        order.reverse()
        return order

    def with_bags(self, bags: dict[int, frozenset[int]]) -> "TreeDecomposition":
        return TreeDecomposition(bags, self.parent, self.root)

    def canonical(self, t: Optional[int] = None):
        """Shape signature ignoring node ids, for structural comparison."""
        if t is None:
            t = self.root
        subs = sorted(self.canonical(c) for c in self._children[t])
        return (tuple(sorted(self.bags[t])), tuple(subs))


# nice-node kinds
LEAF = ("leaf",)
JOIN = ("join",)


def introduce(v: int) -> tuple:
    return ("introduce", v)


def forget(v: int) -> tuple:
    return ("forget", v)


@dataclass
class NiceTd:
    td: TreeDecomposition
    kind: dict[int, tuple] = field(default_factory=dict)

    @property
    def width(self) -> int:
        return self.td.width


@dataclass
class TdValidation:
    width: int
    missing_vertices: list[int] = field(default_factory=list)
    uncovered_edges: list[tuple[int, int]] = field(default_factory=list)
    disconnected_vertices: list[int] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not (self.missing_vertices or self.uncovered_edges
                    or self.disconnected_vertices)


def validate_td(g: UndirectedGraph, td: TreeDecomposition) -> TdValidation:
    """Check the three decomposition conditions, reporting witnesses."""
    occurrences: dict[int, list[int]] = {v: [] for v in range(g.num_vertices)}
    for t in td.nodes():
        for v in td.bags[t]:
            occurrences[v].append(t)
    report = TdValidation(width=td.width)
    for v in range(g.num_vertices):
        if not occurrences[v]:
            report.missing_vertices.append(v)
    node_sets = {v: set(ts) for v, ts in occurrences.items()}
    for u, v in g.edges():
        small, large = sorted((node_sets[u], node_sets[v]), key=len)
        if not any(t in large for t in small):
            report.uncovered_edges.append((u, v))
    # connectedness: the nodes holding v form one subtree iff exactly one
    # of them has a parent without v
    for v, ts in occurrences.items():
        if not ts:
            continue
        roots = 0
        for t in ts:
            par = td.parent[t]
            if par is None or v not in td.bags[par]:
                roots += 1
        if roots != 1:
            report.disconnected_vertices.append(v)
    return report


def decompose_heuristic(g: UndirectedGraph, method: str = "min-fill",
                        seed: int = 0) -> TreeDecomposition:
    """Heuristic decomposition from an elimination ordering.

    method is ``min-fill`` or ``min-degree``; ties are broken by a seeded
    shuffle so different seeds explore different valid decompositions.
    """
    if method not in ("min-fill", "min-degree"):
        raise ValueError(f"unknown heuristic {method!r}")
    n = g.num_vertices
    if n == 0:
        return TreeDecomposition({1: frozenset()}, {1: None}, 1)
    rng = random.Random(seed)
    order = list(range(n))
    rng.shuffle(order)
    rank = {v: i for i, v in enumerate(order)}

    adj: dict[int, set[int]] = {v: set(g.neighbors[v]) for v in range(n)}

    def fill_score(v: int) -> int:
        nb = adj[v]
        missing = 0
        for u in nb:
            missing += len(nb - adj[u]) - 1  # v itself is never in adj[u]
        return missing // 2

    score = (fill_score if method == "min-fill"
             else lambda v: len(adj[v]))
    scores = {v: score(v) for v in adj}

    elim_bags: list[tuple[int, frozenset[int]]] = []
    elim_index: dict[int, int] = {}
    while adj:
        v = min(adj, key=lambda u: (scores[u], rank[u]))
        nb = adj[v]
        elim_index[v] = len(elim_bags)
        elim_bags.append((v, frozenset(nb | {v})))
        touched = set(nb)
        for u in nb:
            adj[u].discard(v)
        for u in nb:
            for w in nb:
                if u < w and w not in adj[u]:
                    adj[u].add(w)
                    adj[w].add(u)
        del adj[v]
        del scores[v]
        if method == "min-fill":
            for u in set(touched):
                touched |= adj[u]
            touched &= set(adj)
            for u in touched:
                scores[u] = fill_score(u)
        else:
            for u in touched & set(adj):
                scores[u] = len(adj[u])

    # bag i attaches below the bag of its earliest-eliminated other member
    bags: dict[int, frozenset[int]] = {}
    parent: dict[int, Optional[int]] = {}
    for i, (v, bag) in enumerate(elim_bags):
        bags[i + 1] = bag
        rest = [elim_index[u] for u in bag if u != v]
        parent[i + 1] = min(rest) + 1 if rest else None
    root = len(elim_bags)
    for t in list(parent):
        if parent[t] is None and t != root:
            parent[t] = root
    return TreeDecomposition(bags, parent, root)


def make_nice(td: TreeDecomposition, g: Optional[UndirectedGraph] = None) -> NiceTd:
    """Expand a TD into nice form with an empty root bag; width unchanged.

    Transition chains forget first (descending), then introduce
    (ascending); joins are folded left over the sorted children.
    """
    if g is not None:
        report = validate_td(g, td)
        if not report.valid:
            raise InvalidTd(f"input decomposition invalid: {report}")
    bags: dict[int, frozenset[int]] = {}
    parent: dict[int, Optional[int]] = {}
    kind: dict[int, tuple] = {}
    counter = [0]

    def new_node(bag: frozenset[int], k: tuple, children: list[int]) -> int:
        counter[0] += 1
        node = counter[0]
        bags[node] = bag
        kind[node] = k
        parent[node] = None
        for c in children:
            parent[c] = node
        return node

    def transition(top: int, target: frozenset[int]) -> int:
        cur, bag = top, bags[top]
        for v in sorted(bag - target, reverse=True):
            bag = bag - {v}
            cur = new_node(bag, forget(v), [cur])
        for v in sorted(target - bag):
            bag = bag | {v}
            cur = new_node(bag, introduce(v), [cur])
        return cur

    def build(t: int) -> int:
        target = td.bags[t]
        kids = td.children(t)
        if not kids:
            top = new_node(frozenset(), LEAF, [])
            return transition(top, target)
        tops = [transition(build(c), target) for c in kids]
        while len(tops) > 1:
            merged = new_node(target, JOIN, [tops[0], tops[1]])
            tops = [merged] + tops[2:]
        return tops[0]

    import sys
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 4 * len(td.bags) + 100))
    try:
        top = build(td.root)
    finally:
        sys.setrecursionlimit(old_limit)
    top = transition(top, frozenset())
    return NiceTd(TreeDecomposition(bags, parent, top), kind)


def audit_nice(nice: NiceTd) -> list[str]:
    """Structural complaints about node kinds; empty when truly nice."""
    problems = []
    td = nice.td
    for t in td.nodes():
        k = nice.kind.get(t)
        kids = td.children(t)
        bag = td.bags[t]
        if k is None:
            problems.append(f"node {t} has no kind")
        elif k == LEAF:
            if kids or bag:
                problems.append(f"leaf {t} must be childless and empty")
        elif k == JOIN:
            if len(kids) != 2 or any(td.bags[c] != bag for c in kids):
                problems.append(f"join {t} needs two children with equal bags")
        elif k[0] == "introduce":
            if len(kids) != 1 or td.bags[kids[0]] | {k[1]} != bag or k[1] in td.bags[kids[0]]:
                problems.append(f"introduce {t} malformed")
        elif k[0] == "forget":
            if len(kids) != 1 or bag | {k[1]} != td.bags[kids[0]] or k[1] in bag:
                problems.append(f"forget {t} malformed")
        elif k[0] == "copy":
            if len(kids) != 1 or td.bags[kids[0]] != bag:
                problems.append(f"copy {t} malformed")
        else:
            problems.append(f"unknown kind {k} at {t}")
    return problems


def bag_program(p: Program, td: TreeDecomposition, t: int) -> list[int]:
    """Indices of rules entirely covered by the bag of node t."""
    bag = td.bags[t]
    return [i for i, r in enumerate(p.rules) if r.atoms() <= bag]


def assign_rules(p: Program, nice: NiceTd) -> dict[int, int]:
    """Map each rule to the unique top-most node whose bag covers it."""
    td = nice.td
    occurrences: dict[int, list[int]] = {a: [] for a in range(p.num_atoms)}
    for t in td.nodes():
        for v in td.bags[t]:
            occurrences[v].append(t)
    post_index = {t: i for i, t in enumerate(td.post_order())}
    assignment: dict[int, int] = {}
    for i, r in enumerate(p.rules):
        ats = r.atoms()
        anchor = min(ats, key=lambda a: len(occurrences[a]))
        candidates = []
        for t in occurrences[anchor]:
            if not ats <= td.bags[t]:
                continue
            par = td.parent[t]
            if par is None or not ats <= td.bags[par]:
                candidates.append(t)
        if not candidates:
            raise UncoveredRule(i)
        assignment[i] = min(candidates, key=lambda t: post_index[t])
    return assignment


def read_td(text: str, root: Optional[int] = None) -> TreeDecomposition:
    """Parse PACE-2017 ``.td`` text; vertices are converted to 0-based."""
    bags: dict[int, frozenset[int]] = {}
    edges: list[tuple[int, int]] = []
    declared = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "s":
            if declared is not None or len(parts) != 5 or parts[1] != "td":
                raise InvalidTd(f"line {lineno}: bad solution line")
            declared = (int(parts[2]), int(parts[3]), int(parts[4]))
        elif parts[0] == "b":
            bag_id = int(parts[1])
            if bag_id in bags:
                raise InvalidTd(f"line {lineno}: duplicate bag {bag_id}")
            bags[bag_id] = frozenset(int(v) - 1 for v in parts[2:])
        else:
            if len(parts) != 2:
                raise InvalidTd(f"line {lineno}: bad edge line")
            edges.append((int(parts[0]), int(parts[1])))
    if declared is None:
        raise InvalidTd("missing s-line")
    if declared[0] != len(bags):
        raise InvalidTd(f"s-line declares {declared[0]} bags, found {len(bags)}")
    if root is None:
        root = min(bags) if bags else 1
    if root not in bags:
        raise InvalidTd(f"root {root} is not a bag id")
    # orient edges away from the root
    adjacency: dict[int, list[int]] = {t: [] for t in bags}
    for a, b in edges:
        if a not in bags or b not in bags:
            raise InvalidTd(f"edge ({a},{b}) references unknown bag")
        adjacency[a].append(b)
        adjacency[b].append(a)
    parent: dict[int, Optional[int]] = {root: None}
    queue = [root]
    while queue:
        t = queue.pop()
        for u in adjacency[t]:
            if u not in parent:
                parent[u] = t
                queue.append(u)
    if set(parent) != set(bags):
        raise InvalidTd("bag graph is not connected")
    return TreeDecomposition(bags, parent, root)


def write_td(td: TreeDecomposition) -> str:
    """Canonical PACE text: bags ascending, edges as sorted pairs."""
    all_vertices: set[int] = set()
    for b in td.bags.values():
        all_vertices |= b
    lines = [f"s td {len(td.bags)} {max((len(b) for b in td.bags.values()), default=0)} "
             f"{max(all_vertices) + 1 if all_vertices else 0}"]
    for t in sorted(td.bags):
        vs = " ".join(str(v + 1) for v in sorted(td.bags[t]))
        lines.append(f"b {t} {vs}".rstrip())
    pairs = sorted(
        (min(t, par), max(t, par))
        for t, par in td.parent.items() if par is not None
    )
    for a, b in pairs:
        lines.append(f"{a} {b}")
    return "\n".join(lines) + "\n"
