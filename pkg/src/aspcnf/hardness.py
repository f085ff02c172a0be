"""Disjoint-paths instances and their reduction to normal programs.

The pipeline prepares a decomposition that keeps every open source or
destination inside the current bag (pair-respecting) and makes
consecutively closed pairs share a bag (pair-connected), then emits the
reachability / linking / disjointness rule groups node by node.  Audits
re-check every structural promise instead of trusting the constructions.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .decomposition import TreeDecomposition, decompose_heuristic, make_nice, validate_td
from .graphs import Digraph, UndirectedGraph
from .program import Program, parse_program, ProgramBuilder


class MalformedInstance(ValueError):
    pass


class InvariantViolation(ValueError):
    pass


class AuditFailure(RuntimeError):
    """A constructed decomposition broke one of its audited promises."""


EARLY_OUT_TEXT = "a :- not a.\n"


@dataclass(frozen=True)
class DjpInstance:
    """Digraph plus disjoint (source, destination) pairs (0-based)."""

    graph: Digraph
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen: set[int] = set()
        for s, d in self.pairs:
            for v in (s, d):
                if not (0 <= v < self.graph.num_vertices):
                    raise MalformedInstance(f"pair vertex {v} out of range")
                if v in seen:
                    raise InvariantViolation(f"vertex {v} occurs twice in pairs")
                seen.add(v)
        sources = {s for s, _ in self.pairs}
        dests = {d for _, d in self.pairs}
        for u, v in self.graph.arcs():
            if u == v:
                raise MalformedInstance(f"self-loop on vertex {u}")
            if v in sources:
                raise InvariantViolation(f"arc ({u},{v}) enters source {v}")
            if u in dests:
                raise InvariantViolation(f"arc ({u},{v}) leaves destination {u}")

    def underlying(self) -> UndirectedGraph:
        return UndirectedGraph(self.graph.num_vertices,
                               {(min(u, v), max(u, v))
                                for u, v in self.graph.arcs()})


def djp_parse(text: str) -> DjpInstance:
    """Parse the ``p djp <n> <m> <q>`` format (1-based vertices)."""
    header = None
    arcs: list[tuple[int, int]] = []
    pairs: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if header is not None or len(parts) != 5 or parts[1] != "djp":
                raise MalformedInstance(f"line {lineno}: bad problem line")
            header = (int(parts[2]), int(parts[3]), int(parts[4]))
        elif parts[0] == "a" and len(parts) == 3:
            arcs.append((int(parts[1]) - 1, int(parts[2]) - 1))
        elif parts[0] == "d" and len(parts) == 3:
            pairs.append((int(parts[1]) - 1, int(parts[2]) - 1))
        else:
            raise MalformedInstance(f"line {lineno}: unrecognized line {line!r}")
    if header is None:
        raise MalformedInstance("missing problem line")
    n, m, q = header
    if len(arcs) != m or len(pairs) != q:
        raise MalformedInstance("arc or pair count does not match header")
    return DjpInstance(Digraph(n, arcs), tuple(pairs))


def djp_write(inst: DjpInstance) -> str:
    lines = [f"p djp {inst.graph.num_vertices} {inst.graph.num_arcs()} "
             f"{len(inst.pairs)}"]
    for u, v in inst.graph.arcs():
        lines.append(f"a {u + 1} {v + 1}")
    for s, d in inst.pairs:
        lines.append(f"d {s + 1} {d + 1}")
    return "\n".join(lines) + "\n"


# -- open pairs and the two decomposition transformations ----------------

def below_sets(td: TreeDecomposition) -> dict[int, frozenset[int]]:
    below: dict[int, frozenset[int]] = {}
    for t in td.post_order():
        acc = set(td.bags[t])
        for c in td.children(t):
            acc |= below[c]
        below[t] = frozenset(acc)
    return below


def open_pairs(td: TreeDecomposition, inst: DjpInstance,
               below: Optional[dict[int, frozenset[int]]] = None
               ) -> dict[int, list[int]]:
    """Pair indices open at each node: exactly one endpoint seen below."""
    if below is None:
        below = below_sets(td)
    result: dict[int, list[int]] = {}
    for t in td.nodes():
        bt = below[t]
        result[t] = [i for i, (s, d) in enumerate(inst.pairs)
                     if (s in bt) != (d in bt)]
    return result


def max_open_overflow(td: TreeDecomposition, inst: DjpInstance) -> Optional[int]:
    """A node with more open pairs than bag atoms, if one exists."""
    opens = open_pairs(td, inst)
    for t in td.nodes():
        if len(opens[t]) > len(td.bags[t]):
            return t
    return None


def pair_respecting_td(td: TreeDecomposition, inst: DjpInstance
                       ) -> TreeDecomposition:
    """Add open endpoints to bags and both endpoints at closing nodes.

    Openness is judged against the input decomposition's below-sets, which
    the additions do not change.
    """
    below = below_sets(td)
    bags = {t: set(td.bags[t]) for t in td.nodes()}
    for t in td.nodes():
        bt = below[t]
        for s, d in inst.pairs:
            if s in bt and d not in bt:
                bags[t].add(s)
            elif d in bt and s not in bt:
                bags[t].add(d)
    for t in td.nodes():
        par = td.parent[t]
        if par is None:
            continue
        bt, bp = below[t], below[par]
        for s, d in inst.pairs:
            if (s in bt) != (d in bt) and (s in bp) and (d in bp):
                bags[par].add(s)
                bags[par].add(d)
    out = td.with_bags({t: frozenset(b) for t, b in bags.items()})
    problems = audit_pair_respecting(out, inst)
    if problems:
        raise AuditFailure("; ".join(problems))
    return out


def audit_pair_respecting(td: TreeDecomposition, inst: DjpInstance) -> list[str]:
    below = below_sets(td)
    problems = []
    for t in td.nodes():
        bt = below[t]
        bag = td.bags[t]
        for i, (s, d) in enumerate(inst.pairs):
            if s in bt and d not in bt and s not in bag:
                problems.append(f"pair {i} open at {t} without source in bag")
            if d in bt and s not in bt and d not in bag:
                problems.append(f"pair {i} open at {t} without destination in bag")
    for t in td.nodes():
        par = td.parent[t]
        if par is None:
            continue
        bt, bp = below[t], below[par]
        for i, (s, d) in enumerate(inst.pairs):
            if (s in bt) != (d in bt) and s in bp and d in bp:
                if s not in td.bags[par] or d not in td.bags[par]:
                    problems.append(f"pair {i} closed at {par} without both endpoints")
    return problems


@dataclass(frozen=True)
class ClosureSequence:
    """Pair indices in order of closure along the post-order traversal."""

    order: tuple[int, ...]
    closing_node: dict[int, int]


def closure_sequence(td: TreeDecomposition, inst: DjpInstance) -> ClosureSequence:
    below = below_sets(td)
    post = td.post_order()
    post_index = {t: i for i, t in enumerate(post)}
    closing: dict[int, int] = {}
    for i, (s, d) in enumerate(inst.pairs):
        nodes = [t for t in post if s in below[t] and d in below[t]]
        closing[i] = min(nodes, key=lambda t: post_index[t])
    order = sorted(closing, key=lambda i: (post_index[closing[i]], i))
    return ClosureSequence(tuple(order), closing)


def _tree_path(td: TreeDecomposition, a: int, b: int) -> list[int]:
    node = a
    anc_a = []
    while node is not None:
        anc_a.append(node)
        node = td.parent[node]
    index_a = {t: i for i, t in enumerate(anc_a)}
    path_b = []
    node = b
    while node not in index_a:
        path_b.append(node)
        node = td.parent[node]
    return anc_a[:index_a[node] + 1] + list(reversed(path_b))


def pair_connected_td(nice_td: TreeDecomposition, inst: DjpInstance
                      ) -> tuple[TreeDecomposition, ClosureSequence]:
    """Carry the previously closed pair's endpoints along the traversal
    between consecutive closing nodes; width grows by at most six."""
    sigma = closure_sequence(nice_td, inst)
    bags = {t: set(nice_td.bags[t]) for t in nice_td.nodes()}
    for prev, cur in zip(sigma.order, sigma.order[1:]):
        s, d = inst.pairs[prev]
        for t in _tree_path(nice_td, sigma.closing_node[prev],
                            sigma.closing_node[cur]):
            bags[t].add(s)
            bags[t].add(d)
    out = nice_td.with_bags({t: frozenset(b) for t, b in bags.items()})
    problems = audit_pair_connected(out, inst, sigma)
    problems += audit_pair_respecting(out, inst)
    if problems:
        raise AuditFailure("; ".join(problems))
    return out, sigma


def audit_pair_connected(td: TreeDecomposition, inst: DjpInstance,
                         sigma: ClosureSequence) -> list[str]:
    problems = []
    for prev, cur in zip(sigma.order, sigma.order[1:]):
        s, d = inst.pairs[prev]
        t = sigma.closing_node[cur]
        if s not in td.bags[t] or d not in td.bags[t]:
            problems.append(
                f"pair {prev} endpoints missing at closing node {t} of pair {cur}")
    return problems


# -- ready edges and program generation ----------------------------------

def ready_edges(td: TreeDecomposition, inst: DjpInstance, t: int
                ) -> list[tuple[int, int]]:
    """Arcs covered by a child bag but no longer by the bag of t; the root
    additionally owns the arcs covered by its own bag."""
    bag = td.bags[t]
    ready = []
    for u, v in inst.graph.arcs():
        uv = {u, v}
        if uv <= bag:
            continue
        if any(uv <= td.bags[c] for c in td.children(t)):
            ready.append((u, v))
    if td.parent[t] is None:
        for u, v in inst.graph.arcs():
            if {u, v} <= bag:
                ready.append((u, v))
    return sorted(ready)


def generate_djp_program(inst: DjpInstance, td: TreeDecomposition,
                         sigma: ClosureSequence) -> Program:
    """Rules (reachability, disjointness, linking) guided along td.

    If some node has more open pairs than bag atoms the instance is
    unsolvable and the canonical inconsistent program is returned.
    """
    if max_open_overflow(td, inst) is not None:
        return parse_program(EARLY_OUT_TEXT)

    b = ProgramBuilder()

    def e(u: int, v: int) -> str:
        return f"e_{u + 1}_{v + 1}"

    def ne(u: int, v: int) -> str:
        return f"ne_{u + 1}_{v + 1}"

    def reach(u: int) -> str:
        return f"r_{u + 1}"

    def fin(u: int, t: int) -> str:
        return f"f_{u + 1}_t{t}"

    for t in td.post_order():
        ready = ready_edges(td, inst, t)
        bag = td.bags[t]
        kids = td.children(t)
        for u, v in ready:
            b.rule([e(u, v)], [reach(u)], [ne(u, v)])
            b.rule([ne(u, v)], [], [e(u, v)])
            b.rule([reach(v)], [e(u, v)], [])
        for u, v in ready:
            if u in bag:
                b.rule([fin(u, t)], [e(u, v)], [])
        for c in kids:
            for u in sorted(bag & td.bags[c]):
                b.rule([fin(u, t)], [fin(u, c)], [])
        for i, c1 in enumerate(kids):
            for c2 in kids[i + 1:]:
                for u in sorted(td.bags[c1] & td.bags[c2]):
                    b.rule([], [fin(u, c1), fin(u, c2)], [])
        for u, v in ready:
            for c in kids:
                if u in td.bags[c]:
                    b.rule([], [fin(u, c), e(u, v)], [])
        for i, (u, v) in enumerate(ready):
            for (u2, w) in ready[i + 1:]:
                if u2 == u and w != v:
                    b.rule([], [e(u, v), e(u, w)], [])
    for s, d in inst.pairs:
        b.rule([], [], [reach(d)])
    if sigma.order:
        first_s = inst.pairs[sigma.order[0]][0]
        b.rule([reach(first_s)], [], [])
    for prev, cur in zip(sigma.order, sigma.order[1:]):
        s_prev, d_prev = inst.pairs[prev]
        s_cur = inst.pairs[cur][0]
        b.rule([reach(s_cur)], [reach(s_prev), reach(d_prev)], [])
    return b.build()


@dataclass
class HardnessResult:
    program: Program
    td: Optional[TreeDecomposition]
    sigma: Optional[ClosureSequence]
    early_out: bool


def build_hardness_program(inst: DjpInstance, method: str = "min-fill",
                           seed: int = 0) -> HardnessResult:
    """decompose -> pair-respect -> nicify -> repair -> pair-connect ->
    generate.

    Nicification can newly open a pair on a branch that never saw it (an
    endpoint gets introduced on the way to a join), so the endpoint
    additions are applied once more on the nice tree; below-sets are
    invariant under those additions, which makes the repair exhaustive.
    """
    und = inst.underlying()
    td0 = decompose_heuristic(und, method, seed)
    if max_open_overflow(td0, inst) is not None:
        return HardnessResult(parse_program(EARLY_OUT_TEXT), None, None, True)
    respecting = pair_respecting_td(td0, inst)
    nice = pair_respecting_td(make_nice(respecting).td, inst)
    connected, sigma = pair_connected_td(nice, inst)
    report = validate_td(und, connected)
    if not report.valid:
        raise AuditFailure(f"pair-connected decomposition invalid: {report}")
    program = generate_djp_program(inst, connected, sigma)
    early = program == parse_program(EARLY_OUT_TEXT)
    return HardnessResult(program, connected, sigma, early)


# -- oracle and random instances ------------------------------------------

def djp_bruteforce_solve(inst: DjpInstance, cap: int = 12
                         ) -> Optional[list[list[int]]]:
    """Vertex-disjoint paths by exhaustive backtracking, or None."""
    from .oracles import TooLarge
    if inst.graph.num_vertices > cap:
        raise TooLarge(f"{inst.graph.num_vertices} vertices exceeds cap {cap}")
    pairs = list(inst.pairs)

    def paths_from(s: int, d: int, used: set[int]):
        stack = [(s, [s])]
        while stack:
            node, path = stack.pop()
            if node == d:
                yield path
                continue
            for nxt in inst.graph.out_neighbors[node]:
                if nxt not in used and nxt not in path:
                    stack.append((nxt, path + [nxt]))

    def solve(i: int, used: set[int]) -> Optional[list[list[int]]]:
        if i == len(pairs):
            return []
        s, d = pairs[i]
        for path in paths_from(s, d, used):
            rest = solve(i + 1, used | set(path))
            if rest is not None:
                return [path] + rest
        return None

    return solve(0, set())


def random_djp(seed: int, num_vertices: int = 8, num_arcs: int = 10,
               num_pairs: int = 2) -> DjpInstance:
    """Random invariant-respecting instance; about half the seeds plant
    disjoint paths so both outcomes are exercised."""
    rng = random.Random(seed)
    if 2 * num_pairs > num_vertices:
        raise ValueError("not enough vertices for the requested pairs")
    vertices = list(range(num_vertices))
    rng.shuffle(vertices)
    sources = vertices[:num_pairs]
    dests = vertices[num_pairs:2 * num_pairs]
    middle = vertices[2 * num_pairs:]
    arcs: set[tuple[int, int]] = set()
    if num_pairs and rng.random() < 0.5 and middle:
        pool = middle[:]
        for s, d in zip(sources, dests):
            if pool and rng.random() < 0.7:
                mid = pool.pop()
                arcs.add((s, mid))
                arcs.add((mid, d))
            else:
                arcs.add((s, d))
    candidates = [(u, v) for u in range(num_vertices)
                  for v in range(num_vertices)
                  if u != v and v not in sources and u not in dests]
    rng.shuffle(candidates)
    for u, v in candidates:
        if len(arcs) >= num_arcs:
            break
        arcs.add((u, v))
    return DjpInstance(Digraph(num_vertices, arcs),
                       tuple(zip(sources, dests)))
