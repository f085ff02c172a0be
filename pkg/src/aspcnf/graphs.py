"""Light-weight graph containers used across the toolkit.

Vertices are dense integers 0..n-1.  Both classes are frozen after
construction so they can be shared freely.
"""

from __future__ import annotations

from typing import Iterable, Iterator


class UndirectedGraph:
    """Simple undirected graph with sorted, duplicate-free adjacency."""

    def __init__(self, num_vertices: int, edges: Iterable[tuple[int, int]] = ()):
        self.num_vertices = num_vertices
        adj: list[set[int]] = [set() for _ in range(num_vertices)]
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if not (0 <= u < num_vertices and 0 <= v < num_vertices):
                raise ValueError(f"edge ({u},{v}) out of range")
            adj[u].add(v)
            adj[v].add(u)
        self.neighbors: tuple[tuple[int, ...], ...] = tuple(
            tuple(sorted(s)) for s in adj
        )

    def edges(self) -> Iterator[tuple[int, int]]:
        for u in range(self.num_vertices):
            for v in self.neighbors[u]:
                if u < v:
                    yield (u, v)

    def num_edges(self) -> int:
        return sum(len(n) for n in self.neighbors) // 2

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.neighbors[u]

    def __eq__(self, other):
        if isinstance(other, UndirectedGraph):
            return (self.num_vertices == other.num_vertices
                    and self.neighbors == other.neighbors)
        return NotImplemented

    def __repr__(self):
        return f"UndirectedGraph({self.num_vertices}, {list(self.edges())})"


class Digraph:
    """Directed graph with sorted out-neighbor lists."""

    def __init__(self, num_vertices: int, arcs: Iterable[tuple[int, int]] = ()):
        self.num_vertices = num_vertices
        out: list[set[int]] = [set() for _ in range(num_vertices)]
        for u, v in arcs:
            if not (0 <= u < num_vertices and 0 <= v < num_vertices):
                raise ValueError(f"arc ({u},{v}) out of range")
            out[u].add(v)
        self.out_neighbors: tuple[tuple[int, ...], ...] = tuple(
            tuple(sorted(s)) for s in out
        )

    def arcs(self) -> Iterator[tuple[int, int]]:
        for u in range(self.num_vertices):
            for v in self.out_neighbors[u]:
                yield (u, v)

    def num_arcs(self) -> int:
        return sum(len(n) for n in self.out_neighbors)

    def has_arc(self, u: int, v: int) -> bool:
        return v in self.out_neighbors[u]

    def __eq__(self, other):
        if isinstance(other, Digraph):
            return (self.num_vertices == other.num_vertices
                    and self.out_neighbors == other.out_neighbors)
        return NotImplemented

    def __repr__(self):
        return f"Digraph({self.num_vertices}, {list(self.arcs())})"


def strongly_connected_components(g: Digraph) -> list[list[int]]:
    """Tarjan's algorithm, iterative to survive deep graphs."""
    n = g.num_vertices
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    components: list[list[int]] = []
    counter = 0

    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            recurse = False
            out = g.out_neighbors[v]
            while pi < len(out):
                w = out[pi]
                pi += 1
                if index[w] == -1:
                    work[-1] = (v, pi)
                    work.append((w, 0))
                    recurse = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            work.pop()
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                components.append(comp)
            if work:
                u, _ = work[-1]
                low[u] = min(low[u], low[v])
    return components


def is_acyclic(g: Digraph) -> bool:
    """True iff the digraph has no directed cycle (self-loops count)."""
    for comp in strongly_connected_components(g):
        if len(comp) > 1:
            return False
        v = comp[0]
        if g.has_arc(v, v):
            return False
    return True
