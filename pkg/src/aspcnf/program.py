"""Ground programs: model, text format, graphs, classification, reduct.

A program is a list of rules over an interned atom table.  Atom ids are
dense and assigned in first-occurrence order, which keeps everything
downstream (tree decompositions, CNF emission) deterministic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from .graphs import Digraph, UndirectedGraph, is_acyclic, strongly_connected_components

ATOM_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class NotHcf(ValueError):
    """Raised when an operation requires a head-cycle-free program."""


@dataclass(frozen=True)
class Atom:
    id: int
    name: str


@dataclass(frozen=True)
class Rule:
    """One rule: head <- body_pos, not body_neg.  Sets are stored sorted."""

    head: tuple[int, ...]
    body_pos: tuple[int, ...]
    body_neg: tuple[int, ...]

    @staticmethod
    def make(head: Iterable[int], body_pos: Iterable[int] = (),
             body_neg: Iterable[int] = ()) -> "Rule":
        return Rule(tuple(sorted(set(head))), tuple(sorted(set(body_pos))),
                    tuple(sorted(set(body_neg))))

    def atoms(self) -> frozenset[int]:
        return frozenset(self.head) | frozenset(self.body_pos) | frozenset(self.body_neg)

    @property
    def is_normal(self) -> bool:
        return len(self.head) <= 1

    @property
    def is_unary(self) -> bool:
        return len(self.body_pos) <= 1

    @property
    def is_constraint(self) -> bool:
        return not self.head


@dataclass(frozen=True)
class ProgramClass:
    is_normal: bool
    is_unary: bool
    is_tight: bool
    is_hcf: bool


class Program:
    def __init__(self, atoms: Iterable[Atom] = (), rules: Iterable[Rule] = ()):
        self.atoms: tuple[Atom, ...] = tuple(atoms)
        self.rules: tuple[Rule, ...] = tuple(rules)
        for i, a in enumerate(self.atoms):
            if a.id != i:
                raise ValueError(f"atom ids must be dense, got {a.id} at position {i}")
        names = [a.name for a in self.atoms]
        if len(set(names)) != len(names):
            raise ValueError("duplicate atom names")
        n = len(self.atoms)
        for r in self.rules:
            for x in r.atoms():
                if not (0 <= x < n):
                    raise ValueError(f"rule references unknown atom id {x}")
        self._by_name = {a.name: a.id for a in self.atoms}

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    def atom_id(self, name: str) -> int:
        return self._by_name[name]

    def atom_name(self, atom_id: int) -> str:
        return self.atoms[atom_id].name

    def names(self, ids: Iterable[int]) -> frozenset[str]:
        return frozenset(self.atoms[i].name for i in ids)

    def interpretation(self, names: Iterable[str]) -> frozenset[int]:
        return frozenset(self._by_name[n] for n in names)

    def __eq__(self, other):
        if isinstance(other, Program):
            return self.atoms == other.atoms and self.rules == other.rules
        return NotImplemented

    def __repr__(self):
        return f"Program({len(self.atoms)} atoms, {len(self.rules)} rules)"


class ProgramBuilder:
    """Interns atoms in first-use order while rules are appended."""

    def __init__(self):
        self._atoms: list[Atom] = []
        self._ids: dict[str, int] = {}
        self._rules: list[Rule] = []

    def atom(self, name: str) -> int:
        if name not in self._ids:
            if not ATOM_NAME_RE.fullmatch(name):
                raise ValueError(f"bad atom name {name!r}")
            self._ids[name] = len(self._atoms)
            self._atoms.append(Atom(len(self._atoms), name))
        return self._ids[name]

    def rule(self, head: Iterable[str], body_pos: Iterable[str] = (),
             body_neg: Iterable[str] = ()) -> None:
        self._rules.append(Rule.make([self.atom(a) for a in head],
                                     [self.atom(a) for a in body_pos],
                                     [self.atom(a) for a in body_neg]))

    def build(self) -> Program:
        return Program(self._atoms, self._rules)


def parse_program(text: str) -> Program:
    """Parse the line-oriented rule format.

    Grammar per line: ``head :- body.`` | ``head.`` | ``:- body.`` with
    ``head`` a ``|``-separated atom list and ``body`` a comma-separated
    list of literals (``not a`` for negative).  ``%`` starts a comment.
    """
    builder = ProgramBuilder()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("%", 1)[0]
        if not line.strip():
            continue
        pos = 0
        while True:
            dot = line.find(".", pos)
            stripped = line[pos:].strip()
            if dot < 0:
                if stripped:
                    raise ParseError("rule not terminated by '.'", lineno,
                                     len(line.rstrip()))
                break
            _parse_rule(builder, line[pos:dot], lineno, pos)
            pos = dot + 1
    return builder.build()


def _atom_token(tok: str, lineno: int, col: int) -> str:
    tok = tok.strip()
    if not ATOM_NAME_RE.fullmatch(tok):
        raise ParseError(f"expected atom, got {tok!r}", lineno, col)
    if tok == "not":
        raise ParseError("'not' is reserved", lineno, col)
    return tok


def _parse_rule(builder: ProgramBuilder, src: str, lineno: int, offset: int) -> None:
    col = offset + 1
    if ":-" in src:
        head_src, body_src = src.split(":-", 1)
    else:
        head_src, body_src = src, ""
    head: list[str] = []
    if head_src.strip():
        for part in head_src.split("|"):
            head.append(_atom_token(part, lineno, col))
    body_pos: list[str] = []
    body_neg: list[str] = []
    if body_src.strip():
        for part in body_src.split(","):
            lit = part.strip()
            if lit.startswith("not") and (len(lit) == 3 or not lit[3].isalnum() and lit[3] != "_"):
                body_neg.append(_atom_token(lit[3:], lineno, col))
            else:
                body_pos.append(_atom_token(lit, lineno, col))
    if not head and not body_pos and not body_neg:
        raise ParseError("rule with empty head and empty body", lineno, col)
    builder.rule(head, body_pos, body_neg)


def format_program(p: Program) -> str:
    """Inverse of parse_program up to whitespace."""
    lines = []
    for r in p.rules:
        head = " | ".join(p.atom_name(a) for a in r.head)
        body = [p.atom_name(b) for b in r.body_pos]
        body += [f"not {p.atom_name(a)}" for a in r.body_neg]
        if head and body:
            lines.append(f"{head} :- {', '.join(body)}.")
        elif head:
            lines.append(f"{head}.")
        else:
            lines.append(f":- {', '.join(body)}.")
    return "\n".join(lines) + ("\n" if lines else "")


def primal_graph(p: Program) -> UndirectedGraph:
    """Atoms as vertices, edge between atoms co-occurring in a rule."""
    edges = set()
    for r in p.rules:
        ats = sorted(r.atoms())
        for i, a in enumerate(ats):
            for b in ats[i + 1:]:
                edges.add((a, b))
    return UndirectedGraph(p.num_atoms, edges)


def dependency_digraph(p: Program) -> Digraph:
    """Positive dependency digraph: arc (a,b) for a in B+, b in head."""
    arcs = set()
    for r in p.rules:
        for a in r.body_pos:
            for b in r.head:
                arcs.add((a, b))
    return Digraph(p.num_atoms, arcs)


def classify(p: Program) -> ProgramClass:
    dep = dependency_digraph(p)
    tight = is_acyclic(dep)
    if tight:
        hcf = True
    else:
        # head-cycle: two distinct head atoms of one rule in one SCC
        comp_of: dict[int, int] = {}
        big: set[int] = set()
        for ci, comp in enumerate(strongly_connected_components(dep)):
            for v in comp:
                comp_of[v] = ci
            if len(comp) > 1:
                big.add(ci)
        hcf = True
        for r in p.rules:
            if len(r.head) < 2:
                continue
            seen: dict[int, int] = {}
            for a in r.head:
                c = comp_of[a]
                seen[c] = seen.get(c, 0) + 1
                if c in big and seen[c] >= 2:
                    hcf = False
    return ProgramClass(
        is_normal=all(r.is_normal for r in p.rules),
        is_unary=all(r.is_unary for r in p.rules),
        is_tight=tight,
        is_hcf=hcf,
    )


def is_model(p: Program, m: frozenset[int]) -> bool:
    """Direct satisfaction check: every rule satisfied by m."""
    for r in p.rules:
        if any(a in m for a in r.head) or any(a in m for a in r.body_neg):
            continue
        if all(b in m for b in r.body_pos):
            return False
    return True


def gl_reduct(p: Program, m: frozenset[int]) -> Program:
    """Gelfond-Lifschitz reduct: drop rules blocked by m, strip negation."""
    rules = []
    for r in p.rules:
        if any(a in m for a in r.body_neg):
            continue
        rules.append(Rule(r.head, r.body_pos, ()))
    return Program(p.atoms, rules)


def shift_hcf(p: Program) -> Program:
    """Shift disjunctive heads into negative bodies (HCF programs only)."""
    if not classify(p).is_hcf:
        raise NotHcf("shifting requires a head-cycle-free program")
    rules = []
    for r in p.rules:
        if len(r.head) <= 1:
            rules.append(r)
            continue
        for a in r.head:
            rest = tuple(x for x in r.head if x != a)
            rules.append(Rule((a,), r.body_pos,
                              tuple(sorted(set(r.body_neg) | set(rest)))))
    return Program(p.atoms, rules)
