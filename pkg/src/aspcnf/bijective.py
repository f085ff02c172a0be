"""Decomposition-guided reduction with explicit precedence variables.

Instead of ordering bits this encoding introduces one pair of precedence
variables per unordered atom pair that shares a bag (one variable per
direction), constrains them to a strict partial order, and guides the
provability of both atoms and precedences along the decomposition.  For
deterministically provable programs the models correspond one-to-one to
the answer sets.

Bag programs are first split across inserted copy nodes so no node
carries more than ``max_rules_per_node`` rules, which keeps every witness
bag inside the k^2 budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .cnf import CnfFormula, GateSink, WitnessBuilder, WitnessTd
from .decomposition import InvalidTd, NiceTd, TreeDecomposition, validate_td
from .program import NotHcf, Program, classify, primal_graph


@dataclass(frozen=True)
class BijectiveOptions:
    max_rules_per_node: Optional[int] = None  # default: width + 1
    seed: int = 0

    def __post_init__(self):
        if self.max_rules_per_node is not None and self.max_rules_per_node < 1:
            raise ValueError("max_rules_per_node must be >= 1")


def split_bag_rules(nice: NiceTd, assign: dict[int, int], c: int
                    ) -> tuple[NiceTd, dict[int, int]]:
    """Insert bag copies above overloaded nodes until every node carries
    at most c assigned rules; bags, width and rule totality are preserved."""
    if c < 1:
        raise ValueError("c must be >= 1")
    td = nice.td
    bags = dict(td.bags)
    parent = dict(td.parent)
    kind = dict(nice.kind)
    root = td.root
    next_id = max(bags) + 1
    new_assign: dict[int, int] = {}
    per_node: dict[int, list[int]] = {}
    for ridx in sorted(assign):
        per_node.setdefault(assign[ridx], []).append(ridx)
    for t in sorted(per_node):
        rules = per_node[t]
        chunks = [rules[i:i + c] for i in range(0, len(rules), c)]
        for ridx in chunks[0]:
            new_assign[ridx] = t
        top = t
        for chunk in chunks[1:]:
            node = next_id
            next_id += 1
            bags[node] = bags[t]
            kind[node] = ("copy",)
            parent[node] = parent[top]
            parent[top] = node
            top = node
            for ridx in chunk:
                new_assign[ridx] = node
        if parent[top] is None:
            root = top
    return NiceTd(TreeDecomposition(bags, parent, root), kind), new_assign


class BijectiveTranslator:
    def __init__(self, p: Program, nice: NiceTd, assign: dict[int, int],
                 opts: BijectiveOptions = BijectiveOptions(), check: bool = True):
        if check:
            if not classify(p).is_hcf:
                raise NotHcf("the reduction requires a head-cycle-free program")
            report = validate_td(primal_graph(p), nice.td)
            if not report.valid:
                raise InvalidTd(f"guiding decomposition invalid: {report}")
        cap = opts.max_rules_per_node
        if cap is None:
            cap = max(1, nice.td.width + 1)
        nice, assign = split_bag_rules(nice, assign, cap)
        self.p = p
        self.nice = nice
        self.td = nice.td
        self.assign = assign
        self.opts = opts
        self.f = CnfFormula()
        self.wb = WitnessBuilder()
        self.order = self.td.post_order()
        self.rules_at: dict[int, list[int]] = {t: [] for t in self.td.nodes()}
        for ridx in sorted(assign):
            self.rules_at[assign[ridx]].append(ridx)

        for atom in p.atoms:
            v = self.f.new_var(("atom", atom.name))
            self.f.projection.add(v)

        # one precedence variable per direction per bag-sharing atom pair,
        # keyed by the top node of the pair's (connected) bag region
        self._region_top: dict[tuple[str, str], int] = {}
        for t in self.order:
            names = self._bag_names(t)
            par = self.td.parent[t]
            par_bag = set(self._bag_names(par)) if par is not None else set()
            for i, x in enumerate(names):
                for y in names[i + 1:]:
                    if x not in par_bag or y not in par_bag:
                        self._region_top[(x, y)] = t
        for t in self.order:
            names = self._bag_names(t)
            for i, x in enumerate(names):
                for y in names[i + 1:]:
                    top = self._region_top[(x, y)]
                    self.f.ensure(("prec", top, x, y))
                    self.f.ensure(("prec", top, y, x))
            for x in names:
                self.f.ensure(("pAt", t, x))
                self.f.ensure(("pBelow", t, x))
            for ridx in self.rules_at[t]:
                r = p.rules[ridx]
                for a in r.head:
                    self.f.ensure(("pRule", t, p.atom_name(a), ridx))
            for x in names:
                for y in names:
                    if x != y:
                        self.f.ensure(("pPrecAt", t, x, y))
                        self.f.ensure(("pPrecBelow", t, x, y))

        for t in self.order:
            self.wb.add_spine(t, self._base_bag(t))

        self._seen_order_clauses: set[tuple] = set()

    # -- lookups -------------------------------------------------------

    def _bag_names(self, t: int) -> list[str]:
        return sorted(self.p.atom_name(a) for a in self.td.bags[t])

    def av(self, name: str) -> int:
        return self.f.var(("atom", name))

    def prec(self, x: str, y: str) -> int:
        key = (x, y) if x < y else (y, x)
        return self.f.var(("prec", self._region_top[key], x, y))

    def p_at(self, t: int, x: str) -> int:
        return self.f.var(("pAt", t, x))

    def p_below(self, t: int, x: str) -> int:
        return self.f.var(("pBelow", t, x))

    def p_rule(self, t: int, x: str, ridx: int) -> int:
        return self.f.var(("pRule", t, x, ridx))

    def p_prec_at(self, t: int, x: str, y: str) -> int:
        return self.f.var(("pPrecAt", t, x, y))

    def p_prec_below(self, t: int, x: str, y: str) -> int:
        return self.f.var(("pPrecBelow", t, x, y))

    def _base_bag(self, t: int) -> set[int]:
        base: set[int] = set()
        names = self._bag_names(t)
        for x in names:
            base.add(self.av(x))
            base.add(self.p_at(t, x))
            base.add(self.p_below(t, x))
        for i, x in enumerate(names):
            for y in names[i + 1:]:
                base.add(self.prec(x, y))
                base.add(self.prec(y, x))
                base.add(self.p_prec_at(t, x, y))
                base.add(self.p_prec_at(t, y, x))
                base.add(self.p_prec_below(t, x, y))
                base.add(self.p_prec_below(t, y, x))
        for ridx in self.rules_at[t]:
            r = self.p.rules[ridx]
            for a in r.head:
                base.add(self.p_rule(t, self.p.atom_name(a), ridx))
        for c in self.td.children(t):
            cnames = self._bag_names(c)
            for y in cnames:
                base.add(self.p_below(c, y))
            for i, x in enumerate(cnames):
                for y in cnames[i + 1:]:
                    base.add(self.p_prec_below(c, x, y))
                    base.add(self.p_prec_below(c, y, x))
        return base

    # -- emission ------------------------------------------------------

    def emit(self) -> None:
        for t in self.order:
            self._emit_rule_clauses(t)
            self._emit_rule_provability(t)
            self._emit_order_axioms(t)
            self._emit_proof_definitions(t)
            self._emit_prec_proof_definitions(t)
            self._emit_forget_obligations(t)
            self._emit_proof_propagation(t)
        self._emit_root_obligations()

    def _emit_rule_clauses(self, t: int) -> None:
        for ridx in self.rules_at[t]:
            r = self.p.rules[ridx]
            clause = [-self.av(self.p.atom_name(b)) for b in r.body_pos]
            clause += [self.av(self.p.atom_name(a)) for a in sorted(r.body_neg)]
            clause += [self.av(self.p.atom_name(a)) for a in sorted(r.head)]
            self.f.add_clause(clause)

    def _emit_rule_provability(self, t: int) -> None:
        """Definitions of per-rule provability plus greedy application."""
        for ridx in self.rules_at[t]:
            r = self.p.rules[ridx]
            for xa in r.head:
                x = self.p.atom_name(xa)
                pr = self.p_rule(t, x, ridx)
                if xa in r.body_pos:
                    self.f.add_clause([-pr])
                    continue
                body = sorted(self.p.atom_name(b) for b in r.body_pos)
                blockers = sorted(self.p.names(r.body_neg)
                                  | (self.p.names(r.head) - {x}))
                lits = [self.av(b) for b in body]
                lits.append(self.av(x))
                lits += [-self.prec(x, b) for b in body]
                lits += [-self.av(a) for a in blockers]
                deduped = []
                for lit in lits:
                    if lit not in deduped:
                        deduped.append(lit)
                for lit in deduped:
                    self.f.add_clause([-pr, lit])
                self.f.add_clause([pr] + [-lit for lit in deduped])
                for b in body:
                    self.f.add_clause([-pr, self.prec(b, x)])

    def _emit_order_axioms(self, t: int) -> None:
        """Transitivity and asymmetry over the bag's precedence variables;
        identical instances shared between bags are emitted once."""
        names = self._bag_names(t)
        for x in names:
            for y in names:
                if x >= y:
                    continue
                key = ("excl", self.prec(x, y), self.prec(y, x))
                if key not in self._seen_order_clauses:
                    self._seen_order_clauses.add(key)
                    self.f.add_clause([-self.prec(x, y), -self.prec(y, x)])
        for x in names:
            for y in names:
                for z in names:
                    if x == y or x == z or y == z:
                        continue
                    key = ("trans", self.prec(x, y), self.prec(y, z))
                    if key not in self._seen_order_clauses:
                        self._seen_order_clauses.add(key)
                        self.f.add_clause([-self.prec(x, y), -self.prec(y, z),
                                           self.prec(x, z)])

    def _emit_proof_definitions(self, t: int) -> None:
        for x in self._bag_names(t):
            xa = self.p.atom_id(x)
            args = [self.p_rule(t, x, ridx) for ridx in self.rules_at[t]
                    if xa in self.p.rules[ridx].head]
            target = self.p_at(t, x)
            self.f.add_clause([-target] + args)
            for a in args:
                self.f.add_clause([target, -a])

    def _emit_prec_proof_definitions(self, t: int) -> None:
        names = self._bag_names(t)
        for a in names:
            for b in names:
                if a == b:
                    continue
                target = self.p_prec_at(t, a, b)
                sink = GateSink(self.f)
                args = []
                ba = self.p.atom_id(b)
                aa = self.p.atom_id(a)
                for ridx in self.rules_at[t]:
                    r = self.p.rules[ridx]
                    if ba in r.head and aa in r.body_pos:
                        args.append(self.p_rule(t, b, ridx))
                for z in names:
                    if z == a or z == b:
                        continue
                    args.append(sink.gate("and", [self.prec(a, z),
                                                  self.prec(z, b)]))
                sink.clause([-target] + args)
                for arg in args:
                    sink.clause([target, -arg])
                if not sink.vars <= self.wb.base(t):
                    self.wb.add_pendant(self.wb.bottom(t), sink.vars)

    def _emit_forget_obligations(self, t: int) -> None:
        bag = set(self._bag_names(t))
        for c in self.td.children(t):
            cnames = self._bag_names(c)
            gone = set(cnames) - bag
            for x in sorted(gone):
                self.f.add_clause([-self.av(x), self.p_below(c, x)])
            for x in cnames:
                for y in cnames:
                    if x != y and (x in gone or y in gone):
                        self.f.add_clause([-self.prec(x, y),
                                           self.p_prec_below(c, x, y)])

    def _emit_root_obligations(self) -> None:
        root = self.td.root
        names = self._bag_names(root)
        for x in names:
            self.f.add_clause([-self.av(x), self.p_below(root, x)])
        for x in names:
            for y in names:
                if x != y:
                    self.f.add_clause([-self.prec(x, y),
                                       self.p_prec_below(root, x, y)])

    def _emit_proof_propagation(self, t: int) -> None:
        bag = self._bag_names(t)
        child_bags = {c: set(self._bag_names(c)) for c in self.td.children(t)}
        for x in bag:
            args = [self.p_at(t, x)]
            for c in self.td.children(t):
                if x in child_bags[c]:
                    args.append(self.p_below(c, x))
            target = self.p_below(t, x)
            self.f.add_clause([-target] + args)
            for a in args:
                self.f.add_clause([target, -a])
        for x in bag:
            for y in bag:
                if x == y:
                    continue
                args = [self.p_prec_at(t, x, y)]
                for c in self.td.children(t):
                    if x in child_bags[c] and y in child_bags[c]:
                        args.append(self.p_prec_below(c, x, y))
                target = self.p_prec_below(t, x, y)
                self.f.add_clause([-target] + args)
                for a in args:
                    self.f.add_clause([target, -a])

    def result(self) -> tuple[CnfFormula, WitnessTd]:
        return self.f, self.wb.build(self.td)


def translate_bijective(p: Program, nice: NiceTd, assign: dict[int, int],
                        opts: BijectiveOptions = BijectiveOptions()
                        ) -> tuple[CnfFormula, WitnessTd]:
    tr = BijectiveTranslator(p, nice, assign, opts)
    tr.emit()
    return tr.result()
