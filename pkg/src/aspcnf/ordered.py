"""Decomposition-guided reduction with per-node ordering bits.

Emits, per guiding node: rule satisfaction clauses, bit-order
compatibility between adjacent nodes, proof obligations at forget nodes
and the root, proof propagation, and per-node proof definitions.  An
optional strengthening pass prunes duplicate node-local orderings.

The witness decomposition is assembled alongside: one spine chain per
guiding node plus one pendant bag per emitted instance; long proof
disjunctions are cascaded across spine copies so each bag stays within
the certified k*log(k) budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .cnf import (BitDomain, CnfFormula, GateSink, WitnessBuilder, WitnessTd,
                  encode_prec)
from .decomposition import InvalidTd, NiceTd, validate_td
from .program import NotHcf, Program, classify, primal_graph

LOCAL_BITS = "local"
GLOBAL_BITS = "global"


@dataclass(frozen=True)
class OrderedOptions:
    strengthen: bool = False
    ordering_scope: str = LOCAL_BITS
    seed: int = 0

    def __post_init__(self):
        if self.ordering_scope not in (LOCAL_BITS, GLOBAL_BITS):
            raise ValueError(f"unknown ordering scope {self.ordering_scope!r}")
        if self.strengthen and self.ordering_scope == GLOBAL_BITS:
            raise ValueError("strengthening is defined for node-local bits only")


def bit_count(domain_size: int) -> int:
    return (domain_size - 1).bit_length() if domain_size > 1 else 0


class OrderedTranslator:
    def __init__(self, p: Program, nice: NiceTd, assign: dict[int, int],
                 opts: OrderedOptions, check: bool = True):
        if check:
            if not classify(p).is_hcf:
                raise NotHcf("the reduction requires a head-cycle-free program")
            report = validate_td(primal_graph(p), nice.td)
            if not report.valid:
                raise InvalidTd(f"guiding decomposition invalid: {report}")
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

        self.domains: dict[Optional[int], BitDomain] = {}
        if opts.ordering_scope == GLOBAL_BITS:
            dom = BitDomain(self.f, None, frozenset(a.name for a in p.atoms),
                            bit_count(p.num_atoms))
            for atom in p.atoms:
                dom.bit_vars(atom.name)
            self.global_domain = dom
        else:
            self.global_domain = None

        for t in self.order:
            names = self._bag_names(t)
            if opts.ordering_scope == LOCAL_BITS:
                dom = BitDomain(self.f, t, frozenset(names), bit_count(len(names)))
                for x in sorted(names):
                    dom.bit_vars(x)
                self.domains[t] = dom
            for x in sorted(names):
                self.f.new_var(("pAt", t, x))
                self.f.new_var(("pBelow", t, x))

        for t in self.order:
            self.wb.add_spine(t, self._base_bag(t))

    # -- naming helpers ------------------------------------------------

    def _bag_names(self, t: int) -> list[str]:
        return sorted(self.p.atom_name(a) for a in self.td.bags[t])

    def domain(self, t: int) -> BitDomain:
        if self.global_domain is not None:
            return self.global_domain
        return self.domains[t]

    def av(self, name: str) -> int:
        return self.f.var(("atom", name))

    def p_at(self, t: int, name: str) -> int:
        return self.f.var(("pAt", t, name))

    def p_below(self, t: int, name: str) -> int:
        return self.f.var(("pBelow", t, name))

    def _base_bag(self, t: int) -> set[int]:
        base: set[int] = set()
        names = self._bag_names(t)
        par = self.td.parent[t]
        for x in names:
            base.add(self.av(x))
            base.add(self.p_at(t, x))
            base.add(self.p_below(t, x))
            if self.global_domain is not None:
                base.update(self.global_domain.bit_vars(x))
            else:
                base.update(self.domains[t].bit_vars(x))
                if par is not None and x in self.domains[par].members:
                    base.update(self.domains[par].bit_vars(x))
        for c in self.td.children(t):
            for y in self._bag_names(c):
                base.add(self.p_below(c, y))
        return base

    def _place(self, t: int, sink: GateSink, anchor: Optional[int] = None) -> None:
        """Record an instance bag; skipped when the spine already covers it."""
        node = anchor if anchor is not None else self.wb.bottom(t)
        if not sink.vars <= self.wb.base(t):
            self.wb.add_pendant(node, sink.vars)

    # -- emission ------------------------------------------------------

    def emit_base(self) -> None:
        for t in self.order:
            self._emit_rule_clauses(t)
            if self.opts.ordering_scope == LOCAL_BITS:
                self._emit_compatibility(t)
            self._emit_forget_obligations(t)
            self._emit_proof_propagation(t)
            self._emit_proof_definitions(t)
        self._emit_root_obligations()

    def _emit_rule_clauses(self, t: int) -> None:
        for ridx in self.rules_at[t]:
            r = self.p.rules[ridx]
            clause = [-self.av(self.p.atom_name(b)) for b in r.body_pos]
            clause += [self.av(self.p.atom_name(a)) for a in sorted(r.body_neg)]
            clause += [self.av(self.p.atom_name(a)) for a in sorted(r.head)]
            self.f.add_clause(clause)

    def _emit_compatibility(self, t: int) -> None:
        dom_t = self.domains[t]
        for c in self.td.children(t):
            dom_c = self.domains[c]
            shared = sorted(set(self._bag_names(t)) & set(self._bag_names(c)))
            for x in shared:
                for y in shared:
                    if x == y:
                        continue
                    sink = GateSink(self.f)
                    child_lit = encode_prec(dom_c, x, y, sink)
                    par_lit = encode_prec(dom_t, x, y, sink)
                    sink.clause([-child_lit, par_lit])
                    sink.clause([child_lit, -par_lit])
                    self._place(c, sink)

    def _emit_forget_obligations(self, t: int) -> None:
        for c in self.td.children(t):
            for x in sorted(set(self._bag_names(c)) - set(self._bag_names(t))):
                self.f.add_clause([-self.av(x), self.p_below(c, x)])

    def _emit_root_obligations(self) -> None:
        root = self.td.root
        for x in self._bag_names(root):
            self.f.add_clause([-self.av(x), self.p_below(root, x)])

    def _emit_proof_propagation(self, t: int) -> None:
        for x in self._bag_names(t):
            args = [self.p_at(t, x)]
            for c in self.td.children(t):
                if x in set(self._bag_names(c)):
                    args.append(self.p_below(c, x))
            target = self.p_below(t, x)
            self.f.add_clause([-target] + args)
            for a in args:
                self.f.add_clause([target, -a])

    def _proof_disjunct(self, t: int, x: str, ridx: int) -> Callable[[GateSink], int]:
        r = self.p.rules[ridx]
        dom = self.domain(t)

        def build(sink: GateSink) -> int:
            body = sorted(self.p.atom_name(b) for b in r.body_pos)
            blockers = sorted(self.p.names(r.body_neg)
                              | (self.p.names(r.head) - {x}))
            lits = [self.av(b) for b in body]
            lits.append(self.av(x))
            lits += [encode_prec(dom, b, x, sink) for b in body]
            lits += [-self.av(a) for a in blockers]
            return sink.gate("and", lits)

        return build

    def _emit_proof_definitions(self, t: int) -> None:
        for x in self._bag_names(t):
            xa = self.p.atom_id(x)
            disjuncts = [self._proof_disjunct(t, x, ridx)
                         for ridx in self.rules_at[t]
                         if xa in self.p.rules[ridx].head
                         # a rule cannot prove its own positive-body atom
                         and xa not in self.p.rules[ridx].body_pos]
            self.emit_or_chain(t, self.p_at(t, x), disjuncts)

    def emit_or_chain(self, t: int, target: int,
                      disjuncts: list[Callable[[GateSink], int]]) -> None:
        """target <-> OR(disjuncts), cascaded across spine copies of t."""
        if not disjuncts:
            self.f.add_clause([-target])
            return
        if len(disjuncts) == 1:
            sink = GateSink(self.f)
            lit = disjuncts[0](sink)
            sink.clause([-target, lit])
            sink.clause([target, -lit])
            self._place(t, sink)
            return
        acc: Optional[int] = None
        for build in disjuncts:
            sink = GateSink(self.f)
            lit = build(sink)
            if acc is None:
                new_acc = sink.alias(lit)
                extra = [new_acc]
            else:
                sink.touch(acc)
                new_acc = sink.gate("or", [acc, lit])
                extra = [acc, new_acc]
            sink.touch(target)
            copy = self.wb.add_copy(t, extra)
            self.wb.add_pendant(copy, sink.vars)
            acc = new_acc
        self.f.add_clause([-target, acc])
        self.f.add_clause([target, -acc])

    # -- strengthening (node-local bits only) --------------------------

    def emit_strengthening(self) -> None:
        """Force bits of false atoms to zero, require occupied predecessor
        positions, and tie head positions to a body atom directly below."""
        if self.opts.ordering_scope != LOCAL_BITS:
            raise ValueError("strengthening is defined for node-local bits only")
        for t in self.order:
            dom = self.domains[t]
            names = self._bag_names(t)
            for x in names:
                for i in range(dom.nbits):
                    self.f.add_clause([self.av(x), -dom.bit(x, i)])
            for x in names:
                for i in range(1, len(names)):
                    sink = GateSink(self.f)
                    clause = [-dom.position_gate(x, i, sink)]
                    for y in names:
                        if y != x:
                            clause.append(dom.position_gate(y, i - 1, sink))
                    sink.clause(clause)
                    self._place(t, sink)
            for ridx in self.rules_at[t]:
                r = self.p.rules[ridx]
                body = sorted(self.p.atom_name(b) for b in r.body_pos)
                for xa in sorted(r.head):
                    if xa in r.body_pos:
                        continue  # (x -< x) makes the instance tautological
                    x = self.p.atom_name(xa)
                    blockers = sorted(self.p.names(r.body_neg)
                                      | (self.p.names(r.head) - {x}))
                    for i in range(1, len(names)):
                        sink = GateSink(self.f)
                        clause = [-dom.position_gate(x, i, sink)]
                        for b in body:
                            clause.append(-self.av(b))
                            clause.append(-encode_prec(dom, b, x, sink))
                        clause += [self.av(a) for a in blockers]
                        for y in body:
                            clause.append(dom.position_gate(y, i - 1, sink))
                        sink.clause(clause)
                        self._place(t, sink)

    def result(self) -> tuple[CnfFormula, WitnessTd]:
        return self.f, self.wb.build(self.td)


def translate_ordered(p: Program, nice: NiceTd, assign: dict[int, int],
                      opts: OrderedOptions = OrderedOptions()
                      ) -> tuple[CnfFormula, WitnessTd]:
    tr = OrderedTranslator(p, nice, assign, opts)
    tr.emit_base()
    if opts.strengthen:
        tr.emit_strengthening()
    return tr.result()
