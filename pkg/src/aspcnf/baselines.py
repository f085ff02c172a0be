"""Reference encodings: Clark's completion and the single-bag global
ordering translation used as the benchmarking baseline.
"""

from __future__ import annotations

from .cnf import CnfFormula
from .decomposition import NiceTd, TreeDecomposition, assign_rules, make_nice
from .ordered import GLOBAL_BITS, OrderedOptions, translate_ordered
from .program import NotHcf, Program, classify


class NotTight(ValueError):
    pass


class NotNormal(ValueError):
    pass


def clark_completion(p: Program) -> CnfFormula:
    """Completion of a tight normal program; models equal answer sets.

    Each atom is made equivalent to the disjunction of its rule bodies;
    constraints contribute their satisfaction clause.
    """
    cls = classify(p)
    if not cls.is_normal:
        raise NotNormal("completion needs a normal program (shift first)")
    if not cls.is_tight:
        raise NotTight("completion is only faithful for tight programs")
    f = CnfFormula()
    for atom in p.atoms:
        v = f.new_var(("atom", atom.name))
        f.projection.add(v)

    def av(aid: int) -> int:
        return f.var(("atom", p.atom_name(aid)))

    bodies: dict[int, list[int]] = {a.id: [] for a in p.atoms}
    for r in p.rules:
        if r.is_constraint:
            clause = [-av(b) for b in r.body_pos]
            clause += [av(a) for a in r.body_neg]
            f.add_clause(clause)
            continue
        head = r.head[0]
        lits = [av(b) for b in r.body_pos] + [-av(a) for a in r.body_neg]
        if not lits:
            bodies[head].append(f.true_lit())
        else:
            bodies[head].append(f.gate("and", lits))
    for atom in p.atoms:
        defs = bodies[atom.id]
        x = av(atom.id)
        if not defs:
            f.add_clause([-x])
            continue
        f.add_clause([-x] + defs)
        for g in defs:
            f.add_clause([x, -g])
    return f


def single_bag_nice_td(p: Program) -> NiceTd:
    """Nicified one-bag decomposition over all atoms of the program."""
    bag = frozenset(range(p.num_atoms))
    return make_nice(TreeDecomposition({1: bag}, {1: None}, 1))


def global_translation(p: Program, opts: OrderedOptions = OrderedOptions()
                       ) -> tuple[CnfFormula, None]:
    """Ordering-bit reduction over a single bag with one global position
    per atom; no width bound is claimed, so no witness is produced."""
    if not classify(p).is_hcf:
        raise NotHcf("the reduction requires a head-cycle-free program")
    nice = single_bag_nice_td(p)
    assign = assign_rules(p, nice)
    opts = OrderedOptions(strengthen=False, ordering_scope=GLOBAL_BITS,
                          seed=opts.seed)
    f, _ = translate_ordered(p, nice, assign, opts)
    return f, None
