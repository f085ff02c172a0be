"""CNF substrate: keyed variables, Tseitin gates, bit-order comparisons,
DIMACS output, and witness decompositions certifying the width bounds.

Variable keys are plain tuples whose first element names the key kind;
``key_text`` renders them into the ``c v`` comment grammar.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .decomposition import TreeDecomposition, TdValidation, validate_td
from .graphs import UndirectedGraph

# certification constants: bound = C1 * (k+1) * factor(k) + C2
BOUND_C1 = 8
BOUND_C2 = 8


class AtomNotInBag(ValueError):
    pass


class CertificationFailed(ValueError):
    def __init__(self, message: str, report: "CertReport"):
        super().__init__(message)
        self.report = report


def key_text(key: tuple) -> str:
    kind, args = key[0], key[1:]
    return f"{kind}({','.join(str(a) for a in args)})"


class CnfFormula:
    def __init__(self):
        self._var_of: dict[tuple, int] = {}
        self._key_of: list[Optional[tuple]] = [None]  # 1-based
        self.clauses: list[list[int]] = []
        self.projection: set[int] = set()
        self._gate_serial = 0
        self._false_lit: Optional[int] = None

    @property
    def num_vars(self) -> int:
        return len(self._key_of) - 1

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def new_var(self, key: tuple) -> int:
        if key in self._var_of:
            raise ValueError(f"key {key_text(key)} already registered")
        self._key_of.append(key)
        v = len(self._key_of) - 1
        self._var_of[key] = v
        return v

    def var(self, key: tuple) -> int:
        return self._var_of[key]

    def ensure(self, key: tuple) -> int:
        v = self._var_of.get(key)
        return v if v is not None else self.new_var(key)

    def has_key(self, key: tuple) -> bool:
        return key in self._var_of

    def key(self, var: int) -> tuple:
        return self._key_of[var]

    def keys(self) -> Iterable[tuple[int, tuple]]:
        for v in range(1, len(self._key_of)):
            yield v, self._key_of[v]

    def add_clause(self, lits: Sequence[int]) -> None:
        out: list[int] = []
        seen = set()
        for lit in lits:
            if lit == 0 or abs(lit) > self.num_vars:
                raise ValueError(f"literal {lit} out of range")
            if lit not in seen:
                seen.add(lit)
                out.append(lit)
        self.clauses.append(out)

    def _aux(self) -> int:
        v = self.new_var(("aux", self._gate_serial))
        self._gate_serial += 1
        return v

    def false_lit(self) -> int:
        """Positive literal of a shared variable forced false by a unit."""
        if self._false_lit is None:
            v = self._aux()
            self.add_clause([-v])
            self._false_lit = v
        return self._false_lit

    def true_lit(self) -> int:
        return -self.false_lit()

    def gate(self, kind: str, inputs: Sequence[int]) -> int:
        """Fresh literal g with full biconditional g <-> kind(inputs)."""
        inputs = list(inputs)
        if not inputs:
            raise ValueError("gate needs at least one input")
        if kind in ("and", "or") and len(inputs) == 1:
            return inputs[0]
        g = self._aux()
        if kind == "and":
            for x in inputs:
                self.add_clause([-g, x])
            self.add_clause([g] + [-x for x in inputs])
        elif kind == "or":
            self.add_clause([-g] + inputs)
            for x in inputs:
                self.add_clause([g, -x])
        elif kind == "equiv":
            if len(inputs) != 2:
                raise ValueError("equiv gate takes exactly two inputs")
            a, b = inputs
            self.add_clause([-g, -a, b])
            self.add_clause([-g, a, -b])
            self.add_clause([g, a, b])
            self.add_clause([g, -a, -b])
        else:
            raise ValueError(f"unknown gate kind {kind!r}")
        return g

    def alias(self, lit: int) -> int:
        """Fresh variable equal to lit (used to seed OR cascades)."""
        g = self._aux()
        self.add_clause([-g, lit])
        self.add_clause([g, -lit])
        return g


@dataclass
class BitDomain:
    """Position bits for a set of atoms, either node-local or global.

    ``node`` is the node id for t-local orderings and None for the global
    scope; lookups for atoms outside the member set raise AtomNotInBag.
    """

    formula: CnfFormula
    node: Optional[int]
    members: frozenset[str]
    nbits: int

    def bit(self, name: str, i: int) -> int:
        if name not in self.members:
            raise AtomNotInBag(f"{name} not in scope of node {self.node}")
        if self.node is None:
            return self.formula.ensure(("gbit", name, i))
        return self.formula.ensure(("bit", self.node, name, i))

    def bit_vars(self, name: str) -> list[int]:
        return [self.bit(name, i) for i in range(self.nbits)]

    def position_gate(self, name: str, value: int, sink: "GateSink") -> int:
        """Literal true iff the bit vector of name encodes value."""
        lits = []
        for i in range(self.nbits):
            v = self.bit(name, i)
            lits.append(v if (value >> i) & 1 else -v)
        return sink.gate("and", lits)


class GateSink:
    """Collects the variables an emitted formula instance touches.

    Every instance of a reduction formula routes its clauses and gates
    through one sink so the witness pendant bag is exactly the instance's
    variable set.
    """

    def __init__(self, formula: CnfFormula):
        self.formula = formula
        self.vars: set[int] = set()

    def touch(self, *lits: int) -> None:
        for lit in lits:
            self.vars.add(abs(lit))

    def clause(self, lits: Sequence[int]) -> None:
        self.touch(*lits)
        self.formula.add_clause(lits)

    def gate(self, kind: str, inputs: Sequence[int]) -> int:
        g = self.formula.gate(kind, inputs)
        self.touch(g, *inputs)
        return g

    def alias(self, lit: int) -> int:
        g = self.formula.alias(lit)
        self.touch(g, lit)
        return g


def encode_prec(domain: BitDomain, x: str, y: str, sink: GateSink) -> int:
    """Literal equivalent to position(x) < position(y), unsigned.

    Built as a ripple comparator from the least significant bit up, so the
    gate count stays linear in the bit width.  With zero bits the
    comparison is constantly false.
    """
    if x == y:
        raise ValueError("comparison needs two distinct atoms")
    if x not in domain.members:
        raise AtomNotInBag(f"{x} not in scope of node {domain.node}")
    if y not in domain.members:
        raise AtomNotInBag(f"{y} not in scope of node {domain.node}")
    if domain.nbits == 0:
        lit = domain.formula.false_lit()
        sink.touch(lit)
        return lit
    lt: Optional[int] = None
    for i in range(domain.nbits):
        xi = domain.bit(x, i)
        yi = domain.bit(y, i)
        strictly = sink.gate("and", [-xi, yi])
        if lt is None:
            lt = strictly
        else:
            equal = sink.gate("equiv", [xi, yi])
            lt = sink.gate("or", [strictly, sink.gate("and", [equal, lt])])
    return lt


def write_dimacs(f: CnfFormula) -> str:
    lines = [f"p cnf {f.num_vars} {f.num_clauses}"]
    for v, key in f.keys():
        lines.append(f"c v {v} {key_text(key)}")
    for clause in f.clauses:
        lines.append(" ".join(str(lit) for lit in clause) + " 0")
    return "\n".join(lines) + "\n"


def cnf_primal_graph(f: CnfFormula) -> UndirectedGraph:
    """Variables as vertices (var-1), clause co-occurrence as edges."""
    edges = set()
    for clause in f.clauses:
        vs = sorted({abs(lit) - 1 for lit in clause})
        for i, a in enumerate(vs):
            for b in vs[i + 1:]:
                edges.add((a, b))
    return UndirectedGraph(f.num_vars, edges)


@dataclass
class WitnessTd:
    """Decomposition of the emitted CNF's primal graph (bags of var ids)."""

    td: TreeDecomposition
    bound_parameters: tuple[int, int] = (BOUND_C1, BOUND_C2)

    @property
    def width(self) -> int:
        return self.td.width

    def shifted(self) -> TreeDecomposition:
        """Same decomposition with vertices shifted to 0-based var ids."""
        bags = {t: frozenset(v - 1 for v in b) for t, b in self.td.bags.items()}
        return TreeDecomposition(bags, self.td.parent, self.td.root)


class WitnessBuilder:
    """Assembles the witness: one spine chain per guiding node, plus one
    pendant bag per emitted formula instance."""

    def __init__(self):
        self._counter = 0
        self._bags: dict[int, set[int]] = {}
        self._chain: dict[int, list[int]] = {}
        self._base: dict[int, frozenset[int]] = {}
        self._pendant_parent: dict[int, int] = {}

    def _new(self, bag: Iterable[int]) -> int:
        self._counter += 1
        self._bags[self._counter] = set(bag)
        return self._counter

    def add_spine(self, t: int, base_vars: Iterable[int]) -> int:
        base = frozenset(base_vars)
        node = self._new(base)
        self._base[t] = base
        self._chain[t] = [node]
        return node

    def top(self, t: int) -> int:
        return self._chain[t][-1]

    def bottom(self, t: int) -> int:
        return self._chain[t][0]

    def base(self, t: int) -> frozenset[int]:
        return self._base[t]

    def add_copy(self, t: int, extra: Iterable[int]) -> int:
        node = self._new(self._base[t] | set(extra))
        self._chain[t].append(node)
        return node

    def add_pendant(self, witness_node: int, vars: Iterable[int]) -> int:
        node = self._new(vars)
        self._pendant_parent[node] = witness_node
        return node

    def build(self, guiding: TreeDecomposition,
              bound_parameters: tuple[int, int] = (BOUND_C1, BOUND_C2)) -> WitnessTd:
        parent: dict[int, Optional[int]] = {}
        for t, chain in self._chain.items():
            for lower, upper in zip(chain, chain[1:]):
                parent[lower] = upper
            gp = guiding.parent[t]
            parent[chain[-1]] = self.bottom(gp) if gp is not None else None
        for node, anchor in self._pendant_parent.items():
            parent[node] = anchor
        bags = {n: frozenset(b) for n, b in self._bags.items()}
        root = self.top(guiding.root)
        return WitnessTd(TreeDecomposition(bags, parent, root), bound_parameters)


def width_bound(k: int, regime: str,
                constants: tuple[int, int] = (BOUND_C1, BOUND_C2)) -> int:
    c1, c2 = constants
    if regime == "klogk":
        factor = max(1, (k + 2 - 1).bit_length())  # ceil(log2(k+2))
        return c1 * (k + 1) * factor + c2
    if regime == "ksquared":
        return c1 * (k + 1) ** 2 + c2
    raise ValueError(f"unknown regime {regime!r}")


@dataclass
class CertReport:
    regime: str
    input_width: int
    witness_width: int
    bound: int
    validation: TdValidation = field(default=None)

    @property
    def ok(self) -> bool:
        return self.validation.valid and self.witness_width <= self.bound


def certify_width(f: CnfFormula, w: WitnessTd, k: int, regime: str) -> CertReport:
    """Validate the witness against the CNF primal graph and check the
    width bound for the given regime; raises CertificationFailed."""
    validation = validate_td(cnf_primal_graph(f), w.shifted())
    report = CertReport(regime=regime, input_width=k, witness_width=w.width,
                        bound=width_bound(k, regime, w.bound_parameters),
                        validation=validation)
    if not validation.valid:
        raise CertificationFailed(
            f"witness is not a decomposition of the CNF primal graph: "
            f"missing={validation.missing_vertices[:5]} "
            f"uncovered={validation.uncovered_edges[:5]} "
            f"disconnected={validation.disconnected_vertices[:5]}", report)
    if report.witness_width > report.bound:
        raise CertificationFailed(
            f"witness width {report.witness_width} exceeds {regime} bound "
            f"{report.bound} for input width {k}", report)
    return report
