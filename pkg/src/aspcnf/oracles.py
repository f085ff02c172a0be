"""Ground-truth engines: two answer-set enumerators, a projecting CNF
model enumerator, and the preservation checkers built on them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .cnf import CnfFormula
from .program import Program, classify, gl_reduct, is_model
from .sat import SatSolver, count_models


class TooLarge(ValueError):
    pass


class CapExceeded(RuntimeError):
    pass


DEFAULT_ATOM_CAP = 22


def satisfaction_clauses(p: Program) -> list[list[int]]:
    """One clause per rule over atom variables (atom id + 1)."""
    clauses = []
    for r in p.rules:
        clause = [-(b + 1) for b in r.body_pos]
        clause += [a + 1 for a in r.body_neg]
        clause += [a + 1 for a in r.head]
        clauses.append(clause)
    return clauses


def enumerate_classical_models(p: Program) -> list[frozenset[int]]:
    solver = SatSolver(p.num_atoms, satisfaction_clauses(p))
    models, _ = solver.enumerate_projected(range(1, p.num_atoms + 1))
    return sorted((frozenset(v - 1 for v in m) for m in models),
                  key=lambda m: sorted(m))


def least_model(definite: Program) -> frozenset[int]:
    """Least model of a program without negative bodies (T_P fixpoint)."""
    derived: set[int] = set()
    changed = True
    while changed:
        changed = False
        for r in definite.rules:
            if not r.head:
                continue
            if len(r.head) != 1:
                raise ValueError("least model needs a normal program")
            a = r.head[0]
            if a not in derived and all(b in derived for b in r.body_pos):
                derived.add(a)
                changed = True
    return frozenset(derived)


def has_proper_submodel(reduct: Program, m: frozenset[int]) -> bool:
    """SAT check for N with N < m and N a model of the reduct."""
    clauses = satisfaction_clauses(reduct)
    for a in range(reduct.num_atoms):
        if a not in m:
            clauses.append([-(a + 1)])
    clauses.append([-(a + 1) for a in sorted(m)])
    return SatSolver(reduct.num_atoms, clauses).solve()


def is_answer_set(p: Program, m: frozenset[int],
                  force_minimality_search: bool = False) -> bool:
    if not is_model(p, m):
        return False
    reduct = gl_reduct(p, m)
    if classify(p).is_normal and not force_minimality_search:
        return least_model(reduct) == m
    return not has_proper_submodel(reduct, m)


def answer_sets_reduct(p: Program, cap: int = DEFAULT_ATOM_CAP,
                       force_minimality_search: bool = False
                       ) -> list[frozenset[int]]:
    """Answer sets as the minimal-models-of-the-reduct characterization."""
    if p.num_atoms > cap:
        raise TooLarge(f"{p.num_atoms} atoms exceeds cap {cap}")
    return [m for m in enumerate_classical_models(p)
            if is_answer_set(p, m, force_minimality_search)]


def has_answer_set(p: Program, cap: int = DEFAULT_ATOM_CAP) -> bool:
    """Consistency only; stops at the first stable model."""
    if p.num_atoms > cap:
        raise TooLarge(f"{p.num_atoms} atoms exceeds cap {cap}")
    for m in enumerate_classical_models(p):
        if is_answer_set(p, m):
            return True
    return False


def proven_fixpoint(p: Program, m: frozenset[int]) -> frozenset[int]:
    """Least set of atoms of m provable by rules whose positive bodies
    are already proven (suitability conditions on m)."""
    proven: set[int] = set()
    suitable = []
    for r in p.rules:
        if not (set(r.body_pos) <= m) or (set(r.body_neg) & m):
            continue
        heads_in = [a for a in r.head if a in m]
        if len(heads_in) != 1:
            continue
        suitable.append((heads_in[0], r.body_pos))
    changed = True
    while changed:
        changed = False
        for a, body in suitable:
            if a not in proven and all(b in proven for b in body):
                proven.add(a)
                changed = True
    return frozenset(proven)


def answer_sets_proving(p: Program, cap: int = DEFAULT_ATOM_CAP
                        ) -> list[frozenset[int]]:
    """Answer sets as models whose atoms all admit a proving ordering.

    Realized as a least fixpoint per candidate model; an ordering exists
    exactly when the fixpoint covers the model.
    """
    from .program import NotHcf
    if not classify(p).is_hcf:
        raise NotHcf("the proving characterization needs an HCF program")
    if p.num_atoms > cap:
        raise TooLarge(f"{p.num_atoms} atoms exceeds cap {cap}")
    out = []
    for m in enumerate_classical_models(p):
        if m <= proven_fixpoint(p, m):
            out.append(m)
    return out


@dataclass
class ModelEnumeration:
    projections: dict[frozenset[int], int]
    total: int
    complete: bool

    def projection_sets(self) -> set[frozenset[int]]:
        return set(self.projections)


def enumerate_models(f: CnfFormula, cap: Optional[int] = None,
                     with_multiplicity: bool = True) -> ModelEnumeration:
    """Projected model multiset of a formula.

    Projections are frozensets of true projection variables; the
    multiplicity of each projection is the exact number of full models
    extending it.  Incomplete results (cap hit) are flagged, not raised.
    """
    solver = SatSolver(f.num_vars, f.clauses)
    proj = sorted(f.projection)
    found, complete = solver.enumerate_projected(proj, limit=cap)
    projections: dict[frozenset[int], int] = {}
    total = 0
    for model in sorted(found, key=sorted):
        if with_multiplicity:
            assumptions = [v if v in model else -v for v in proj]
            n = count_models(f.num_vars, f.clauses, assumptions)
        else:
            n = 1
        projections[model] = n
        total += n
    return ModelEnumeration(projections, total, complete)


def projected_atom_sets(f: CnfFormula, enum: ModelEnumeration
                        ) -> set[frozenset[str]]:
    return {frozenset(f.key(v)[1] for v in m) for m in enum.projections}


@dataclass
class PreservationReport:
    mode: str
    ok: bool
    answer_sets: list[frozenset[str]]
    model_projections: list[frozenset[str]]
    only_program: list[frozenset[str]] = field(default_factory=list)
    only_formula: list[frozenset[str]] = field(default_factory=list)
    multiplicities: dict[frozenset[str], int] = field(default_factory=dict)
    model_count: Optional[int] = None

    def to_json_dict(self) -> dict:
        def render(sets):
            return [sorted(s) for s in sorted(sets, key=sorted)]
        return {
            "status": "ok" if self.ok else "mismatch",
            "mode": self.mode,
            "mismatches": {
                "only_program": render(self.only_program),
                "only_formula": render(self.only_formula),
            },
            "multiplicities": {",".join(sorted(k)): v
                               for k, v in sorted(self.multiplicities.items(),
                                                  key=lambda kv: sorted(kv[0]))},
            "counts": {
                "answer_sets": len(self.answer_sets),
                "projections": len(self.model_projections),
                "models": self.model_count,
            },
        }


def check_preservation(p: Program, f: CnfFormula, mode: str = "weak",
                       cap: int = DEFAULT_ATOM_CAP) -> PreservationReport:
    """Compare projected models of f against the answer sets of p.

    weak: set equality of projections and answer sets.  bijective:
    additionally every answer set corresponds to exactly one model.
    """
    if mode not in ("weak", "bijective"):
        raise ValueError(f"unknown mode {mode!r}")
    answer_sets = [p.names(m) for m in answer_sets_reduct(p, cap)]
    enum = enumerate_models(f, with_multiplicity=(mode == "bijective"))
    projections = sorted(projected_atom_sets(f, enum), key=sorted)
    aset = set(answer_sets)
    pset = set(projections)
    report = PreservationReport(
        mode=mode,
        ok=(aset == pset),
        answer_sets=sorted(aset, key=sorted),
        model_projections=projections,
        only_program=sorted(aset - pset, key=sorted),
        only_formula=sorted(pset - aset, key=sorted),
    )
    if mode == "bijective":
        mult = {frozenset(f.key(v)[1] for v in m): n
                for m, n in enum.projections.items()}
        report.multiplicities = mult
        report.model_count = enum.total
        if any(n != 1 for n in mult.values()):
            report.ok = False
    return report
