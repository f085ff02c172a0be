"""Synthetic corpora and the width-benchmarking harness.

Reports follow the schema {schema, scenario, translation, count, min,
max, mean, median, stddev, rows:[{id, input_width, output_width, vars,
clauses, ms}]}; every field except the wall-time column is reproducible
byte-for-byte under a fixed seed.
"""

from __future__ import annotations

import json
import random
import statistics
import time
from dataclasses import dataclass, field

from .baselines import global_translation
from .bijective import BijectiveOptions, translate_bijective
from .cnf import cnf_primal_graph
from .decomposition import assign_rules, decompose_heuristic, make_nice
from .ordered import GLOBAL_BITS, LOCAL_BITS, OrderedOptions, translate_ordered
from .program import Program, ProgramBuilder, classify, primal_graph

SCENARIOS = ("s1", "s2", "s2b")
REPORT_SCHEMA = 1


def random_tight_program(seed: int, num_atoms: int = 8, num_rules: int = 10
                         ) -> Program:
    """Tight program: positive bodies respect a random topological order."""
    rng = random.Random(seed)
    n = rng.randint(2, max(2, num_atoms))
    names = [f"x{i}" for i in range(n)]
    order = list(range(n))
    rng.shuffle(order)
    pos_of = {i: k for k, i in enumerate(order)}
    b = ProgramBuilder()
    for name in names:
        b.atom(name)
    for _ in range(rng.randint(1, num_rules)):
        head_atom = rng.randrange(n)
        below = [i for i in range(n) if pos_of[i] < pos_of[head_atom]]
        body_pos = rng.sample(below, min(len(below), rng.randint(0, 2)))
        others = [i for i in range(n) if i != head_atom and i not in body_pos]
        body_neg = rng.sample(others, min(len(others), rng.randint(0, 2)))
        if rng.random() < 0.15:
            b.rule([], [names[i] for i in body_pos],
                   [names[i] for i in body_neg] or [names[head_atom]])
        else:
            b.rule([names[head_atom]], [names[i] for i in body_pos],
                   [names[i] for i in body_neg])
    p = b.build()
    assert classify(p).is_tight
    return p


def random_hcf_program(seed: int, num_atoms: int = 8, num_rules: int = 10,
                       allow_disjunction: bool = True) -> Program:
    """Random head-cycle-free program (rejection sampling on the class)."""
    rng = random.Random(seed)
    for attempt in range(200):
        n = rng.randint(2, max(2, num_atoms))
        names = [f"x{i}" for i in range(n)]
        b = ProgramBuilder()
        for name in names:
            b.atom(name)
        for _ in range(rng.randint(1, num_rules)):
            r = rng.random()
            if r < 0.1:
                head: list[int] = []
            elif allow_disjunction and r < 0.25 and n >= 2:
                head = rng.sample(range(n), 2)
            else:
                head = [rng.randrange(n)]
            rest = [i for i in range(n) if i not in head]
            body_pos = rng.sample(rest, min(len(rest), rng.randint(0, 2)))
            rest2 = [i for i in rest if i not in body_pos]
            body_neg = rng.sample(rest2, min(len(rest2), rng.randint(0, 2)))
            if not head and not body_pos and not body_neg:
                body_neg = [rng.randrange(n)]
            b.rule([names[i] for i in head], [names[i] for i in body_pos],
                   [names[i] for i in body_neg])
        p = b.build()
        if classify(p).is_hcf:
            return p
    raise RuntimeError("could not sample an HCF program")


def reachability_program(digraph_arcs: list[tuple[int, int]], n: int) -> Program:
    """Reachability from the smallest to the largest vertex index."""
    b = ProgramBuilder()
    for v in range(n):
        b.atom(f"reach_{v}")
    b.rule(["reach_0"], [], [])
    for u, v in sorted(digraph_arcs):
        b.rule([f"reach_{v}"], [f"reach_{u}"], [])
    b.rule([], [], [f"reach_{n - 1}"])
    return b.build()


def _random_network(rng: random.Random) -> tuple[int, list[tuple[int, int]]]:
    if rng.random() < 0.5:
        rows = rng.randint(2, 3)
        cols = rng.randint(2, 3)
        n = rows * cols
        arcs = []
        for r in range(rows):
            for c in range(cols):
                v = r * cols + c
                if c + 1 < cols:
                    arcs.extend([(v, v + 1), (v + 1, v)])
                if r + 1 < rows:
                    arcs.extend([(v, v + cols), (v + cols, v)])
        return n, arcs
    n = rng.randint(5, 10)
    arcs = set()
    for v in range(1, n):
        u = rng.randrange(v)
        arcs.add((u, v))
        arcs.add((v, u))
    for _ in range(rng.randint(1, n)):
        u, v = rng.randrange(n), rng.randrange(n)
        if u != v:
            arcs.add((u, v))
    return n, sorted(arcs)


def gen_corpus(scenario: str, seed: int, count: int) -> list[Program]:
    """S1: tight random programs; S2/S2b: reachability over random
    grid or sparse networks (same corpus, different translation flags)."""
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}")
    out = []
    for i in range(count):
        if scenario == "s1":
            out.append(random_tight_program(seed * 7919 + i))
        else:
            rng = random.Random(seed * 104729 + i)
            n, arcs = _random_network(rng)
            out.append(reachability_program(arcs, n))
    return out


@dataclass
class WidthReport:
    scenario: str
    translation: str
    rows: list[dict] = field(default_factory=list)

    def stats(self) -> dict:
        widths = [r["output_width"] for r in self.rows]
        if not widths:
            return {"count": 0, "min": None, "max": None, "mean": None,
                    "median": None, "stddev": None}
        return {
            "count": len(widths),
            "min": min(widths),
            "max": max(widths),
            "mean": round(statistics.mean(widths), 3),
            "median": statistics.median(widths),
            "stddev": round(statistics.pstdev(widths), 3),
        }

    def to_json_dict(self) -> dict:
        d = {"schema": REPORT_SCHEMA, "scenario": self.scenario,
             "translation": self.translation}
        d.update(self.stats())
        d["rows"] = sorted(self.rows, key=lambda r: r["id"])
        return d


TRANSLATIONS = ("-", "ordered", "bijective", "global")


def _translate_for_bench(p: Program, translation: str, seed: int):
    td = decompose_heuristic(primal_graph(p), "min-fill", seed)
    nice = make_nice(td)
    assign = assign_rules(p, nice)
    if translation == "ordered":
        return translate_ordered(p, nice, assign, OrderedOptions())[0], td.width
    if translation == "bijective":
        return translate_bijective(p, nice, assign, BijectiveOptions())[0], td.width
    if translation == "s2b":
        opts = OrderedOptions(ordering_scope=GLOBAL_BITS)
        return translate_ordered(p, nice, assign, opts)[0], td.width
    if translation == "global":
        return global_translation(p)[0], td.width
    raise ValueError(f"unknown translation {translation!r}")


def bench_widths(corpus: list[Program], translations: list[str],
                 scenario: str, heuristic: str = "min-degree",
                 seed: int = 0) -> list[WidthReport]:
    """One report per translation plus the no-translation baseline row.

    Output widths are re-decomposition upper bounds on the emitted CNF's
    primal graph, mirroring the decompose/translate/re-decompose loop.
    """
    reports = [WidthReport(scenario, "-")]
    for i, p in enumerate(corpus):
        width = decompose_heuristic(primal_graph(p), "min-fill", seed + i).width
        reports[0].rows.append({"id": i, "input_width": width,
                                "output_width": width,
                                "vars": p.num_atoms, "clauses": len(p.rules),
                                "ms": 0})
    for translation in translations:
        report = WidthReport(scenario, translation)
        reports.append(report)
        for i, p in enumerate(corpus):
            t0 = time.perf_counter()
            try:
                f, input_width = _translate_for_bench(p, translation, seed + i)
            except Exception as exc:  # recorded, never aborts the sweep
                report.rows.append({"id": i, "error": str(exc)})
                continue
            out_td = decompose_heuristic(cnf_primal_graph(f), heuristic, seed + i)
            ms = int((time.perf_counter() - t0) * 1000)
            report.rows.append({
                "id": i,
                "input_width": input_width,
                "output_width": out_td.width,
                "vars": f.num_vars,
                "clauses": f.num_clauses,
                "ms": ms,
            })
    return reports


def reports_to_json(reports: list[WidthReport]) -> str:
    return json.dumps([r.to_json_dict() for r in reports], indent=2,
                      sort_keys=False) + "\n"


def scenario_reports(scenario: str, count: int, seed: int,
                     heuristic: str = "min-degree") -> list[WidthReport]:
    corpus = gen_corpus(scenario, seed, count)
    if scenario == "s1":
        translations = ["ordered", "global"]
    elif scenario == "s2":
        translations = ["ordered", "global"]
    else:  # s2b: decomposition-guided proofs with global ordering bits
        translations = ["s2b", "global"]
    return bench_widths(corpus, translations, scenario, heuristic, seed)
