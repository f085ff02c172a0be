"""Treewidth-aware translation of ground answer-set programs to CNF."""

from .baselines import clark_completion, global_translation
from .bijective import BijectiveOptions, split_bag_rules, translate_bijective
from .cnf import (CnfFormula, WitnessTd, certify_width, cnf_primal_graph,
                  write_dimacs)
from .decomposition import (NiceTd, TreeDecomposition, assign_rules,
                            bag_program, decompose_heuristic, make_nice,
                            read_td, validate_td, write_td)
from .hardness import (ClosureSequence, DjpInstance, build_hardness_program,
                       djp_bruteforce_solve, djp_parse, djp_write,
                       generate_djp_program, pair_connected_td,
                       pair_respecting_td, random_djp, ready_edges)
from .oracles import (answer_sets_proving, answer_sets_reduct,
                      check_preservation, enumerate_models)
from .ordered import OrderedOptions, translate_ordered
from .program import (Atom, Program, ProgramClass, Rule, classify,
                      dependency_digraph, format_program, gl_reduct,
                      parse_program, primal_graph, shift_hcf)

__version__ = "0.1.0"
