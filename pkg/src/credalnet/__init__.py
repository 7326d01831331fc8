"""Exact inference for credal networks under epistemic irrelevance.

Tight lower and upper bounds on (conditional) expectations over the joint
model induced by local credal sets and graph-derived irrelevance
assessments: a global linear program for small networks, theorem-backed
reductions to sub-networks, linear-time recursions for chains and
hidden-state models, root bracketing for conditioning, and brute-force
oracles for verification.
"""

from .chains import (HmmSpec, TransferOperator, chain_forward,
                     chain_reverse_rho, complete_evidence_lower,
                     hmm_forward_rho, infer_hmm_spec)
from .conditioning import (BracketResult, RhoEvaluator, lower_prob_positive,
                           natural_conditional, reduce_then_condition,
                           regular_conditional, rho, rho_callable,
                           rho_evaluator, upper_prob_positive)
from .credal import (CredalSet, HomogeneousConstraint, LinearConstraint,
                     MassFunction, binary_interval, constraints_to_vertices,
                     local_lower_expectation, local_lower_probability,
                     local_upper_expectation, local_upper_probability,
                     singleton, to_homogeneous, vacuous,
                     vertices_to_constraints)
from .decompose import (Reduction, atom_bounds, combined, external_additivity,
                        factorise, iterated_lower_expectation,
                        lower_expectation, marginalise, trace_lines,
                        upper_expectation)
from .errors import (CapabilityError, ConvergenceError, CredalError,
                     HypothesisError, InputError, ModelError)
from .fileio import (Query, dump_network, load_network, load_network_document,
                     load_query, network_document, parse_query,
                     validate_document)
from .graph import (Dag, ad_separated, ad_separated_closed, closure,
                    d_separated, is_closed, path_blocked, relations,
                    set_relations)
from .lp import (GlobalPolytope, LinearProgram, LpSolution, build_global_lp,
                 enumerate_joint_extreme_points, lower_expectation_lp,
                 solve_global, upper_expectation_lp)
from .network import (CredalNetwork, Event, Factor, ValidationReport,
                      joint_states, restrict_factor, sub_network, validate)
from .oracle import (BayesianSelection, complete_extension_lower,
                     complete_extension_upper, irr_extreme_conditional)
from .queries import run_query

__version__ = "0.1.0"
