"""Desk-scale laboratory for epsilon-entropy of semimetrics under finite
group averaging: field towers, SL(2, F_q) enumeration, cut metrics, exact and
bracketed epsilon-entropy, window averaging, coloring-based separated
families, and the subgroup-tower experiments built from them."""

__version__ = "0.1.0"

from .algebra import (FieldElement, FieldTower, FiniteGroup, Mat2, ProductGrowth,
                      SL2Group, coset_representatives, element_order, field_create,
                      field_embed, sl2_enumerate, triple_product_size)
from .spaces import (FiniteProbSpace, Partition, Semimetric, combine,
                     cut_semimetric, dyadic_sum, l1_norm, m_norm, refine,
                     shannon_entropy)
from .entropy import (EpsEntropyResult, eps_entropy_bracket, eps_entropy_exact,
                      eps_entropy_greedy_upper, eps_entropy_packing_lower)
from .dynamics import (ActionTable, BernoulliShift, FolnerFamily, GrowthComparison,
                       averaged_entropy_profile, averaged_metric_entropy,
                       bernoulli_shift, block_entropy_rate, folner_average,
                       growth_compare, refined_orbit_partition,
                       sequential_entropy_profile, translate_semimetric)
from .constructions import (DifferenceGraph, SeparatedFamily, TowerAction,
                            choose_index_sequence, component_metric,
                            component_partition, difference_graph, greedy_coloring,
                            invariant_metric_entropy_table, left_invariant_semimetric,
                            separated_family, sl2_tower_action,
                            tower_entropy_profile, transversal_entropy_table,
                            transversal_partition, triple_product_experiment,
                            unipotent_generators, word_metric_root)
from .errors import BudgetError, ConfigError, SearchBudgetError
