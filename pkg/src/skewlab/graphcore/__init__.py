"""Exploration graphs, preprocessing, good cycles, bypass constructions and Kirchhoff currents."""

from .cycles import (CycleWalk, GoodCycle, bypass, even_bypass, find_good_cycle, loop_erase,
                     simple_cycles, verify_good_cycle, witness_for)
from .explorations import (DOUBLE_TRIANGLE, MELON, SINGLE_LOOP, TWO_CYCLE, Exploration,
                           ExplorationGraph, bell, canonicalize, enumerate_explorations)
from .flow import has_four_edge_disjoint_paths, max_edge_disjoint_paths
from .kirchhoff import (CurrentMode, CycleBasis, cycle_basis, enumerate_admissible_currents,
                        incidence_matrix, satisfies_kirchhoff)
from .multigraph import Multigraph, PreprocessResult, Step, canonical_form, is_fully_reducible, preprocess
