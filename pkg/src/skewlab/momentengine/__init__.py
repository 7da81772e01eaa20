"""Graph weights, graphical moment identities, the limiting-moment recursion and deterministic-model analyses."""

from .deterministic import (IdentityCheck, ModelBBound, check_index_partition, deterministic_graph_sum,
                            lattice_sum, modelB_fourth_bound, modelB_fourth_exact,
                            moment_deterministic_identity)
from .phi import (PropagatorMode, PropagatorSpec, ReducibleCheck, effective_propagator, mobius,
                  moment_graph_sum, moment_montecarlo, phi, phi_direct, phi_reducible_limit_check,
                  set_partitions, subleading_decay_check)
from .recursion import (PROOF_FORM, STATEMENT_FORM, MomentTable, MPCrossCheck, catalan,
                        mp_moment_crosscheck, poly_str, recursion_moments, recursion_polys,
                        reducible_weight_sum)
