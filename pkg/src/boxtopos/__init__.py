"""Context posets, phase spaces, non-signalling states and their valuations for box worlds."""

from .errors import BoxToposError, InputError, ResourceError, ShapeError, ValidationError
from .kernels import BACKEND
from .logic import (BoxMorphism, BoxPresentation, LogicDiagram, coproduct, colimit, contexts_of, gbit,
                    general_theory, induced_context_map, logic_diagram, maximal_contexts, pr_presentation,
                    spectral_presheaf, validate_box_morphism)
from .phase_space import (check_product_phase_space, external_frame, phase_space, phase_space_map,
                          sections_at)
from .poset import FinitePoset, IsotoneMap, UpperSet, all_upper_sets, poset_product, upper_closure
from .states import (BellFunctional, BoxState, bell_value, chsh, deterministic_state, is_classical, marginal,
                     mix, ns_polytope_vertices, pr_box, tsirelson_constant, uniform_state, validate_state)
from .valuations import (InternalValuation, lattice_to_frame_valuation, state_to_valuation,
                         validate_valuation, valuation_to_colimit, valuation_to_state)

__version__ = "0.1.0"
