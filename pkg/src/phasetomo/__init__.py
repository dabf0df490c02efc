"""Phase-space faces of a quantum state: Fock matrices, diagonal weights and symplectic tomograms."""

from .bipartite import (BipartiteState, SeparableEnsemble, build_separable, charfn_factorization,
                        check_tomographic_factorization, joint_charfn, joint_grid, joint_tomogram,
                        joint_weight, partial_transpose, ppt_witness, separability_report, two_mode_cat)
from .coherent import (CoherentKet, CoherentSpan, cat_ket, coherent_overlap, coherent_weyl_expectation,
                       gram_schmidt, span_adjoint, span_multiply, span_trace)
from .diagonal import (HusimiFunction, PhaseWeight, dequantize_span, husimi, normally_ordered_charfn, p_to_q,
                       q_to_p_gaussian, tomogram_to_weight_gaussian, weight_to_operator, weight_to_tomogram,
                       weight_tomogram)
from .errors import (DensityError, OutOfClassError, PhaseTomoError, PreconditionError, QuadratureError,
                     TruncationError)
from .fock import (FockOperator, FockVector, TruncationPolicy, coherent_vector, displacement_matrix, purity,
                   span_to_fock, validate_density)
from .star import SymbolProduct, kernel_check_associativity, star, star_trace
from .superposition import (PHASE_CONVENTION, SuperpositionSpec, superpose_densities, superpose_kets,
                            superpose_symbols, superpose_tomograms)
from .tomography import (FockTomogram, GaussianTomogram, QuadratureSettings, Ray, TomogramGrid,
                         Wavefunction, check_homogeneity, tomogram_charfn, tomogram_of_fock, tomogram_of_pure)

__version__ = "0.1.0"
