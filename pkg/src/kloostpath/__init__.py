"""Kloosterman sums and Kloosterman paths to prime-power moduli."""

from .errors import (InvalidPhase, KloostpathError, ModulusError, NotASquare,
                     NotAUnit, PreconditionFailed, SingularQuadratic,
                     UnsupportedDepth, UsageError)
from .klooster import (KloostermanValue, SummandCensus, evaluate,
                       kloosterman_closed, kloosterman_closed_array,
                       kloosterman_naive, multiplicity_check, naive_table,
                       summand_census)
from .modring import (PrimePowerModulus, Residue, SqrtBranch, inv_mod,
                      jacobi, mul_mod, ord_p, sqrt_branch)
from .moments import (MomentSpec, ShiftMultiset, domain_count,
                      empirical_moment, equidist_stat, sop_decompose,
                      sum_of_products)
from .paths import (CompletionCoefficient, KloostermanPath,
                    completion_coeffs, completion_identity_check, path_eval,
                    path_vertices, rearranged_vertices, renormalized_eval)
from .randseries import (Law, SeriesSpec, exact_series_moment, sample_glued,
                         sample_law, series_eval)
from .statphase import (DifferentiablePhase, Emptiness, ShiftPhase,
                        hensel_lift_singular, reduce_sum_linear,
                        reduce_sum_quadratic, shifted_exp_sum, singular_locus,
                        vandermonde_emptiness)

__version__ = "0.1.0"
