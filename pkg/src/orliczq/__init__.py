"""Numerical toolkit for high-resolution quantization limits under
Orlicz-norm distortion: complexity functions of uniform quantizers, their
concave conjugates, optimal point-density allocation for one-dimensional
sources, growth diagnostics for unbounded supports, and concrete codebook
constructions with Monte Carlo distortion measurement.
"""
from .orlicz import PhiFunction, NormSpace, orlicz_norm
from .gfun import (ComplexityFunction, UniformQuantizerResult,
                   uniform_codebook_search)
from .conjugate import ConcaveConjugate
from .sources import (Gaussian1D, GaussianMixture1D, UniformBox, GridDensity,
                      TailWeight, TailSpec, GrowthReport,
                      check_growth_condition)
from .allocation import (AllocationSolution, solve, xi_profile,
                         constraint_integral, dual_integral, membership_check)
from .codebook import (Codebook, BucketIndex, build_stratified,
                       build_tail_net, build_codebook, mc_distortion,
                       run_convergence_study, empirical_histogram,
                       profile_histogram, histogram_l1, save_codebook_csv)

__version__ = "0.1.0"

__all__ = [
    "PhiFunction", "NormSpace", "orlicz_norm",
    "ComplexityFunction", "UniformQuantizerResult", "uniform_codebook_search",
    "ConcaveConjugate",
    "Gaussian1D", "GaussianMixture1D", "UniformBox", "GridDensity",
    "TailWeight", "TailSpec", "GrowthReport", "check_growth_condition",
    "AllocationSolution", "solve", "xi_profile", "constraint_integral",
    "dual_integral", "membership_check",
    "Codebook", "BucketIndex", "build_stratified", "build_tail_net",
    "build_codebook", "mc_distortion", "run_convergence_study",
    "empirical_histogram", "profile_histogram", "histogram_l1",
    "save_codebook_csv",
    "__version__",
]
