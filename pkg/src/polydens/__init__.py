"""Eigenvalues of Neumann polyharmonic operators with variable mass densities:
spline discretization, concentration families, bump test functions, annular
decompositions and bound bookkeeping."""

from .geometry import Annulus, Ball, BoundaryStrip, Domain
from .density import catalog, density_from_config
from .discretization import assemble_mass, assemble_stiffness, build_space, refine
from .spectrum import SolverConfig, Spectrum, kernel_dimension, solve_generalized
from .bounds import BoundKind, structural_factor, weyl_reference
from .gny import decompose, measure_space, verify
from .experiments import ExperimentConfig, fit_rate, run_sweep, steklov_compare, taylor_remainder_check

__version__ = "0.1.0"
