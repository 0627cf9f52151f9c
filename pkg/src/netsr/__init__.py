"""Mean-field superradiance of two-level systems on complex networks."""
from .errors import (BracketError, BranchMergeError, DomainError, InvalidParameterError,
                     NumericFailure)
from .netmodel import (DegreeModel, DegreeSample, Moments, make_degree_model, moments_closed_form,
                       moments_quadrature, sample_degrees)
from .meanfield import (CriticalPoint, MeanFieldSolution, SolverOptions, SystemParams,
                        critical_temperature, critical_zeta, density_equation, equilibrium,
                        free_energy_density, gap_equation_residual, mu_branches_high_T,
                        mu_branches_zero_T, order_parameter_scaling, solve_equilibrium)
from .dissipative import (DissipativeBranches, DissipativeParams, FieldPolarizationState,
                          integrate_langevin, polariton_branches_lossy, superstrong_condition)
from .sweep import SweepRow, SweepSpec, phase_boundary, run_sweep

__version__ = "0.1.0"
