"""Noncommutative quantum mechanics in the plane from the exotic Galilei group."""

__version__ = "0.1.0"

from .core import (Boundary, ConvergenceError, Grid2D, HermiticityError, OperatorMatrix, PhysParams, ShapeError,
                   ThetaTensor, UnsupportedBoundaryError, WaveFunction, inner_product, spectral_derivative)
from .polynomial import PolynomialPotential, PseudoDiffOperator
from .algebra import (AlgebraReport, BoostContext, GeneratorKind, build_generator, casimir_invariants,
                      check_exotic_algebra, commutator, moyal_star)
from .hamiltonian import (bopp_shift, build_anharmonic_hamiltonian, build_linear_hamiltonian,
                          build_nc_hamiltonian)
from .spectra import (QuantumNumbers, SpectrumResult, StiffnessBeta, linear_solution, nc_ho_energy,
                      nc_ho_wavefunction, solve_eigen)
from .dynamics import EhrenfestResidual, EvolutionTrace, ehrenfest_residuals, evolve, gaussian_packet
from .perturbation import (ErrataReport, PerturbationSetup, first_order_shift, gauss_hermite_integral,
                           closed_form_delta_e, verify_integral_identities)
