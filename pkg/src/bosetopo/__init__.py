"""Band topology, edge modes and scattering of quadratic bosonic chains."""

__version__ = "0.1.0"

from .errors import NumericalError, ValidationError
from .qbh import (Hopping, Onsite, Pairing, QuadraticHamiltonian, beta, beta_matrix, build_qbh,
                  commutator, dynamical_matrix)
from .models import (BlochSymbol, ModelSpec, PerturbationSpec, apply_perturbation, bkc, bloch_symbol,
                     bosonic_ssh, build_model, closed_form_polaritons, coupled_cavity_pair,
                     photo_magnonic_chain, shift_matrix)
from .spectral import band_structure, diagonalize, finite_size_scan, zero_modes
from .topology import (InvariantResult, auxiliary_B, berry_winding, bulk_boundary_check,
                       detect_symmetry_class, pfaffian, pfaffian_invariant, symbol_invariant,
                       winding_number)
from .scattering import Port, ScatteringSetup, chain_setup, driven_mode_profile, response_matrix, s_parameters
