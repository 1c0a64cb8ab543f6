"""Hypertoric configurations: smoothness, topology, metrics and periodic potentials."""

from .arrangement import (build_arrangement, deform_pair, enumerate_chambers, homotopy_report,
                          intersection_poset, plot_data, retraction_pair, tau, tau_inverse)
from .config import (BasePoint, FlatConfiguration, FlatFamily, ImQuaternion, TailLaw,
                     builtin_goto, certify_convergence, check_smoothness, enumerate_flats,
                     flats_through)
from .errors import *  # noqa: F401,F403
from .lattice import (BasisChange, GeneratorSet, find_z_basis, is_primitive, is_z_basis,
                      normalize_generators)
from .metric import (TaubNutDeformation, connection, flat_data, gram_matrix, polyharmonic_check,
                     potential, prepotential_truncated)
from .moment import MomentSolveProblem, discrete_stabilizer_check, moment_solve, stabilizer
from .periodic import PeriodicFamily, fibration_report, ov_potential, periodic_potential

__version__ = "0.1.0"
