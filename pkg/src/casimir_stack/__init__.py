"""Casimir forces between perfect mirrors filled with layered media that
may amplify and/or absorb light."""

from .casimir import (BoundsReport, ForceResult, action_3layer, bounds_check, energy_lifshitz,
                      energy_slab, energy_vacuum, force_from_action, force_slab_qw, force_slab_s,
                      force_slab_w, force_vacuum, omega_of_s, three_layer_log)
from .errors import (AccuracyError, BracketError, CasimirError, ClassificationError, ConfigError,
                     DomainError, InvalidMediumError, MappingError, RoundTripGainError,
                     UnsupportedEvaluationError)
from .greens import gamma_entries, g_homogeneous, g_mixed_derivative, g_scalar
from .quad import QuadratureSpec
from .response import (VACUUM, LorentzTerm, MediumClass, ResponseModel, Sign, classify,
                       eval_chi, eval_imag_axis, kk_imag_axis, n_static, refractive_index_imag,
                       validate)
from .stack import Layer, Polarization, Stack, TransverseMode, d_factor, r_interface, r_recursive

__version__ = "0.1.0"
