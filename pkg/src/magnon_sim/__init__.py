"""Gaussian covariance dynamics, stability and entanglement of a driven cavity with two magnon modes."""

from .dynamics import PropagationConfig, compare_models, evolve_model, propagate, steady_state
from .entanglement import closed_form_en, cooling_diagnostics, pairwise_entanglement
from .gaussian import log_negativity, two_mode_squeezed_cm, vacuum_cm
from .models import Model, PhysicalParams, derive_params, drift_matrix, model_diffusion, params_from_detunings
from .stability import eigen_stable, routh_hurwitz_stable
from .sweep import Axis, GridSpec, ratio_sweep, run_sweep

__version__ = "0.1.0"
