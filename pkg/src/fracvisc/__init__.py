"""Two-branch fractional Maxwell viscoelastic models: evaluation, particle-swarm
calibration to master curves, and local/global sensitivity analysis."""

__version__ = "0.1.0"

from .exceptions import (ConfigError, DataError, DegenerateExponentError, DomainError,
                         EmptyDataError, FracViscError, OrderError, ParseError)
from .viscomodel import (PARAM_NAMES, BranchParams, FractionalModel, MediumProps, ModelKind,
                         TS2Params, branch_moduli, complex_modulus, constrained_tau2,
                         model_moduli, pi_number, sound_speed, ts2_log_shift)
from .dataio import MasterCurve, load_master_curve, save_master_curve, synthesize_curve
from .calibration import FitResult, ParamBounds, PsoConfig, cost, fit, relative_error
from .lsa import (LsaResult, Norm, Output, ParamRanges, SensitivityCurve, index_norm,
                  local_indices, mc_average_indices)
from .gsa import (SampleMatrices, SobolResult, model_sobol_indices, saltelli_indices,
                  sobol_points)
from .estimator import FractionalMaxwellRegressor

__all__ = [
    "BranchParams", "ConfigError", "DataError", "DegenerateExponentError", "DomainError",
    "EmptyDataError", "FitResult", "FracViscError", "FractionalMaxwellRegressor",
    "FractionalModel", "LsaResult", "MasterCurve", "MediumProps", "ModelKind", "Norm",
    "OrderError", "Output", "PARAM_NAMES", "ParamBounds", "ParamRanges", "ParseError",
    "PsoConfig", "SampleMatrices", "SensitivityCurve", "SobolResult", "TS2Params",
    "branch_moduli", "complex_modulus", "constrained_tau2", "cost", "fit", "index_norm",
    "load_master_curve", "local_indices", "mc_average_indices", "model_moduli",
    "model_sobol_indices", "pi_number", "relative_error", "saltelli_indices",
    "save_master_curve", "sobol_points", "sound_speed", "synthesize_curve", "ts2_log_shift",
]
