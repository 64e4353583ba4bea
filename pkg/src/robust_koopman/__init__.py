"""Robust finite-dimensional approximation of Koopman and Perron-Frobenius operators.

Row-feature convention throughout: with feature rows ``Psi(x)``, the
estimated Koopman matrix satisfies ``Psi(x_{t+1}) ~= Psi(x_t) @ K`` and the
Perron-Frobenius matrix is ``K.T``.
"""

from .dictionary import (AngleExponentialDictionary, Dictionary, FourierCircleDictionary,
                         GaussianRBFDictionary, LinearDictionary, MonomialDictionary,
                         dictionary_from_config, gram)
from .edmd import OperatorEstimate, dmd, edmd, pf_from_koopman
from .errors import (ConfigError, ConvergenceWarning, DimensionError, DomainError,
                     EmptyDataError, KoopmanError, NumericalError, UnsupportedDictionaryError)
from .nsdmd import NsdmdResult, nsdmd_robust, pf_estimate
from .predictor import Predictor, chordal, fit_output_map, prediction_error
from .robust import (RobustConfig, UncertaintyModel, inner_max, robust_lasso, robust_tikhonov,
                     uncertainty_bound, worst_case)
from .simulators import (BurgersParams, RotationParams, StuartLandauParams, simulate_burgers,
                         simulate_rotation, simulate_stuart_landau)
from .snapshots import GramPair, SnapshotMatrix, assemble, assemble_features, make_pairs
from .spectrum import SpectrumReport, analyze, spectral_distance
from .subspace import SpectralModes, subspace_dmd, subspace_dmd_estimate

__version__ = "0.1.0"

__all__ = [
    "AngleExponentialDictionary", "Dictionary", "FourierCircleDictionary", "GaussianRBFDictionary",
    "LinearDictionary", "MonomialDictionary", "dictionary_from_config", "gram",
    "OperatorEstimate", "dmd", "edmd", "pf_from_koopman",
    "ConfigError", "ConvergenceWarning", "DimensionError", "DomainError", "EmptyDataError",
    "KoopmanError", "NumericalError", "UnsupportedDictionaryError",
    "NsdmdResult", "nsdmd_robust", "pf_estimate",
    "Predictor", "chordal", "fit_output_map", "prediction_error",
    "RobustConfig", "UncertaintyModel", "inner_max", "robust_lasso", "robust_tikhonov",
    "uncertainty_bound", "worst_case",
    "BurgersParams", "RotationParams", "StuartLandauParams", "simulate_burgers",
    "simulate_rotation", "simulate_stuart_landau",
    "GramPair", "SnapshotMatrix", "assemble", "assemble_features", "make_pairs",
    "SpectrumReport", "analyze", "spectral_distance",
    "SpectralModes", "subspace_dmd", "subspace_dmd_estimate",
]
