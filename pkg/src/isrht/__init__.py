"""Subsampled randomized Hadamard transform with data-dependent column sampling."""

from .errors import DegenerateInputError, DimensionError, ParameterError, ParseError
from .linalg import column_sq_norms, fwht, fwht_in_place, rotate
from .projections import METHODS, ProjectionModel, fit, fit_sparse_pipeline, fit_transform, transform
from .svm import SvmModel, cross_validate, predict, train

__version__ = "0.1.0"
