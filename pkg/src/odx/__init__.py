"""Orbit determination on invariant curves of standard-like maps."""

__version__ = "0.1.0"

from .cylmap import CylinderPoint, StandardLikeMap, jacobian, step, step_inverse, tangent_orbit
from .fourier import FourierSeries, solve_cohomological
from .kamcurve import GOLDEN, DiophantineNumber, InvariantCurve, certify_diophantine, continuation, \
    solve_curve
from .reducibility import ReducibilityFrame, reduce
from .covariance import ConfidenceEllipse, NormalMatrix, confidence_ellipse, eigen_symmetric, \
    normal_matrix_direct, normal_matrix_reduced, tilt_test
from .odfit import FitResult, ObservationSet, fit, residuals, synthesize, target_Q

__all__ = [
    "CylinderPoint", "StandardLikeMap", "jacobian", "step", "step_inverse", "tangent_orbit",
    "FourierSeries", "solve_cohomological",
    "GOLDEN", "DiophantineNumber", "InvariantCurve", "certify_diophantine", "continuation",
    "solve_curve",
    "ReducibilityFrame", "reduce",
    "ConfidenceEllipse", "NormalMatrix", "confidence_ellipse", "eigen_symmetric",
    "normal_matrix_direct", "normal_matrix_reduced", "tilt_test",
    "FitResult", "ObservationSet", "fit", "residuals", "synthesize", "target_Q",
]
