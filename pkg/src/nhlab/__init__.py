"""Numerical laboratory for real vs complex spectra of non-Hermitian
one-dimensional lattice models: quasiperiodic exponential-phase and
imaginary-tangent potentials and the disordered asymmetric-hopping ring,
cross-validated through a self-contained dense eigensolver, transfer-matrix
and momentum-space Lyapunov exponents, and closed-form spectra."""

from .analytic import (AnalyticCurve, CurveKind, analytic_spectrum_exp,
                       analytic_spectrum_tan, dini_integral,
                       duality_relation_residual, gamma_momentum_closed,
                       gamma_position_closed, gamma_tan_closed, thouless_gamma)
from .diagnostics import (EvolutionResult, RegimeReport, decay_rate_fit,
                          directed_distance, evolve_norm, hatano_regime_scan,
                          ipr, real_fraction, spectral_distance)
from .duality import (DualState, DualTanRecursion, build_dual_exp,
                      build_dual_tan, fourier_transform,
                      inverse_fourier_transform, lyapunov_momentum_product,
                      lyapunov_momentum_tan)
from .eigensolver import Spectrum, eigenpairs, eigenvalues
from .model import (ALPHA, EPS_TAN, Boundary, Hamiltonian, Kind, ModelSpec,
                    build_exp_model, build_hatano_nelson, build_model,
                    build_tan_model, densify, fibonacci_approximant,
                    uniform_pm1)
from .transfer import (AvilaScan, LyapunovEstimate, LyapunovMethod,
                       avila_scan, lyapunov_position, transfer_matrix)

__version__ = "0.1.0"

__all__ = [
    "ALPHA", "EPS_TAN", "AnalyticCurve", "AvilaScan", "Boundary", "CurveKind",
    "DualState", "DualTanRecursion", "EvolutionResult", "Hamiltonian", "Kind",
    "LyapunovEstimate", "LyapunovMethod", "ModelSpec", "RegimeReport",
    "Spectrum", "analytic_spectrum_exp", "analytic_spectrum_tan",
    "avila_scan", "build_dual_exp", "build_dual_tan", "build_exp_model",
    "build_hatano_nelson", "build_model", "build_tan_model",
    "decay_rate_fit", "densify", "dini_integral", "directed_distance",
    "duality_relation_residual", "eigenpairs", "eigenvalues", "evolve_norm",
    "fibonacci_approximant", "fourier_transform", "gamma_momentum_closed",
    "gamma_position_closed", "gamma_tan_closed", "hatano_regime_scan",
    "inverse_fourier_transform", "ipr", "lyapunov_momentum_product",
    "lyapunov_momentum_tan", "lyapunov_position", "real_fraction",
    "spectral_distance", "thouless_gamma", "transfer_matrix", "uniform_pm1",
    "__version__",
]
