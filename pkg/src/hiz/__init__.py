"""Exact asymptotic expansions of HCIZ-type group integrals for general beta."""

from .exactcore import (
    ChiSeries,
    CoincidentEigenvalues,
    GaussianRational,
    SpectralPoint,
    YPoly,
    beta_from_y,
    series_eval,
    series_exp,
    series_multiply_truncate,
    y_from_beta,
    ypoly_eval,
)
from .graphexp import beta4_chi, complete_weight, deletion_rule_weight, gaussian_weight_check
from .largey import largey_vs_recursion, phi0, phi1, phi2_k3, phi_order_residual
from .oracle import (
    Ensemble,
    MCEstimate,
    hciz_unitary_det,
    mc_group_integral,
    pde_residual_numeric,
    reconstruct_full_integral,
)
from .pdesolver import GaugeReport, cubic_identity_residual, id_residuals, pde_apply, solve_chi
from .recursion3 import CoefficientTable3, c_pair, c_triple, c_two_point, chi_k3, chi_k3_beta4_compact, k2_ode_residual
from .report import VerificationReport

YPolynomial = YPoly

__all__ = [name for name in dir() if not name.startswith("_")]
