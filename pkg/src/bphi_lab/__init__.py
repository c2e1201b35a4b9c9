"""Numerical norms on the unit disk: weighted Bloch, BMOA (area integral), and
desk-scale checks of the growth estimates that relate them."""

from .functions import (
    AnalyticFunction,
    DilatedFunction,
    DomainError,
    LacunarySeries,
    LogOneMinusZ,
    LogSquaredOneMinusZ,
    Monomial,
    PowerSeries,
    Scaled,
    dilate,
    parse_function,
)
from .weights import PowerWeight, Tabulated, Weight, check_integrable, g, parse_weight, phi
from .quadrature import QuadratureSpec, SupResult, integrate_circle, integrate_disk, sup_search
from .norms import (
    DistributionSample,
    NormEstimate,
    RayProfile,
    bmo_arc_norm,
    bmoa_garsia_norm,
    bphi_norm,
    distribution_function,
    estimate_jn_constants,
    exp_integral,
    growth_ratio,
    layer_cake_moment,
    radial_min,
)

__version__ = "0.1.0"
