"""First-arrival-position (FAP) channel toolkit.

Closed-form FAP densities for planar absorbing receivers, the VDFAP
characteristic function and moments, differential entropy and capacity bounds,
a first-passage Monte Carlo simulator, and statistical validation helpers.
"""

__version__ = "0.1.0"

from .capacity import (CapacityQuery, CapacityResult, capacity_bounds, capacity_sweep, lower_bound_2d,
                       lower_bound_general, upper_bound_2d, upper_bound_general)
from .channel import (PlanarChannelParams, SphereQuery, VdfapParams, absorption_mass, cauchy_pdf,
                      fap_pdf_line_physical, fap_pdf_plane, sphere_angular_density, vdfap_pdf)
from .entropy import entropy_quadrature, entropy_tail_integral, g, h0, h0_derivatives, vdfap_entropy_2d
from .errors import DimensionError, DomainError, FapError, NormalizationError, ParameterError, StabilityError
from .mcsim import (DensityGrid, FapSampleSet, GridAxis, SimConfig, build_histogram, sample_vdfap_exact,
                    simulate_fap)
from .specfun import BesselOrder, bessel_k, expint_ei
from .spectral import MomentSummary, convolve_params, vdfap_cf, vdfap_cf_gradient, vdfap_cf_hessian, vdfap_moments
from .validate import (FitReport, compare_density, ks_radial, moment_test, radial_cdf,
                       weak_stability_test)
