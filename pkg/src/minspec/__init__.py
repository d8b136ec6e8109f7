"""Volume-growth bounds for the bottom of the essential spectrum of minimal submanifolds.

Modules: ``model_manifold`` (warping functions), ``immersions`` (catalog
charts and meshes), ``growth`` (extrinsic ball volumes), ``test_functions``
(radial test functions), ``spectrum`` (Dirichlet eigenvalue oracle),
``bounds`` and ``verify`` (bounds and their cross-checks), ``cli``.
"""
from .bounds import (brooks_intrinsic_bound, corollary1_check, corollary2_bound,
                     gaussian_moment, ins_bound, kappa_profile, theorem1_bound)
from .estimators import GrowthExponentEstimator, RayleighBoundEstimator
from .growth import GrowthProfile, growth_exponents, volume_profile
from .immersions import catalog, sphere_mesh, triangulate
from .model_manifold import ball_volume, completeness_check, solve_warping
from .spectrum import assemble, dirichlet_lambda1, solve_lambda1, spectrum_bottom_estimate
from .test_functions import flux_check, rayleigh_bound, rayleigh_quotient
from .verify import verify_surface

__version__ = "0.1.0"
