"""Flat fronts in Euclidean space: construction from ruled representation
data, differential-geometric checks, and singular-set analysis."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .sphere_curves import (SphericalCurve, FourierCurve, arc_length_reparametrize,  # noqa: F401
                            geodesic_curvature, great_circle, inflection_points, preset_curve,
                            small_circle, spherical_helix)
from .bishop import BishopFrame, curvature_from_bishop, integrate_bishop_frame  # noqa: F401
from .density import Density  # noqa: F401
from .fronts import (FlatFrontSpec, GeneralRuledSpec, MUFrontSpec, build_flat_front,  # noqa: F401
                     build_general_front, build_mu_front, closure_check, first_fundamental_form,
                     lift_metric, normal_form_reduction, parallel_front)
