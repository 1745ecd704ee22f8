"""Shared builders for the test suite."""

import warnings

import numpy as np
import pytest

from flatfronts.bishop import integrate_bishop_frame
from flatfronts.config import build_scene, parse_config
from flatfronts.density import Density
from flatfronts.fronts import FlatFrontSpec, MUFrontSpec, build_flat_front, build_mu_front
from flatfronts.sphere_curves import arc_length_reparametrize, preset_curve


def flat_front(tag, n, density, frame=None, **params):
    """curve preset -> arc length -> Bishop frame -> normal-form front."""
    unit = arc_length_reparametrize(preset_curve(tag, n, **params))
    bishop = integrate_bishop_frame(unit, initial_frame=frame)
    dens = density if isinstance(density, Density) else Density.from_expression(density)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return build_flat_front(FlatFrontSpec(unit, bishop, dens))


def mu_front(density, tag="small_circle", strict=True, **params):
    if tag == "small_circle":
        params.setdefault("polar_angle", np.pi / 4)
    xi = preset_curve(tag, 2, **params)
    dens = density if isinstance(density, Density) else Density.from_expression(density)
    return build_mu_front(MUFrontSpec(xi, dens, strict=strict))


def scene(data):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return build_scene(parse_config(data))


@pytest.fixture(scope="session")
def small_circle_s2():
    # mu_2 = cot(pi/4) = 1 in magnitude
    return flat_front("small_circle", 2, "1.0", polar_angle=np.pi / 4)


@pytest.fixture(scope="session")
def small_circle_s3():
    return flat_front("small_circle", 3, "sin(2*t)", polar_angle=np.pi / 4)


@pytest.fixture(scope="session")
def great_circle_s3():
    return flat_front("great_circle", 3, "sin(t)")


@pytest.fixture(scope="session")
def mu_small_circle():
    return mu_front("sin(2*t)")
