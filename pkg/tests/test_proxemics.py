import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from proxsim.grid import Pose2D
from proxsim.proxemics import (
    ActivityProfile,
    CooperationZoneSpec,
    PersonState,
    asymmetric_gaussian,
    builtin_profiles,
    cooperation_mask,
    effective_sigma_h,
    gaussian_field,
    in_cooperation_zone,
    support_radius,
)

from oracles import gaussian_scalar, person_frame_gaussian

E_HALF = math.exp(-0.5)


def person(sh=2.0, ss=1.5, sr=1.0, theta=0.0, x=0.0, y=0.0, velocity=(0.0, 0.0), zones=(), **kw):
    prof = ActivityProfile("t", sh, ss, sr, cooperation_zones=zones, **kw)
    return PersonState("p", Pose2D(x, y, theta), prof, velocity)


def test_value_at_person_is_one():
    p = person(2.0, 4 / 3, 1.0, math.pi / 6, 1.0, -2.0)
    assert asymmetric_gaussian(p, (1.0, -2.0)) == 1.0


def test_axis_examples():
    assert asymmetric_gaussian(person(), (2.0, 0.0)) == pytest.approx(E_HALF, abs=1e-12)
    assert asymmetric_gaussian(person(), (-1.0, 0.0)) == pytest.approx(E_HALF, abs=1e-12)
    assert asymmetric_gaussian(person(), (0.0, 1.5)) == pytest.approx(E_HALF, abs=1e-12)


def test_decays_along_heading_ray():
    th = math.pi / 6
    p = person(2.0, 4 / 3, 1.0, th)
    vals = [asymmetric_gaussian(p, (r * math.cos(th), r * math.sin(th))) for r in np.linspace(0, 6, 50)]
    assert vals[0] == 1.0
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_effective_sigma_h_examples():
    prof = builtin_profiles()["standing"]
    assert effective_sigma_h(prof, 0.0) == 0.8
    assert effective_sigma_h(prof, 2.0) == pytest.approx(3.0)
    assert effective_sigma_h(builtin_profiles()["running"], 0.5) == 2.0


def test_moving_person_stretches_front_only():
    still = person(0.8, 1.0, 1.0)
    moving = person(0.8, 1.0, 1.0, velocity=(2.0, 0.0))
    assert asymmetric_gaussian(moving, (3.0, 0.0)) == pytest.approx(E_HALF)
    assert asymmetric_gaussian(moving, (3.0, 0.0)) > asymmetric_gaussian(still, (3.0, 0.0))
    assert asymmetric_gaussian(moving, (-1.0, 0.0)) == asymmetric_gaussian(still, (-1.0, 0.0))


def test_builtin_profile_values():
    b = builtin_profiles()
    assert {"cooking", "running", "standing", "bathroom", "hri_approach", "escort"} <= set(b)
    assert b["running"].sigma_h == 2.0
    assert b["cooking"].sigma_s == 1.5
    assert b["cooking"].sigma_r == 0.5
    assert len(b["escort"].cooperation_zones) == 2
    assert len(b["hri_approach"].cooperation_zones) == 1
    assert b["hri_approach"].sigma_h == b["standing"].sigma_h
    bath = b["bathroom"]
    assert bath.sigma_h == bath.sigma_s == bath.sigma_r == 2.5 and not bath.orientation_known


def test_bathroom_ignores_heading():
    prof = builtin_profiles()["bathroom"]
    a = PersonState("p", Pose2D(0, 0, 0.0), prof)
    b = PersonState("p", Pose2D(0, 0, 2.0), prof, velocity=(0.0, 0.0))
    for q in [(1.0, 0.3), (-2.0, 1.0), (0.1, -3.0)]:
        assert asymmetric_gaussian(a, q) == asymmetric_gaussian(b, q)


def test_profile_validation():
    with pytest.raises(ValueError, match="sigma_s"):
        ActivityProfile("x", 1.0, 0.0, 1.0)
    zone = CooperationZoneSpec(0.0)
    with pytest.raises(ValueError, match="at most 2"):
        ActivityProfile("x", 1, 1, 1, cooperation_zones=(zone, zone, zone))
    with pytest.raises(ValueError, match="inner_radius"):
        ActivityProfile("x", 1, 1, 1, cooperation_zones=(CooperationZoneSpec(0.0, inner_radius=0.3),))
    with pytest.raises(ValueError, match="half_width"):
        ActivityProfile("x", 1, 1, 1, cooperation_zones=(CooperationZoneSpec(0.0, half_width=2.0),))
    with pytest.raises(ValueError, match="intimate_radius"):
        ActivityProfile("x", 1, 1, 1, intimate_radius=1.5, personal_radius=1.2)


def test_with_radii_refits_wedges():
    prof = builtin_profiles()["escort"].with_radii(0.5, 1.5)
    assert all(z.inner_radius == 0.5 and z.outer_radius == 1.5 for z in prof.cooperation_zones)


def test_cooperation_zone_examples():
    p = PersonState("p", Pose2D(0, 0, 0), builtin_profiles()["hri_approach"])
    assert not in_cooperation_zone(p, (0.2, 0.0))
    assert in_cooperation_zone(p, (0.8, 0.0))
    assert not in_cooperation_zone(p, (-0.8, 0.0))
    assert not in_cooperation_zone(p, (0.4, 0.0))  # inner edge is open
    assert in_cooperation_zone(p, (1.2, 0.0))  # outer edge is closed
    assert not in_cooperation_zone(p, (1.3, 0.0))


def test_escort_wedges_are_on_the_sides():
    p = PersonState("p", Pose2D(0, 0, math.pi / 2), builtin_profiles()["escort"])
    assert in_cooperation_zone(p, (0.8, 0.0))  # right of a person facing +y
    assert in_cooperation_zone(p, (-0.8, 0.0))
    assert not in_cooperation_zone(p, (0.0, 0.8))


def test_support_radius_bounds_cutoff():
    p = person(0.8, 1.0, 1.0)
    r = support_radius(p, 0.05)
    assert r == pytest.approx(1.0 * math.sqrt(2 * math.log(20)))
    for a in np.linspace(-math.pi, math.pi, 37):
        assert asymmetric_gaussian(p, (r * 1.0001 * math.cos(a), r * 1.0001 * math.sin(a))) < 0.05


# -- property tests ---------------------------------------------------------

sigmas = st.floats(0.2, 3.0)
angles = st.floats(-math.pi, math.pi)
offsets = st.floats(-5.0, 5.0)


@settings(max_examples=300)
@given(sigmas, sigmas, sigmas, angles, offsets, offsets)
def test_matches_scalar_closed_form(sh, ss, sr, th, dx, dy):
    p = person(sh, ss, sr, th, 0.3, -0.7)
    got = asymmetric_gaussian(p, (0.3 + dx, -0.7 + dy))
    assert got == pytest.approx(gaussian_scalar(0.3, -0.7, th, sh, ss, sr, 0.3 + dx, -0.7 + dy), abs=1e-12)
    # the rotated-frame form of the same field agrees
    assert got == pytest.approx(person_frame_gaussian(0.3, -0.7, th, sh, ss, sr, 0.3 + dx, -0.7 + dy), abs=1e-9)
    assert 0.0 < got <= 1.0 or math.hypot(dx, dy) > 10


@settings(max_examples=200)
@given(sigmas, sigmas, sigmas, angles, angles, st.floats(0.05, 4.0), angles)
def test_rotation_equivariance(sh, ss, sr, th, phi, r, rot):
    q = (r * math.cos(phi), r * math.sin(phi))
    a = asymmetric_gaussian(person(sh, ss, sr, th), q)
    q_rot = (r * math.cos(phi + rot), r * math.sin(phi + rot))
    b = asymmetric_gaussian(person(sh, ss, sr, th + rot), q_rot)
    assert a == pytest.approx(b, abs=1e-9)


@settings(max_examples=200)
@given(sigmas, angles, offsets, offsets)
def test_isotropic_reduction(s, th, dx, dy):
    got = asymmetric_gaussian(person(s, s, s, th), (dx, dy))
    assert got == pytest.approx(math.exp(-(dx * dx + dy * dy) / (2 * s * s)), abs=1e-9)


@settings(max_examples=200)
@given(sigmas, sigmas, sigmas, angles, st.floats(0.01, 5.0), st.sampled_from([-1, 1]))
def test_side_axis_continuity(sh, ss, sr, th, r, side):
    # on the side axis both branches reduce to the lateral term
    q = (r * math.cos(th + side * math.pi / 2), r * math.sin(th + side * math.pi / 2))
    front = gaussian_scalar(0, 0, th, sh, ss, sr, *q)
    rear = gaussian_scalar(0, 0, th, sr, ss, sr, *q)
    assert front == pytest.approx(rear, abs=1e-12)
    assert asymmetric_gaussian(person(sh, ss, sr, th), q) == pytest.approx(math.exp(-r * r / (2 * ss * ss)), abs=1e-12)


@settings(max_examples=150)
@given(sigmas, sigmas, sigmas, angles, angles)
def test_strictly_decreasing_along_rays(sh, ss, sr, th, phi):
    p = person(sh, ss, sr, th)
    rs = np.linspace(0.01, 3.0, 40)
    vals = gaussian_field(p, rs * math.cos(phi), rs * math.sin(phi))
    assert np.all(np.diff(vals) < 0) or vals[-1] < 1e-300


@settings(max_examples=100)
@given(angles, st.floats(0.1, math.pi / 2), angles, st.floats(0.0, 1.3))
def test_wedges_avoid_intimate_disc(bearing, hw, th, r):
    prof = ActivityProfile("w", 1, 1, 1, cooperation_zones=(CooperationZoneSpec(bearing, hw),))
    p = PersonState("p", Pose2D(0, 0, th), prof)
    q = (r * math.cos(th + bearing), r * math.sin(th + bearing))
    inside = in_cooperation_zone(p, q)
    assert inside == (0.4 < r <= 1.2) or math.isclose(r, 0.4) or math.isclose(r, 1.2)
    if r <= 0.4:
        assert not inside
    assert cooperation_mask(p, np.array([q[0]]), np.array([q[1]]))[0] == inside
