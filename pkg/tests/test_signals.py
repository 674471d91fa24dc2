import json

import numpy as np
import pytest

from dirstft import UnknownKind, make_lattice
from dirstft.signals import SignalRecipe, ground_truth, recipe_from_json, render


def test_gaussian_peak_normalized():
    lat = make_lattice([-2.0, -2.0], [0.5, 0.5], [8, 8])
    f = render(SignalRecipe("gaussian"), lat)
    assert f.values[4, 4] == 1.0  # lattice point (0, 0)


def test_gaussian_center_and_sigma():
    lat = make_lattice([-2.0], [0.25], [16])
    f = render(SignalRecipe("gaussian", center=(0.5,), sigma=2.0), lat)
    t = lat.axis_points(0)
    np.testing.assert_allclose(f.values, np.exp(-((t - 0.5) ** 2) / 8.0), atol=1e-15)


def test_jump_sign_convention():
    lat = make_lattice([-2.0, -2.0], [0.5, 0.5], [8, 8])
    f = render(SignalRecipe("jump_ridge", u=(1.0, 0.0)), lat)
    g = render(SignalRecipe("gaussian"), lat)
    assert np.all(f.values[4, :] == 0)              # sign(0) = 0 on the hyperplane
    np.testing.assert_array_equal(f.values[5:, :], g.values[5:, :])
    np.testing.assert_array_equal(f.values[:4, :], -g.values[:4, :])


def test_plane_wave_modulus_is_envelope():
    lat = make_lattice([-2.0, -2.0], [0.25, 0.25], [16, 16])
    f = render(SignalRecipe("plane_wave", xi0=(1.0, -0.5), sigma=1.5), lat)
    env = render(SignalRecipe("gaussian", sigma=1.5), lat)
    np.testing.assert_allclose(np.abs(f.values), env.values.real, atol=1e-14)


def test_ridge_spike_default_width_follows_step():
    lat = make_lattice([-2.0, -2.0], [1.0 / 16, 1.0 / 16], [64, 64])
    f = render(SignalRecipe("ridge_spike", u=(1.0, 0.0)), lat)
    w = 2.0 / 16
    t1 = lat.axis_points(0)
    expected = np.exp(-(t1**2) / (2 * w * w)) / (w * np.sqrt(2 * np.pi))
    col = 32  # t2 = 0
    env = np.exp(-(t1**2) / 2)
    np.testing.assert_allclose(f.values[:, col].real, expected * env, rtol=1e-12)


def test_sum_linearity():
    lat = make_lattice([-2.0, -2.0], [0.5, 0.5], [8, 8])
    a = SignalRecipe("gaussian")
    b = SignalRecipe("jump_ridge", u=(0.0, 1.0))
    s = SignalRecipe("sum", terms=(a, b), weights=(2.0, -0.5))
    fa, fb, fs = render(a, lat), render(b, lat), render(s, lat)
    np.testing.assert_array_equal(fs.values, 2.0 * fa.values - 0.5 * fb.values)


def test_json_roundtrip_bit_exact():
    recipes = [
        SignalRecipe("gaussian", center=(0.25, -0.5), sigma=1.3),
        SignalRecipe("jump_ridge", u=(3.0, 4.0), c=0.1, sigma=0.8),
        SignalRecipe("plane_wave", xi0=(2.0, 0.0), sigma=1.0),
        SignalRecipe("ridge_spike", u=(1.0, 0.0), width=0.05),
    ]
    recipes.append(SignalRecipe("sum", terms=tuple(recipes[:2]), weights=(1.0, -1.0)))
    lat = make_lattice([-4.0, -4.0], [0.25, 0.25], [32, 32])
    for recipe in recipes:
        clone = recipe_from_json(json.loads(json.dumps(recipe.to_json())))
        assert np.array_equal(render(recipe, lat).values, render(clone, lat).values)


def test_recipe_validation():
    with pytest.raises(UnknownKind):
        SignalRecipe("sinc")
    with pytest.raises(ValueError):
        SignalRecipe("jump_ridge")
    with pytest.raises(ValueError):
        SignalRecipe("sum", terms=(SignalRecipe("gaussian"),), weights=())


def test_ground_truth_gaussian_empty():
    dirs = np.array([[1.0, 0.0], [0.0, 1.0]])
    gt = ground_truth(SignalRecipe("gaussian"), [[0.0]], dirs, 0.5, 1.0, 0.5)
    assert not gt.any()


def test_ground_truth_jump_rule():
    # |x| < r + a = 1.5 rule with directions within theta of +-e1
    recipe = SignalRecipe("jump_ridge", u=(1.0, 0.0))
    centers = [[-2.0], [-1.0], [0.0], [1.0], [2.0]]
    dirs = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
    gt = ground_truth(recipe, centers, dirs, r=0.5, window_radius=1.0, half_angle=0.5)
    expected = np.zeros((5, 3), bool)
    expected[1:4, 0] = True
    expected[1:4, 2] = True
    np.testing.assert_array_equal(gt, expected)


def test_ground_truth_sum_is_union():
    r1 = SignalRecipe("jump_ridge", u=(1.0, 0.0))
    r2 = SignalRecipe("jump_ridge", u=(-1.0, 0.0), c=-2.0)  # hyperplane t1 = 2
    s = SignalRecipe("sum", terms=(r1, r2), weights=(1.0, 1.0))
    centers = [[0.0], [2.0], [5.0]]
    dirs = np.array([[1.0, 0.0]])
    gt = ground_truth(s, centers, dirs, r=0.5, window_radius=0.5, half_angle=0.3)
    np.testing.assert_array_equal(gt[:, 0], [True, True, False])


def test_ground_truth_rejects_offaxis_normals():
    recipe = SignalRecipe("jump_ridge", u=(1.0, 1.0))
    with pytest.raises(UnknownKind):
        ground_truth(recipe, [[0.0]], [[1.0, 0.0]], 0.5, 1.0, 0.5)
