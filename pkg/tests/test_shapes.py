import numpy as np
import pytest

from descfield import se3, shapes


def rng(seed=0):
    return np.random.default_rng(seed)


@pytest.fixture(params=shapes.CATEGORIES)
def spec(request):
    return shapes.sample_shape(request.param, rng(42))


def test_sample_shape_deterministic():
    a = shapes.sample_shape("mug", rng(5))
    b = shapes.sample_shape("mug", rng(5))
    for f in ("body_radius", "body_height", "wall_thickness", "handle_radius",
              "handle_tube_radius", "uniform_scale"):
        assert getattr(a, f) == getattr(b, f)


def test_sample_shape_invariants():
    g = rng(1)
    for _ in range(1000):
        s = shapes.sample_shape(g.choice(shapes.CATEGORIES), g)
        s.validate()


def test_shared_fields_match_across_categories():
    mug = shapes.sample_shape("mug", rng(77))
    bowl = shapes.sample_shape("bowl", rng(77))
    bottle = shapes.sample_shape("bottle", rng(77))
    for f in ("body_radius", "body_height", "wall_thickness", "uniform_scale"):
        assert getattr(mug, f) == getattr(bowl, f) == getattr(bottle, f)


def test_sdf_inside_outside(spec):
    if spec.category == "bottle":
        deep = np.array([[0.0, 0.0, spec.body_height / 2]])
        assert shapes.sdf(spec, deep)[0] < 0
    far = np.array([[10 * spec.body_radius, 0.0, 0.0]])
    d = shapes.sdf(spec, far)[0]
    assert d > 0
    # far-field distance is close to the true distance to the surface
    cloud = shapes.sample_surface_cloud(spec, 4000, rng(0))
    nearest = np.min(np.linalg.norm(cloud - far, axis=1))
    assert d == pytest.approx(nearest, rel=0.05)


def test_surface_cloud_on_surface(spec):
    cloud = shapes.sample_surface_cloud(spec, 500, rng(3))
    assert np.max(np.abs(shapes.sdf(spec, cloud))) < 1e-6


def test_surface_cloud_reproducible(spec):
    a = shapes.sample_surface_cloud(spec, 200, rng(4))
    b = shapes.sample_surface_cloud(spec, 200, rng(4))
    assert np.array_equal(a, b)


def test_occupancy_volume_monte_carlo():
    # rejection-sampled volume of a bottle (analytic: two stacked cylinders)
    spec = shapes.sample_shape("bottle", rng(8))
    lo, hi = shapes.world_bounding_box(spec, margin=1.2)
    g = rng(9)
    pts = g.uniform(lo, hi, size=(200_000, 3))
    frac = shapes.occupancy_label(spec, pts).mean()
    box_vol = np.prod(hi - lo)
    s = spec.uniform_scale
    true_vol = (
        np.pi * spec.body_radius**2 * spec.body_height
        + np.pi * spec.neck_radius**2 * spec.neck_height
    ) * s**3
    assert frac * box_vol == pytest.approx(true_vol, rel=0.02)


def test_partial_cloud_backface_culling():
    spec = shapes.sample_shape("mug", rng(10))
    cloud = shapes.partial_cloud(spec, np.array([0.0, 0.0, -1.0]), 400, rng(11))
    # nothing from the exterior bottom (z = 0 face) is visible from above
    assert np.min(cloud[:, 2]) > 1e-6
    assert np.max(np.abs(shapes.sdf(spec, cloud))) < 1e-6


def test_partial_views_cover_surface():
    spec = shapes.sample_shape("bowl", rng(12))
    views = [
        np.array([-1.0, -1.0, -1.0]),
        np.array([1.0, 1.0, -1.0]),
        np.array([1.0, -1.0, 1.0]),
        np.array([-1.0, 1.0, 1.0]),
    ]
    union = np.concatenate(
        [shapes.partial_cloud(spec, v, 1500, rng(13 + i)) for i, v in enumerate(views)]
    )
    reference = shapes.sample_surface_cloud(spec, 800, rng(20))
    d = np.linalg.norm(reference[:, None, :] - union[None, :, :], axis=2).min(axis=1)
    covered = (d < 0.01 * shapes.shape_scale(spec) * 5).mean()
    assert covered >= 0.95


def test_occupancy_samples_consistent_and_balanced(spec):
    batch = shapes.occupancy_samples(spec, 2000, rng(14))
    assert np.array_equal(batch.labels, shapes.occupancy_label(spec, batch.coords))
    assert 0.05 <= batch.labels.mean() <= 0.95
    again = shapes.occupancy_samples(spec, 2000, rng(14))
    assert np.array_equal(batch.coords, again.coords)


def test_occupancy_pose_covariant(spec):
    g = rng(15)
    t = se3.random_transform(g, translation_scale=0.3)
    posed = shapes.ShapeSpec(**{**spec.__dict__, "pose": t})
    pts = g.uniform(-0.15, 0.15, size=(500, 3))
    assert np.array_equal(
        shapes.occupancy_label(spec, pts), shapes.occupancy_label(posed, se3.apply(t, pts))
    )


def test_surface_cloud_pose_covariant_with_shared_seed(spec):
    t = se3.random_transform(rng(16), translation_scale=0.3)
    posed = shapes.ShapeSpec(**{**spec.__dict__, "pose": t})
    at_identity = shapes.sample_surface_cloud(spec, 300, rng(17))
    at_pose = shapes.sample_surface_cloud(posed, 300, rng(17))
    assert np.max(np.abs(at_pose - se3.apply(t, at_identity))) < 1e-9


def test_landmarks_mug():
    spec = shapes.sample_shape("mug", rng(18))
    lm = shapes.landmarks(spec)
    assert lm.frames["rim_grasp"].translation[2] == pytest.approx(
        spec.body_height * spec.uniform_scale
    )
    # handle_center is off the surface, inside the handle opening
    assert shapes.sdf(spec, lm.frames["handle_center"].translation)[0] > 0


def test_landmarks_covariant(spec):
    t = se3.random_transform(rng(19), translation_scale=0.2)
    posed = shapes.ShapeSpec(**{**spec.__dict__, "pose": t})
    lm0 = shapes.landmarks(spec)
    lm1 = shapes.landmarks(posed)
    for name in lm0.frames:
        expect = se3.compose(t, lm0.frames[name])
        got = lm1.frames[name]
        assert np.allclose(got.matrix(), expect.matrix(), atol=1e-9)


def test_landmark_rotations_valid(spec):
    for f in shapes.landmarks(spec).frames.values():
        assert se3.is_rotation(f.rotation)
