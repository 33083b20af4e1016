"""Rigid-transform algebra on SO(3)/SE(3).

All geometry is double precision. Rotations are 3x3 matrices, axis-angle
vectors are length-3 with angle = norm. Point clouds are (N, 3) float64
arrays throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ROT_TOL = 1e-9


def is_rotation(r: np.ndarray, tol: float = ROT_TOL) -> bool:
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (3, 3):
        return False
    return (
        np.allclose(r.T @ r, np.eye(3), atol=tol * 10)
        and abs(np.linalg.det(r) - 1.0) < tol * 10
    )


def hat(w: np.ndarray) -> np.ndarray:
    """Skew-symmetric matrix of a 3-vector."""
    x, y, z = w
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def exp_map(w: np.ndarray) -> np.ndarray:
    """Rodrigues formula: axis-angle vector -> rotation matrix."""
    w = np.asarray(w, dtype=np.float64)
    theta = np.linalg.norm(w)
    k = hat(w)
    if theta < 1e-12:
        # second-order series, exact enough at this scale
        return np.eye(3) + k + 0.5 * (k @ k)
    a = np.sin(theta) / theta
    b = (1.0 - np.cos(theta)) / (theta * theta)
    return np.eye(3) + a * k + b * (k @ k)


def log_map(r: np.ndarray) -> tuple[np.ndarray, bool]:
    """Rotation matrix -> axis-angle vector with ||w|| <= pi.

    Returns (w, near_pi). Near angle pi the axis sign is ambiguous; we pick
    the representative from the dominant column of R + I and flag it so
    callers relying on continuity can re-canonicalize.
    """
    r = np.asarray(r, dtype=np.float64)
    cos_t = np.clip((np.trace(r) - 1.0) / 2.0, -1.0, 1.0)
    theta = np.arccos(cos_t)
    if theta < 1e-10:
        # first order: vee of the skew part
        return np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]]) / 2.0, False
    if np.pi - theta > 1e-6:
        axis = np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]])
        axis = axis / (2.0 * np.sin(theta))
        return theta * axis, False
    # theta ~ pi: axis from the dominant column of R + I (columns are
    # proportional to the axis there)
    m = r + np.eye(3)
    col = np.argmax(np.linalg.norm(m, axis=0))
    axis = m[:, col] / np.linalg.norm(m[:, col])
    # fix the sign using the skew part where it is nonzero
    skew = np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]])
    if np.dot(skew, axis) < 0:
        axis = -axis
    return theta * axis, True


def canonicalize_axis_angle(w: np.ndarray) -> np.ndarray:
    """Wrap an axis-angle vector so that ||w|| <= pi."""
    w = np.asarray(w, dtype=np.float64)
    theta = np.linalg.norm(w)
    if theta <= np.pi or theta < 1e-12:
        return w
    wrapped = np.remainder(theta + np.pi, 2.0 * np.pi) - np.pi
    return w * (wrapped / theta)


@dataclass(eq=False)
class RigidTransform:
    """SE(3) element acting as x -> R x + t."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.rotation = np.asarray(self.rotation, dtype=np.float64)
        self.translation = np.asarray(self.translation, dtype=np.float64).reshape(3)

    @staticmethod
    def identity() -> "RigidTransform":
        return RigidTransform()

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    @staticmethod
    def from_matrix(m: np.ndarray) -> "RigidTransform":
        m = np.asarray(m, dtype=np.float64)
        return RigidTransform(m[:3, :3], m[:3, 3])


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """(a o b)(x) = a(b(x))."""
    return RigidTransform(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation)


def invert(t: RigidTransform) -> RigidTransform:
    rt = t.rotation.T
    return RigidTransform(rt, -rt @ t.translation)


def apply(t: RigidTransform, points: np.ndarray) -> np.ndarray:
    """Apply a rigid transform to one point (3,) or a cloud (N, 3)."""
    points = np.asarray(points, dtype=np.float64)
    return points @ t.rotation.T + t.translation


def mean_center(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Subtract the centroid; returns (centered cloud, centroid)."""
    points = np.asarray(points, dtype=np.float64)
    mu = points.mean(axis=0)
    return points - mu, mu


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Haar-uniform rotation via a normalized 4-Gaussian quaternion."""
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def random_transform(rng: np.random.Generator, translation_scale: float = 1.0) -> RigidTransform:
    return RigidTransform(
        random_rotation(rng),
        rng.uniform(-translation_scale, translation_scale, size=3),
    )


def geodesic_angle(a: np.ndarray, b: np.ndarray) -> float:
    """Rotation angle between two rotation matrices, in [0, pi]."""
    cos_t = np.clip((np.trace(a.T @ b) - 1.0) / 2.0, -1.0, 1.0)
    return float(np.arccos(cos_t))


def rotation_about_axis(axis: np.ndarray, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    return exp_map(axis * angle)


def frame_error(a: RigidTransform, b: RigidTransform) -> tuple[float, float]:
    """(rotation angle, translation distance) between two frames."""
    dist = float(np.linalg.norm(a.translation - b.translation))
    return geodesic_angle(a.rotation, b.rotation), dist


def frame_error_quotient(
    a: RigidTransform,
    b: RigidTransform,
    axis_point: np.ndarray,
    axis_dir: np.ndarray,
    trans_per_radian: float = 0.05,
    steps: int = 720,
) -> tuple[float, float]:
    """Frame error with rotations about a symmetry line quotiented out.

    ``b`` is swept through rigid rotations about the line (axis_point,
    axis_dir); the reported (angle, distance) pair is the one minimizing
    distance + trans_per_radian * angle, i.e. both errors are measured
    against the nearest point of the symmetry orbit.
    """
    axis_dir = np.asarray(axis_dir, dtype=np.float64)
    axis_dir = axis_dir / np.linalg.norm(axis_dir)
    axis_point = np.asarray(axis_point, dtype=np.float64)
    best = None
    for ang in np.linspace(0.0, 2.0 * np.pi, steps, endpoint=False):
        r = rotation_about_axis(axis_dir, ang)
        spin = RigidTransform(r, axis_point - r @ axis_point)
        rot_err, dist = frame_error(a, compose(spin, b))
        cost = dist + trans_per_radian * rot_err
        if best is None or cost < best[0]:
            best = (cost, rot_err, dist)
    return best[1], best[2]
