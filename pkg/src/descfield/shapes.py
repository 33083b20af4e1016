"""Analytic CSG shape categories: mugs, bowls, bottles.

Each shape is defined by a signed distance function in its local frame
(z up, bottom resting on z = 0), uniformly scaled and placed in the world
by a rigid pose. Occupancy labels, surface clouds, partial views and task
landmarks are all derived from the same analytic geometry, so supervision
is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .se3 import RigidTransform, apply, compose, invert

CATEGORIES = ("mug", "bowl", "bottle")

# handle arc geometry shared by sdf, surface sampler and landmarks
HANDLE_ARC_HALF_ANGLE = np.deg2rad(110.0)
HANDLE_CENTER_OFFSET = 0.3  # circle center sits this many handle radii off the wall
HANDLE_HEIGHT_FRAC = 0.55


@dataclass
class ShapeSpec:
    """Parameters of one procedural instance."""

    category: str
    body_radius: float
    body_height: float
    wall_thickness: float
    handle_radius: float | None = None
    handle_tube_radius: float | None = None
    neck_radius: float | None = None
    neck_height: float | None = None
    uniform_scale: float = 1.0
    pose: RigidTransform = field(default_factory=RigidTransform.identity)

    def validate(self) -> None:
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown category {self.category!r}")
        if not (0.0 < self.wall_thickness < self.body_radius):
            raise ValueError("wall thickness must be positive and below body radius")
        if self.body_radius <= 0 or self.body_height <= 0:
            raise ValueError("body dimensions must be positive")
        if not (0.75 <= self.uniform_scale <= 1.25):
            raise ValueError("uniform_scale outside [0.75, 1.25]")
        if self.category == "mug":
            if not (self.handle_radius and self.handle_tube_radius):
                raise ValueError("mug needs handle parameters")
        if self.category == "bottle":
            if not (self.neck_radius and self.neck_height):
                raise ValueError("bottle needs neck parameters")


@dataclass
class LabeledSamples:
    """Coordinates with binary occupancy labels."""

    coords: np.ndarray  # (N, 3)
    labels: np.ndarray  # (N,) uint8


@dataclass
class Landmarks:
    """Named task frames in the world frame."""

    frames: dict[str, RigidTransform]


def sample_shape(category: str, rng: np.random.Generator) -> ShapeSpec:
    """Draw a random instance. Fields shared across categories use shared
    ranges and a fixed draw order, so equal seeds give equal shared fields."""
    body_radius = rng.uniform(0.032, 0.06)
    body_height = rng.uniform(0.07, 0.12)
    wall_thickness = rng.uniform(0.004, 0.008)
    uniform_scale = rng.uniform(0.75, 1.25)
    spec = ShapeSpec(
        category=category,
        body_radius=body_radius,
        body_height=body_height,
        wall_thickness=wall_thickness,
        uniform_scale=uniform_scale,
    )
    if category == "mug":
        spec.handle_radius = rng.uniform(0.016, 0.026)
        spec.handle_tube_radius = rng.uniform(0.005, 0.008)
    elif category == "bottle":
        spec.neck_radius = body_radius * rng.uniform(0.35, 0.5)
        spec.neck_height = rng.uniform(0.025, 0.045)
    spec.validate()
    return spec


def _sd_capped_cylinder(p: np.ndarray, radius: float, z0: float, z1: float) -> np.ndarray:
    """Exact signed distance to a solid capped cylinder, vectorized over (N, 3)."""
    rho = np.hypot(p[:, 0], p[:, 1])
    half = 0.5 * (z1 - z0)
    dr = rho - radius
    dz = np.abs(p[:, 2] - 0.5 * (z0 + z1)) - half
    outside = np.hypot(np.maximum(dr, 0.0), np.maximum(dz, 0.0))
    inside = np.minimum(np.maximum(dr, dz), 0.0)
    return outside + inside


def _sd_handle(p: np.ndarray, spec: ShapeSpec) -> np.ndarray:
    """Distance to the torus-arc handle tube (arc in the xz plane)."""
    hr, tr = spec.handle_radius, spec.handle_tube_radius
    cx = spec.body_radius + HANDLE_CENTER_OFFSET * hr
    cz = HANDLE_HEIGHT_FRAC * spec.body_height
    u = np.stack([p[:, 0] - cx, p[:, 2] - cz], axis=1)
    phi = np.arctan2(u[:, 1], u[:, 0])
    phi = np.clip(phi, -HANDLE_ARC_HALF_ANGLE, HANDLE_ARC_HALF_ANGLE)
    arc = spec.handle_radius * np.stack([np.cos(phi), np.sin(phi)], axis=1)
    d_plane = np.linalg.norm(u - arc, axis=1)
    return np.hypot(d_plane, p[:, 1]) - tr


def _bowl_height(spec: ShapeSpec) -> float:
    return min(spec.body_height, 0.95 * spec.body_radius)


def _sdf_local(spec: ShapeSpec, p: np.ndarray) -> np.ndarray:
    r, h, w = spec.body_radius, spec.body_height, spec.wall_thickness
    if spec.category == "mug":
        outer = _sd_capped_cylinder(p, r, 0.0, h)
        cavity = _sd_capped_cylinder(p, r - w, w, h + r)
        body = np.maximum(outer, -cavity)
        return np.minimum(body, _sd_handle(p, spec))
    if spec.category == "bowl":
        hc = _bowl_height(spec)
        q = p - np.array([0.0, 0.0, r])
        dist = np.linalg.norm(q, axis=1)
        shell = np.maximum(dist - r, (r - w) - dist)
        return np.maximum(shell, q[:, 2] - (hc - r))
    if spec.category == "bottle":
        body = _sd_capped_cylinder(p, r, 0.0, h)
        neck = _sd_capped_cylinder(p, spec.neck_radius, h, h + spec.neck_height)
        return np.minimum(body, neck)
    raise ValueError(spec.category)


def sdf(spec: ShapeSpec, x: np.ndarray) -> np.ndarray:
    """World-frame signed distance; negative inside the solid.

    Exact for isolated primitives; min/max CSG gives a lower bound near
    interior seams, which never flips the sign.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    local = apply(invert(spec.pose), x) / spec.uniform_scale
    return _sdf_local(spec, local) * spec.uniform_scale


def occupancy_label(spec: ShapeSpec, x: np.ndarray) -> np.ndarray:
    return (sdf(spec, x) <= 0.0).astype(np.uint8)


def local_bounding_box(spec: ShapeSpec) -> tuple[np.ndarray, np.ndarray]:
    """Axis-aligned (lo, hi) of the shape in its unscaled local frame."""
    r, h = spec.body_radius, spec.body_height
    if spec.category == "mug":
        reach = r + (HANDLE_CENTER_OFFSET + 1.0) * spec.handle_radius + spec.handle_tube_radius
        return np.array([-r, -r, 0.0]), np.array([reach, r, h])
    if spec.category == "bowl":
        return np.array([-r, -r, 0.0]), np.array([r, r, _bowl_height(spec)])
    return np.array([-r, -r, 0.0]), np.array([r, r, h + spec.neck_height])


def shape_scale(spec: ShapeSpec) -> float:
    """Characteristic size: largest world-frame bounding box extent."""
    lo, hi = local_bounding_box(spec)
    return float(np.max(hi - lo) * spec.uniform_scale)


def world_bounding_box(spec: ShapeSpec, margin: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """World axis-aligned box containing the posed shape, side lengths
    multiplied by ``margin`` about the box center."""
    lo, hi = local_bounding_box(spec)
    corners = np.array([[lo[i] if b & (1 << i) == 0 else hi[i] for i in range(3)] for b in range(8)])
    world = apply(spec.pose, corners * spec.uniform_scale)
    wlo, whi = world.min(axis=0), world.max(axis=0)
    c, half = 0.5 * (wlo + whi), 0.5 * (whi - wlo)
    return c - margin * half, c + margin * half


def _surface_panels(spec: ShapeSpec):
    """(area, sampler) per analytic surface panel in the local frame.

    Each sampler returns (points, outward normals) for a batch size.
    """
    r, h, w = spec.body_radius, spec.body_height, spec.wall_thickness
    panels = []

    def cylinder_side(radius, z0, z1, outward=1.0):
        def sample(n, rng):
            phi = rng.uniform(0, 2 * np.pi, n)
            z = rng.uniform(z0, z1, n)
            pts = np.stack([radius * np.cos(phi), radius * np.sin(phi), z], axis=1)
            nrm = np.stack([np.cos(phi), np.sin(phi), np.zeros(n)], axis=1) * outward
            return pts, nrm

        return 2 * np.pi * radius * (z1 - z0), sample

    def disk(r_in, r_out, z, normal_z):
        def sample(n, rng):
            phi = rng.uniform(0, 2 * np.pi, n)
            rho = np.sqrt(rng.uniform(r_in**2, r_out**2, n))
            pts = np.stack([rho * np.cos(phi), rho * np.sin(phi), np.full(n, z)], axis=1)
            nrm = np.tile([0.0, 0.0, normal_z], (n, 1))
            return pts, nrm

        return np.pi * (r_out**2 - r_in**2), sample

    if spec.category == "mug":
        panels.append(cylinder_side(r, 0.0, h))
        panels.append(cylinder_side(r - w, w, h, outward=-1.0))
        panels.append(disk(0.0, r, 0.0, -1.0))
        panels.append(disk(0.0, r - w, w, 1.0))
        panels.append(disk(r - w, r, h, 1.0))

        hr, tr = spec.handle_radius, spec.handle_tube_radius
        cx = r + HANDLE_CENTER_OFFSET * hr
        cz = HANDLE_HEIGHT_FRAC * h

        def handle_tube(n, rng):
            phi = rng.uniform(-HANDLE_ARC_HALF_ANGLE, HANDLE_ARC_HALF_ANGLE, n)
            psi = rng.uniform(0, 2 * np.pi, n)
            ring = np.stack([np.cos(phi), np.zeros(n), np.sin(phi)], axis=1)
            center = np.array([cx, 0.0, cz]) + hr * ring
            nrm = np.cos(psi)[:, None] * ring
            nrm[:, 1] = np.sin(psi)
            nrm /= np.linalg.norm(nrm, axis=1, keepdims=True)
            return center + tr * nrm, nrm

        panels.append((2 * HANDLE_ARC_HALF_ANGLE * hr * 2 * np.pi * tr, handle_tube))

    elif spec.category == "bowl":
        hc = _bowl_height(spec)
        center = np.array([0.0, 0.0, r])
        z_cut = hc - r  # in sphere-centered coordinates

        def sphere_zone(radius, outward):
            def sample(n, rng):
                z = rng.uniform(-radius, min(z_cut, radius), n)
                phi = rng.uniform(0, 2 * np.pi, n)
                rho = np.sqrt(np.maximum(radius**2 - z**2, 0.0))
                q = np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
                return center + q, outward * q / radius
            return 2 * np.pi * radius * (min(z_cut, radius) + radius), sample

        panels.append(sphere_zone(r, 1.0))
        panels.append(sphere_zone(r - w, -1.0))
        rim_out = np.sqrt(max(r**2 - z_cut**2, 0.0))
        rim_in = np.sqrt(max((r - w) ** 2 - z_cut**2, 0.0))

        def rim(n, rng):
            phi = rng.uniform(0, 2 * np.pi, n)
            rho = np.sqrt(rng.uniform(rim_in**2, rim_out**2, n))
            pts = np.stack([rho * np.cos(phi), rho * np.sin(phi), np.full(n, hc)], axis=1)
            return pts, np.tile([0.0, 0.0, 1.0], (n, 1))

        panels.append((np.pi * (rim_out**2 - rim_in**2), rim))

    else:  # bottle
        nr, nh = spec.neck_radius, spec.neck_height
        panels.append(cylinder_side(r, 0.0, h))
        panels.append(disk(0.0, r, 0.0, -1.0))
        panels.append(disk(nr, r, h, 1.0))
        panels.append(cylinder_side(nr, h, h + nh))
        panels.append(disk(0.0, nr, h + nh, 1.0))

    return panels


def _surface_samples(spec: ShapeSpec, n: int, rng: np.random.Generator):
    """World-frame surface points and outward normals, area-weighted with
    rejection of points swallowed by another primitive."""
    panels = _surface_panels(spec)
    areas = np.array([a for a, _ in panels])
    probs = areas / areas.sum()
    pts_out, nrm_out = [], []
    collected = 0
    proposed = 0
    budget = 200 * n
    while collected < n:
        batch = max(n - collected, 64)
        if proposed >= budget:
            raise RuntimeError(f"surface sampling stalled for {spec.category} spec")
        counts = rng.multinomial(batch, probs)
        for (_, sampler), cnt in zip(panels, counts):
            if cnt == 0:
                continue
            p, nv = sampler(cnt, rng)
            keep = np.abs(_sdf_local(spec, p)) < 1e-9
            p, nv = p[keep], nv[keep]
            pts_out.append(p)
            nrm_out.append(nv)
            collected += len(p)
        proposed += batch
    pts = np.concatenate(pts_out)[:n] * spec.uniform_scale
    nrm = np.concatenate(nrm_out)[:n]
    return apply(spec.pose, pts), nrm @ spec.pose.rotation.T


def sample_surface_cloud(spec: ShapeSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    if n < 1:
        raise ValueError("need n >= 1")
    spec.validate()
    return _surface_samples(spec, n, rng)[0]


def partial_cloud(
    spec: ShapeSpec, view_direction: np.ndarray, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Single-view surface cloud: keep points whose outward normal faces the
    viewer (normal . view < 0). Backface culling only; no self-occlusion."""
    view = np.asarray(view_direction, dtype=np.float64)
    view = view / np.linalg.norm(view)
    collected: list[np.ndarray] = []
    total = 0
    proposed = 0
    while total < n:
        batch = max(2 * (n - total), 128)
        if proposed >= 100 * n:
            raise RuntimeError("not enough visible surface for requested view")
        pts, nrm = _surface_samples(spec, batch, rng)
        keep = (nrm @ view) < 0.0
        collected.append(pts[keep])
        total += int(keep.sum())
        proposed += batch
    return np.concatenate(collected)[:n]


def occupancy_samples(spec: ShapeSpec, n: int, rng: np.random.Generator) -> LabeledSamples:
    """Half near-surface (Gaussian offset, sigma = 0.02 * shape scale), half
    uniform in the 1.5x world bounding box."""
    if n < 2:
        raise ValueError("need n >= 2")
    n_near = n // 2
    sigma = 0.02 * shape_scale(spec)
    surf = _surface_samples(spec, n_near, rng)[0]
    near = surf + rng.normal(0.0, sigma, size=surf.shape)
    lo, hi = world_bounding_box(spec, margin=1.5)
    uniform = rng.uniform(lo, hi, size=(n - n_near, 3))
    coords = np.concatenate([near, uniform])
    return LabeledSamples(coords=coords, labels=occupancy_label(spec, coords))


def symmetry_axis(spec: ShapeSpec) -> tuple[np.ndarray, np.ndarray] | None:
    """(point, direction) of the rotational symmetry line in world frame,
    or None for asymmetric categories (the mug handle breaks symmetry)."""
    if spec.category == "mug":
        return None
    point = apply(spec.pose, np.zeros(3))
    direction = spec.pose.rotation @ np.array([0.0, 0.0, 1.0])
    return point, direction


def landmarks(spec: ShapeSpec) -> Landmarks:
    """Task frames, computed analytically and posed into the world."""
    spec.validate()
    r, h, w = spec.body_radius, spec.body_height, spec.wall_thickness
    frames: dict[str, RigidTransform] = {}

    def frame(origin, x_axis, z_axis):
        x = np.asarray(x_axis, dtype=np.float64)
        z = np.asarray(z_axis, dtype=np.float64)
        y = np.cross(z, x)
        rot = np.stack([x, y, z], axis=1)
        return RigidTransform(rot, np.asarray(origin, dtype=np.float64) * spec.uniform_scale)

    frames["bottom_center"] = frame([0.0, 0.0, 0.0], [1, 0, 0], [0, 0, 1])
    if spec.category == "mug":
        # grasp the rim opposite the handle, approaching straight down
        frames["rim_grasp"] = frame([-(r - 0.5 * w), 0.0, h], [-1, 0, 0], [0, 0, -1])
        hr = spec.handle_radius
        frames["handle_center"] = frame(
            [r + HANDLE_CENTER_OFFSET * hr, 0.0, HANDLE_HEIGHT_FRAC * h], [1, 0, 0], [0, 1, 0]
        )
    elif spec.category == "bowl":
        hc = _bowl_height(spec)
        z_cut = hc - r
        rim_rho = np.sqrt(max(r**2 - z_cut**2, 0.0))
        frames["rim_grasp"] = frame([-(rim_rho - 0.5 * w), 0.0, hc], [-1, 0, 0], [0, 0, -1])
    else:  # bottle: side grasp on the neck
        frames["rim_grasp"] = frame(
            [-spec.neck_radius, 0.0, h + 0.5 * spec.neck_height], [0, 0, 1], [1, 0, 0]
        )
    return Landmarks({name: compose(spec.pose, f) for name, f in frames.items()})
