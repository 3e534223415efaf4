"""Concrete defining functions and boundary discretization.

Provides the smooth even convex profile phi used by the worm family, the
one-parameter deformed worm defining function, reference domains (ball,
ellipsoid, user expressions), and boundary point sampling by ray bisection
plus Newton polish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import exp1

from . import jets
from .jets import Jet, WirtingerData, coords_of_point, point_of_coords

__all__ = [
    "DomainError",
    "PhiSpec",
    "make_phi",
    "DomainSpec",
    "BoundaryPoint",
    "worm_rho",
    "ball",
    "ellipsoid",
    "boundary_sample",
    "annulus_points",
    "mollifier",
    "mollifier_d1",
    "mollifier_d2",
    "mollifier_d3",
]

BOUNDARY_TOL = 1e-12
SEARCH_RADIUS = 10.0


class DomainError(ValueError):
    """Invalid domain construction or evaluation (e.g. the w = 0 axis)."""


# -- smoothing profile --------------------------------------------------------

def mollifier(s):
    """exp(-1/s) for s > 0, identically 0 for s <= 0."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out if out.ndim else float(out)


def _moll_scaled(s, k):
    # exp(-1/s) / s^k computed as exp(-1/s - k log s); avoids 0 * inf at s -> 0+
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    sp = s[pos]
    out[pos] = np.exp(-1.0 / sp - k * np.log(sp))
    return out if out.ndim else float(out)


def mollifier_d1(s):
    return _moll_scaled(s, 2)


def mollifier_d2(s):
    return _moll_scaled(s, 4) - 2.0 * _moll_scaled(s, 3)


def mollifier_d3(s):
    return _moll_scaled(s, 6) - 6.0 * _moll_scaled(s, 5) + 6.0 * _moll_scaled(s, 4)


def _ramp(u):
    """Antiderivative of the mollifier: integral of exp(-1/s) over [0, u].

    Closed form u*exp(-1/u) - E1(1/u) for u > 0; zero for u <= 0.  Smooth,
    convex, and exact to machine precision (an adaptive-quadrature cross-check
    lives in phi_quadrature_check).
    """
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    up = u[pos]
    out[pos] = up * np.exp(-1.0 / up) - exp1(1.0 / up)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class PhiSpec:
    """Even convex profile phi with phi^{-1}(0) = [-r, r] and phi(r+1) = 1.

    phi(x) = K * (ramp(x - r) + ramp(-x - r)) where ramp is the integral of
    exp(-1/s).  K normalizes phi(r + 1) = 1, which fixes the threshold
    a = r + 1 beyond which phi exceeds 1 with nonvanishing slope.
    """

    beta: float
    r: float
    K: float
    a: float
    quadrature_tol: float = 1e-12

    def value(self, x):
        return self.K * (_ramp(np.asarray(x, dtype=float) - self.r)
                         + _ramp(-np.asarray(x, dtype=float) - self.r))

    def d1(self, x):
        x = np.asarray(x, dtype=float)
        return self.K * (mollifier(x - self.r) - mollifier(-x - self.r))

    def d2(self, x):
        x = np.asarray(x, dtype=float)
        return self.K * (mollifier_d1(x - self.r) + mollifier_d1(-x - self.r))

    def d3(self, x):
        x = np.asarray(x, dtype=float)
        return self.K * (mollifier_d2(x - self.r) - mollifier_d2(-x - self.r))

    def jet(self, xj: Jet) -> Jet:
        v = xj.value
        return jets.compose(xj, self.value(v), self.d1(v), self.d2(v), self.d3(v))


def make_phi(beta, quadrature_tol=1e-12, grid_points=2001, grid_halfwidth=None):
    """Build the profile for a given opening parameter beta > pi/2.

    Runs a construction self-check (convexity and zero-set on a grid); a
    failure there indicates a bug, not bad input.
    """
    if not beta > math.pi / 2:
        raise DomainError(f"beta must exceed pi/2, got {beta}")
    r = beta - math.pi / 2
    K = 1.0 / _ramp(1.0)
    phi = PhiSpec(beta=beta, r=r, K=K, a=r + 1.0, quadrature_tol=quadrature_tol)

    half = grid_halfwidth if grid_halfwidth is not None else r + 3.0
    xs = np.linspace(-half, half, grid_points)
    vals = phi.value(xs)
    if np.any(vals < 0):
        raise DomainError("profile self-check failed: negative values")
    if np.any(phi.d2(xs) < -1e-12):
        raise DomainError("profile self-check failed: convexity")
    inside = np.abs(xs) <= r
    if np.any(np.abs(vals[inside]) > 1e-12):
        raise DomainError("profile self-check failed: zero set too small")
    if np.any(vals[~inside] <= 0):
        raise DomainError("profile self-check failed: zero set too large")
    return phi


def phi_quadrature_check(phi, points=None):
    """Max deviation of the closed-form ramp from adaptive quadrature."""
    from scipy.integrate import quad

    if points is None:
        points = np.linspace(0.05, phi.r + 2.0, 17)
    worst = 0.0
    for u in points:
        q, _ = quad(lambda s: math.exp(-1.0 / s) if s > 0 else 0.0, 0.0, u,
                    epsabs=phi.quadrature_tol, epsrel=1e-13)
        worst = max(worst, abs(q - _ramp(u)))
    return worst


# -- domains ------------------------------------------------------------------

@dataclass(frozen=True)
class DomainSpec:
    """A defining function with jet evaluation over 2n real coordinates.

    ``eval_fn(coords, order)`` returns a real-valued Jet of the requested
    order at the given interleaved real coordinates.
    """

    n: int
    kind: str
    params: dict = field(default_factory=dict)
    eval_fn: Callable[[np.ndarray, int], Jet] = None

    def rho(self, coords, order=3) -> Jet:
        return self.eval_fn(np.asarray(coords, dtype=float), order)

    def rho_at(self, z, order=3) -> Jet:
        return self.rho(coords_of_point(z), order)

    def value(self, coords) -> float:
        return self.rho(coords, order=1).value

    def wirt(self, coords) -> WirtingerData:
        return jets.wirtinger(self.rho(coords, order=3), self.n)

    def boundary_point(self, coords, t=None, tol_factor=1.0):
        """Wrap coordinates as a BoundaryPoint, verifying the residual."""
        coords = np.asarray(coords, dtype=float)
        j = self.rho(coords, order=3)
        w = jets.wirtinger(j, self.n)
        scale = 1.0 + w.grad_norm()
        if abs(j.value) > tol_factor * BOUNDARY_TOL * scale:
            raise DomainError(
                f"point is not on the boundary: |rho| = {abs(j.value):.3e}")
        if w.grad_norm() < 1e-10 * scale:
            raise DomainError("vanishing complex gradient at boundary point")
        return BoundaryPoint(z=point_of_coords(coords), t=t, coords=coords,
                             jet=j, wirt=w)


@dataclass(frozen=True)
class BoundaryPoint:
    """A point on the zero set of a defining function with cached jets."""

    z: np.ndarray
    t: Optional[complex]
    coords: np.ndarray
    jet: Jet
    wirt: WirtingerData


def worm_rho(beta, t):
    """Deformed worm defining function on C^2.

    rho_t(z, w) = |z - e^{i log|w|^2}|^2 - (1 - phi(log|w|^2) - |t|^2),
    undefined on the axis w = 0.
    """
    t = complex(t)
    if not abs(t) < 1:
        raise DomainError(f"deformation parameter must satisfy |t| < 1, got {abs(t)}")
    phi = make_phi(beta)
    tsq = abs(t) ** 2

    def ev(coords, order=3):
        if coords[2] == 0.0 and coords[3] == 0.0:
            raise DomainError("worm defining function is singular at w = 0")
        x1, y1, x2, y2 = jets.lift(coords, order)
        wsq = x2 * x2 + y2 * y2
        u = jets.log(wsq)
        dre = x1 - jets.cos(u)
        dim = y1 - jets.sin(u)
        return dre * dre + dim * dim - (1.0 - tsq) + phi.jet(u)

    return DomainSpec(n=2, kind="worm",
                      params={"beta": beta, "t": t, "phi": phi}, eval_fn=ev)


def ball(n=2):
    """Unit ball: sum |z_i|^2 - 1."""

    def ev(coords, order=3):
        xs = jets.lift(coords, order)
        acc = xs[0] * xs[0]
        for x in xs[1:]:
            acc = acc + x * x
        return acc - 1.0

    return DomainSpec(n=n, kind="ball", eval_fn=ev)


def ellipsoid(coeffs):
    """Ellipsoid: sum c_i |z_i|^2 - 1 with positive coefficients."""
    coeffs = np.asarray(coeffs, dtype=float)
    if np.any(coeffs <= 0):
        raise DomainError("ellipsoid coefficients must be positive")
    n = coeffs.size

    def ev(coords, order=3):
        xs = jets.lift(coords, order)
        acc = None
        for i, c in enumerate(coeffs):
            term = c * (xs[2 * i] * xs[2 * i] + xs[2 * i + 1] * xs[2 * i + 1])
            acc = term if acc is None else acc + term
        return acc - 1.0

    return DomainSpec(n=n, kind="ellipsoid", params={"coeffs": coeffs}, eval_fn=ev)


# -- boundary sampling --------------------------------------------------------

def _ray_root(domain, anchor, direction, radius):
    """First zero of rho along anchor + s*direction, by bracketing + bisection
    + Newton polish.  Returns the coordinates, or raises if the ray exits the
    search radius without a sign change."""

    def val_grad(s, order=1):
        j = domain.rho(anchor + s * direction, order)
        if order == 1:
            return j.value, float(j.d1 @ direction)
        return j

    # expand outward until the sign flips
    lo, flo = 0.0, domain.value(anchor)
    s = 0.25
    hi = None
    while s <= radius:
        try:
            v, _ = val_grad(s)
        except DomainError:
            s *= 1.0 + 1e-9  # nudge off a coordinate singularity
            continue
        if v > 0:
            hi = s
            break
        lo, flo = s, v
        s *= 2.0
    if hi is None:
        raise DomainError(
            "ray exited the search radius without leaving the domain "
            "(unbounded direction or invalid anchor)")

    for _ in range(40):
        mid = 0.5 * (lo + hi)
        v, _ = val_grad(mid)
        if v > 0:
            hi = mid
        else:
            lo, flo = mid, v

    s = 0.5 * (lo + hi)
    for _ in range(5):
        v, g = val_grad(s)
        if g == 0.0:
            break
        s = min(max(s - v / g, lo), hi)
    return anchor + s * direction


def boundary_sample(domain, anchor, count, seed=0, radius=SEARCH_RADIUS, t=None):
    """Sample boundary points along random rays from an interior anchor.

    Deterministic: the i-th ray derives its direction from (seed, i).  Every
    returned point satisfies |rho| <= 1e-12 * (1 + |grad|).
    """
    anchor = np.asarray(anchor, dtype=float)
    if anchor.size != 2 * domain.n:
        anchor = coords_of_point(anchor)
    if domain.value(anchor) >= 0:
        raise DomainError("anchor must lie strictly inside the domain")

    points = []
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        direction = rng.normal(size=2 * domain.n)
        direction /= np.linalg.norm(direction)
        coords = _ray_root(domain, anchor, direction, radius)
        points.append(domain.boundary_point(coords, t=t))
    return points


def annulus_points(beta, count, phi=None):
    """Weak boundary points of the undeformed worm: z = 0 and
    |log|w|^2| <= beta - pi/2.

    The endpoints of the interval, and the point (0, 1), are always included.
    """
    if not beta > math.pi / 2:
        raise DomainError(f"beta must exceed pi/2, got {beta}")
    domain = worm_rho(beta, 0.0)
    r = beta - math.pi / 2
    us = np.linspace(-r, r, count)
    thetas = 2.0 * math.pi * np.arange(count) / count
    mid = count // 2
    us[mid] = 0.0
    thetas[0] = thetas[mid] = thetas[-1] = 0.0

    points = []
    for u, theta in zip(us, thetas):
        w = math.exp(u / 2.0) * complex(math.cos(theta), math.sin(theta))
        coords = coords_of_point([0.0, w])
        points.append(domain.boundary_point(coords, t=0.0))
    return points


def samples_to_csv(points, path):
    """Dump boundary samples as CSV: re/im of each coordinate plus residual."""
    import csv

    n = points[0].z.size if points else 0
    header = []
    for i in range(n):
        header += [f"re(z{i + 1})", f"im(z{i + 1})"]
    header.append("rho_residual")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for p in points:
            row = []
            for i in range(n):
                row += [repr(float(p.z[i].real)), repr(float(p.z[i].imag))]
            row.append(repr(float(p.jet.value)))
            writer.writerow(row)
