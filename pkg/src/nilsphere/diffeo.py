"""C1 sphere diffeomorphisms: closed-form primitives, words over generator
tables, differentials, the deviation-from-identity estimator, and membership
in the shrinking neighborhoods of the identity.

Composition convention for words: the LAST listed factor is applied FIRST,
i.e. letters [(a,+1), (b,+1)] denote the map a o b.  All commutators follow
[f, g] = f g f^-1 g^-1.
"""

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from ._mesh import icosphere_vertices, mesh_spacing
from .errors import UnknownGenerator
from .sphere_geom import SpherePoint, _unit

INSIDE = "inside"
OUTSIDE = "outside"
BORDERLINE = "borderline"

_FD_STEP = 1e-6  # geodesic step for flow-map differentials


def _rows_unit(X):
    return X / np.linalg.norm(X, axis=-1, keepdims=True)


def tangent_frames(X):
    """Deterministic orthonormal tangent frames (e1, e2) at each row of X."""
    X = np.atleast_2d(X)
    k = np.argmin(np.abs(X), axis=1)
    e1 = np.zeros_like(X)
    e1[np.arange(len(X)), k] = 1.0
    e1 -= np.sum(e1 * X, axis=1, keepdims=True) * X
    e1 = _rows_unit(e1)
    e2 = np.cross(X, e1)
    return e1, e2


# ---------------------------------------------------------------------------
# vector fields (for flow maps)
# ---------------------------------------------------------------------------

class VectorField:
    """Named smooth tangent vector field on the sphere."""

    name = "field"

    def __call__(self, X):
        raise NotImplementedError


class LocalizedRotation(VectorField):
    """Rotation about `center` with cubically-windowed angular speed,
    supported on the geodesic cap of the given radius around the center."""

    def __init__(self, name, center, radius, amplitude):
        self.name = name
        self.center = _unit(center)
        self.radius = float(radius)
        self.amplitude = float(amplitude)
        self._t0 = math.cos(self.radius)

    def angular_speed(self, t):
        u = np.clip((t - self._t0) / (1.0 - self._t0), 0.0, 1.0)
        return self.amplitude * u ** 3

    def __call__(self, X):
        X = np.atleast_2d(X)
        t = X @ self.center
        w = self.angular_speed(t)
        return w[..., None] * np.cross(self.center, X)


class LatitudeBand(VectorField):
    """Rotation about the z-axis windowed to the band z in (z0, z1)."""

    def __init__(self, name, band, amplitude):
        self.name = name
        z0, z1 = float(band[0]), float(band[1])
        if not (-1.0 < z0 < z1 < 1.0):
            raise ValueError("band must satisfy -1 < z0 < z1 < 1")
        self.band = (z0, z1)
        self.amplitude = float(amplitude)
        self._c = 0.5 * (z0 + z1)
        self._r = 0.5 * (z1 - z0)

    def angular_speed(self, z):
        w = (z - self._c) / self._r
        inside = np.abs(w) < 1.0
        out = np.zeros_like(np.asarray(z, dtype=float))
        out[inside] = self.amplitude * (1.0 - w[inside] ** 2) ** 3
        return out

    def __call__(self, X):
        X = np.atleast_2d(X)
        w = self.angular_speed(X[..., 2])
        zhat = np.array([0.0, 0.0, 1.0])
        return w[..., None] * np.cross(zhat, X)


def make_field(name, kind, params):
    if kind == "localized_rotation":
        return LocalizedRotation(
            name, params["center"], params["radius"], params["amplitude"]
        )
    if kind == "latitude_band":
        return LatitudeBand(name, params["band"], params["amplitude"])
    raise ValueError(f"unknown field kind {kind!r}")


# ---------------------------------------------------------------------------
# map expressions
# ---------------------------------------------------------------------------

class MapExpr:
    """Base class; subclasses provide _push (evaluate + pushforwards)."""

    def apply(self, X):
        """Image of points X (...,3) under the map; rows stay unit."""
        out, _ = self._push(np.atleast_2d(np.asarray(X, dtype=float)), ())
        return out if np.ndim(X) > 1 else out[0]

    def push(self, X, tangents):
        """(f(X), tuple of Df(X) v for v in tangents), batched over rows."""
        return self._push(np.atleast_2d(X), tuple(tangents))

    def inverse(self):
        raise NotImplementedError

    def canonical(self):
        """Deterministic structural description (used for auto-naming)."""
        raise NotImplementedError


class Rotation(MapExpr):
    def __init__(self, axis, angle):
        self.axis = _unit(axis)
        self.angle = float(angle)

    def _push(self, X, tangents):
        c = math.cos(self.angle)
        s = math.sin(self.angle)
        k = self.axis

        def rot(V):
            return (
                V * c
                + np.cross(k, V) * s
                + np.outer(V @ k, k) * (1.0 - c)
            )

        return rot(X), tuple(rot(V) for V in tangents)

    def inverse(self):
        return Rotation(self.axis, -self.angle)

    def exact_c1_norm(self):
        return 4.0 * abs(math.sin(0.5 * self.angle))

    def canonical(self):
        return ("rotation", tuple(float(v) for v in self.axis), self.angle)

    def __repr__(self):
        return f"Rotation(axis={self.axis.tolist()}, angle={self.angle})"


@dataclass(frozen=True)
class BumpProfile:
    """C2 polynomial bump  amplitude * (1 - ((t-center)/radius)^2)^3  on
    |t-center| < radius, zero outside; support must stay inside (-1, 1)."""

    amplitude: float
    center: float
    radius: float

    def __post_init__(self):
        if not (-1.0 < self.center - self.radius
                and self.center + self.radius < 1.0):
            raise ValueError("bump support must be contained in (-1, 1)")
        if self.radius <= 0.0:
            raise ValueError("bump radius must be positive")

    def __call__(self, t):
        w = (np.asarray(t, dtype=float) - self.center) / self.radius
        out = np.where(np.abs(w) < 1.0, (1.0 - w ** 2) ** 3, 0.0)
        return self.amplitude * out

    def derivative(self, t):
        w = (np.asarray(t, dtype=float) - self.center) / self.radius
        out = np.where(
            np.abs(w) < 1.0, -6.0 * w * (1.0 - w ** 2) ** 2 / self.radius, 0.0
        )
        return self.amplitude * out


class Twist(MapExpr):
    """Rotate about `axis` by an angle depending on the axial coordinate."""

    def __init__(self, axis, profile):
        self.axis = _unit(axis)
        self.profile = profile

    def _rotate(self, V, cos_t, sin_t):
        k = self.axis
        return (
            V * cos_t[..., None]
            + np.cross(k, V) * sin_t[..., None]
            + np.outer(V @ k, k) * (1.0 - cos_t)[..., None]
        )

    def _push(self, X, tangents):
        k = self.axis
        t = X @ k
        theta = self.profile(t)
        c, s = np.cos(theta), np.sin(theta)
        FX = self._rotate(X, c, s)
        out = []
        if tangents:
            dtheta = self.profile.derivative(t)
            axis_cross_FX = np.cross(k, FX)
            for V in tangents:
                out.append(
                    self._rotate(V, c, s)
                    + (dtheta * (V @ k))[..., None] * axis_cross_FX
                )
        return FX, tuple(out)

    def inverse(self):
        p = self.profile
        return Twist(self.axis, BumpProfile(-p.amplitude, p.center, p.radius))

    def canonical(self):
        p = self.profile
        return (
            "twist",
            tuple(float(v) for v in self.axis),
            (p.amplitude, p.center, p.radius),
        )

    def __repr__(self):
        return f"Twist(axis={self.axis.tolist()}, profile={self.profile})"


class MobiusStereo(MapExpr):
    """Moebius map of the extended plane conjugated to the sphere by
    stereographic projection from the north pole; coefficients are
    normalized so that ad - bc = 1.

    Evaluation uses homogeneous coordinates with a two-chart lift, so the
    poles need no special casing."""

    def __init__(self, a, b, c, d):
        det = complex(a) * complex(d) - complex(b) * complex(c)
        if abs(det) < 1e-15:
            raise ValueError("Moebius coefficients are singular")
        root = np.sqrt(det)
        self.a = complex(a) / root
        self.b = complex(b) / root
        self.c = complex(c) / root
        self.d = complex(d) / root

    def _lift(self, X):
        z = X[..., 2]
        south = z <= 0.5
        P = np.where(south, X[..., 0] + 1j * X[..., 1], 1.0 + z)
        Q = np.where(south, 1.0 - z, X[..., 0] - 1j * X[..., 1])
        return P, Q, south

    @staticmethod
    def _lift_tangent(V, south):
        dP = np.where(south, V[..., 0] + 1j * V[..., 1], V[..., 2])
        dQ = np.where(south, -V[..., 2], V[..., 0] - 1j * V[..., 1])
        return dP, dQ

    @staticmethod
    def _project(P, Q):
        N = np.abs(P) ** 2 + np.abs(Q) ** 2
        u = 2.0 * P * np.conj(Q)
        return np.stack(
            [u.real / N, u.imag / N, (np.abs(P) ** 2 - np.abs(Q) ** 2) / N],
            axis=-1,
        )

    def _push(self, X, tangents):
        P, Q, south = self._lift(X)
        P2 = self.a * P + self.b * Q
        Q2 = self.c * P + self.d * Q
        FX = self._project(P2, Q2)
        out = []
        if tangents:
            N = np.abs(P2) ** 2 + np.abs(Q2) ** 2
            u = 2.0 * P2 * np.conj(Q2)
            for V in tangents:
                dP, dQ = self._lift_tangent(V, south)
                dP2 = self.a * dP + self.b * dQ
                dQ2 = self.c * dP + self.d * dQ
                dPP = 2.0 * (np.conj(P2) * dP2).real
                dQQ = 2.0 * (np.conj(Q2) * dQ2).real
                dN = dPP + dQQ
                du = 2.0 * (dP2 * np.conj(Q2) + P2 * np.conj(dQ2))
                dx = (du.real * N - u.real * dN) / N ** 2
                dy = (du.imag * N - u.imag * dN) / N ** 2
                dz = ((dPP - dQQ) * N - (np.abs(P2) ** 2 - np.abs(Q2) ** 2) * dN) / N ** 2
                W = np.stack([dx, dy, dz], axis=-1)
                # remove residual normal component (analytic result is tangent)
                W -= np.sum(W * FX, axis=-1, keepdims=True) * FX
                out.append(W)
        return FX, tuple(out)

    def inverse(self):
        return MobiusStereo(self.d, -self.b, -self.c, self.a)

    def canonical(self):
        return ("mobius", self.a, self.b, self.c, self.d)

    def __repr__(self):
        return f"MobiusStereo({self.a}, {self.b}, {self.c}, {self.d})"


class FlowMap(MapExpr):
    """Time-t map of a named vector field, integrated by fixed-step RK4.

    The result is renormalized to the sphere after the final step; the step
    count is explicit so runs are reproducible."""

    def __init__(self, field, time, steps):
        if steps < 1:
            raise ValueError("steps must be a positive integer")
        self.field = field
        self.time = float(time)
        self.steps = int(steps)

    def _integrate(self, X):
        h = self.time / self.steps
        Y = np.array(X, dtype=float)
        F = self.field
        for _ in range(self.steps):
            k1 = F(Y)
            k2 = F(Y + 0.5 * h * k1)
            k3 = F(Y + 0.5 * h * k2)
            k4 = F(Y + h * k3)
            Y = Y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        return _rows_unit(Y)

    def _push(self, X, tangents):
        FX = self._integrate(X)
        out = []
        h = _FD_STEP
        for V in tangents:
            plus = self._integrate(math.cos(h) * X + math.sin(h) * V)
            minus = self._integrate(math.cos(h) * X - math.sin(h) * V)
            W = (plus - minus) / (2.0 * h)
            W -= np.sum(W * FX, axis=-1, keepdims=True) * FX
            out.append(W)
        return FX, tuple(out)

    def inverse(self):
        return FlowMap(self.field, -self.time, self.steps)

    def canonical(self):
        return ("flow", self.field.name, self.time, self.steps)

    def __repr__(self):
        return f"FlowMap({self.field.name}, time={self.time}, steps={self.steps})"


def calibrate_flow_steps(field, time, target=1e-10, max_steps=4096):
    """Smallest power-of-two step count whose Richardson error estimate on
    the coarse icosahedron probes is below target."""
    probes = icosphere_vertices(0)
    steps = 16
    while steps < max_steps:
        coarse = FlowMap(field, time, steps)._integrate(probes)
        fine = FlowMap(field, time, 2 * steps)._integrate(probes)
        err = float(np.max(np.linalg.norm(coarse - fine, axis=1))) * (16.0 / 15.0)
        if err < target:
            return 2 * steps
        steps *= 2
    return max_steps


def _free_reduce_letters(letters):
    out = []
    for name, e in letters:
        if out and out[-1][0] == name and out[-1][1] == -e:
            out.pop()
        else:
            out.append((name, int(e)))
    return tuple(out)


class WordMap(MapExpr):
    """Composition word over a named table of generator maps."""

    def __init__(self, letters, table):
        letters = _free_reduce_letters(letters)
        for name, e in letters:
            if name not in table:
                raise UnknownGenerator(f"word references unknown generator {name!r}")
            if e not in (1, -1):
                raise ValueError("letter exponents must be +1 or -1")
        self.letters = letters
        self.table = dict(table)

    def _push(self, X, tangents):
        for name, e in reversed(self.letters):
            g = self.table[name]
            if e < 0:
                g = g.inverse()
            X, tangents = g._push(X, tangents)
        return X, tangents

    def inverse(self):
        inv = tuple((name, -e) for name, e in reversed(self.letters))
        return WordMap(inv, self.table)

    def is_identity_word(self):
        return len(self.letters) == 0

    def canonical(self):
        return ("word", self.letters,
                tuple(sorted((k, v.canonical()) for k, v in self.table.items())))

    def __repr__(self):
        body = "".join(
            f"{n}{'' if e > 0 else chr(0x207B) + chr(0xB9)}" for n, e in self.letters
        )
        return f"WordMap({body or 'e'})"


def identity_word():
    return WordMap((), {})


def _auto_name(expr):
    digest = hashlib.sha1(repr(expr.canonical()).encode()).hexdigest()[:10]
    return f"m{digest}"


def as_word(f, name=None):
    """Wrap a map expression as a one-letter word (words pass through)."""
    if isinstance(f, WordMap):
        return f
    name = name or _auto_name(f)
    return WordMap(((name, 1),), {name: f})


def _merged_table(w1, w2):
    table = dict(w1.table)
    for k, v in w2.table.items():
        if k in table and table[k] is not v:
            if table[k].canonical() != v.canonical():
                raise UnknownGenerator(
                    f"generator name {k!r} bound to two different maps"
                )
        table[k] = table.get(k, v)
    return table


def compose(f, g):
    """The word f o g."""
    wf, wg = as_word(f), as_word(g)
    return WordMap(wf.letters + wg.letters, _merged_table(wf, wg))


def commutator_map(f, g):
    """The word f g f^-1 g^-1 (flattened and freely reduced)."""
    wf, wg = as_word(f), as_word(g)
    table = _merged_table(wf, wg)
    inv_f = tuple((n, -e) for n, e in reversed(wf.letters))
    inv_g = tuple((n, -e) for n, e in reversed(wg.letters))
    return WordMap(wf.letters + wg.letters + inv_f + inv_g, table)


# ---------------------------------------------------------------------------
# pointwise API
# ---------------------------------------------------------------------------

def evaluate(f, x):
    """Image of a single point under the map expression."""
    return SpherePoint(f.apply(_unit(x)))


def evaluate_many(f, X):
    return f.apply(np.asarray(X, dtype=float))


def differential(f, x, v):
    """Df(x).v as an ambient 3-vector tangent to the sphere at f(x).

    v must be a unit tangent at x (checked loosely)."""
    xv = _unit(x)
    v = np.asarray(v, dtype=float)
    if abs(float(v @ xv)) > 1e-8:
        raise ValueError("v must be tangent to the sphere at x")
    _, (w,) = f.push(xv[None, :], (v[None, :],))
    return w[0]


def inverse(f):
    return f.inverse()


# ---------------------------------------------------------------------------
# C1 deviation estimator and neighborhood membership
# ---------------------------------------------------------------------------

@dataclass
class C1Estimate:
    """Sampled (lower-bound) estimate of sup ||f(x)-x|| + sup ||Df(x)v - v||."""

    sampled_sup: float
    mesh_level: int
    refined: bool
    margin: float


def deviation_values(f, X):
    """Pointwise ||f(x)-x|| + max_v ||Df(x)v - v|| over the rows of X.

    The tangent supremum is exact: it is the largest singular value of the
    3x2 matrix [Df e1 - e1, Df e2 - e2], computed from its 2x2 Gram matrix.
    """
    X = np.atleast_2d(X)
    e1, e2 = tangent_frames(X)
    FX, (d1, d2) = f.push(X, (e1, e2))
    chord = np.linalg.norm(FX - X, axis=1)
    a1 = d1 - e1
    a2 = d2 - e2
    g11 = np.sum(a1 * a1, axis=1)
    g22 = np.sum(a2 * a2, axis=1)
    g12 = np.sum(a1 * a2, axis=1)
    half = 0.5 * (g11 + g22)
    disc = np.sqrt(np.maximum(0.25 * (g11 - g22) ** 2 + g12 ** 2, 0.0))
    smax = np.sqrt(np.maximum(half + disc, 0.0))
    return chord + smax


def _refine_max(f, starts, step0, min_step=1e-8, max_iter=200):
    """Batched pattern search pushing the deviation maxima uphill."""
    P = np.array(starts, dtype=float)
    m = len(P)
    best = deviation_values(f, P)
    step = step0
    for _ in range(max_iter):
        if step < min_step:
            break
        e1, e2 = tangent_frames(P)
        probes = np.concatenate(
            [P + step * e1, P - step * e1, P + step * e2, P - step * e2]
        )
        probes = _rows_unit(probes)
        vals = deviation_values(f, probes).reshape(4, m)
        probes = probes.reshape(4, m, 3)
        imax = np.argmax(vals, axis=0)
        vmax = vals[imax, np.arange(m)]
        improved = vmax > best
        if np.any(improved):
            P[improved] = probes[imax[improved], np.flatnonzero(improved)]
            best[improved] = vmax[improved]
        else:
            step *= 0.5
    return float(best.max())


def c1_deviation(f, mesh_level, refine=True, margin=0.05):
    """Estimate ||f - Id||_1 by scanning an icosphere mesh and running one
    batched pattern-search refinement pass from the top percentile.

    The result is a certified lower bound of the true supremum only."""
    if mesh_level < 0:
        raise ValueError("mesh_level must be >= 0")
    X = icosphere_vertices(mesh_level)
    vals = deviation_values(f, X)
    sup = float(vals.max())
    refined_flag = False
    if refine:
        k = max(1, len(X) // 100)
        top = np.argsort(vals)[-k:]
        sup = max(sup, _refine_max(f, X[top], step0=0.5 * mesh_spacing(mesh_level)))
        refined_flag = True
    return C1Estimate(sup, int(mesh_level), refined_flag, margin)


def vk_bound(k):
    """Size of the k-th identity neighborhood: 1 / (5^((k-1)k/2) * 60)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return 1.0 / (5.0 ** ((k - 1) * k // 2) * 60.0)


@dataclass
class VkMembership:
    k: int
    bound: float
    estimate: C1Estimate
    verdict: str


def _exact_norm(f):
    if isinstance(f, Rotation):
        return f.exact_c1_norm()
    if isinstance(f, WordMap) and f.is_identity_word():
        return 0.0
    return None


def in_neighborhood_vk(f, k, mesh_level=4, margin=0.05):
    """Membership verdict for the k-th neighborhood of the identity.

    Verdicts: inside if estimate*(1+margin) < bound, outside if the sampled
    lower bound already exceeds the bound, borderline otherwise.  Rotations
    and identity words use their exact norm (margin 0)."""
    bound = vk_bound(k)
    exact = _exact_norm(f)
    if exact is not None:
        est = C1Estimate(exact, 0, False, 0.0)
        margin = 0.0
    else:
        est = c1_deviation(f, mesh_level, margin=margin)
    value = est.sampled_sup
    if value > bound:
        verdict = OUTSIDE
    elif value * (1.0 + margin) < bound:
        verdict = INSIDE
    else:
        verdict = BORDERLINE
    return VkMembership(int(k), bound, est, verdict)


@dataclass
class CommutatorBoundReport:
    lhs: float
    rhs: float
    holds: bool
    f_norm: float
    g_norm: float


def verify_prop_5_1(f, g, mesh_level=4, slack=0.05):
    """Check ||[f,g] - Id||_1 <= 5 max(||f-Id||_1, ||g-Id||_1) numerically.

    Both maps must not be verdict-outside the base neighborhood.  The slack
    absorbs estimator error on the left (sampled sups are lower bounds)."""
    from .errors import NotInV1

    for m in (f, g):
        if in_neighborhood_vk(m, 1, mesh_level).verdict == OUTSIDE:
            raise NotInV1("map is outside the base identity neighborhood")
    nf = _exact_norm(f)
    nf = nf if nf is not None else c1_deviation(f, mesh_level).sampled_sup
    ng = _exact_norm(g)
    ng = ng if ng is not None else c1_deviation(g, mesh_level).sampled_sup
    lhs = c1_deviation(commutator_map(f, g), mesh_level).sampled_sup
    rhs = 5.0 * max(nf, ng)
    return CommutatorBoundReport(lhs, rhs, lhs <= rhs * (1.0 + slack), nf, ng)
