"""Jordan curves, admissible cycles and regions in the complex plane.

Curves are closed chains of line segments and circular arcs.  A curve always
stores its segments in counterclockwise geometric order; the ``orientation``
flag (+1 / -1) says in which direction the curve is traversed when it is
integrated over or when winding numbers are taken.  A :class:`Cycle` is a
finite family of such curves and its index at a point is the sum of the
indices of its members.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AllMarked,
    GeometryError,
    InteriorsOverlap,
    NoneMarked,
    NotPositive,
    Overlapping,
    ParseError,
    PointOnCycle,
)

TWO_PI = 2.0 * math.pi
REL_TOL = 1e-12
MAX_PROBES_PER_AXIS = 129


def _as_points(p) -> np.ndarray:
    return np.atleast_1d(np.asarray(p, dtype=complex))


def _cross(a, b):
    return a.real * b.imag - a.imag * b.real


def _point_line_distance(p, a, b):
    """Distance from points ``p`` to the segments [a, b] (broadcasting)."""
    d = b - a
    dd = np.abs(d) ** 2
    t = np.clip(((p - a) * np.conj(d)).real / np.where(dd > 0, dd, 1.0), 0.0, 1.0)
    return np.abs(p - (a + t * d))


# ---------------------------------------------------------------------------
# segments


@dataclass(frozen=True)
class Segment:
    """A line segment or a circular arc.

    Arcs are parametrised as ``center + radius * exp(i theta)`` with theta
    running linearly from ``theta0`` to ``theta1``; a negative span means a
    clockwise arc.  A full circle is an arc with a span of +-2 pi.
    """

    kind: str
    start: complex
    end: complex
    center: complex = 0j
    radius: float = 0.0
    theta0: float = 0.0
    theta1: float = 0.0

    def __post_init__(self):
        if self.kind == "line":
            if self.start == self.end:
                raise GeometryError("degenerate line segment: start == end")
        elif self.kind == "arc":
            if not self.radius > 0:
                raise GeometryError("arc radius must be positive")
            if self.theta1 == self.theta0:
                raise GeometryError("arc has zero angular span")
            if abs(self.theta1 - self.theta0) > TWO_PI * (1 + 1e-12):
                raise GeometryError("arc span exceeds a full turn")
        else:
            raise GeometryError(f"unknown segment kind {self.kind!r}")

    @classmethod
    def line(cls, a, b) -> "Segment":
        return cls("line", complex(a), complex(b))

    @classmethod
    def arc(cls, center, radius, theta0, theta1) -> "Segment":
        c = complex(center)
        r = float(radius)
        return cls(
            "arc",
            c + r * np.exp(1j * theta0),
            c + r * np.exp(1j * theta1),
            c,
            r,
            float(theta0),
            float(theta1),
        )

    @property
    def span(self) -> float:
        return self.theta1 - self.theta0

    @property
    def length(self) -> float:
        if self.kind == "line":
            return abs(self.end - self.start)
        return self.radius * abs(self.span)

    def point(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "line":
            return self.start + t * (self.end - self.start)
        return self.center + self.radius * np.exp(1j * (self.theta0 + t * self.span))

    def derivative(self, t):
        """dz/dt for the parametrisation over t in [0, 1]."""
        t = np.asarray(t, dtype=float)
        if self.kind == "line":
            return np.full(t.shape, self.end - self.start, dtype=complex)
        return 1j * self.radius * self.span * np.exp(1j * (self.theta0 + t * self.span))

    def reversed(self) -> "Segment":
        if self.kind == "line":
            return Segment.line(self.end, self.start)
        return Segment("arc", self.end, self.start, self.center, self.radius,
                       self.theta1, self.theta0)

    def signed_area(self) -> float:
        """Contribution of this segment to (1/2) * closed integral of x dy - y dx."""
        if self.kind == "line":
            return 0.5 * _cross(self.start, self.end)
        cx, cy, r = self.center.real, self.center.imag, self.radius
        t0, t1 = self.theta0, self.theta1
        return 0.5 * (r * r * (t1 - t0)
                      + r * (cx * (math.sin(t1) - math.sin(t0))
                             - cy * (math.cos(t1) - math.cos(t0))))

    def _in_span(self, phi):
        lo = min(self.theta0, self.theta1)
        return np.mod(phi - lo, TWO_PI) <= abs(self.span) + 1e-15

    def distance(self, p) -> np.ndarray:
        p = _as_points(p)
        if self.kind == "line":
            return _point_line_distance(p, self.start, self.end)
        w = p - self.center
        inside = self._in_span(np.angle(w))
        radial = np.abs(np.abs(w) - self.radius)
        ends = np.minimum(np.abs(p - self.start), np.abs(p - self.end))
        return np.where(inside, radial, ends)

    def delta_arg(self, p) -> np.ndarray:
        """Exact change of arg(z - p) as z runs along the segment."""
        p = _as_points(p)
        if self.kind == "line":
            return np.angle((self.end - p) * np.conj(self.start - p))
        n = max(1, int(math.ceil(abs(self.span) / (math.pi / 2))))
        thetas = np.linspace(self.theta0, self.theta1, n + 1)
        sgn = 1.0 if self.span > 0 else -1.0
        total = np.zeros(p.shape)
        inside_disc = np.abs(p - self.center) < self.radius
        for ta, tb in zip(thetas[:-1], thetas[1:]):
            A = self.center + self.radius * np.exp(1j * ta)
            B = self.center + self.radius * np.exp(1j * tb)
            M = self.center + self.radius * np.exp(0.5j * (ta + tb))
            chord = np.angle((B - p) * np.conj(A - p))
            side_m = _cross(B - A, M - A)
            in_cap = inside_disc & (_cross(B - A, p - A) * side_m > 0)
            total = total + chord + np.where(in_cap, sgn * TWO_PI, 0.0)
        return total

    def param_of(self, p: complex) -> float:
        """Parameter of the point of the segment closest to ``p``."""
        if self.kind == "line":
            d = self.end - self.start
            t = ((p - self.start) * np.conj(d)).real / abs(d) ** 2
            return float(np.clip(t, 0.0, 1.0))
        phi = math.atan2((p - self.center).imag, (p - self.center).real)
        if self.span > 0:
            t = ((phi - self.theta0) % TWO_PI) / self.span
        else:
            t = ((self.theta0 - phi) % TWO_PI) / (-self.span)
        if t > 1.0:
            # outside the arc: snap to the nearer endpoint
            da = abs(p - self.start)
            db = abs(p - self.end)
            t = 0.0 if da <= db else 1.0
        return float(t)

    def bbox(self):
        if self.kind == "line":
            xs = [self.start.real, self.end.real]
            ys = [self.start.imag, self.end.imag]
        else:
            pts = [self.start, self.end]
            for k in range(-8, 9):
                phi = k * math.pi / 2
                if self._in_span(phi):
                    pts.append(self.center + self.radius * np.exp(1j * phi))
            xs = [z.real for z in pts]
            ys = [z.imag for z in pts]
        return min(xs), max(xs), min(ys), max(ys)

    def to_json(self) -> dict:
        if self.kind == "line":
            return {"kind": "line",
                    "start": [self.start.real, self.start.imag],
                    "end": [self.end.real, self.end.imag]}
        return {"kind": "arc", "center": [self.center.real, self.center.imag],
                "radius": self.radius, "from": self.theta0, "to": self.theta1}

    @classmethod
    def from_json(cls, obj: dict) -> "Segment":
        try:
            kind = obj["kind"]
            if kind == "line":
                return cls.line(complex(*obj["start"]), complex(*obj["end"]))
            if kind == "arc":
                return cls.arc(complex(*obj["center"]), obj["radius"], obj["from"], obj["to"])
        except KeyError as exc:
            raise ParseError(f"segment is missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise ParseError(f"malformed segment: {exc}") from None
        raise ParseError(f"segment field 'kind' has unknown value {kind!r}")


def _circle_line_hits(c, r, a, b):
    d = b - a
    f = a - c
    A = abs(d) ** 2
    B = 2 * (f * np.conj(d)).real
    C = abs(f) ** 2 - r * r
    disc = B * B - 4 * A * C
    if disc < 0:
        return []
    s = math.sqrt(disc)
    return [t for t in ((-B - s) / (2 * A), (-B + s) / (2 * A)) if -1e-15 <= t <= 1 + 1e-15]


def segment_distance(s1: Segment, s2: Segment) -> float:
    """Minimum distance between two segments (0 when they meet)."""
    if s1.kind == "line" and s2.kind == "line":
        return float(_lines_distance(np.array([s1.start]), np.array([s1.end]),
                                     np.array([s2.start]), np.array([s2.end]))[0])
    if s1.kind == "arc" and s2.kind == "line":
        s1, s2 = s2, s1
    cands = [float(s1.distance(s2.start)[0]), float(s1.distance(s2.end)[0]),
             float(s2.distance(s1.start)[0]), float(s2.distance(s1.end)[0])]
    if s1.kind == "line":
        arc = s2
        for t in _circle_line_hits(arc.center, arc.radius, s1.start, s1.end):
            z = s1.start + t * (s1.end - s1.start)
            if arc._in_span(np.angle(z - arc.center)):
                return 0.0
        d = s1.end - s1.start
        normal = 1j * d / abs(d)
        for sgn in (1, -1):
            q = arc.center + sgn * arc.radius * normal
            if arc._in_span(np.angle(q - arc.center)):
                cands.append(float(_point_line_distance(q, s1.start, s1.end)))
        return min(cands)
    # arc / arc
    c1, r1, c2, r2 = s1.center, s1.radius, s2.center, s2.radius
    dc = abs(c2 - c1)
    if dc > 0 and abs(r1 - r2) <= dc <= r1 + r2:
        a = (r1 * r1 - r2 * r2 + dc * dc) / (2 * dc)
        h = math.sqrt(max(r1 * r1 - a * a, 0.0))
        u = (c2 - c1) / dc
        base = c1 + a * u
        for z in (base + 1j * u * h, base - 1j * u * h):
            if s1._in_span(np.angle(z - c1)) and s2._in_span(np.angle(z - c2)):
                return 0.0
    if dc == 0:
        return min(cands + ([abs(r1 - r2)] if r1 != r2 else [0.0]))
    u = (c2 - c1) / dc
    for p in (c1 + r1 * u, c1 - r1 * u):
        if s1._in_span(np.angle(p - c1)):
            for q in (c2 + r2 * u, c2 - r2 * u):
                if s2._in_span(np.angle(q - c2)):
                    cands.append(abs(p - q))
    return min(cands)


def _lines_distance(a1, b1, a2, b2):
    """Vectorised distance between segments [a1,b1] and [a2,b2] (broadcasting)."""
    d1 = b1 - a1
    d2 = b2 - a2
    o1 = _cross(d1, a2 - a1)
    o2 = _cross(d1, b2 - a1)
    o3 = _cross(d2, a1 - a2)
    o4 = _cross(d2, b1 - a2)
    proper = (o1 * o2 < 0) & (o3 * o4 < 0)
    dist = np.minimum(
        np.minimum(_point_line_distance(a2, a1, b1), _point_line_distance(b2, a1, b1)),
        np.minimum(_point_line_distance(a1, a2, b2), _point_line_distance(b1, a2, b2)),
    )
    return np.where(proper, 0.0, dist)


# ---------------------------------------------------------------------------
# curves and cycles


@dataclass(frozen=True)
class Curve:
    segments: tuple
    orientation: int = 1

    def __init__(self, segments: Iterable[Segment], orientation: int = 1,
                 validate: bool = True):
        segs = tuple(segments)
        if not segs:
            raise GeometryError("a curve needs at least one segment")
        if orientation not in (1, -1):
            raise GeometryError("orientation must be +1 or -1")
        scale = max(1.0, max(abs(s.start) for s in segs))
        for s, nxt in zip(segs, segs[1:] + segs[:1]):
            if abs(s.end - nxt.start) > 1e-12 * scale:
                raise GeometryError(f"curve is not closed: {s.end} -> {nxt.start}")
        area = sum(s.signed_area() for s in segs)
        if area == 0:
            raise GeometryError("curve encloses zero area")
        if area < 0:
            segs = tuple(s.reversed() for s in reversed(segs))
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "orientation", int(orientation))
        if validate:
            self.check_simple()

    # -- geometry
    @property
    def length(self) -> float:
        return sum(s.length for s in self.segments)

    @property
    def area(self) -> float:
        return sum(s.signed_area() for s in self.segments)

    def bbox(self):
        boxes = np.array([s.bbox() for s in self.segments])
        return boxes[:, 0].min(), boxes[:, 1].max(), boxes[:, 2].min(), boxes[:, 3].max()

    def with_orientation(self, orientation: int) -> "Curve":
        return Curve(self.segments, orientation, validate=False)

    def reversed(self) -> "Curve":
        return self.with_orientation(-self.orientation)

    def traversal(self) -> list:
        """Segments in the order (and direction) in which the curve is traversed."""
        if self.orientation == 1:
            return list(self.segments)
        return [s.reversed() for s in reversed(self.segments)]

    def is_axis_parallel(self) -> bool:
        return all(s.kind == "line" and (s.start.real == s.end.real or s.start.imag == s.end.imag)
                   for s in self.segments)

    def vertices(self) -> list:
        return [s.start for s in self.segments]

    def distance(self, p) -> np.ndarray:
        p = _as_points(p)
        lines = [s for s in self.segments if s.kind == "line"]
        out = np.full(p.shape, np.inf)
        if lines:
            a = np.array([s.start for s in lines])
            b = np.array([s.end for s in lines])
            for chunk in range(0, p.size, 4096):
                q = p[chunk:chunk + 4096]
                out[chunk:chunk + 4096] = _point_line_distance(q[:, None], a[None, :], b[None, :]).min(axis=1)
        for s in self.segments:
            if s.kind == "arc":
                out = np.minimum(out, s.distance(p))
        return out

    def geometric_winding(self, p) -> np.ndarray:
        """Winding number of the counterclockwise traversal (1 inside, 0 outside)."""
        p = _as_points(p)
        total = np.zeros(p.shape)
        lines = [s for s in self.segments if s.kind == "line"]
        if lines:
            a = np.array([s.start for s in lines])
            b = np.array([s.end for s in lines])
            for chunk in range(0, p.size, 2048):
                q = p[chunk:chunk + 2048, None]
                total[chunk:chunk + 2048] = np.angle((b - q) * np.conj(a - q)).sum(axis=1)
        for s in self.segments:
            if s.kind == "arc":
                total = total + s.delta_arg(p)
        return np.rint(total / TWO_PI).astype(int)

    def winding(self, p) -> np.ndarray:
        return self.orientation * self.geometric_winding(p)

    def check_simple(self) -> None:
        segs = self.segments
        n = len(segs)
        if n < 3:
            if n == 2 and segment_distance(segs[0], segs[1]) == 0:
                # two segments always share their endpoints; check interiors
                mid0 = segs[0].point(0.5)
                if float(segs[1].distance(mid0)[0]) == 0:
                    raise GeometryError("curve is not simple")
            return
        scale = max(1.0, max(abs(s.start) for s in segs))
        tol = REL_TOL * scale
        if all(s.kind == "line" for s in segs):
            a = np.array([s.start for s in segs])
            b = np.array([s.end for s in segs])
            idx = np.arange(n)
            for i in range(n):
                j = idx[i + 2:]
                if i == 0:
                    j = j[j != n - 1]
                if j.size == 0:
                    continue
                d = _lines_distance(a[i], b[i], a[j], b[j])
                if np.any(d <= tol):
                    raise GeometryError(f"curve is not simple: segment {i} meets segment {j[np.argmin(d)]}")
            return
        for i in range(n):
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                if segment_distance(segs[i], segs[j]) <= tol:
                    raise GeometryError(f"curve is not simple: segment {i} meets segment {j}")

    def point_on(self) -> complex:
        """A point lying on the curve (used for nesting tests)."""
        return complex(self.segments[0].point(0.5))

    def to_json(self) -> dict:
        return {"orientation": self.orientation,
                "segments": [s.to_json() for s in self.segments]}

    @classmethod
    def from_json(cls, obj: dict, validate: bool = True) -> "Curve":
        try:
            segs = [Segment.from_json(s) for s in obj["segments"]]
            orientation = int(obj.get("orientation", 1))
        except KeyError as exc:
            raise ParseError(f"curve is missing field {exc.args[0]!r}") from None
        try:
            return cls(segs, orientation, validate=validate)
        except GeometryError as exc:
            raise ParseError(f"invalid curve: {exc}") from None


def curve_distance(c1: Curve, c2: Curve) -> float:
    l1 = [s for s in c1.segments if s.kind == "line"]
    l2 = [s for s in c2.segments if s.kind == "line"]
    best = math.inf
    if l1 and l2:
        a1 = np.array([s.start for s in l1])[:, None]
        b1 = np.array([s.end for s in l1])[:, None]
        a2 = np.array([s.start for s in l2])[None, :]
        b2 = np.array([s.end for s in l2])[None, :]
        best = float(_lines_distance(a1, b1, a2, b2).min())
    for s in c1.segments:
        for t in c2.segments:
            if s.kind == "arc" or t.kind == "arc":
                best = min(best, segment_distance(s, t))
    return best


@dataclass(frozen=True)
class Cycle:
    curves: tuple = field(default=())

    def __init__(self, curves: Iterable[Curve]):
        curves = tuple(curves)
        if not curves:
            raise GeometryError("a cycle needs at least one curve")
        object.__setattr__(self, "curves", curves)

    @property
    def bounding_box(self):
        boxes = np.array([c.bbox() for c in self.curves])
        return boxes[:, 0].min(), boxes[:, 1].max(), boxes[:, 2].min(), boxes[:, 3].max()

    @property
    def diameter(self) -> float:
        x0, x1, y0, y1 = self.bounding_box
        return math.hypot(x1 - x0, y1 - y0)

    @property
    def length(self) -> float:
        return sum(c.length for c in self.curves)

    @property
    def n_segments(self) -> int:
        return sum(len(c.segments) for c in self.curves)

    def on_tolerance(self) -> float:
        return REL_TOL * max(self.diameter, 1e-300)

    def distance(self, p) -> np.ndarray:
        p = _as_points(p)
        return np.min([c.distance(p) for c in self.curves], axis=0)

    def winding_many(self, p) -> np.ndarray:
        p = _as_points(p)
        return np.sum([c.winding(p) for c in self.curves], axis=0)

    def reversed(self) -> "Cycle":
        return Cycle(c.reversed() for c in self.curves)

    def traversal(self) -> list:
        return [seg for c in self.curves for seg in c.traversal()]

    def to_json(self) -> dict:
        return {"curves": [c.to_json() for c in self.curves]}

    @classmethod
    def from_json(cls, obj: dict) -> "Cycle":
        if not isinstance(obj, dict) or "curves" not in obj:
            raise ParseError("cycle JSON needs a 'curves' field")
        return cls(Curve.from_json(c) for c in obj["curves"])


def winding_number(cycle: Cycle, p: complex) -> int:
    """Index of the cycle at ``p``: the sum of the member-curve indices."""
    tol = cycle.on_tolerance()
    if float(cycle.distance(p)[0]) <= tol:
        raise PointOnCycle(f"point {p} lies on the cycle")
    return int(cycle.winding_many(p)[0])


def classify(cycle: Cycle, p: complex, tol: float = 0.0) -> str:
    """Return ``"OnCycle"``, ``"Interior"`` or ``"Exterior"``."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    d = float(cycle.distance(p)[0])
    if d <= tol or d == 0.0:
        return "OnCycle"
    w = int(cycle.winding_many(p)[0])
    return "Interior" if w == 1 else "Exterior"


def classify_many(cycle: Cycle, p, tol: float = 0.0) -> np.ndarray:
    """Vectorised :func:`classify`: 1 interior, 0 exterior, -1 on the cycle."""
    p = _as_points(p)
    d = cycle.distance(p)
    w = cycle.winding_many(p)
    out = np.where(w == 1, 1, 0)
    return np.where((d <= tol) | (d == 0.0), -1, out)


def probe_points(bbox, n_segments: int) -> np.ndarray:
    """Midpoints of a (2n+1) x (2n+1) refinement of the (slightly padded) box."""
    x0, x1, y0, y1 = bbox
    pad = 0.05 * max(x1 - x0, y1 - y0, 1e-12)
    x0, x1, y0, y1 = x0 - pad, x1 + pad, y0 - pad, y1 + pad
    m = min(2 * n_segments + 1, MAX_PROBES_PER_AXIS)
    m = max(m, 9)
    xs = x0 + (np.arange(m) + 0.5) * (x1 - x0) / m
    ys = y0 + (np.arange(m) + 0.5) * (y1 - y0) / m
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return (X + 1j * Y).ravel()


def _off_cycle_probes(cycle: Cycle) -> np.ndarray:
    p = probe_points(cycle.bounding_box, cycle.n_segments)
    keep = cycle.distance(p) > 1e-9 * max(cycle.diameter, 1e-300)
    return p[keep]


def make_admissible(curves: Sequence[Curve], check_disjoint: bool = True,
                    check_positive: bool = True) -> Cycle:
    """Orient a family of disjoint Jordan curves into an admissible cycle.

    Each curve is oriented positively when the number of member curves that
    contain it is even and negatively when it is odd, so that the index is 1
    on the enclosed region and 0 elsewhere.
    """
    curves = list(curves)
    if not curves:
        raise GeometryError("no curves given")
    if check_disjoint:
        scale = max(1.0, *(abs(v) for c in curves for v in c.vertices()))
        for i in range(len(curves)):
            for j in range(i + 1, len(curves)):
                if curve_distance(curves[i], curves[j]) <= REL_TOL * scale:
                    raise Overlapping(f"curves {i} and {j} intersect")
    depth = []
    for i, ci in enumerate(curves):
        p = ci.point_on()
        d = sum(1 for j, cj in enumerate(curves) if j != i and cj.geometric_winding(p)[0] == 1)
        depth.append(d)
    oriented = [c.with_orientation(1 if d % 2 == 0 else -1) for c, d in zip(curves, depth)]
    cycle = Cycle(oriented)
    if check_positive:
        w = cycle.winding_many(_off_cycle_probes(cycle))
        if w.size and (w.max() > 1 or w.min() < 0):
            raise NotPositive(f"index takes the value {int(w.max() if w.max() > 1 else w.min())}")
    return cycle


def cycle_union(c1: Cycle, c2: Cycle) -> Cycle:
    """Admissible cycle whose interior is int(c1) union int(c2).

    The closures of the two interiors must be disjoint.
    """
    scale = max(c1.diameter, c2.diameter, 1.0)
    for a in c1.curves:
        for b in c2.curves:
            if curve_distance(a, b) <= REL_TOL * scale:
                raise InteriorsOverlap("the two cycles touch or intersect")
    for a in c1.curves:
        if c2.winding_many(a.point_on())[0] != 0:
            raise InteriorsOverlap("a curve of the first cycle lies inside the second")
    for b in c2.curves:
        if c1.winding_many(b.point_on())[0] != 0:
            raise InteriorsOverlap("a curve of the second cycle lies inside the first")
    out = make_admissible(list(c1.curves) + list(c2.curves), check_disjoint=False)
    probes = _off_cycle_probes(out)
    if np.any(out.winding_many(probes) != c1.winding_many(probes) + c2.winding_many(probes)):
        raise InteriorsOverlap("interiors overlap at a probe point")
    return out


# ---------------------------------------------------------------------------
# constructors


def circle(center=0j, radius=1.0, orientation: int = 1) -> Curve:
    return Curve([Segment.arc(center, radius, 0.0, TWO_PI)], orientation)


def polygon(points: Sequence[complex], orientation: int = 1, validate: bool = True) -> Curve:
    pts = [complex(p) for p in points]
    if len(pts) > 1 and pts[0] == pts[-1]:
        pts = pts[:-1]
    segs = [Segment.line(a, b) for a, b in zip(pts, pts[1:] + pts[:1])]
    return Curve(segs, orientation, validate=validate)


def rectangle(x0, x1, y0, y1, orientation: int = 1) -> Curve:
    if not (x0 < x1 and y0 < y1):
        raise GeometryError("rectangle needs x0 < x1 and y0 < y1")
    return polygon([complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)],
                   orientation, validate=False)


def single(curve: Curve) -> Cycle:
    return Cycle([curve.with_orientation(1)])


# ---------------------------------------------------------------------------
# regions


@dataclass(frozen=True)
class Rect:
    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise GeometryError(f"empty rectangle {self}")

    @property
    def inradius(self) -> float:
        return 0.5 * min(self.x1 - self.x0, self.y1 - self.y0)

    def eroded(self, e: float) -> "Rect":
        return Rect(self.x0 + e, self.x1 - e, self.y0 + e, self.y1 - e)

    def contains(self, p, closed=True, tol=0.0):
        p = _as_points(p)
        x, y = p.real, p.imag
        if closed:
            return ((x >= self.x0 - tol) & (x <= self.x1 + tol)
                    & (y >= self.y0 - tol) & (y <= self.y1 + tol))
        return (x > self.x0) & (x < self.x1) & (y > self.y0) & (y < self.y1)

    def distance(self, p):
        p = _as_points(p)
        dx = np.maximum(np.maximum(self.x0 - p.real, p.real - self.x1), 0.0)
        dy = np.maximum(np.maximum(self.y0 - p.imag, p.imag - self.y1), 0.0)
        return np.hypot(dx, dy)

    def meets_cells(self, cx0, cx1, cy0, cy1):
        return (cx0 <= self.x1) & (cx1 >= self.x0) & (cy0 <= self.y1) & (cy1 >= self.y0)

    def bbox(self):
        return self.x0, self.x1, self.y0, self.y1

    def to_json(self):
        return {"rect": [self.x0, self.x1, self.y0, self.y1]}


@dataclass(frozen=True)
class Disc:
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise GeometryError("disc radius must be positive")

    @property
    def inradius(self) -> float:
        return self.radius

    def eroded(self, e: float) -> "Disc":
        return Disc(self.center, self.radius - e)

    def contains(self, p, closed=True, tol=0.0):
        d = np.abs(_as_points(p) - self.center)
        if closed:
            return d <= self.radius * (1 + REL_TOL) + tol
        return d < self.radius

    def distance(self, p):
        return np.maximum(np.abs(_as_points(p) - self.center) - self.radius, 0.0)

    def meets_cells(self, cx0, cx1, cy0, cy1):
        c = self.center
        dx = np.maximum(np.maximum(cx0 - c.real, c.real - cx1), 0.0)
        dy = np.maximum(np.maximum(cy0 - c.imag, c.imag - cy1), 0.0)
        return np.hypot(dx, dy) <= self.radius

    def bbox(self):
        c, r = self.center, self.radius
        return c.real - r, c.real + r, c.imag - r, c.imag + r

    def to_json(self):
        return {"disc": [self.center.real, self.center.imag, self.radius]}


@dataclass(frozen=True)
class Region:
    """Finite union of closed rectangles and discs."""

    shapes: tuple

    def __init__(self, shapes: Iterable):
        object.__setattr__(self, "shapes", tuple(shapes))

    def __bool__(self):
        return bool(self.shapes)

    def contains(self, p, closed=True, tol=0.0) -> np.ndarray:
        p = _as_points(p)
        out = np.zeros(p.shape, dtype=bool)
        for s in self.shapes:
            out |= s.contains(p, closed=closed, tol=tol)
        return out

    def distance(self, p) -> np.ndarray:
        p = _as_points(p)
        if not self.shapes:
            return np.full(p.shape, np.inf)
        return np.min([s.distance(p) for s in self.shapes], axis=0)

    def eroded(self, fraction: float = 0.1) -> tuple["Region", float]:
        """Shrink every shape by ``fraction`` of its inradius.

        Returns the shrunk region and the smallest erosion depth, which is a
        lower bound for the distance from the shrunk region to the complement
        of the original one.
        """
        shapes, depths = [], []
        for s in self.shapes:
            e = fraction * s.inradius
            shapes.append(s.eroded(e))
            depths.append(e)
        return Region(shapes), (min(depths) if depths else 0.0)

    def meets_cells(self, cx0, cx1, cy0, cy1) -> np.ndarray:
        out = np.zeros(np.shape(cx0), dtype=bool)
        for s in self.shapes:
            out |= s.meets_cells(cx0, cx1, cy0, cy1)
        return out

    def bbox(self):
        boxes = np.array([s.bbox() for s in self.shapes])
        return boxes[:, 0].min(), boxes[:, 1].max(), boxes[:, 2].min(), boxes[:, 3].max()

    def boundary_samples(self, n: int = 256) -> np.ndarray:
        pts = []
        for s in self.shapes:
            if isinstance(s, Disc):
                pts.append(s.center + s.radius * np.exp(1j * np.linspace(0, TWO_PI, n, endpoint=False)))
            else:
                t = np.linspace(0, 1, n // 4, endpoint=False)
                pts += [s.x0 + t * (s.x1 - s.x0) + 1j * s.y0, s.x1 + 1j * (s.y0 + t * (s.y1 - s.y0)),
                        s.x1 - t * (s.x1 - s.x0) + 1j * s.y1, s.x0 + 1j * (s.y1 - t * (s.y1 - s.y0))]
        return np.concatenate(pts) if pts else np.zeros(0, complex)

    def to_json(self):
        return [s.to_json() for s in self.shapes]

    @classmethod
    def from_json(cls, obj) -> "Region":
        if isinstance(obj, dict) and "region" in obj:
            obj = obj["region"]
        if not isinstance(obj, list):
            raise ParseError("region JSON must be a list of {'rect': ...} / {'disc': ...} items")
        shapes = []
        for item in obj:
            try:
                if "rect" in item:
                    shapes.append(Rect(*map(float, item["rect"])))
                elif "disc" in item:
                    cx, cy, r = map(float, item["disc"])
                    shapes.append(Disc(complex(cx, cy), r))
                else:
                    raise ParseError(f"region item {item!r} has neither 'rect' nor 'disc'")
            except (TypeError, ValueError, GeometryError) as exc:
                raise ParseError(f"malformed region item {item!r}: {exc}") from None
        return cls(shapes)


# ---------------------------------------------------------------------------
# grid cycles

_DIRS = {(1, 0), (0, 1), (-1, 0), (0, -1)}


def _trace_loops(edges: dict):
    """Chain directed unit edges into closed loops.

    ``edges`` maps a start vertex (i, j) to a list of outgoing directions.  At
    a vertex with two outgoing edges the sharpest left turn is taken, which
    keeps the marked region on the left and splits corner-touching pieces.
    Returns a list of loops; each loop is a list of (vertex, pinched) pairs.
    """
    remaining = {v: list(ds) for v, ds in edges.items()}
    pinch = {v for v, ds in edges.items() if len(ds) > 1}
    loops = []
    for start in sorted(edges):
        while remaining.get(start):
            d = remaining[start].pop(0)
            loop = [start]
            v = (start[0] + d[0], start[1] + d[1])
            while True:
                outs = remaining.get(v)
                if v == start and (not outs or d is None):
                    break
                if not outs:
                    if v == start:
                        break
                    raise GeometryError("grid boundary is not closed")
                if len(outs) == 1:
                    nd = outs.pop()
                else:
                    prefs = [(-d[1], d[0]), d, (d[1], -d[0])]
                    nd = next(p for p in prefs if p in outs)
                    outs.remove(nd)
                if v == start:
                    # the loop closed at a pinch vertex; keep the rest for another loop
                    outs.append(nd)
                    break
                loop.append(v)
                d = nd
                v = (v[0] + d[0], v[1] + d[1])
            loops.append([(u, u in pinch) for u in loop])
    return loops


def grid_cover_cycle(box, xs, ys, mark) -> Cycle:
    """Admissible cycle whose closed interior is the union of marked grid cells.

    ``xs`` and ``ys`` partition ``box = (x0, x1, y0, y1)``.  ``mark`` is
    either a boolean array of shape (len(xs)-1, len(ys)-1) or a callable
    taking the arrays (cx0, cx1, cy0, cy1) of cell bounds and returning such
    an array.  Where two marked cells meet only at a corner, each loop is cut
    back by a tiny chamfer so that the curves stay disjoint.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    x0, x1, y0, y1 = box
    if xs.ndim != 1 or ys.ndim != 1 or xs.size < 2 or ys.size < 2:
        raise GeometryError("need at least two grid lines in each direction")
    if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
        raise GeometryError("grid coordinates must be strictly increasing")
    if xs[0] != x0 or xs[-1] != x1 or ys[0] != y0 or ys[-1] != y1:
        raise GeometryError("grid lines must start and end on the box edges")
    if callable(mark):
        CX0, CY0 = np.meshgrid(xs[:-1], ys[:-1], indexing="ij")
        CX1, CY1 = np.meshgrid(xs[1:], ys[1:], indexing="ij")
        marked = np.asarray(mark(CX0, CX1, CY0, CY1), dtype=bool)
    else:
        marked = np.asarray(mark, dtype=bool)
    nx, ny = xs.size - 1, ys.size - 1
    if marked.shape != (nx, ny):
        raise GeometryError(f"mark array has shape {marked.shape}, expected {(nx, ny)}")
    if marked.all():
        raise AllMarked("every cell is marked: the exterior would be empty")
    if not marked.any():
        raise NoneMarked("no cell is marked: the interior would be empty")

    M = np.zeros((nx + 2, ny + 2), dtype=bool)
    M[1:-1, 1:-1] = marked
    edges: dict = {}
    # vertical edges at vertex column i between cells (i-1, j) and (i, j)
    left, right = M[:-1, 1:-1], M[1:, 1:-1]
    for i, j in zip(*np.nonzero(left & ~right)):
        edges.setdefault((int(i), int(j)), []).append((0, 1))
    for i, j in zip(*np.nonzero(right & ~left)):
        edges.setdefault((int(i), int(j) + 1), []).append((0, -1))
    below, above = M[1:-1, :-1], M[1:-1, 1:]
    for i, j in zip(*np.nonzero(below & ~above)):
        edges.setdefault((int(i) + 1, int(j)), []).append((-1, 0))
    for i, j in zip(*np.nonzero(above & ~below)):
        edges.setdefault((int(i), int(j)), []).append((1, 0))

    # exact check of the index at every cell centre: a rightward ray from the
    # centre of cell (i, j) crosses the vertical edges at columns > i
    D = np.zeros((nx + 1, ny), dtype=int)
    for (i, j), ds in edges.items():
        for d in ds:
            if d == (0, 1):
                D[i, j] += 1
            elif d == (0, -1):
                D[i, j - 1] -= 1
    wind = np.cumsum(D[::-1], axis=0)[::-1][1:]
    if not np.array_equal(wind, marked.astype(int)):
        raise GeometryError("internal error: grid boundary index does not match the marked cells")

    eps = 2.0 ** -20 * min(np.diff(xs).min(), np.diff(ys).min())
    curves = []
    traced_sign = []
    for loop in _trace_loops(edges):
        n = len(loop)
        pts = []
        for k, (v, pinched) in enumerate(loop):
            prev_v = loop[k - 1][0]
            next_v = loop[(k + 1) % n][0]
            d_in = (v[0] - prev_v[0], v[1] - prev_v[1])
            d_out = (next_v[0] - v[0], next_v[1] - v[1])
            d_in = (int(np.sign(d_in[0])), int(np.sign(d_in[1])))
            d_out = (int(np.sign(d_out[0])), int(np.sign(d_out[1])))
            if d_in == d_out and not pinched:
                continue
            z = complex(xs[v[0]], ys[v[1]])
            if pinched:
                pts.append(z - eps * complex(*d_in))
                pts.append(z + eps * complex(*d_out))
            else:
                pts.append(z)
        signed = 0.5 * sum(_cross(a, b) for a, b in zip(pts, pts[1:] + pts[:1]))
        traced_sign.append(1 if signed > 0 else -1)
        curves.append(polygon(pts, validate=False))
    cycle = make_admissible(curves, check_disjoint=False, check_positive=False)
    for c, s in zip(cycle.curves, traced_sign):
        if c.orientation != s:
            raise GeometryError("internal error: loop orientation disagrees with nesting parity")
    return cycle


def uniform_grid(lo: float, hi: float, n: int) -> np.ndarray:
    return np.linspace(lo, hi, n + 1)
