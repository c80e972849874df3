"""Planar geometry of the single-camera, three-mirror imaging arrangement.

The device images three vertical faces of a square-outline body (drawn rotated
45 degrees, corners on the axes) with one camera. Two virtual cameras P and Q
sit on the diagonals y = x and y = -x and view the upper-right and lower-right
faces head on. Mirror A folds P's beam once onto the physical camera H; mirrors
B and C fold Q's beam twice onto the same camera. Choosing the four free
variables (a, b, c, theta1) fixes everything else:

* the total optical path length b + c + d follows from requiring the camera H
  (the mirror image of P across mirror A's line) to sit on the y axis,
* mirror B's angle theta2 and mirror C's angle theta3 follow from a nonlinear
  condition solved by bracketing and bisection: mirror C's line must be the
  perpendicular bisector of the segment joining H to R (the image of Q across
  mirror B), and the point C where it crosses line BR must satisfy |BC| = c.

All lengths are millimetres; angles are radians internally and degrees at
interfaces. Every function here is pure, so designs can be evaluated
concurrently without shared state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateAngle,
    DegenerateRH,
    GeometricFailure,
    NoRoot,
    ParallelLines,
    ReflectionInconsistent,
)
from .validation import check_positive

SQRT2 = math.sqrt(2.0)

# Scan grid for the mirror-B angle, degrees. The full mod-180 line-angle range
# is scanned (ends trimmed where the mirror degenerates into the diagonal
# beam): restricting to obtuse angles would miss the physical branch, whose
# mirror-B line has positive slope.
_THETA2_SCAN_LO_DEG = 1.0
_THETA2_SCAN_HI_DEG = 179.0
_THETA2_SCAN_STEP_DEG = 0.1
_RESIDUAL_TOL = 1e-9  # mm^2
_PARALLEL_TOL = 1e-12
_DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class Point2:
    """A point in the arrangement plane (mm)."""

    x: float
    y: float

    def distance_to(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Line2:
    """Infinite line through `point` along direction `(dx, dy)`."""

    point: Point2
    dx: float
    dy: float

    @classmethod
    def from_angle(cls, point: Point2, angle: float) -> "Line2":
        return cls(point, math.cos(angle), math.sin(angle))

    @classmethod
    def through(cls, p: Point2, q: Point2) -> "Line2":
        return cls(p, q.x - p.x, q.y - p.y)

    @property
    def norm(self) -> float:
        return math.hypot(self.dx, self.dy)


def reflect_across_line(p: Point2, line: Line2) -> Point2:
    """Mirror image of `p` across `line`."""
    n = line.norm
    if n < _DEGENERATE_TOL:
        raise ParallelLines("mirror line has zero direction")
    ux, uy = line.dx / n, line.dy / n
    vx, vy = p.x - line.point.x, p.y - line.point.y
    t = vx * ux + vy * uy
    return Point2(line.point.x + 2.0 * t * ux - vx, line.point.y + 2.0 * t * uy - vy)


def intersect_lines(l1: Line2, l2: Line2) -> Point2:
    """Intersection point of two lines; raises ParallelLines if ill-conditioned."""
    cross = l1.dx * l2.dy - l1.dy * l2.dx
    scale = l1.norm * l2.norm
    if abs(cross) < _PARALLEL_TOL * max(scale, 1.0):
        raise ParallelLines("lines are parallel or degenerate")
    rx, ry = l2.point.x - l1.point.x, l2.point.y - l1.point.y
    t = (rx * l2.dy - ry * l2.dx) / cross
    return Point2(l1.point.x + t * l1.dx, l1.point.y + t * l1.dy)


@dataclass(frozen=True)
class SceneConfig:
    """Fixed dimensions of the observed body and the placement clearances (mm, deg)."""

    r: float = 17.0
    l_v: float = 118.0
    min_a0_clearance: float = 3.0
    min_c1_x: float = 2.0
    min_angular_gap_deg: float = 1.0
    c1_clearance: float = 30.0
    c2_clearance: float = 10.0
    max_beta_deg: float = 17.5

    def __post_init__(self):
        check_positive("r", self.r)
        check_positive("l_v", self.l_v)
        if self.l_v <= 2.0 * self.r:
            raise ValueError(
                f"l_v must exceed 2*r (circle inside the square), got l_v={self.l_v}, r={self.r}"
            )


@dataclass(frozen=True)
class DesignVector:
    """The four free variables: mirror offsets a, b, c (mm) and mirror A angle theta1 (rad)."""

    a: float
    b: float
    c: float
    theta1: float

    @classmethod
    def from_array(cls, x) -> "DesignVector":
        a, b, c, theta1 = (float(v) for v in x)
        return cls(a, b, c, theta1)

    @classmethod
    def from_degrees(cls, a: float, b: float, c: float, theta1_deg: float) -> "DesignVector":
        return cls(float(a), float(b), float(c), math.radians(theta1_deg))

    def to_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.theta1], dtype=float)

    @property
    def theta1_deg(self) -> float:
        return math.degrees(self.theta1)


@dataclass(frozen=True)
class SolverReport:
    """Diagnostics of the mirror-C angle solve."""

    residual: float
    root_count: int
    multiple_roots: bool


@dataclass(frozen=True)
class ArrangementSolution:
    """A fully derived arrangement: every point, angle, objective and constraint."""

    design: DesignVector
    d: float
    theta2: float
    theta3: float
    A: Point2
    B: Point2
    C: Point2
    H: Point2
    P: Point2
    Q: Point2
    R: Point2
    V0: Point2
    V1: Point2
    V2: Point2
    A0: Point2
    A1: Point2
    B0: Point2
    B1: Point2
    C1: Point2
    C2: Point2
    K1: Point2
    K2: Point2
    beta_deg: float
    f: tuple[float, float, float]
    g: tuple[float, float, float, float, float, float]
    feasible: bool
    solver_report: SolverReport = field(repr=False)

    @property
    def path_length(self) -> float:
        """Total unfolded optical path b + c + d."""
        return self.design.b + self.design.c + self.d


def total_path_length(a: float, theta1: float) -> float:
    """Unfolded path length b + c + d implied by a and theta1.

    Forcing the camera (the image of P across mirror A's line) onto the y axis
    fixes b + c + d = a * 2(tan(theta1) - tan^2(theta1)) / (1 + 2 tan(theta1) - tan^2(theta1)).
    """
    t = math.tan(theta1)
    denom = 1.0 + 2.0 * t - t * t
    if abs(denom) < _DEGENERATE_TOL:
        raise DegenerateAngle(f"path-length denominator vanishes at theta1={theta1!r} rad")
    return a * 2.0 * (t - t * t) / denom


def derive_d(a: float, b: float, c: float, theta1: float) -> float:
    """Camera leg length d (mirror C to camera H) for the given design variables."""
    return total_path_length(a, theta1) - b - c


def base_points(l_v: float, b: float, path: float) -> dict[str, Point2]:
    """Face corners and the diagonal-mounted points for a given b and path length."""
    h = l_v / SQRT2
    s = path / SQRT2
    return {
        "V0": Point2(h, 0.0),
        "V1": Point2(0.0, h),
        "V2": Point2(0.0, -h),
        "B": Point2(b / SQRT2, -b / SQRT2),
        "P": Point2(s, s),
        "Q": Point2(s, -s),
    }


def camera_point(a: float, theta1: float, P: Point2) -> Point2:
    """Physical camera H: the image of P across mirror A's line through (a/sqrt2, a/sqrt2).

    The path length derivation guarantees x_H = 0; a residual above 1e-6 mm
    means the inputs are inconsistent.
    """
    A = Point2(a / SQRT2, a / SQRT2)
    H = reflect_across_line(P, Line2.from_angle(A, theta1))
    if abs(H.x) > 1e-6:
        raise ReflectionInconsistent(f"camera left the optical axis: x_H={H.x!r}")
    return H


def _mirror_b_image(theta2, b: float, path: float, hx: float, hy: float):
    """Pieces of the mirror-C condition for scalar or ndarray theta2.

    Returns (residual, tau, Cx, Cy, Rx, Ry, valid) where tau is C's barycentric
    parameter along segment BR. Invalid entries (degenerate RH or BR parallel
    to the bisector) come back masked, as NaN residuals in array mode.
    """
    bx = b / SQRT2
    by = -bx
    k = (path - b) / SQRT2
    c2 = np.cos(2.0 * theta2)
    s2 = np.sin(2.0 * theta2)
    rx = bx + k * (c2 - s2)
    ry = by + k * (s2 + c2)
    dx = rx - hx
    dy = ry - hy
    ex = rx - bx
    ey = ry - by
    dot = ex * dx + ey * dy
    norms = np.hypot(dx, dy) * np.hypot(ex, ey)
    valid = (np.abs(dy) >= _DEGENERATE_TOL) & (np.abs(dot) >= _PARALLEL_TOL * np.maximum(norms, 1.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        mx = 0.5 * (rx + hx)
        my = 0.5 * (ry + hy)
        tau = ((mx - bx) * dx + (my - by) * dy) / dot
        cx = bx + tau * ex
        cy = by + tau * ey
        res = cx * (cx - 2.0 * bx) + cy * (cy - 2.0 * by) + b * b
    return res, tau, cx, cy, rx, ry, valid


def solve_mirror_c(b: float, c: float, path: float, H: Point2) -> tuple[float, float, Point2, Point2, SolverReport]:
    """Solve for (theta2, theta3) and the derived points R and C.

    Scans theta2 over (1, 179) degrees in 0.1 degree steps for sign changes of
    the |BC| = c condition, bisects each bracket to |residual| <= 1e-9 mm^2,
    and keeps roots whose C lies strictly inside segment BR with x_C > 0 and
    above the camera (the camera faces +y, so a mirror below it is unviewable).
    Returns the smallest admissible theta2; multiplicity is reported.
    """
    grid = np.radians(
        np.arange(_THETA2_SCAN_LO_DEG, _THETA2_SCAN_HI_DEG + 1e-9, _THETA2_SCAN_STEP_DEG)
    )
    c2_target = c * c

    def residual(theta2: float) -> float:
        res, _, _, _, _, ry, valid = _mirror_b_image(theta2, b, path, H.x, H.y)
        if not valid:
            if abs(float(ry) - H.y) < _DEGENERATE_TOL:
                raise DegenerateRH(f"R and H share a y coordinate at theta2={theta2!r}")
            raise ParallelLines(f"line BR parallel to mirror C at theta2={theta2!r}")
        return float(res) - c2_target

    res_grid, _, _, _, _, ry_grid, valid = _mirror_b_image(grid, b, path, H.x, H.y)
    res_grid = np.where(valid, res_grid - c2_target, np.nan)

    roots: list[float] = []
    finite = np.isfinite(res_grid)
    for i in range(len(grid) - 1):
        if not (finite[i] and finite[i + 1]):
            continue
        lo, hi = float(grid[i]), float(grid[i + 1])
        f_lo, f_hi = float(res_grid[i]), float(res_grid[i + 1])
        if f_lo == 0.0:
            roots.append(lo)
            continue
        if f_lo * f_hi > 0.0:
            continue
        try:
            roots.append(_bisect(residual, lo, hi, f_lo, f_hi))
        except GeometricFailure:
            continue
    if finite[-1] and res_grid[-1] == 0.0:
        roots.append(float(grid[-1]))

    accepted: list[tuple[float, float]] = []
    for theta2 in sorted(roots):
        if accepted and theta2 - accepted[-1][0] < 1e-10:
            continue
        res, tau, cx, cy, _, _, valid = _mirror_b_image(theta2, b, path, H.x, H.y)
        if not valid:
            continue
        if 0.0 < float(tau) < 1.0 and float(cx) > 0.0 and float(cy) > H.y:
            accepted.append((theta2, float(res) - c2_target))
    if not accepted:
        raise NoRoot("no admissible mirror-C placement for this design")

    theta2, res_at_root = accepted[0]
    _, _, cx, cy, rx, ry = _mirror_b_image(theta2, b, path, H.x, H.y)[:6]
    R = Point2(float(rx), float(ry))
    C = Point2(float(cx), float(cy))
    # Mirror C runs perpendicular to RH (it is RH's perpendicular bisector).
    wx, wy = -(R.y - H.y), R.x - H.x
    if wy < 0.0:
        wx, wy = -wx, -wy
    theta3 = math.atan2(wy, wx)
    report = SolverReport(
        residual=abs(res_at_root), root_count=len(accepted), multiple_roots=len(accepted) > 1
    )
    return theta2, theta3, R, C, report


def _bisect(f, lo: float, hi: float, f_lo: float, f_hi: float) -> float:
    """Bisection on a bracketing interval, driven to |f| <= 1e-9 or machine width."""
    mid = 0.5 * (lo + hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if abs(f_mid) <= _RESIDUAL_TOL:
            return mid
        if (f_lo < 0.0) != (f_mid < 0.0):
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
        if hi - lo <= 4.0 * math.ulp(max(abs(lo), abs(hi))):
            break
    return mid


def point_c(R: Point2, H: Point2, theta3: float, B: Point2) -> Point2:
    """Intersection of mirror C's line (through the RH midpoint) with line BR."""
    mid = Point2(0.5 * (R.x + H.x), 0.5 * (R.y + H.y))
    return intersect_lines(Line2.from_angle(mid, theta3), Line2.through(B, R))


def mirror_segments(
    P: Point2,
    Q: Point2,
    R: Point2,
    V0: Point2,
    V1: Point2,
    V2: Point2,
    line_a: Line2,
    line_b: Line2,
    line_c: Line2,
) -> dict[str, Point2]:
    """Mirror endpoints cut by the corner beams.

    Mirror A is clipped by P's beam to the face corners V0 and V1; mirror B by
    Q's beam to V0 and V2. The beam continues from B0/B1 toward R (Q's image
    in mirror B) and cuts mirror C; endpoints are labelled so x_C1 <= x_C2.
    """
    a0 = intersect_lines(Line2.through(P, V0), line_a)
    a1 = intersect_lines(Line2.through(P, V1), line_a)
    b0 = intersect_lines(Line2.through(Q, V0), line_b)
    b1 = intersect_lines(Line2.through(Q, V2), line_b)
    c_from_b0 = intersect_lines(Line2.through(b0, R), line_c)
    c_from_b1 = intersect_lines(Line2.through(b1, R), line_c)
    if c_from_b0.x <= c_from_b1.x:
        c1, c2 = c_from_b0, c_from_b1
    else:
        c1, c2 = c_from_b1, c_from_b0
    return {"A0": a0, "A1": a1, "B0": b0, "B1": b1, "C1": c1, "C2": c2}


def clearance_points(l_v: float, C1: Point2, C2: Point2) -> tuple[Point2, Point2]:
    """Points on the body's lower-right edge (y = x - l_v/sqrt2) vertically above C1/C2."""
    h = l_v / SQRT2

    def project(p: Point2) -> Point2:
        x = min(max(p.x, 0.0), h)
        return Point2(x, x - h)

    return project(C1), project(C2)


def view_angle_beta(
    H: Point2, a_endpoints: list[Point2], c_endpoints: list[Point2]
) -> float:
    """Minimum lens half-angle (degrees) that sees every mirror from H.

    Half the angular span of the rays from the camera to all mirror endpoints
    it must image: mirror A's endpoints, mirror C's endpoints, and mirror C's
    twin mirrored across the symmetry axis (the device repeats the B/C chain
    on the left side, but not mirror A, whose fourth-face twin is omitted).
    Signed ray angles are measured from the +y axis; the camera is aimed at
    the span's bisector, so the required half-angle is half the span.
    """
    angles = [
        math.degrees(math.atan2(e.x - H.x, e.y - H.y)) for e in a_endpoints + c_endpoints
    ]
    angles += [-math.degrees(math.atan2(e.x - H.x, e.y - H.y)) for e in c_endpoints]
    return 0.5 * (max(angles) - min(angles))


def _ray_angle_deg(origin: Point2, target: Point2) -> float:
    return math.degrees(math.atan2(target.y - origin.y, target.x - origin.x))


def objectives(path: float, B: Point2, A: Point2, H: Point2) -> tuple[float, float, float]:
    """(f1, f2, f3): optical path length, device half-width x_B, vertical extent y_A - y_H."""
    return (path, B.x, A.y - H.y)


def constraints(
    scene: SceneConfig,
    H: Point2,
    V0: Point2,
    A0: Point2,
    C1: Point2,
    C2: Point2,
    K1: Point2,
    K2: Point2,
    beta_deg: float,
) -> tuple[float, float, float, float, float, float]:
    """Constraint vector (g1..g6); the design is feasible iff every entry is <= 0.

    g1 keeps the camera rays to V0 and to mirror C's right end separated by the
    angular gap; g2 keeps mirror A's lower end clear of the body corner; g3
    keeps mirror C right of the symmetry axis; g4/g5 keep mirror C below the
    body edge; g6 caps the lens half-angle.
    """
    g1 = _ray_angle_deg(H, V0) - _ray_angle_deg(H, C2) + scene.min_angular_gap_deg
    g2 = V0.x - A0.x + scene.min_a0_clearance
    g3 = scene.min_c1_x - C1.x
    g4 = C1.y - K1.y + scene.c1_clearance
    g5 = C2.y - K2.y + scene.c2_clearance
    g6 = beta_deg - scene.max_beta_deg
    return (g1, g2, g3, g4, g5, g6)


def evaluate_design(scene: SceneConfig, design: DesignVector) -> ArrangementSolution:
    """Derive the full arrangement for a design, or raise GeometricFailure.

    Pure and deterministic: the same inputs always produce the bitwise-same
    solution. The caller is responsible for bounds; this function only rejects
    designs with no geometric realization.
    """
    a, b, c, theta1 = design.a, design.b, design.c, design.theta1
    path = total_path_length(a, theta1)
    d = path - b - c
    if path - a <= 0.0:
        raise GeometricFailure(
            f"virtual camera sits at or behind mirror A (b+c+d={path!r} <= a={a!r})"
        )
    if d <= 0.0:
        raise GeometricFailure(f"camera leg collapses (d={d!r} <= 0)")

    pts = base_points(scene.l_v, b, path)
    V0, V1, V2, B, P, Q = (pts[k] for k in ("V0", "V1", "V2", "B", "P", "Q"))
    A = Point2(a / SQRT2, a / SQRT2)
    line_a = Line2.from_angle(A, theta1)
    H = reflect_across_line(P, line_a)
    if abs(H.x) > 1e-6:
        raise ReflectionInconsistent(f"camera left the optical axis: x_H={H.x!r}")

    theta2, theta3, R, C, report = solve_mirror_c(b, c, path, H)
    line_b = Line2.from_angle(B, theta2)
    mid_rh = Point2(0.5 * (R.x + H.x), 0.5 * (R.y + H.y))
    line_c = Line2.from_angle(mid_rh, theta3)

    ends = mirror_segments(P, Q, R, V0, V1, V2, line_a, line_b, line_c)
    A0, A1, B0, B1, C1, C2 = (ends[k] for k in ("A0", "A1", "B0", "B1", "C1", "C2"))
    K1, K2 = clearance_points(scene.l_v, C1, C2)
    beta = view_angle_beta(H, [A0, A1], [C1, C2])

    f = objectives(path, B, A, H)
    g = constraints(scene, H, V0, A0, C1, C2, K1, K2, beta)
    return ArrangementSolution(
        design=design,
        d=d,
        theta2=theta2,
        theta3=theta3,
        A=A,
        B=B,
        C=C,
        H=H,
        P=P,
        Q=Q,
        R=R,
        V0=V0,
        V1=V1,
        V2=V2,
        A0=A0,
        A1=A1,
        B0=B0,
        B1=B1,
        C1=C1,
        C2=C2,
        K1=K1,
        K2=K2,
        beta_deg=beta,
        f=f,
        g=g,
        feasible=max(g) <= 0.0,
        solver_report=report,
    )


def solution_to_dict(sol: ArrangementSolution, scene: SceneConfig) -> dict:
    """JSON-ready view of a solution, including the scene it was evaluated in."""
    points = {
        name: [getattr(sol, name).x, getattr(sol, name).y]
        for name in (
            "A", "B", "C", "H", "P", "Q", "R",
            "V0", "V1", "V2", "A0", "A1", "B0", "B1", "C1", "C2", "K1", "K2",
        )
    }
    return {
        "schema_version": 1,
        "design": {
            "a_mm": sol.design.a,
            "b_mm": sol.design.b,
            "c_mm": sol.design.c,
            "theta1_rad": sol.design.theta1,
            "theta1_deg": sol.design.theta1_deg,
        },
        "scene": {"r_mm": scene.r, "l_v_mm": scene.l_v},
        "d_mm": sol.d,
        "theta2_rad": sol.theta2,
        "theta2_deg": math.degrees(sol.theta2),
        "theta3_rad": sol.theta3,
        "theta3_deg": math.degrees(sol.theta3),
        "beta_deg": sol.beta_deg,
        "points": points,
        "objectives": {"f1_mm": sol.f[0], "f2_mm": sol.f[1], "f3_mm": sol.f[2]},
        "constraints": {f"g{i + 1}": sol.g[i] for i in range(6)},
        "feasible": sol.feasible,
        "solver": {
            "residual_mm2": sol.solver_report.residual,
            "root_count": sol.solver_report.root_count,
            "multiple_roots": sol.solver_report.multiple_roots,
        },
    }
