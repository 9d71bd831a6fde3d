"""Problem-instance and solution serialization.

Instance grammar (line oriented; '#' starts a comment; blank lines are
ignored). A `geometry` directive plus named sections terminated by `end`:

    geometry euclidean | hyperbolic

    triangles          # one oriented triple per line
      0 1 2

    theta              # per-edge exterior angles, keys "i-j" with i < j
      0-1 pi/2
      default 0        # optional fill for unlisted edges

    target
      mode zero | mean | explicit | boundary-phi
      k 3 0.5          # explicit mode entries (default allowed)
      phi 1 pi/2       # boundary-phi mode entries (default allowed, 0)

    radii              # optional initial radii (default 1)
      default 1
      0 0.41421356237309515

    solver             # optional
      method flow | newton
      tolerance 1e-10
      max-steps 100000
      max-dt 1.0

Angles are radian literals or fractions of pi: `pi`, `pi/4`, `3pi/4`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .circlegeom import Geometry
from .conditions import (
    CurvatureTarget,
    boundary_phi_target,
    explicit_target,
    mean_target,
    zero_target,
)
from .errors import MeshError, ParseError, ValidationError
from .mesh import TriangulatedSurface, build_surface
from .solver import FlowSpec, SolveReport

_PI_LITERAL = re.compile(r"^(\d+)?pi(?:/(\d+))?$")
_HISTORY_CAP = 4096


def parse_angle(token: str, line: int) -> float:
    m = _PI_LITERAL.match(token)
    if m:
        num = int(m.group(1)) if m.group(1) else 1
        den = int(m.group(2)) if m.group(2) else 1
        if den == 0:
            raise ParseError(line, f"zero denominator in {token!r}")
        return num * math.pi / den
    try:
        return float(token)
    except ValueError:
        raise ParseError(line, f"expected an angle (radians or n*pi/d), got {token!r}") from None


@dataclass
class SolverOptions:
    method: str = "flow"
    tolerance: float = 1e-10
    max_steps: int = 100_000
    max_dt: float = 1.0


@dataclass
class ProblemInstance:
    """A parsed and validated problem file, with its surface already built."""

    triangles: list[tuple[int, int, int]]
    geometry: Geometry
    theta: dict[tuple[int, int], float]      # fully populated over all edges
    target_mode: str
    target_k: dict[int, float] = field(default_factory=dict)
    target_phi: dict[int, float] = field(default_factory=dict)
    radii: np.ndarray | None = None
    solver: SolverOptions = field(default_factory=SolverOptions)
    surface: TriangulatedSurface | None = None

    def target(self) -> CurvatureTarget:
        if self.target_mode == "zero":
            return zero_target(self.surface, self.geometry)
        if self.target_mode == "mean":
            return mean_target(self.surface)
        if self.target_mode == "explicit":
            k = np.zeros(self.surface.n_vertices)
            for v, val in self.target_k.items():
                k[v] = val
            return explicit_target(self.surface, k, self.geometry)
        return boundary_phi_target(self.surface, self.target_phi, self.geometry)

    def flow_spec(self, tol: float | None = None, max_steps: int | None = None) -> FlowSpec:
        target = self.target()
        return FlowSpec(
            geometry=self.geometry,
            target=target,
            normalization="mean" if self.target_mode == "mean" else "none",
            dt_max=self.solver.max_dt,
            tol=tol if tol is not None else self.solver.tolerance,
            max_steps=max_steps if max_steps is not None else self.solver.max_steps,
        )


def _lines(text: str):
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield ln, line


def parse_instance(text: str) -> ProblemInstance:
    """Parse and validate an instance document; raises ParseError (with the
    line number) for malformed text and ValidationError (with the named
    constraint) for semantic violations."""
    geometry: Geometry | None = None
    triangles: list[tuple[int, int, int]] = []
    theta_entries: dict[tuple[int, int], float] = {}
    theta_default: float | None = None
    target_mode: str | None = None
    target_k: dict[int, float] = {}
    target_k_default: float | None = None
    target_phi: dict[int, float] = {}
    target_phi_default: float | None = None
    radii_entries: dict[int, float] = {}
    radii_default = 1.0
    solver = SolverOptions()

    section: str | None = None
    seen_sections: set[str] = set()
    for ln, line in _lines(text):
        tokens = line.split()
        if section is None:
            head = tokens[0]
            if head == "geometry":
                if len(tokens) != 2 or tokens[1] not in ("euclidean", "hyperbolic"):
                    raise ParseError(ln, "expected 'geometry euclidean|hyperbolic'")
                if geometry is not None:
                    raise ParseError(ln, "duplicate geometry directive")
                geometry = Geometry(tokens[1])
            elif head in ("triangles", "theta", "target", "radii", "solver"):
                if len(tokens) != 1:
                    raise ParseError(ln, f"unexpected text after section name {head!r}")
                if head in seen_sections:
                    raise ParseError(ln, f"duplicate section {head!r}")
                seen_sections.add(head)
                section = head
            else:
                raise ParseError(ln, f"unknown directive {head!r}")
            continue

        if tokens == ["end"]:
            section = None
            continue

        if section == "triangles":
            if len(tokens) != 3:
                raise ParseError(ln, "a triangle needs exactly three vertex indices")
            try:
                triangles.append(tuple(int(t) for t in tokens))
            except ValueError:
                raise ParseError(ln, f"non-integer vertex index in {line!r}") from None
        elif section == "theta":
            if tokens[0] == "default":
                if len(tokens) != 2:
                    raise ParseError(ln, "expected 'default <angle>'")
                theta_default = parse_angle(tokens[1], ln)
            else:
                if len(tokens) != 2 or "-" not in tokens[0]:
                    raise ParseError(ln, "expected '<i>-<j> <angle>'")
                a_s, b_s = tokens[0].split("-", 1)
                try:
                    a, b = int(a_s), int(b_s)
                except ValueError:
                    raise ParseError(ln, f"bad edge key {tokens[0]!r}") from None
                if not a < b:
                    raise ParseError(ln, f"edge key {tokens[0]!r} must have i < j")
                if (a, b) in theta_entries:
                    raise ParseError(ln, f"duplicate theta entry for edge {tokens[0]!r}")
                theta_entries[(a, b)] = parse_angle(tokens[1], ln)
        elif section == "target":
            key = tokens[0]
            if key == "mode":
                if len(tokens) != 2 or tokens[1] not in ("zero", "mean", "explicit", "boundary-phi"):
                    raise ParseError(ln, "expected 'mode zero|mean|explicit|boundary-phi'")
                target_mode = tokens[1]
            elif key == "k":
                if len(tokens) != 3:
                    raise ParseError(ln, "expected 'k <vertex> <value>'")
                target_k[int(tokens[1])] = parse_angle(tokens[2], ln)
            elif key == "phi":
                if len(tokens) != 3:
                    raise ParseError(ln, "expected 'phi <vertex> <angle>'")
                target_phi[int(tokens[1])] = parse_angle(tokens[2], ln)
            elif key == "default":
                if len(tokens) != 2:
                    raise ParseError(ln, "expected 'default <value>'")
                target_k_default = target_phi_default = parse_angle(tokens[1], ln)
            else:
                raise ParseError(ln, f"unknown target key {key!r}")
        elif section == "radii":
            if tokens[0] == "default":
                if len(tokens) != 2:
                    raise ParseError(ln, "expected 'default <radius>'")
                radii_default = float(tokens[1])
            else:
                if len(tokens) != 2:
                    raise ParseError(ln, "expected '<vertex> <radius>'")
                radii_entries[int(tokens[0])] = float(tokens[1])
        elif section == "solver":
            key = tokens[0]
            if key == "method":
                if len(tokens) != 2 or tokens[1] not in ("flow", "newton"):
                    raise ParseError(ln, "expected 'method flow|newton'")
                solver.method = tokens[1]
            elif key == "tolerance":
                solver.tolerance = float(tokens[1])
            elif key == "max-steps":
                solver.max_steps = int(tokens[1])
            elif key == "max-dt":
                solver.max_dt = float(tokens[1])
            else:
                raise ParseError(ln, f"unknown solver key {key!r}")

    if section is not None:
        raise ParseError(0, f"section {section!r} not closed with 'end'")
    if geometry is None:
        raise ValidationError("geometry", "missing geometry directive")
    if not triangles:
        raise ValidationError("triangles", "no triangles given")
    try:
        surface = build_surface(triangles)
    except MeshError as exc:
        raise ValidationError("mesh", str(exc)) from exc

    theta: dict[tuple[int, int], float] = {}
    for e in surface.edges:
        if e in theta_entries:
            theta[e] = theta_entries.pop(e)
        elif theta_default is not None:
            theta[e] = theta_default
        else:
            raise ValidationError("theta-domain", f"edge {e[0]}-{e[1]} has no theta entry")
    if theta_entries:
        bad = next(iter(theta_entries))
        raise ValidationError("theta-domain", f"{bad[0]}-{bad[1]} is not an edge of the surface")
    for e, val in theta.items():
        if not (0.0 <= val < math.pi):
            raise ValidationError("theta-range", f"theta({e[0]}-{e[1]})={val} outside [0, pi)")

    if target_mode is None:
        raise ValidationError("target", "missing target mode")
    if target_mode == "mean" and geometry is not Geometry.EUCLIDEAN:
        raise ValidationError("target-geometry", "mean target is Euclidean-only")
    if target_mode == "boundary-phi":
        if not surface.boundary_vertices:
            raise ValidationError("boundary-phi", "surface has no boundary vertices")
        bad = set(target_phi) - surface.boundary_vertices
        if bad:
            raise ValidationError("boundary-phi", f"vertices {sorted(bad)} are not on the boundary")
        fill = target_phi_default if target_phi_default is not None else 0.0
        for v in surface.boundary_vertices:
            target_phi.setdefault(v, fill)
    if target_mode == "explicit":
        fill = target_k_default
        for v in range(surface.n_vertices):
            if v not in target_k:
                if fill is None:
                    raise ValidationError("target", f"vertex {v} has no k entry and no default")
                target_k[v] = fill
        bad_k = set(target_k) - set(range(surface.n_vertices))
        if bad_k:
            raise ValidationError("target", f"k entries for unknown vertices {sorted(bad_k)}")

    radii = np.full(surface.n_vertices, radii_default, dtype=float)
    for v, val in radii_entries.items():
        if not 0 <= v < surface.n_vertices:
            raise ValidationError("radii", f"radius entry for unknown vertex {v}")
        radii[v] = val
    if np.any(radii <= 0.0) or np.any(~np.isfinite(radii)):
        raise ValidationError("radii", "initial radii must be positive finite")
    if solver.tolerance <= 0:
        raise ValidationError("solver", "tolerance must be positive")
    if solver.max_steps <= 0:
        raise ValidationError("solver", "max-steps must be positive")

    return ProblemInstance(
        triangles=triangles,
        geometry=geometry,
        theta=theta,
        target_mode=target_mode,
        target_k=target_k,
        target_phi=target_phi,
        radii=radii,
        solver=solver,
        surface=surface,
    )


# ---------------------------------------------------------------------------
# solutions


@dataclass
class SolutionRecord:
    fields: dict[str, str]
    radii: np.ndarray
    curvatures: np.ndarray
    times: np.ndarray
    residuals: np.ndarray

    @property
    def status(self) -> str:
        return self.fields.get("status", "unknown")


def _subsample(times: np.ndarray, residuals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = len(times)
    if n <= _HISTORY_CAP:
        return times, residuals
    idx = np.unique(np.round(np.linspace(0, n - 1, _HISTORY_CAP)).astype(int))
    return times[idx], residuals[idx]


def write_solution(report: SolveReport, pattern=None, attainability: str | None = None) -> str:
    """Serialize a solve outcome; radii and curvatures use repr-precision
    decimals so reparsing reproduces them exactly."""
    if report.converged:
        status = "converged"
    elif attainability in ("not-attainable", "refuted"):
        status = "not-attainable-suspected"
    else:
        status = report.status
    lines = [
        "solution",
        f"status {status}",
        f"geometry {report.geometry.value}",
        f"method {report.method}",
        f"converged {'true' if report.converged else 'false'}",
        f"iterations {report.iterations}",
        f"residual {report.residuals[-1]!r}",
    ]
    if attainability is not None:
        lines.append(f"attainability {attainability}")
    if report.rate is not None:
        lines.append(f"rate {report.rate!r}")
    if report.conserved_drift is not None:
        lines.append(f"sum-u-drift {report.conserved_drift!r}")
    if report.message:
        lines.append(f"note {report.message}")
    lines.append("end")

    lines.append("")
    lines.append("radii")
    for v, val in enumerate(report.r):
        lines.append(f"{v} {val!r}")
    lines.append("end")

    lines.append("")
    lines.append("curvatures")
    for v, val in enumerate(report.K):
        lines.append(f"{v} {val!r}")
    lines.append("end")

    t, res = _subsample(report.times, report.residuals)
    lines.append("")
    lines.append("history")
    for ti, ri in zip(t, res):
        lines.append(f"{ti!r} {ri!r}")
    lines.append("end")

    if pattern is not None:
        lines.append("")
        lines.append("centers")
        for v, z in enumerate(pattern.centers):
            lines.append(f"{v} {z.real!r} {z.imag!r}")
        lines.append("end")
    return "\n".join(lines) + "\n"


def parse_solution(text: str) -> SolutionRecord:
    fields: dict[str, str] = {}
    radii: dict[int, float] = {}
    curv: dict[int, float] = {}
    times: list[float] = []
    residuals: list[float] = []
    section = None
    for ln, line in _lines(text):
        tokens = line.split()
        if section is None:
            if tokens[0] in ("solution", "radii", "curvatures", "history", "centers"):
                section = tokens[0]
                continue
            raise ParseError(ln, f"unexpected {tokens[0]!r} outside any section")
        if tokens == ["end"]:
            section = None
            continue
        if section == "solution":
            fields[tokens[0]] = " ".join(tokens[1:])
        elif section == "radii":
            radii[int(tokens[0])] = float(tokens[1])
        elif section == "curvatures":
            curv[int(tokens[0])] = float(tokens[1])
        elif section == "history":
            times.append(float(tokens[0]))
            residuals.append(float(tokens[1]))
    if section is not None:
        raise ParseError(0, f"section {section!r} not closed with 'end'")

    def as_array(d: dict[int, float]) -> np.ndarray:
        if not d:
            return np.array([])
        out = np.zeros(max(d) + 1)
        for v, val in d.items():
            out[v] = val
        return out

    return SolutionRecord(
        fields=fields,
        radii=as_array(radii),
        curvatures=as_array(curv),
        times=np.array(times),
        residuals=np.array(residuals),
    )
