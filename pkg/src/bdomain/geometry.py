"""Closed oriented triangle surfaces bounding domains in 3-space.

A :class:`TriSurface` is the boundary of a bounded domain; triangle winding
gives the outward normal by the right-hand rule and the domain is the bounded
side.  Surfaces are validated on construction through :func:`make_surface`
(or the loaders), and the generators below produce the fixture family used
throughout the package: spheres/ellipsoids, two tori, a genus-2 pretzel,
knot tubes in bridge position and the "mug" with an undercut pocket.
"""

from __future__ import annotations

import dataclasses
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import (
    Degenerate,
    InvalidSpec,
    NotClosed,
    NotConnected,
    NotOriented,
    ParseError,
)

__all__ = [
    "TriSurface",
    "GeneratorSpec",
    "make_surface",
    "check_surface",
    "load_surface",
    "save_surface",
    "generate",
    "euler_characteristic",
    "genus",
    "signed_volume",
    "vertex_normals",
    "plat_core",
]


@dataclass(frozen=True, eq=False)
class TriSurface:
    """Closed oriented triangulated surface; immutable once built."""

    vertices: np.ndarray
    triangles: np.ndarray
    name: str = "surface"

    def __post_init__(self):
        v = np.ascontiguousarray(self.vertices, dtype=np.float64)
        t = np.ascontiguousarray(self.triangles, dtype=np.int64)
        v.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def bbox_diagonal(self) -> float:
        lo, hi = self.vertices.min(axis=0), self.vertices.max(axis=0)
        return float(np.linalg.norm(hi - lo))

    def edges(self) -> np.ndarray:
        """Unique undirected edges as a sorted ``(E, 2)`` array."""
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0)

    def face_normals(self, unit: bool = True) -> np.ndarray:
        p = self.vertices[self.triangles]
        n = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        if unit:
            n = n / np.linalg.norm(n, axis=1, keepdims=True)
        return n

    def areas(self) -> np.ndarray:
        return 0.5 * np.linalg.norm(self.face_normals(unit=False), axis=1)

    def transformed(self, matrix: np.ndarray, name: str | None = None) -> "TriSurface":
        """Apply a rotation (orthogonal, det +1) to every vertex."""
        m = np.asarray(matrix, dtype=float)
        return TriSurface(self.vertices @ m.T, self.triangles, name or self.name)


# --------------------------------------------------------------------------
# validation


def signed_volume(vertices: np.ndarray, triangles: np.ndarray) -> float:
    p = vertices[triangles] - vertices.mean(axis=0)
    return float(np.einsum("ij,ij->i", p[:, 0], np.cross(p[:, 1], p[:, 2])).sum() / 6.0)


def check_surface(vertices: np.ndarray, triangles: np.ndarray) -> None:
    """Raise the first failed surface invariant, naming a witness simplex."""
    v = np.asarray(vertices, dtype=float)
    t = np.asarray(triangles, dtype=np.int64)
    if v.ndim != 2 or v.shape[1] != 3 or len(v) == 0:
        raise Degenerate("vertex array must be non-empty with shape (n, 3)")
    if t.ndim != 2 or t.shape[1] != 3 or len(t) == 0:
        raise Degenerate("triangle array must be non-empty with shape (m, 3)")
    if t.min() < 0 or t.max() >= len(v):
        raise Degenerate("triangle references a missing vertex", witness=int(np.argmax(t.max(axis=1))))
    repeated = (t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])
    if repeated.any():
        raise Degenerate("triangle repeats a vertex", witness=("triangle", int(np.argmax(repeated))))

    diag = float(np.linalg.norm(v.max(axis=0) - v.min(axis=0)))
    if diag == 0.0:
        raise Degenerate("all vertices coincide")
    pairs = cKDTree(v).query_pairs(1e-12 * diag, output_type="ndarray")
    if len(pairs):
        raise Degenerate("coincident vertices", witness=("vertices", tuple(int(i) for i in pairs[0])))
    p = v[t]
    area2 = np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)
    bad = np.flatnonzero(area2 <= 1e-14 * diag * diag)
    if len(bad):
        raise Degenerate("zero-area triangle", witness=("triangle", int(bad[0])))

    used = np.zeros(len(v), dtype=bool)
    used[t.ravel()] = True
    if not used.all():
        raise NotConnected("isolated vertex", witness=("vertex", int(np.argmin(used))))

    directed: dict[tuple[int, int], int] = {}
    for f, (a, b, c) in enumerate(t.tolist()):
        for e in ((a, b), (b, c), (c, a)):
            if e in directed:
                raise NotOriented(
                    "directed edge used twice (inconsistent winding or non-manifold edge)",
                    witness=("edge", e),
                )
            directed[e] = f
    for (a, b), f in directed.items():
        if (b, a) not in directed:
            raise NotClosed("boundary edge with one incident triangle", witness=("edge", (a, b)))

    # each vertex link must be a single cycle
    nxt: list[dict[int, int]] = [dict() for _ in range(len(v))]
    for a, b, c in t.tolist():
        nxt[a][b] = c
        nxt[b][c] = a
        nxt[c][a] = b
    for vid, ring in enumerate(nxt):
        start = next(iter(ring))
        cur, steps = ring[start], 1
        while cur != start and steps <= len(ring):
            cur = ring.get(cur)
            steps += 1
            if cur is None:
                raise NotClosed("open vertex link", witness=("vertex", vid))
        if steps != len(ring):
            raise NotClosed("pinched vertex: link is not a single cycle", witness=("vertex", vid))

    e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    adj = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(len(v), len(v)))
    ncomp, labels = connected_components(adj, directed=False)
    if ncomp != 1:
        other = int(np.flatnonzero(labels != labels[0])[0])
        raise NotConnected(f"surface has {ncomp} components", witness=("vertex", other))

    if signed_volume(v, t) <= 0:
        raise NotOriented("triangle winding gives inward normals (negative enclosed volume)")


def make_surface(vertices, triangles, name: str = "surface") -> TriSurface:
    check_surface(vertices, triangles)
    return TriSurface(np.asarray(vertices, dtype=float), np.asarray(triangles), name)


def euler_characteristic(s: TriSurface) -> int:
    return int(s.n_vertices - len(s.edges()) + s.n_triangles)


def genus(s: TriSurface) -> int:
    return (2 - euler_characteristic(s)) // 2


def vertex_normals(s: TriSurface) -> np.ndarray:
    """Angle-weighted average of incident face normals, normalized."""
    p = s.vertices[s.triangles]
    fn = s.face_normals()
    normals = np.zeros_like(s.vertices)
    for k in range(3):
        a = p[:, (k + 1) % 3] - p[:, k]
        b = p[:, (k + 2) % 3] - p[:, k]
        cosang = np.einsum("ij,ij->i", a, b) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
        ang = np.arccos(np.clip(cosang, -1.0, 1.0))
        np.add.at(normals, s.triangles[:, k], fn * ang[:, None])
    return normals / np.linalg.norm(normals, axis=1, keepdims=True)


# --------------------------------------------------------------------------
# file formats


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _parse_off(text: str):
    tokens: list[str] = []
    for line in text.splitlines():
        line = _strip_comment(line)
        if line:
            tokens.extend(line.split())
    if not tokens or not tokens[0].upper().endswith("OFF"):
        raise ParseError("missing OFF header")
    head = tokens[0]
    pos = 1
    if len(head) > 3 and head[:-3]:
        raise ParseError(f"unsupported OFF variant {head!r}")
    try:
        nv, nf = int(tokens[pos]), int(tokens[pos + 1])
        pos += 3
        verts = [[float(x) for x in tokens[pos + 3 * i : pos + 3 * i + 3]] for i in range(nv)]
        pos += 3 * nv
        tris = []
        for _ in range(nf):
            k = int(tokens[pos])
            if k != 3:
                raise ParseError(f"face with {k} vertices; only triangles are supported")
            tris.append([int(x) for x in tokens[pos + 1 : pos + 4]])
            pos += 1 + k
    except (IndexError, ValueError) as exc:
        raise ParseError(f"malformed OFF body: {exc}") from None
    if any(len(p) != 3 for p in verts):
        raise ParseError("truncated vertex list")
    return verts, tris


def _parse_obj(text: str):
    verts, tris = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        if not line:
            continue
        head, *rest = line.split()
        try:
            if head == "v":
                verts.append([float(x) for x in rest[:3]])
                if len(rest) < 3:
                    raise ValueError("vertex needs three coordinates")
            elif head == "f":
                if len(rest) != 3:
                    raise ParseError(f"line {lineno}: face with {len(rest)} vertices; only triangles are supported")
                idx = []
                for tok in rest:
                    i = int(tok.split("/", 1)[0])
                    idx.append(i - 1 if i > 0 else len(verts) + i)
                tris.append(idx)
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
    return verts, tris


def load_surface(path, format: str | None = None) -> TriSurface:
    """Read an OFF or OBJ triangle mesh and validate it."""
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".")).upper()
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(str(exc)) from None
    if fmt == "OFF":
        verts, tris = _parse_off(text)
    elif fmt == "OBJ":
        verts, tris = _parse_obj(text)
    else:
        raise ParseError(f"unknown mesh format {fmt!r}")
    if not verts or not tris:
        raise ParseError("mesh has no vertices or no triangles")
    return make_surface(np.array(verts, dtype=float), np.array(tris, dtype=np.int64), path.stem)


def save_surface(s: TriSurface, path, format: str | None = None) -> None:
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".") or "off").upper()
    lines = []
    if fmt == "OFF":
        lines.append("OFF")
        lines.append(f"{s.n_vertices} {s.n_triangles} 0")
        lines += [f"{x!r} {y!r} {z!r}" for x, y, z in s.vertices.tolist()]
        lines += [f"3 {a} {b} {c}" for a, b, c in s.triangles.tolist()]
    elif fmt == "OBJ":
        lines.append(f"# {s.name}")
        lines += [f"v {x!r} {y!r} {z!r}" for x, y, z in s.vertices.tolist()]
        lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in s.triangles.tolist()]
    else:
        raise ParseError(f"unknown mesh format {fmt!r}")
    path.write_text("\n".join(lines) + "\n")


# --------------------------------------------------------------------------
# generators

KINDS = (
    "sphere",
    "ellipsoid",
    "torus-horizontal",
    "torus-vertical-tilted",
    "knot-tube",
    "genus2-pretzel",
    "mug",
)

# plat presentations on 2k strands; generator i swaps positions i, i+1 (1-based)
PLAT_WORDS: dict[str, tuple[int, list[tuple[int, int]]]] = {
    "unknot": (1, []),
    "trefoil": (2, [(2, 1), (2, 1), (2, 1)]),
    "figure-eight": (2, [(2, 1), (2, 1), (1, -1), (2, 1)]),
}


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters for :func:`generate`.

    ``res`` is the parameter-grid resolution; knot tubes use ``8*res`` samples
    along the core and ``res//4`` around it.  ``wiggles`` adds that many
    extra up-down bumps to a knot core, each worth four extra critical points.
    """

    kind: str
    R: float = 2.0
    r: float = 0.5
    rho: float = 0.12
    tilt_deg: float = 5.0
    res: int = 64
    k: int | None = None
    knot: str = "trefoil"
    wiggles: int = 0
    axes: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown generator kind {self.kind!r}")
        if self.res < 8:
            raise InvalidSpec("res must be at least 8")
        if self.kind in ("sphere", "ellipsoid", "mug") and self.R <= 0:
            raise InvalidSpec("R must be positive")
        if self.kind.startswith("torus") or self.kind == "genus2-pretzel":
            if not (0 < self.r < self.R):
                raise InvalidSpec(f"torus radii need 0 < r < R (got r={self.r}, R={self.R})")
        if self.kind == "ellipsoid" and min(self.axes) <= 0:
            raise InvalidSpec("ellipsoid axes must be positive")
        if self.kind == "knot-tube":
            if self.knot not in PLAT_WORDS:
                raise InvalidSpec(f"unknown knot {self.knot!r}; choose from {sorted(PLAT_WORDS)}")
            k = PLAT_WORDS[self.knot][0]
            if self.k is not None and self.k != k:
                raise InvalidSpec(f"{self.knot} is built in {k}-bridge position, not k={self.k}")
            if self.rho <= 0:
                raise InvalidSpec("tube radius must be positive")
            if self.wiggles < 0:
                raise InvalidSpec("wiggles must be non-negative")

    def to_json(self) -> str:
        d = dataclasses.asdict(self)
        d["axes"] = list(self.axes)
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorSpec":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise InvalidSpec(f"unknown generator fields {sorted(unknown)}")
        if "kind" not in d:
            raise InvalidSpec("generator spec needs 'kind'")
        d = dict(d)
        if "axes" in d:
            d["axes"] = tuple(float(a) for a in d["axes"])
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "GeneratorSpec":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidSpec(f"generator spec is not JSON: {exc}") from None
        if not isinstance(d, dict):
            raise InvalidSpec("generator spec must be a JSON object")
        return cls.from_dict(d)


def rotation_x(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1, 0, 0], [0, c, -s], [0, s, c]], dtype=float)


def rotation_y(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]], dtype=float)


def _orient_outward(v: np.ndarray, t: np.ndarray) -> np.ndarray:
    if signed_volume(v, t) < 0:
        t = t[:, ::-1].copy()
    return t


def _revolve(profile: np.ndarray, n_theta: int, phase: float = 0.0):
    """Surface of revolution about z of a profile given as ``(rho, z)`` rows.

    If the first and last profile points lie on the axis they become poles
    (sphere type); otherwise the profile is treated as a closed loop (torus
    type).
    """
    theta = 2 * np.pi * (np.arange(n_theta) + phase) / n_theta
    cos, sin = np.cos(theta), np.sin(theta)
    poles = profile[0, 0] == 0 and profile[-1, 0] == 0
    rings = profile[1:-1] if poles else profile
    verts = [
        np.stack([rho * cos, rho * sin, np.full(n_theta, z)], axis=1) for rho, z in rings
    ]
    v = np.concatenate(verts)
    tris = []
    nr = len(rings)
    ring = lambda i: i * n_theta + np.arange(n_theta)  # noqa: E731
    pairs = [(i, i + 1) for i in range(nr - 1)]
    if not poles:
        pairs.append((nr - 1, 0))
    for i, j in pairs:
        a, b = ring(i), ring(j)
        a2, b2 = np.roll(a, -1), np.roll(b, -1)
        tris.append(np.stack([a, a2, b2], axis=1))
        tris.append(np.stack([a, b2, b], axis=1))
    if poles:
        south, north = len(v), len(v) + 1
        v = np.concatenate([v, [[0.0, 0.0, profile[0, 1]], [0.0, 0.0, profile[-1, 1]]]])
        a = ring(0)
        tris.append(np.stack([np.full(n_theta, south), np.roll(a, -1), a], axis=1))
        b = ring(nr - 1)
        tris.append(np.stack([np.full(n_theta, north), b, np.roll(b, -1)], axis=1))
    t = np.concatenate(tris)
    return v, _orient_outward(v, t)


def _polyline(points: Sequence[tuple[float, float]], spacing: float) -> np.ndarray:
    out = [np.asarray(points[0], dtype=float)]
    for p, q in zip(points[:-1], points[1:]):
        p, q = np.asarray(p, float), np.asarray(q, float)
        n = max(1, int(math.ceil(np.linalg.norm(q - p) / spacing)))
        for s in range(1, n + 1):
            out.append(p + (q - p) * s / n)
    return np.array(out)


def _sphere(spec: GeneratorSpec):
    n_phi = max(4, spec.res // 2)
    phi = np.pi * np.arange(n_phi + 1) / n_phi
    profile = np.stack([np.sin(phi), -np.cos(phi)], axis=1)
    profile[0, 0] = profile[-1, 0] = 0.0
    v, t = _revolve(profile, spec.res, phase=0.31)
    scale = np.array(spec.axes if spec.kind == "ellipsoid" else (1.0, 1.0, 1.0)) * spec.R
    return v * scale, t


def _torus(spec: GeneratorSpec):
    n = spec.res
    psi = 2 * np.pi * (np.arange(n) + 0.21) / n
    profile = np.stack([spec.R + spec.r * np.cos(psi), spec.r * np.sin(psi)], axis=1)
    v, t = _revolve(profile, n, phase=0.37)
    if spec.kind == "torus-horizontal":
        # revolution axis z -> x
        v = v @ rotation_y(np.pi / 2).T
    else:
        v = v @ rotation_x(math.radians(spec.tilt_deg)).T
    return v, t


def _mug(spec: GeneratorSpec):
    """Cylinder with a pocket: narrow neck from the top opening into a wider chamber.

    Chamber-floor points farther from the axis than the neck's line-of-sight
    cone admits no escaping ray.
    """
    R, H = spec.R, 2.0 * spec.R
    r_neck, r_chamber = 0.15 * R, 0.7 * R
    z_neck, z_floor = 1.2 * R, 0.6 * R
    corners = [
        (0.0, 0.0), (R, 0.0), (R, H), (r_neck, H), (r_neck, z_neck),
        (r_chamber, z_neck), (r_chamber, z_floor), (0.0, z_floor),
    ]
    profile = _polyline(corners, spacing=2 * np.pi * R / spec.res)
    return _revolve(profile, spec.res, phase=0.29)


def _pretzel(spec: GeneratorSpec):
    from skimage.measure import marching_cubes

    R, r = spec.R / 2.0, spec.r / 2.0
    off = R + 0.55 * r
    h = (R + r) / (spec.res / 4)
    lo = np.array([-off - R - r - 2 * h, -R - r - 2 * h, -r - 2 * h])
    hi = -lo
    axes = [np.arange(lo[i], hi[i] + h, h) + 0.0137 * h for i in range(3)]
    X, Y, Z = np.meshgrid(*axes, indexing="ij")

    def tor(cx):
        return np.sqrt((np.sqrt((X - cx) ** 2 + Y**2) - R) ** 2 + Z**2) - r

    d1, d2 = tor(-off), tor(off)
    kk = 0.25 * r
    hmix = np.clip(0.5 + 0.5 * (d2 - d1) / kk, 0, 1)
    field_ = d2 * (1 - hmix) + d1 * hmix - kk * hmix * (1 - hmix)
    verts, faces, _, _ = marching_cubes(field_, 0.0, spacing=(h, h, h), allow_degenerate=False)
    verts = verts + np.array([a[0] for a in axes])
    faces = faces.astype(np.int64)
    return verts, _orient_outward(verts, faces)


# --- knot tubes -----------------------------------------------------------


def _smoothstep(tau):
    return 0.5 - 0.5 * np.cos(np.pi * tau)


def plat_core(knot: str = "trefoil", wiggles: int = 0, samples_per_unit: int = 64) -> np.ndarray:
    """Closed core polyline of a knot in bridge position (plat closure).

    Strands run upward with strictly increasing height between the bottom
    cups and top caps, so the height along the core has exactly ``k`` minima
    and ``k`` maxima (plus two per wiggle).
    """
    k, word = PLAT_WORDS[knot]
    n_str = 2 * k
    amp = 0.3
    tau = np.linspace(0.0, 1.0, samples_per_unit + 1)[1:]
    # per bottom position: list of points going up
    paths = {p: [np.array([[float(p), 0.0, 0.0]])] for p in range(n_str)}
    at_pos = list(range(n_str))  # at_pos[position] = bottom label
    z0 = 0.0
    levels = list(word)
    if wiggles:
        levels = [("w", 0)] * wiggles + levels
    if not levels:
        levels = [("straight", 0)]
    for gen in levels:
        new_at = list(at_pos)
        if gen[0] in ("w", "straight"):
            for p in range(n_str):
                lab = at_pos[p]
                x = np.full_like(tau, float(p))
                y = np.zeros_like(tau)
                z = z0 + tau
                if gen[0] == "w":
                    z = z0 + 2.0 * tau
                    if p == 0:
                        # z doubles back once: one extra max and min on the core
                        z = z + 0.38 * np.sin(2 * np.pi * tau)
                        x = x - 1.0 * np.sin(np.pi * tau) ** 2
                        y = -0.8 * np.sin(2 * np.pi * tau) * np.sin(np.pi * tau) ** 2
                paths[lab].append(np.stack([x, y, z], axis=1))
        else:
            i, sign = gen
            a, b = i - 1, i
            for p in range(n_str):
                lab = at_pos[p]
                x = np.full_like(tau, float(p))
                y = np.zeros_like(tau)
                if p == a:
                    x = a + _smoothstep(tau)
                    y = sign * amp * np.sin(np.pi * tau) ** 2
                    new_at[b] = lab
                elif p == b:
                    x = b - _smoothstep(tau)
                    y = -sign * amp * np.sin(np.pi * tau) ** 2
                    new_at[a] = lab
                paths[lab].append(np.stack([x, y, z0 + tau], axis=1))
        at_pos = new_at
        z0 += 2.0 if gen[0] == "w" else 1.0
    top_of = {lab: p for p, lab in enumerate(at_pos)}
    bottom_at_top = {p: lab for p, lab in enumerate(at_pos)}
    strand = {lab: np.concatenate(paths[lab]) for lab in paths}

    phi = np.linspace(0.0, np.pi, samples_per_unit + 1)[1:-1]

    def cup(p, depth):  # from bottom position p to p+1, below z = 0
        return np.stack([p + 0.5 - 0.5 * np.cos(phi), np.zeros_like(phi), -depth * np.sin(phi)], axis=1)

    def cap(p, height):  # from top position p to p+1 (or reverse), above z0
        return np.stack([p + 0.5 - 0.5 * np.cos(phi), np.zeros_like(phi), z0 + height * np.sin(phi)], axis=1)

    pieces = []
    lab = 0  # start at bottom position 0 going up
    visited = 0
    while True:
        pieces.append(strand[lab])
        visited += 1
        q = top_of[lab]
        m = q // 2
        height = 0.5 + 0.09 * m
        if q % 2 == 0:
            pieces.append(cap(q, height))
            q2 = q + 1
        else:
            pieces.append(cap(q - 1, height)[::-1])
            q2 = q - 1
        lab2 = bottom_at_top[q2]
        pieces.append(strand[lab2][::-1])
        visited += 1
        b = lab2  # bottom position of that strand
        m = b // 2
        depth = 0.5 + 0.07 * m
        if b % 2 == 0:
            pieces.append(cup(b, depth))
            b2 = b + 1
        else:
            pieces.append(cup(b - 1, depth)[::-1])
            b2 = b - 1
        if b2 == 0:
            break
        lab = b2
    if visited != n_str:
        raise InvalidSpec(f"plat word for {knot!r} closes to a link, not a knot")
    core = np.concatenate(pieces)
    # drop exact duplicates at joints
    keep = np.ones(len(core), dtype=bool)
    keep[1:] = np.linalg.norm(np.diff(core, axis=0), axis=1) > 1e-12
    return core[keep]


def _resample_closed(c: np.ndarray, n: int) -> np.ndarray:
    seg = np.linalg.norm(np.diff(np.vstack([c, c[:1]]), axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    L = s[-1]
    target = (np.arange(n) + 0.5) * L / n
    cc = np.vstack([c, c[:1]])
    return np.stack([np.interp(target, s, cc[:, i]) for i in range(3)], axis=1)


def _rmf(c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rotation-minimizing frame by double reflection, closed with a uniform twist."""
    n = len(c)
    nxt = np.roll(c, -1, axis=0)
    prv = np.roll(c, 1, axis=0)
    T = nxt - prv
    T /= np.linalg.norm(T, axis=1, keepdims=True)
    ref = np.array([0.0, 0.0, 1.0]) if abs(T[0, 2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    r = np.cross(T[0], ref)
    r /= np.linalg.norm(r)
    R = np.zeros_like(c)
    R[0] = r
    for i in range(n):
        j = (i + 1) % n
        v1 = c[j] - c[i]
        c1 = v1 @ v1
        rL = R[i] - (2 / c1) * (v1 @ R[i]) * v1
        tL = T[i] - (2 / c1) * (v1 @ T[i]) * v1
        v2 = T[j] - tL
        c2 = v2 @ v2
        rn = rL - (2 / c2) * (v2 @ rL) * v2 if c2 > 1e-30 else rL
        if j == 0:
            # holonomy: angle from transported frame back to the initial one
            s0 = np.cross(T[0], R[0])
            ang = math.atan2(rn @ s0, rn @ R[0])
        else:
            R[j] = rn
    S = np.cross(T, R)
    seg = np.linalg.norm(np.diff(np.vstack([c, c[:1]]), axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)[:-1]]) / seg.sum()
    twist = -ang * s
    cs, sn = np.cos(twist)[:, None], np.sin(twist)[:, None]
    return cs * R + sn * S, -sn * R + cs * S


def tube_reach_ok(core: np.ndarray, rho: float) -> bool:
    """Sampled check that a tube of radius ``rho`` about the closed core is embedded."""
    n = len(core)
    seg = np.linalg.norm(np.diff(np.vstack([core, core[:1]]), axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)[:-1]])
    L = seg.sum()
    # curvature bound via turning angle per unit length
    t = np.roll(core, -1, axis=0) - core
    t /= np.linalg.norm(t, axis=1, keepdims=True)
    turn = np.arccos(np.clip(np.einsum("ij,ij->i", t, np.roll(t, 1, axis=0)), -1, 1))
    kappa = turn / np.maximum(0.5 * (seg + np.roll(seg, 1)), 1e-15)
    if np.max(kappa) * rho >= 1.0:
        return False
    tree = cKDTree(core)
    for i, j in tree.query_pairs(2.0 * rho, output_type="ndarray"):
        d = abs(s[i] - s[j])
        if min(d, L - d) > np.pi * rho:
            return False
    return True


def _knot_tube(spec: GeneratorSpec):
    core = plat_core(spec.knot, spec.wiggles)
    if not tube_reach_ok(core, spec.rho):
        raise InvalidSpec(f"tube radius {spec.rho} exceeds the reach of the {spec.knot} core")
    n_along = 8 * spec.res
    n_around = max(8, spec.res // 4)
    c = _resample_closed(core, n_along)
    N, B = _rmf(c)
    theta = 2 * np.pi * (np.arange(n_around) + 0.23) / n_around
    v = (
        c[:, None, :]
        + spec.rho * (np.cos(theta)[None, :, None] * N[:, None, :] + np.sin(theta)[None, :, None] * B[:, None, :])
    ).reshape(-1, 3)
    i = np.arange(n_along)[:, None]
    j = np.arange(n_around)[None, :]
    a = i * n_around + j
    b = ((i + 1) % n_along) * n_around + j
    a2 = i * n_around + (j + 1) % n_around
    b2 = ((i + 1) % n_along) * n_around + (j + 1) % n_around
    t = np.concatenate(
        [np.stack([a, b, b2], axis=-1).reshape(-1, 3), np.stack([a, b2, a2], axis=-1).reshape(-1, 3)]
    )
    return v, _orient_outward(v, t)


_BUILDERS = {
    "sphere": _sphere,
    "ellipsoid": _sphere,
    "torus-horizontal": _torus,
    "torus-vertical-tilted": _torus,
    "mug": _mug,
    "genus2-pretzel": _pretzel,
    "knot-tube": _knot_tube,
}


def generate(spec: GeneratorSpec | dict | str) -> TriSurface:
    """Build a validated fixture surface from a spec (object, dict or JSON text)."""
    if isinstance(spec, str):
        spec = GeneratorSpec.from_json(spec)
    elif isinstance(spec, dict):
        spec = GeneratorSpec.from_dict(spec)
    spec.validate()
    v, t = _BUILDERS[spec.kind](spec)
    name = spec.kind if spec.kind != "knot-tube" else f"{spec.knot}-tube"
    return make_surface(v, t, name)
