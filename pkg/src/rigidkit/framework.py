"""Bar-and-joint frameworks, congruence-normal (pinned) coordinates, and
edge-length measurement maps.

A framework is a graph together with a point configuration in d dimensions;
edges are rigid bars.  Pinning removes the rigid-motion degrees of freedom by
translating vertex 1 to the origin and rotating so vertex i lies in the span
of the first i-1 coordinate axes, for i up to one past the affine span
dimension.  All downstream rigidity analysis operates on the free pinned
coordinates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateLeadingVertices, FrameworkValidationError

DEFAULT_RANK_TOL = 1e-9


def _as_readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Framework:
    """A graph with a point configuration.

    Vertices are indexed from 0 internally; the JSON file format is 1-based.
    Edges are canonicalized to sorted pairs in lexicographic order, so
    measurement vectors are reproducible bit-for-bit across runs.
    """

    dimension: int
    vertices: np.ndarray                      # (n, dimension)
    edges: tuple[tuple[int, int], ...]        # canonical 0-based pairs
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        verts = _as_readonly(self.vertices)
        if verts.ndim != 2 or verts.shape[1] != self.dimension:
            raise FrameworkValidationError(
                f"vertices must be (n, {self.dimension}), got {verts.shape}"
            )
        if self.dimension < 1:
            raise FrameworkValidationError("dimension must be a positive integer")
        n = verts.shape[0]
        canon = []
        for e in self.edges:
            i, j = int(e[0]), int(e[1])
            if i == j:
                raise FrameworkValidationError(f"edge ({i},{j}) connects a vertex to itself")
            if not (0 <= i < n and 0 <= j < n):
                raise FrameworkValidationError(f"edge ({i},{j}) out of range for {n} vertices")
            canon.append((min(i, j), max(i, j)))
        if len(set(canon)) != len(canon):
            raise FrameworkValidationError("duplicate edges")
        canon.sort()
        for i, j in canon:
            if not np.linalg.norm(verts[i] - verts[j]) > 0.0:
                raise FrameworkValidationError(
                    f"edge ({i},{j}) connects coincident points"
                )
        if self.labels is not None and len(self.labels) != n:
            raise FrameworkValidationError("labels length must match vertex count")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", tuple(canon))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_lengths(self) -> np.ndarray:
        ev, ew = self.edge_index_arrays()
        return np.linalg.norm(self.vertices[ev] - self.vertices[ew], axis=1)

    def edge_index_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.edges:
            z = np.zeros(0, dtype=int)
            return z, z
        e = np.asarray(self.edges, dtype=int)
        return e[:, 0], e[:, 1]


@dataclass(frozen=True, eq=False)
class MeasurementVector:
    """Per-edge lengths l(p) or squared lengths m(p), in canonical edge order."""

    kind: str                  # "lengths" | "squared"
    values: np.ndarray

    def __post_init__(self):
        if self.kind not in ("lengths", "squared"):
            raise ValueError(f"unknown measurement kind {self.kind!r}")
        object.__setattr__(self, "values", _as_readonly(self.values))


def measure(framework: Framework, kind: str = "lengths") -> MeasurementVector:
    """Vector of edge lengths (kind="lengths") or squared lengths
    (kind="squared"), one entry per canonical edge."""
    lengths = framework.edge_lengths()
    if kind == "lengths":
        return MeasurementVector(kind, lengths)
    if kind == "squared":
        return MeasurementVector(kind, lengths**2)
    raise ValueError(f"unknown measurement kind {kind!r}")


def affine_span_dimension(config, tol: float = DEFAULT_RANK_TOL) -> int:
    """Dimension of the affine span of a point configuration.

    Computed as the numerical rank (singular values above tol * sigma_max) of
    the matrix whose columns are p_i - p_1 for i >= 2.
    """
    pts = np.asarray(config, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ValueError("config must be a non-empty (n, d) array")
    if pts.shape[0] == 1:
        return 0
    diffs = (pts[1:] - pts[0]).T
    return _numerical_rank(diffs, tol)


def _numerical_rank(mat: np.ndarray, tol: float) -> int:
    if mat.size == 0:
        return 0
    s = np.linalg.svd(mat, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


@dataclass(frozen=True, eq=False)
class Isometry:
    """Affine isometry x -> rotation @ x + translation."""

    rotation: np.ndarray       # (d, d) orthogonal
    translation: np.ndarray    # (d,)

    def __post_init__(self):
        object.__setattr__(self, "rotation", _as_readonly(self.rotation))
        object.__setattr__(self, "translation", _as_readonly(self.translation))

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation.T + self.translation

    @classmethod
    def identity(cls, d: int) -> "Isometry":
        return cls(np.eye(d), np.zeros(d))


@dataclass(frozen=True, eq=False)
class PinnedFramework:
    """A framework whose configuration is in pinned position.

    free_coords lists the (vertex, axis) pairs (0-based) that remain variable
    after pinning, in vertex-major order.  That ordering fixes the column
    order of the rigidity matrix and the layout of every pinned-coordinate
    vector used downstream.
    """

    base: Framework
    span_dim: int
    free_coords: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        if not self.free_coords:
            object.__setattr__(
                self, "free_coords", _free_coords(self.base.n_vertices, self.base.dimension, self.span_dim)
            )
        idx = {fc: k for k, fc in enumerate(self.free_coords)}
        object.__setattr__(self, "_free_index", idx)

    @property
    def n_free(self) -> int:
        return len(self.free_coords)

    @property
    def dimension(self) -> int:
        return self.base.dimension

    def free_vector(self, config: np.ndarray | None = None) -> np.ndarray:
        """Extract the free pinned coordinates from a full (n, d) configuration
        (defaults to the base configuration)."""
        pts = self.base.vertices if config is None else np.asarray(config, dtype=float)
        return np.array([pts[v, a] for v, a in self.free_coords])

    def embed_config(self, x: np.ndarray) -> np.ndarray:
        """Full (n, d) configuration with free coordinates x and pinned
        coordinates at their base values."""
        pts = self.base.vertices.copy()
        for k, (v, a) in enumerate(self.free_coords):
            pts[v, a] = x[k]
        return pts

    def embed_tangent(self, x: np.ndarray) -> np.ndarray:
        """Full (n, d) array with free coordinates x and zeros in pinned slots.
        Use for directions / flex coefficients."""
        pts = np.zeros((self.base.n_vertices, self.base.dimension))
        for k, (v, a) in enumerate(self.free_coords):
            pts[v, a] = x[k]
        return pts

    def free_index(self, vertex: int, axis: int) -> int:
        return self._free_index[(vertex, axis)]


def _free_coords(n: int, d: int, span_dim: int) -> tuple[tuple[int, int], ...]:
    # vertex 0 fully pinned; vertex i in 1..span_dim has axes i..d-1 pinned
    out = []
    for v in range(n):
        free_axes = range(min(v, d)) if v <= span_dim else range(d)
        for a in free_axes:
            out.append((v, a))
    return tuple(out)


def _is_pinned(verts: np.ndarray, span_dim: int, d: int) -> bool:
    # exact pinned position with the positive-diagonal orientation convention
    if np.any(verts[0] != 0.0):
        return False
    for i in range(1, span_dim + 1):
        if np.any(verts[i, i:] != 0.0):
            return False
        if not verts[i, i - 1] > 0.0:
            return False
    return True


def pin(framework: Framework, tol: float = DEFAULT_RANK_TOL) -> tuple[PinnedFramework, Isometry]:
    """Move a framework into pinned position by a direct isometry.

    Translates vertex 1 to the origin, then applies the Gram-Schmidt
    orthogonal map of the next span_dim vertices with the positive-diagonal
    sign convention.  Raises DegenerateLeadingVertices when the leading
    span_dim + 1 vertices are affinely dependent; the caller may permute the
    vertex order and retry (see pin_with_permutation).

    Pinned coordinates of the result are exactly zero: they are clamped from
    the sub-machine-epsilon residue the orthogonal map leaves behind.
    """
    verts = framework.vertices
    d = framework.dimension
    ell = affine_span_dimension(verts, tol)
    if verts.shape[0] < ell + 1:
        raise DegenerateLeadingVertices("not enough vertices for the affine span")
    lead = (verts[1 : ell + 1] - verts[0]).T  # d x ell
    if _numerical_rank(lead, tol) != ell:
        raise DegenerateLeadingVertices(
            f"the first {ell + 1} vertices are affinely dependent"
        )

    if _is_pinned(verts, ell, d):
        return PinnedFramework(framework, ell), Isometry.identity(d)

    if ell == 0:
        q_mat = np.eye(d)
    else:
        q_full, r_full = np.linalg.qr(lead, mode="complete")
        signs = np.ones(d)
        for i in range(ell):
            if r_full[i, i] < 0:
                signs[i] = -1.0
        q_mat = q_full * signs  # flip columns so the R diagonal is positive

    rotation = q_mat.T
    translation = -rotation @ verts[0]
    iso = Isometry(rotation, translation)
    new_verts = iso.apply(verts)

    # clamp the pinned slots (residue is O(machine eps * coordinate scale))
    new_verts[0] = 0.0
    for i in range(1, ell + 1):
        new_verts[i, i:] = 0.0
    pinned = Framework(framework.dimension, new_verts, framework.edges, framework.labels)
    return PinnedFramework(pinned, ell), iso


def permute_framework(framework: Framework, perm) -> Framework:
    """Relabel vertices: new vertex k is old vertex perm[k]."""
    perm = list(int(v) for v in perm)
    n = framework.n_vertices
    if sorted(perm) != list(range(n)):
        raise ValueError("perm must be a permutation of 0..n-1")
    inv = [0] * n
    for new, old in enumerate(perm):
        inv[old] = new
    verts = framework.vertices[perm]
    edges = [(inv[i], inv[j]) for i, j in framework.edges]
    labels = tuple(framework.labels[v] for v in perm) if framework.labels else None
    return Framework(framework.dimension, verts, edges, labels)


def find_pinnable_permutation(framework: Framework, tol: float = DEFAULT_RANK_TOL) -> list[int]:
    """Greedy vertex order whose leading span_dim + 1 vertices are affinely
    independent: scan in label order, keeping each vertex that increases the
    affine rank, then append the rest in original order."""
    verts = framework.vertices
    ell = affine_span_dimension(verts, tol)
    chosen = [0]
    for v in range(1, framework.n_vertices):
        if len(chosen) == ell + 1:
            break
        cand = chosen + [v]
        diffs = (verts[cand[1:]] - verts[cand[0]]).T
        if _numerical_rank(diffs, tol) == len(cand) - 1:
            chosen.append(v)
    if len(chosen) != ell + 1:
        raise DegenerateLeadingVertices("could not find an affinely independent leading set")
    rest = [v for v in range(framework.n_vertices) if v not in chosen]
    return chosen + rest


def pin_with_permutation(
    framework: Framework, tol: float = DEFAULT_RANK_TOL, auto_permute: bool = True
) -> tuple[PinnedFramework, Isometry, list[int]]:
    """Pin, permuting the vertex order first if the leading vertices are
    degenerate and auto_permute is set.  Returns the permutation used
    (identity when no reordering was needed)."""
    try:
        pf, iso = pin(framework, tol)
        return pf, iso, list(range(framework.n_vertices))
    except DegenerateLeadingVertices:
        if not auto_permute:
            raise
    perm = find_pinnable_permutation(framework, tol)
    pf, iso = pin(permute_framework(framework, perm), tol)
    return pf, iso, perm


# ---------------------------------------------------------------------------
# JSON file format: {"dimension": int, "vertices": [[...], ...],
#                    "edges": [[i, j], ...] (1-based), "labels": optional}
# ---------------------------------------------------------------------------

def framework_from_dict(data: dict) -> Framework:
    try:
        dim = int(data["dimension"])
        verts = data["vertices"]
        edges = [(int(i) - 1, int(j) - 1) for i, j in data["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise FrameworkValidationError(f"malformed framework data: {exc}") from exc
    labels = data.get("labels")
    return Framework(dim, np.asarray(verts, dtype=float), edges, labels)


def framework_to_dict(framework: Framework) -> dict:
    out = {
        "dimension": framework.dimension,
        "vertices": [list(map(float, row)) for row in framework.vertices],
        "edges": [[i + 1, j + 1] for i, j in framework.edges],
    }
    if framework.labels is not None:
        out["labels"] = list(framework.labels)
    return out


def load_framework(path) -> Framework:
    with open(Path(path), "r", encoding="utf-8") as fh:
        return framework_from_dict(json.load(fh))


def save_framework(framework: Framework, path) -> None:
    with open(Path(path), "w", encoding="utf-8") as fh:
        json.dump(framework_to_dict(framework), fh, indent=1)
        fh.write("\n")
