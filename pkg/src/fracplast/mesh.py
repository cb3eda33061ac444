"""
Simplicial meshes (triangles in 2D, tetrahedra in 3D), built-in geometry
generators and the plain-text mesh format:

    dim nv nc nf
    x y [z]                      (nv lines)
    v0 v1 v2 [v3]                (nc lines, 0-based)
    v0 v1 [v2] label             (nf lines)

Blank lines and lines starting with '#' are ignored.
"""
from collections import Counter
from itertools import combinations, permutations
from math import factorial
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union
import logging
import numpy as np
from .errors import MeshError, MeshFormatError, ProbeError

NOTCHED_BOTTOM = ((0.0, 0.0), (3.0, 0.0), (4.0, 0.5), (6.0, 0.5), (7.0, 0.0), (10.0, 0.0))
NOTCHED_TOP = ((0.0, 2.0), (3.0, 2.0), (4.0, 1.5), (6.0, 1.5), (7.0, 2.0), (10.0, 2.0))


def signed_volumes(vertices: np.ndarray, cells: np.ndarray) -> np.ndarray:
    v = vertices[cells]
    edges = v[:, 1:, :] - v[:, :1, :]
    dim = vertices.shape[1]
    return np.linalg.det(edges) / factorial(dim)


def orient_cells(vertices: np.ndarray, cells: np.ndarray) -> np.ndarray:
    """Swap the last two vertices of negatively oriented cells."""
    cells = np.array(cells, dtype=int)
    negative = signed_volumes(vertices, cells) < 0.0
    cells[negative, -2:] = cells[negative][:, [-1, -2]]
    return cells


def boundary_faces(cells: np.ndarray) -> List[Tuple[int, ...]]:
    """Faces that belong to exactly one cell, in first-seen order."""
    counts: Counter = Counter()
    first: Dict[Tuple[int, ...], Tuple[int, ...]] = {}
    for cell in cells:
        for face in combinations(cell.tolist(), len(cell) - 1):
            key = tuple(sorted(face))
            counts[key] += 1
            first.setdefault(key, face)
    return [first[key] for key, count in counts.items() if count == 1]


class Mesh:
    def __init__(
        self,
        vertices: Union[np.ndarray, Sequence[Sequence[float]]],
        cells: Union[np.ndarray, Sequence[Sequence[int]]],
        facets: Union[np.ndarray, Sequence[Sequence[int]]],
        facet_labels: Sequence[str],
    ):
        self.vertices = np.asarray(vertices, dtype=float)
        if self.vertices.ndim != 2 or self.vertices.shape[1] not in (2, 3):
            raise MeshError(f"vertices must be an (n, 2) or (n, 3) array, got shape {self.vertices.shape}")
        self.dim = self.vertices.shape[1]
        self.cells = np.asarray(cells, dtype=int).reshape(-1, self.dim + 1)
        self.facets = np.asarray(facets, dtype=int).reshape(-1, self.dim)
        self.facet_labels = [str(label) for label in facet_labels]
        if len(self.facet_labels) != self.facets.shape[0]:
            raise MeshError("every boundary facet needs exactly one label")
        self._validate()

    def _validate(self) -> None:
        n = self.vertices.shape[0]
        for name, arr in (("cell", self.cells), ("facet", self.facets)):
            if arr.size and (arr.min() < 0 or arr.max() >= n):
                raise MeshError(f"{name} references a vertex outside 0..{n - 1}")
        scale = float(np.ptp(self.vertices, axis=0).max()) if n else 0.0
        vol = signed_volumes(self.vertices, self.cells)
        bad = np.flatnonzero(vol <= 1e-14 * scale ** self.dim)
        if bad.size:
            raise MeshError(f"cells with non-positive volume: {bad[:10].tolist()}")

        owners: Counter = Counter()
        for cell in self.cells:
            for face in combinations(sorted(cell.tolist()), self.dim):
                owners[face] += 1
        seen = set()
        for k, facet in enumerate(self.facets):
            key = tuple(sorted(facet.tolist()))
            if owners.get(key, 0) != 1:
                raise MeshError(f"boundary facet {k} {facet.tolist()} does not belong to exactly one cell")
            if key in seen:
                raise MeshError(f"boundary facet {k} {facet.tolist()} is tagged more than once")
            seen.add(key)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_cells(self) -> int:
        return self.cells.shape[0]

    @property
    def labels(self) -> List[str]:
        return sorted(set(self.facet_labels))

    def volumes(self) -> np.ndarray:
        return signed_volumes(self.vertices, self.cells)

    def size(self) -> float:
        """Longest cell edge."""
        longest = 0.0
        for a, b in combinations(range(self.dim + 1), 2):
            d = self.vertices[self.cells[:, a]] - self.vertices[self.cells[:, b]]
            longest = max(longest, float(np.sqrt((d * d).sum(axis=1)).max()))
        return longest

    def facets_with_label(self, label: str) -> np.ndarray:
        mask = np.array([lab == label for lab in self.facet_labels], dtype=bool)
        return self.facets[mask]

    def vertices_with_label(self, label: str) -> np.ndarray:
        return np.unique(self.facets_with_label(label))

    def snap(self, point: Sequence[float], tol: Optional[float] = None) -> Tuple[int, float]:
        """Nearest vertex to `point` and its distance; ProbeError beyond `tol` (default half the longest edge)."""
        p = np.asarray(point, dtype=float)
        if p.shape != (self.dim,):
            raise ProbeError(f"probe {list(point)} has {p.size} coordinates, mesh is {self.dim}-dimensional")
        dist = np.sqrt(((self.vertices - p) ** 2).sum(axis=1))
        index = int(np.argmin(dist))
        limit = 0.5 * self.size() if tol is None else tol
        if dist[index] > limit:
            raise ProbeError(
                f"probe {p.tolist()} is {dist[index]:.3g} away from the nearest vertex (tolerance {limit:.3g})"
            )
        if dist[index] > 0.0:
            logging.info(f"Probe {p.tolist()} snapped to vertex {index} at {self.vertices[index].tolist()}")
        return index, float(dist[index])


class DofMap:
    """Vector P1 numbering; vertices on Dirichlet labels carry no equations."""

    def __init__(self, mesh: Mesh, dirichlet_labels: Sequence[str]):
        missing = [label for label in dirichlet_labels if label not in mesh.labels]
        if missing:
            raise MeshError(f"Dirichlet labels not in mesh: {missing}; mesh has {mesh.labels}")
        self.dim = mesh.dim
        self.n_vertices = mesh.n_vertices
        constrained = np.zeros(mesh.n_vertices, dtype=bool)
        for label in dirichlet_labels:
            constrained[mesh.vertices_with_label(label)] = True
        self.constrained_vertices = np.flatnonzero(constrained)
        self.equations = -np.ones((mesh.n_vertices, mesh.dim), dtype=int)
        free = np.flatnonzero(~constrained)
        self.equations[free] = np.arange(free.size * mesh.dim).reshape(-1, mesh.dim)
        self.n_free = free.size * mesh.dim
        # position in the full vertex-major vector of each free equation
        self.free_dofs = np.flatnonzero(self.equations.reshape(-1) >= 0)

    @property
    def n_total(self) -> int:
        return self.n_vertices * self.dim

    def expand(self, u_free: np.ndarray) -> np.ndarray:
        full = np.zeros(self.n_total)
        full[self.free_dofs] = u_free
        return full

    def restrict(self, full: np.ndarray) -> np.ndarray:
        return np.asarray(full)[self.free_dofs]


# ---------------------------------------------------------------- generators

def _labelled(vertices: np.ndarray, cells: np.ndarray, labeller: Callable[[np.ndarray], str]) -> Mesh:
    cells = orient_cells(vertices, cells)
    faces = boundary_faces(cells)
    labels = [labeller(vertices[list(face)].mean(axis=0)) for face in faces]
    return Mesh(vertices, cells, faces, labels)


def _grid_cells(nx: int, ny: int) -> np.ndarray:
    index = lambda i, j: i * (ny + 1) + j
    cells = []
    for i in range(nx):
        for j in range(ny):
            v00, v10, v01, v11 = index(i, j), index(i + 1, j), index(i, j + 1), index(i + 1, j + 1)
            cells.append((v00, v10, v11))
            cells.append((v00, v11, v01))
    return np.array(cells, dtype=int)


def notched_bar(refinement: int = 2) -> Mesh:
    """Notched bar on [0, 10] x [0, 2]; a (10r) x (2r) grid mapped column-wise between the notched edges."""
    if refinement < 1:
        raise MeshError(f"refinement must be >= 1, got {refinement}")
    nx, ny = 10 * refinement, 2 * refinement
    bx, by = zip(*NOTCHED_BOTTOM)
    tx, ty = zip(*NOTCHED_TOP)
    vertices = []
    for i in range(nx + 1):
        x = 10.0 * i / nx
        lo, hi = np.interp(x, bx, by), np.interp(x, tx, ty)
        for j in range(ny + 1):
            vertices.append((x, lo + (hi - lo) * j / ny))
    vertices = np.array(vertices)

    def label(c: np.ndarray) -> str:
        if c[0] < 1e-9:
            return "left"
        if c[0] > 10.0 - 1e-9:
            return "right"
        return "bottom" if c[1] < 1.0 else "top"

    return _labelled(vertices, _grid_cells(nx, ny), label)


def box(lengths: Sequence[float], divisions: Sequence[int]) -> Mesh:
    """Axis-aligned box [0, L] split into simplices; hexahedra use the six-tetrahedron Kuhn split."""
    lengths = [float(x) for x in lengths]
    divisions = [int(n) for n in divisions]
    dim = len(lengths)
    if dim not in (2, 3) or len(divisions) != dim or min(divisions) < 1 or min(lengths) <= 0.0:
        raise MeshError(f"invalid box lengths {lengths} / divisions {divisions}")

    axes = [np.linspace(0.0, L, n + 1) for L, n in zip(lengths, divisions)]
    if dim == 2:
        vertices = np.array([(x, y) for x in axes[0] for y in axes[1]])
        cells = _grid_cells(*divisions)
    else:
        ny, nz = divisions[1] + 1, divisions[2] + 1
        vertices = np.array([(x, y, z) for x in axes[0] for y in axes[1] for z in axes[2]])
        index = lambda c: (c[0] * ny + c[1]) * nz + c[2]
        cells = []
        for i in range(divisions[0]):
            for j in range(divisions[1]):
                for k in range(divisions[2]):
                    for order in permutations(range(3)):
                        corner = [i, j, k]
                        tet = [index(corner)]
                        for axis in order:
                            corner[axis] += 1
                            tet.append(index(corner))
                        cells.append(tet)
        cells = np.array(cells, dtype=int)

    names = (("left", "right"), ("bottom", "top"), ("front", "back"))

    def label(c: np.ndarray) -> str:
        for axis in range(dim):
            if c[axis] < 1e-9 * lengths[axis]:
                return names[axis][0]
            if c[axis] > lengths[axis] * (1.0 - 1e-9):
                return names[axis][1]
        raise MeshError(f"boundary face centred at {c.tolist()} is not on the box surface")

    return _labelled(vertices, cells, label)


# ---------------------------------------------------------------- text format

def parse_mesh(text: str) -> Mesh:
    rows = [
        (number, line.split())
        for number, line in enumerate(text.splitlines(), start=1)
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not rows:
        raise MeshFormatError(1, "empty mesh file")
    number, header = rows[0]
    if len(header) != 4:
        raise MeshFormatError(number, f"header must be 'dim nv nc nf', got {' '.join(header)!r}")
    try:
        dim, nv, nc, nf = (int(x) for x in header)
    except ValueError:
        raise MeshFormatError(number, f"header values must be integers, got {' '.join(header)!r}") from None
    if dim not in (2, 3):
        raise MeshFormatError(number, f"dim must be 2 or 3, got {dim}")
    expected = 1 + nv + nc + nf
    if len(rows) < expected:
        last = rows[-1][0]
        raise MeshFormatError(last, f"file ends after {len(rows) - 1} records, header announces {expected - 1}")
    if len(rows) > expected:
        raise MeshFormatError(rows[expected][0], "unexpected data after the last facet")

    def numbers(record, count, kind, what):
        number, fields = record
        if len(fields) != count:
            raise MeshFormatError(number, f"{what} needs {count} values, got {len(fields)}")
        try:
            return [kind(x) for x in fields]
        except ValueError:
            raise MeshFormatError(number, f"could not parse {what}: {' '.join(fields)!r}") from None

    vertices = [numbers(r, dim, float, "vertex") for r in rows[1:1 + nv]]
    cells = [numbers(r, dim + 1, int, "cell") for r in rows[1 + nv:1 + nv + nc]]
    facets, labels = [], []
    for number, fields in rows[1 + nv + nc:]:
        if len(fields) != dim + 1:
            raise MeshFormatError(number, f"facet needs {dim} vertex indices and a label, got {len(fields)} fields")
        facets.append(numbers((number, fields[:dim]), dim, int, "facet"))
        labels.append(fields[dim])
    return Mesh(np.array(vertices).reshape(-1, dim), np.array(cells, dtype=int).reshape(-1, dim + 1), facets, labels)


def read_mesh(path: Union[str, Path]) -> Mesh:
    try:
        text = Path(path).read_text(encoding="ascii")
    except (OSError, UnicodeDecodeError) as err:
        raise MeshError(f"cannot read mesh file {path}: {err}") from err
    return parse_mesh(text)


def write_mesh(mesh: Mesh, path: Union[str, Path]) -> Path:
    path = Path(path)
    lines = [f"{mesh.dim} {mesh.n_vertices} {mesh.n_cells} {mesh.facets.shape[0]}"]
    lines += [" ".join(repr(float(x)) for x in v) for v in mesh.vertices]
    lines += [" ".join(str(int(i)) for i in c) for c in mesh.cells]
    lines += [" ".join(str(int(i)) for i in f) + f" {label}" for f, label in zip(mesh.facets, mesh.facet_labels)]
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path
