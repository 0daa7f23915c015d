"""Tetrahedral meshes, Gmsh MSH v2.2 ingestion, and a structured box generator.

Meshes are immutable after construction.  Named vertex sets ride on the mesh
and come from point-element physical groups in MSH files; physical groups of
line elements are stitched into ordered fiber chains at load time.  The box
generator splits every grid cell into six tetrahedra sharing the cell
diagonal, which makes every axis-parallel grid line a valid fiber chain.
"""

import itertools
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, MeshError

# rejects tets flatter than 1e-12 of the bounding box scale, cubed because
# the comparison is on 6*volume
_DEGENERACY_RTOL = 1e-12


class TetMesh:
    """Vertices, tets, per-tet region tags, and named vertex sets.

    Tets are reoriented to positive signed volume on construction; degenerate
    or duplicate tets and out-of-range indices are rejected.
    """

    def __init__(self, vertices, tets, region_tags=None, vertex_sets=None):
        vertices = np.ascontiguousarray(vertices, dtype=float)
        tets = np.ascontiguousarray(tets, dtype=np.intp)
        if tets.size == 0:
            tets = tets.reshape(0, 4)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise MeshError(f"vertices must be (n, 3), got {vertices.shape}")
        if tets.ndim != 2 or tets.shape[1] != 4:
            raise MeshError(f"tets must be (m, 4), got {tets.shape}")
        if tets.size and (tets.min() < 0 or tets.max() >= len(vertices)):
            raise MeshError("tet vertex index out of range")

        span = vertices.max(axis=0) - vertices.min(axis=0) if len(vertices) else np.zeros(3)
        diag = float(np.linalg.norm(span))
        vol6 = _signed_volumes6(vertices, tets)
        floor = _DEGENERACY_RTOL * diag**3
        flat = np.abs(vol6) <= floor
        if flat.any():
            t = int(np.argmax(flat))
            raise MeshError(
                f"tet {t} {tuple(tets[t])} is degenerate "
                f"(|6V| = {abs(vol6[t]):.3e} <= {floor:.3e})"
            )
        tets = tets.copy()
        neg = vol6 < 0
        tets[neg] = tets[neg][:, [1, 0, 2, 3]]

        key = np.sort(tets, axis=1)
        if len(np.unique(key, axis=0)) != len(tets):
            raise MeshError("duplicate tets")

        if region_tags is None:
            region_tags = np.zeros(len(tets), dtype=int)
        region_tags = np.ascontiguousarray(region_tags, dtype=int)
        if region_tags.shape != (len(tets),):
            raise MeshError("region_tags must have one entry per tet")

        sets = {}
        for name, idx in (vertex_sets or {}).items():
            idx = np.unique(np.asarray(idx, dtype=np.intp))
            if idx.size and (idx.min() < 0 or idx.max() >= len(vertices)):
                raise MeshError(f"vertex set {name!r} has an index out of range")
            idx.setflags(write=False)
            sets[name] = idx

        for arr in (vertices, tets, region_tags):
            arr.setflags(write=False)
        self.vertices = vertices
        self.tets = tets
        self.region_tags = region_tags
        self.vertex_sets = sets
        self._volumes = np.abs(_signed_volumes6(vertices, tets)) / 6.0
        self._volumes.setflags(write=False)
        self._edge_map = None

    @property
    def num_vertices(self):
        return len(self.vertices)

    @property
    def num_tets(self):
        return len(self.tets)

    @property
    def volumes(self):
        return self._volumes

    def edges(self):
        """Map from sorted vertex pair to the indices of incident tets."""
        if self._edge_map is None:
            emap = defaultdict(list)
            for t, tet in enumerate(self.tets):
                for a, b in itertools.combinations(sorted(tet), 2):
                    emap[(int(a), int(b))].append(t)
            self._edge_map = dict(emap)
        return self._edge_map


def _signed_volumes6(vertices, tets):
    if not len(tets):
        return np.zeros(0)
    p = vertices[tets]
    return np.linalg.det(p[:, 1:] - p[:, :1])


def edge_incident_tets(mesh, edge):
    a, b = int(edge[0]), int(edge[1])
    tets = mesh.edges().get((min(a, b), max(a, b)))
    if tets is None:
        raise MeshError(f"({a}, {b}) is not an edge of the mesh")
    return np.array(tets, dtype=np.intp)


@dataclass(frozen=True)
class FiberPath:
    """Ordered chain of mesh vertices with its arc-length parameterization."""

    vertices: np.ndarray
    edge_lengths: np.ndarray
    s: np.ndarray

    @property
    def total_length(self):
        return float(self.s[-1])

    @property
    def num_edges(self):
        return len(self.edge_lengths)


@dataclass(frozen=True)
class BoundaryCondition:
    """Dirichlet data on a named vertex set, one flag/value per component."""

    set_name: str
    components: tuple
    values: tuple

    def __post_init__(self):
        if len(self.components) != 3 or len(self.values) != 3:
            raise ValueError("components and values must have length 3")
        if not any(self.components):
            raise ValueError(f"boundary condition on {self.set_name!r} constrains nothing")


def validate_fiber_path(mesh, chain):
    """Check a vertex chain against the mesh and attach arc-lengths.

    Every consecutive pair must be an edge of some tet; vertices must not
    repeat.
    """
    chain = np.asarray(chain, dtype=np.intp)
    if chain.ndim != 1 or len(chain) < 2:
        raise MeshError("a fiber chain needs at least two vertices")
    if len(np.unique(chain)) != len(chain):
        raise MeshError("fiber chain repeats a vertex")
    if chain.min() < 0 or chain.max() >= mesh.num_vertices:
        raise MeshError("fiber chain vertex index out of range")
    emap = mesh.edges()
    for a, b in zip(chain[:-1], chain[1:]):
        if (min(a, b), max(a, b)) not in emap:
            raise MeshError(f"fiber chain pair ({a}, {b}) is not a mesh edge")
    lengths = np.linalg.norm(np.diff(mesh.vertices[chain], axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(lengths)])
    return FiberPath(vertices=chain, edge_lengths=lengths, s=s)


# ---------------------------------------------------------------------------
# MSH v2.2 ASCII

_TET = 4
_LINE = 1
_POINT = 15


def load_msh(source):
    """Read a Gmsh MSH v2.2 ASCII file (path or file-like).

    Returns (mesh, vertex_sets, chains).  Point-element physical groups
    become named vertex sets; line-element groups are stitched into ordered
    chains and their vertices double as a set of the same name.  Tet physical
    tags become region tags.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    if isinstance(text, bytes):
        text = text.decode("utf-8")

    sections = _split_sections(text)
    if "MeshFormat" not in sections:
        raise FormatError("missing $MeshFormat section")
    fmt = sections["MeshFormat"][0].split()
    if not fmt[0].startswith("2.2") or fmt[1] != "0":
        raise FormatError(f"only MSH 2.2 ASCII is supported, got version {fmt[0]} type {fmt[1]}")

    names = {}
    if "PhysicalNames" in sections:
        rows = sections["PhysicalNames"]
        for row in rows[1 : 1 + int(rows[0])]:
            dim, tag, name = row.split(None, 2)
            names[(int(dim), int(tag))] = name.strip().strip('"')

    if "Nodes" not in sections or "Elements" not in sections:
        raise FormatError("missing $Nodes or $Elements section")
    node_rows = sections["Nodes"]
    count = int(node_rows[0])
    index_of = {}
    coords = np.zeros((count, 3))
    for i, row in enumerate(node_rows[1 : 1 + count]):
        parts = row.split()
        index_of[int(parts[0])] = i
        coords[i] = [float(x) for x in parts[1:4]]

    tets, region_tags = [], []
    line_groups = defaultdict(list)
    point_groups = defaultdict(list)
    elem_rows = sections["Elements"]
    for row in elem_rows[1 : 1 + int(elem_rows[0])]:
        parts = [int(x) for x in row.split()]
        eid, etype, ntags = parts[0], parts[1], parts[2]
        tags = parts[3 : 3 + ntags]
        try:
            nodes = [index_of[n] for n in parts[3 + ntags :]]
        except KeyError as exc:
            raise FormatError(f"element {eid} references unknown node {exc}") from exc
        phys = tags[0] if tags else 0
        if etype == _TET:
            tets.append(nodes)
            region_tags.append(phys)
        elif etype == _LINE:
            line_groups[phys].append(tuple(nodes))
        elif etype == _POINT:
            point_groups[phys].append(nodes[0])
        else:
            raise FormatError(f"unsupported element type {etype} (element {eid})")

    vertex_sets = {}
    for tag, nodes in point_groups.items():
        vertex_sets[names.get((0, tag), str(tag))] = np.array(sorted(set(nodes)))
    chains = {}
    for tag, segs in line_groups.items():
        name = names.get((1, tag), str(tag))
        chains[name] = _stitch_chain(name, segs)
        vertex_sets.setdefault(name, np.array(sorted({v for seg in segs for v in seg})))

    mesh = TetMesh(coords, tets, region_tags=region_tags, vertex_sets=vertex_sets)
    return mesh, mesh.vertex_sets, chains


def _split_sections(text):
    sections = {}
    current = None
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("$End"):
            current = None
        elif line.startswith("$"):
            current = line[1:]
            sections[current] = []
        elif current is not None:
            sections[current].append(line)
    return sections


def _stitch_chain(name, segments):
    """Order 2-node segments into a single open chain, smaller endpoint first."""
    adjacency = defaultdict(list)
    for a, b in segments:
        if a == b:
            raise MeshError(f"fiber group {name!r} contains a zero-length segment")
        adjacency[a].append(b)
        adjacency[b].append(a)
    ends = sorted(v for v, nbs in adjacency.items() if len(nbs) == 1)
    if any(len(nbs) > 2 for nbs in adjacency.values()) or len(ends) != 2:
        raise MeshError(f"fiber group {name!r} does not stitch into a single open chain")
    chain = [ends[0]]
    prev = None
    while True:
        nbs = adjacency[chain[-1]]
        nxt = nbs[0] if nbs[0] != prev else (nbs[1] if len(nbs) > 1 else None)
        if nxt is None:
            break
        prev = chain[-1]
        chain.append(nxt)
    if len(chain) != len(segments) + 1:
        raise MeshError(f"fiber group {name!r} is disconnected")
    return np.array(chain, dtype=np.intp)


def serialize_msh(mesh, chains=None):
    """Write a mesh (and optional fiber chains) back to MSH 2.2 ASCII text.

    Coordinates are written with repr so a reload reproduces them exactly.
    """
    chains = chains or {}
    out = ["$MeshFormat", "2.2 0 8", "$EndMeshFormat"]

    set_tags = {name: i + 1 for i, name in enumerate(sorted(mesh.vertex_sets))}
    chain_tags = {name: i + 1 for i, name in enumerate(sorted(chains))}
    if set_tags or chain_tags:
        out.append("$PhysicalNames")
        out.append(str(len(set_tags) + len(chain_tags)))
        for name, tag in set_tags.items():
            out.append(f'0 {tag} "{name}"')
        for name, tag in chain_tags.items():
            out.append(f'1 {tag} "{name}"')
        out.append("$EndPhysicalNames")

    out.append("$Nodes")
    out.append(str(mesh.num_vertices))
    for i, (x, y, z) in enumerate(mesh.vertices):
        out.append(f"{i + 1} {float(x)!r} {float(y)!r} {float(z)!r}")
    out.append("$EndNodes")

    elements = []
    for name, tag in set_tags.items():
        for v in mesh.vertex_sets[name]:
            elements.append(f"{_POINT} 2 {tag} {tag} {v + 1}")
    for name, tag in chain_tags.items():
        chain = np.asarray(chains[name])
        for a, b in zip(chain[:-1], chain[1:]):
            elements.append(f"{_LINE} 2 {tag} {tag} {a + 1} {b + 1}")
    for tet, region in zip(mesh.tets, mesh.region_tags):
        nodes = " ".join(str(v + 1) for v in tet)
        elements.append(f"{_TET} 2 {region} {region} {nodes}")

    out.append("$Elements")
    out.append(str(len(elements)))
    out.extend(f"{i + 1} {body}" for i, body in enumerate(elements))
    out.append("$EndElements")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# structured box meshes

_CELL_PERMUTATIONS = tuple(itertools.permutations((0, 1, 2)))


def build_box_mesh(nx, ny, nz, lx, ly, lz):
    """Structured box mesh, six tets per cell, face vertex sets attached.

    The six tets of a cell share the cell's main diagonal, so every
    axis-parallel grid line is an edge chain of the mesh (usable as a fiber
    path).  Face sets are named xmin/xmax/ymin/ymax/zmin/zmax.
    """
    counts = (int(nx), int(ny), int(nz))
    lengths = (float(lx), float(ly), float(lz))
    if min(counts) < 1:
        raise ValueError(f"cell counts must be >= 1, got {counts}")
    if min(lengths) <= 0:
        raise ValueError(f"box lengths must be positive, got {lengths}")
    nx, ny, nz = counts

    xs = np.linspace(0.0, lengths[0], nx + 1)
    ys = np.linspace(0.0, lengths[1], ny + 1)
    zs = np.linspace(0.0, lengths[2], nz + 1)
    vertices = np.zeros(((nx + 1) * (ny + 1) * (nz + 1), 3))
    for k in range(nz + 1):
        for j in range(ny + 1):
            base = (k * (ny + 1) + j) * (nx + 1)
            vertices[base : base + nx + 1, 0] = xs
            vertices[base : base + nx + 1, 1] = ys[j]
            vertices[base : base + nx + 1, 2] = zs[k]

    def vid(i, j, k):
        return (k * (ny + 1) + j) * (nx + 1) + i

    tets = []
    for k in range(nz):
        for j in range(ny):
            for i in range(nx):
                for perm in _CELL_PERMUTATIONS:
                    corner = [i, j, k]
                    tet = [vid(*corner)]
                    for axis in perm:
                        corner[axis] += 1
                        tet.append(vid(*corner))
                    tets.append(tet)

    jj, kk = np.meshgrid(np.arange(ny + 1), np.arange(nz + 1), indexing="ij")
    ii, kk2 = np.meshgrid(np.arange(nx + 1), np.arange(nz + 1), indexing="ij")
    ii2, jj2 = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1), indexing="ij")
    sets = {
        "xmin": vid(0, jj, kk).ravel(),
        "xmax": vid(nx, jj, kk).ravel(),
        "ymin": vid(ii, 0, kk2).ravel(),
        "ymax": vid(ii, ny, kk2).ravel(),
        "zmin": vid(ii2, jj2, 0).ravel(),
        "zmax": vid(ii2, jj2, nz).ravel(),
    }
    return TetMesh(vertices, tets, vertex_sets=sets)


def box_grid_line(nx, ny, nz, axis, a, b):
    """Vertex indices of an axis-parallel grid line of a box mesh.

    For axis "x", (a, b) are the y and z grid indices; analogously for the
    other axes.  The returned chain is valid for build_box_mesh output with
    the same counts.
    """
    nx, ny, nz = int(nx), int(ny), int(nz)

    def vid(i, j, k):
        return (k * (ny + 1) + j) * (nx + 1) + i

    if axis == "x":
        return np.array([vid(i, a, b) for i in range(nx + 1)], dtype=np.intp)
    if axis == "y":
        return np.array([vid(a, j, b) for j in range(ny + 1)], dtype=np.intp)
    if axis == "z":
        return np.array([vid(a, b, k) for k in range(nz + 1)], dtype=np.intp)
    raise ValueError(f"axis must be x, y, or z, got {axis!r}")
