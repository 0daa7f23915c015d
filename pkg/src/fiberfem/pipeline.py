"""Case orchestration: three solutions on one mesh and a strain trace
along the fiber path.

A case is described by a single JSON document.  Three displacement fields
are computed: u_nf with the matrix material everywhere, u_f with the
superposed fiber stretching term, and optionally u_r on the same mesh with
per-region materials as the resolved reference.  Strains are sampled at the
fiber-path vertices and written as a CSV trace.
"""

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fem, meshing, tensors, transfer
from .errors import ConfigError

_TRACE_FIELDS = ("er", "enf", "eTnf", "ef")
_COMPONENT_LABELS = ("11", "22", "33", "23", "13", "12")

# In-plane angles closer to the z axis than this have no usable x-y
# projection; the operator for such an edge is placed at beta = 0.
_PROJECTION_FLOOR = 1e-12


@dataclass(frozen=True)
class DirichletSpec:
    """One Dirichlet prescription, on a named vertex set or on explicit
    vertex indices (used to pin single vertices)."""

    set_name: str | None
    vertices: tuple | None
    components: tuple
    values: tuple

    def __post_init__(self):
        if (self.set_name is None) == (self.vertices is None):
            raise ConfigError("dirichlet entry needs exactly one of 'set' or 'vertices'")
        if len(self.components) != 3 or len(self.values) != 3:
            raise ConfigError("dirichlet 'components' and 'value' must have length 3")
        if not any(self.components):
            raise ConfigError("dirichlet entry constrains nothing")


@dataclass(frozen=True)
class CaseConfig:
    """Declarative description of one case; all paths already resolved
    against the directory of the config file."""

    mesh_path: Path
    fiber_group: str | None
    fiber_vertices: tuple | None
    matrix_material_path: Path
    fiber_material_path: Path
    region_material_paths: dict
    radius: float
    dirichlet: tuple
    alpha: float
    solver_tol: float
    solver_max_iter: int | None
    stress_scale: float
    length_scale: float
    body_force: object
    output_path: Path

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ConfigError(f"radius must be positive, got {self.radius}")
        if self.stress_scale <= 0.0 or self.length_scale <= 0.0:
            raise ConfigError("unit_scale entries must be positive")
        if (self.fiber_group is None) == (self.fiber_vertices is None):
            raise ConfigError("fiber needs exactly one of 'group' or 'vertices'")


_TOP_KEYS = {
    "mesh", "fiber", "materials", "radius", "dirichlet",
    "stp", "solver", "unit_scale", "body_force", "output",
}


def _require(data, key, where):
    if key not in data:
        raise ConfigError(f"missing '{key}' in {where}")
    return data[key]


def case_config_from_dict(data, base_dir):
    """Build a CaseConfig from parsed JSON, resolving paths against base_dir."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(data) - _TOP_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    base = Path(base_dir)

    def path_of(p):
        p = Path(p)
        return p if p.is_absolute() else base / p

    fiber = _require(data, "fiber", "config")
    if not isinstance(fiber, dict) or ("group" in fiber) == ("vertices" in fiber):
        raise ConfigError("fiber needs exactly one of 'group' or 'vertices'")

    mats = _require(data, "materials", "config")
    regions = {}
    for tag, p in mats.get("regions", {}).items():
        try:
            regions[int(tag)] = path_of(p)
        except ValueError:
            raise ConfigError(f"region tag {tag!r} is not an integer") from None

    specs = []
    for entry in _require(data, "dirichlet", "config"):
        if not isinstance(entry, dict) or ("set" in entry) == ("vertices" in entry):
            raise ConfigError("dirichlet entry needs exactly one of 'set' or 'vertices'")
        specs.append(DirichletSpec(
            set_name=entry.get("set"),
            vertices=tuple(entry["vertices"]) if "vertices" in entry else None,
            components=tuple(bool(c) for c in _require(entry, "components", "dirichlet entry")),
            values=tuple(float(v) for v in _require(entry, "value", "dirichlet entry")),
        ))

    stp = data.get("stp", {})
    solver = data.get("solver", {})
    scale = data.get("unit_scale", {})
    max_iter = solver.get("max_iter")

    body = data.get("body_force", (0.0, 0.0, 0.0))
    if isinstance(body, dict):
        body = {int(tag): tuple(float(c) for c in f) for tag, f in body.items()}
    else:
        body = tuple(float(c) for c in body)

    return CaseConfig(
        mesh_path=path_of(_require(data, "mesh", "config")),
        fiber_group=fiber.get("group"),
        fiber_vertices=tuple(int(v) for v in fiber["vertices"]) if "vertices" in fiber else None,
        matrix_material_path=path_of(_require(mats, "matrix", "materials")),
        fiber_material_path=path_of(_require(mats, "fiber", "materials")),
        region_material_paths=regions,
        radius=float(_require(data, "radius", "config")),
        dirichlet=tuple(specs),
        alpha=float(stp.get("alpha", 0.0)),
        solver_tol=float(solver.get("tol", 1e-10)),
        solver_max_iter=None if max_iter is None else int(max_iter),
        stress_scale=float(scale.get("stress", 1.0)),
        length_scale=float(scale.get("length", 1.0)),
        body_force=body,
        output_path=path_of(_require(data, "output", "config")),
    )


def load_case_config(path):
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    return case_config_from_dict(data, path.parent)


def _load_material(path, stress_scale):
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"material file not found: {path}")
    return tensors.load_material(path) * stress_scale


def _dirichlet_arrays(mesh, specs):
    """Flatten Dirichlet specs to (dofs, values); duplicates are merged and
    conflicts rejected downstream by constrain_dofs."""
    dofs, values = [], []
    for spec in specs:
        if spec.set_name is not None:
            if spec.set_name not in mesh.vertex_sets:
                raise ConfigError(f"unknown vertex set '{spec.set_name}'")
            verts = mesh.vertex_sets[spec.set_name]
        else:
            verts = np.asarray(spec.vertices, dtype=np.intp)
            if verts.size and (verts.min() < 0 or verts.max() >= mesh.num_vertices):
                raise ConfigError(
                    f"dirichlet vertex index out of range (mesh has {mesh.num_vertices} vertices)")
        for comp in range(3):
            if spec.components[comp]:
                dofs.append(3 * verts + comp)
                values.append(np.full(len(verts), spec.values[comp]))
    if not dofs:
        return np.zeros(0, dtype=np.intp), np.zeros(0)
    return np.concatenate(dofs), np.concatenate(values)


def _edge_beta(d):
    if math.hypot(d[0], d[1]) <= _PROJECTION_FLOOR:
        return 0.0
    return math.atan2(d[1], d[0])


def _directional_modulus(S, v):
    P = np.outer(v, v)
    return 1.0 / float(np.einsum("ij,ijkl,kl->", P, S, P))


def _vertex_tet_average(mesh, per_tet, verts):
    # Volume-weighted average over all tets incident to each sampled vertex;
    # P1 strains are discontinuous so a sampling rule is required.
    n = mesh.num_vertices
    acc = np.zeros((n, 3, 3))
    weight = np.zeros(n)
    vol = mesh.volumes
    for a in range(4):
        np.add.at(acc, mesh.tets[:, a], per_tet * vol[:, None, None])
        np.add.at(weight, mesh.tets[:, a], vol)
    return acc[verts] / weight[verts, None, None]


def _arc_average(path, per_edge):
    """Average per-edge values onto path vertices, weighted by edge length;
    endpoints take the single adjacent edge value."""
    per_edge = np.asarray(per_edge, dtype=float)
    m = per_edge.shape[0]
    out = np.empty((m + 1,) + per_edge.shape[1:])
    out[0] = per_edge[0]
    out[-1] = per_edge[-1]
    if m > 1:
        wa = path.edge_lengths[:-1].reshape((m - 1,) + (1,) * (per_edge.ndim - 1))
        wb = path.edge_lengths[1:].reshape((m - 1,) + (1,) * (per_edge.ndim - 1))
        out[1:-1] = (wa * per_edge[:-1] + wb * per_edge[1:]) / (wa + wb)
    return out


@dataclass(frozen=True)
class CaseSolution:
    """Everything solve_case computed: fields, operators, matrices."""

    mesh: meshing.TetMesh
    path: meshing.FiberPath
    matrix_c: np.ndarray
    fiber_c: np.ndarray
    u_nf: np.ndarray
    u_f: np.ndarray
    u_r: np.ndarray | None
    iterations: dict
    fiber_model: fem.FiberModel | None
    edge_directions: np.ndarray
    edge_operators: tuple
    edge_strain: np.ndarray
    bulk_matrix: object
    fiber_matrix: object | None


@dataclass(frozen=True)
class SensorTrace:
    """Strain tensors sampled at the fiber-path vertices.

    s is the cumulative arc length; eps_ref is None when no resolved
    reference was solved.  All tensors are full symmetric 3x3 arrays.
    """

    s: np.ndarray
    eps_ref: np.ndarray | None
    eps_nf: np.ndarray
    eps_transfer: np.ndarray
    eps_fiber: np.ndarray

    def __post_init__(self):
        n = len(self.s)
        if np.any(np.diff(self.s) <= 0.0):
            raise ValueError("trace arc length must be strictly increasing")
        for name in ("eps_nf", "eps_transfer", "eps_fiber"):
            arr = getattr(self, name)
            if arr.shape != (n, 3, 3) or not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite with shape ({n}, 3, 3)")
        if self.eps_ref is not None and (
            self.eps_ref.shape != (n, 3, 3) or not np.all(np.isfinite(self.eps_ref))
        ):
            raise ValueError(f"eps_ref must be finite with shape ({n}, 3, 3)")

    @property
    def num_vertices(self):
        return len(self.s)


def solve_case(cfg, skip_reference=False):
    """Solve a configured case and return all fields and per-edge operators.

    u_nf uses the matrix material everywhere (a tagged fiber region is
    deliberately overridden).  u_f superposes the fiber stretching term with
    the per-edge effective modulus max(0, E_f - E_m); when every edge excess
    is zero the solve is skipped and u_f is the identical u_nf array.  u_r
    is solved only when per-region materials are configured and the caller
    did not skip it.
    """
    mesh, _, chains = meshing.load_msh(_existing(cfg.mesh_path, "mesh"))
    if cfg.length_scale != 1.0:
        mesh = meshing.TetMesh(
            mesh.vertices * cfg.length_scale, mesh.tets, mesh.region_tags, mesh.vertex_sets)
    radius = cfg.radius * cfg.length_scale

    if cfg.fiber_group is not None:
        if cfg.fiber_group not in chains:
            raise ConfigError(f"mesh has no fiber chain named '{cfg.fiber_group}'")
        chain = chains[cfg.fiber_group]
    else:
        chain = np.asarray(cfg.fiber_vertices, dtype=np.intp)
    path = meshing.validate_fiber_path(mesh, chain)

    C_matrix = _load_material(cfg.matrix_material_path, cfg.stress_scale)
    C_fiber = _load_material(cfg.fiber_material_path, cfg.stress_scale)
    S_fiber = tensors.invert_stiffness(C_fiber)

    # Unit scales convert every dimensioned input: coordinates, radius and
    # prescribed displacements by length, stiffnesses by stress, body force
    # (stress per length) by their ratio.
    force_scale = cfg.stress_scale / cfg.length_scale
    body = cfg.body_force
    if isinstance(body, dict):
        body = {tag: tuple(c * force_scale for c in f) for tag, f in body.items()}
    else:
        body = tuple(c * force_scale for c in body)
    rhs = fem.assemble_rhs(mesh, body)
    dofs, values = _dirichlet_arrays(mesh, cfg.dirichlet)
    values = values * cfg.length_scale

    def solve(K):
        sys = fem.constrain_dofs(fem.SparseSystem.from_parts(K, rhs), dofs, values)
        return fem.solve_cg(sys, tol=cfg.solver_tol, max_iter=cfg.solver_max_iter)

    K_bulk = fem.assemble_bulk(mesh, fem.MaterialMap(entries={}, default=C_matrix))
    u_nf, it_nf = solve(K_bulk)

    vecs = mesh.vertices[path.vertices[1:]] - mesh.vertices[path.vertices[:-1]]
    dirs = vecs / path.edge_lengths[:, None]
    excess = np.array([
        transfer.effective_fiber_modulus(C_matrix, _directional_modulus(S_fiber, d), d).E
        for d in dirs
    ])

    iterations = {"nf": it_nf, "f": 0, "r": None}
    if np.any(excess > 0.0):
        fiber_model = fem.FiberModel(path=path, E=excess, area=math.pi * radius**2)
        K_fiber = fem.assemble_fiber(mesh, fiber_model)
        u_f, iterations["f"] = solve((K_bulk + K_fiber).tocsr())
    else:
        fiber_model = None
        K_fiber = None
        u_f = u_nf

    u_r = None
    if cfg.region_material_paths and not skip_reference:
        entries = {
            tag: _load_material(p, cfg.stress_scale)
            for tag, p in sorted(cfg.region_material_paths.items())
        }
        K_ref = fem.assemble_bulk(mesh, fem.MaterialMap(entries=entries, default=C_matrix))
        u_r, iterations["r"] = solve(K_ref)

    section = transfer.FiberSection(radius)
    base = transfer.assemble_stp(C_matrix, C_fiber, section)
    if cfg.alpha != 0.0:
        base = transfer.rotate_stp(base, cfg.alpha, 0.0)
    ops = {}
    edge_ops = tuple(
        ops.setdefault(beta, transfer.rotate_stp(base, 0.0, beta))
        for beta in (_edge_beta(d) for d in dirs)
    )

    edge_strain = np.array([
        fem.edge_fiber_strain(mesh, u_f, (path.vertices[k], path.vertices[k + 1]))
        for k in range(path.num_edges)
    ])

    return CaseSolution(
        mesh=mesh, path=path, matrix_c=C_matrix, fiber_c=C_fiber,
        u_nf=u_nf, u_f=u_f, u_r=u_r, iterations=iterations,
        fiber_model=fiber_model, edge_directions=dirs, edge_operators=edge_ops,
        edge_strain=edge_strain, bulk_matrix=K_bulk, fiber_matrix=K_fiber,
    )


def _existing(path, kind):
    if not Path(path).is_file():
        raise ConfigError(f"{kind} file not found: {path}")
    return path


def trace_from_solution(sol):
    """Sample the three strain fields at the fiber-path vertices."""
    verts = sol.path.vertices
    eps_nf = _vertex_tet_average(sol.mesh, fem.strain_per_tet(sol.mesh, sol.u_nf), verts)
    eps_ref = None
    if sol.u_r is not None:
        eps_ref = _vertex_tet_average(sol.mesh, fem.strain_per_tet(sol.mesh, sol.u_r), verts)

    T = _arc_average(sol.path, np.array([op.tensor for op in sol.edge_operators]))
    t = np.einsum("nijkl,nkl->nij", T, eps_nf)
    t = 0.5 * (t + t.transpose(0, 2, 1))

    v = _arc_average(sol.path, sol.edge_directions)
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    P = v[:, :, None] * v[:, None, :]
    gamma = _arc_average(sol.path, sol.edge_strain)
    axial = np.einsum("nij,nij->n", P, t)
    eps_fiber = t - P * axial[:, None, None] + P * gamma[:, None, None]

    return SensorTrace(
        s=sol.path.s, eps_ref=eps_ref, eps_nf=eps_nf,
        eps_transfer=t, eps_fiber=eps_fiber,
    )


def run_case(cfg, skip_reference=False):
    return trace_from_solution(solve_case(cfg, skip_reference=skip_reference))


def csv_header():
    names = [f"{f}{c}" for f in _TRACE_FIELDS for c in _COMPONENT_LABELS]
    return "s," + ",".join(names)


def _row(trace, i):
    cells = [repr(float(trace.s[i]))]
    fields = (trace.eps_ref, trace.eps_nf, trace.eps_transfer, trace.eps_fiber)
    for arr in fields:
        for a, b in tensors.VOIGT_PAIRS:
            cells.append("" if arr is None else repr(float(arr[i, a, b])))
    return ",".join(cells)


def write_csv(trace, path):
    """Write the trace; repr floats survive a parse round trip bit-exactly.

    Reference columns are left empty when no reference field was solved.
    """
    lines = [csv_header()]
    lines.extend(_row(trace, i) for i in range(trace.num_vertices))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
