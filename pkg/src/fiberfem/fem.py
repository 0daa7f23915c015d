"""P1 linear elasticity on tets with a superposed 1D fiber stretching term.

Displacement fields are (n, 3) arrays, strain fields (m, 3, 3) arrays with
one constant symmetric tensor per tet.  The assembled operator is kept both
before and after Dirichlet elimination so reactions can be recovered from
the unconstrained system.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import AssemblyError, ConfigError, MaterialError, MeshError, SolverError
from .tensors import check_positive_definite, stiffness_to_voigt

try:
    from . import _kernels as _impl

    COMPILED_KERNELS = True
except ImportError:
    from . import _kernels_py as _impl

    COMPILED_KERNELS = False

backend_name = "compiled" if COMPILED_KERNELS else "numpy"


@dataclass(frozen=True)
class MaterialMap:
    """Region tag to stiffness tensor, with an optional default material."""

    entries: dict
    default: np.ndarray = None

    def stiffness_for(self, tag):
        C = self.entries.get(int(tag), self.default)
        if C is None:
            raise MaterialError(f"no material for region tag {tag}")
        return C

    def voigt_table(self, mesh):
        """One 6x6 Voigt stiffness per tet; validates coverage and definiteness."""
        cache = {}
        for tag in np.unique(mesh.region_tags):
            C = self.stiffness_for(tag)
            check_positive_definite(C)
            cache[int(tag)] = stiffness_to_voigt(C)
        return np.array([cache[int(t)] for t in mesh.region_tags])


@dataclass(frozen=True)
class FiberModel:
    """Fiber path with effective stretching stiffness.

    E is the effective excess modulus, a scalar or one value per path edge
    (the directional matrix modulus varies along a bent fiber); area is the
    cross-section area.
    """

    path: object
    E: np.ndarray
    area: float

    def __post_init__(self):
        E = np.broadcast_to(np.asarray(self.E, dtype=float), (self.path.num_edges,))
        if (E < 0).any():
            raise MaterialError("effective fiber modulus must be >= 0")
        if not self.area > 0:
            raise MaterialError(f"fiber section area must be positive, got {self.area}")
        object.__setattr__(self, "E", E)


@dataclass(frozen=True)
class SparseSystem:
    """Operator, right-hand side, and the Dirichlet data applied so far.

    `matrix`/`rhs` are the current (possibly eliminated) system; the _full
    pair always holds the unconstrained operator for reaction recovery.
    """

    matrix: sp.csr_matrix
    rhs: np.ndarray
    matrix_full: sp.csr_matrix
    rhs_full: np.ndarray
    constrained_dofs: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.intp))
    constrained_values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @classmethod
    def from_parts(cls, K, b):
        K = K.tocsr()
        b = np.asarray(b, dtype=float)
        return cls(matrix=K, rhs=b, matrix_full=K, rhs_full=b)

    @property
    def num_dofs(self):
        return self.matrix.shape[0]


def assemble_bulk(mesh, mats):
    """Global stiffness from the volumetric term, as CSR over 3N dofs."""
    cvoigt = mats.voigt_table(mesh)
    tets = np.ascontiguousarray(mesh.tets, dtype=np.int64)
    ke, vol6 = _impl.element_stiffness(mesh.vertices, tets, cvoigt)
    span = mesh.vertices.max(axis=0) - mesh.vertices.min(axis=0)
    floor = 1e-12 * float(np.linalg.norm(span)) ** 3
    small = np.abs(vol6) <= floor
    if small.any():
        t = int(np.argmax(small))
        raise AssemblyError(f"tet {t} is degenerate (|6V| = {abs(vol6[t]):.3e})")
    dofs = (3 * tets[:, :, None] + np.arange(3)).reshape(len(tets), 12)
    rows = np.repeat(dofs, 12, axis=1).ravel()
    cols = np.tile(dofs, (1, 12)).ravel()
    n = 3 * mesh.num_vertices
    return sp.coo_matrix((ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def assemble_fiber(mesh, fiber):
    """Truss stiffness EA/L * d d^T per fiber edge, as CSR over 3N dofs."""
    n = 3 * mesh.num_vertices
    rows, cols, vals = [], [], []
    chain = fiber.path.vertices
    for k, (a, b) in enumerate(zip(chain[:-1], chain[1:])):
        if fiber.E[k] == 0.0:
            continue
        delta = mesh.vertices[b] - mesh.vertices[a]
        length = float(np.linalg.norm(delta))
        d = delta / length
        block = (fiber.E[k] * fiber.area / length) * np.outer(d, d)
        for (va, vb, sign) in ((a, a, 1.0), (b, b, 1.0), (a, b, -1.0), (b, a, -1.0)):
            for i in range(3):
                for j in range(3):
                    rows.append(3 * va + i)
                    cols.append(3 * vb + j)
                    vals.append(sign * block[i, j])
    return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


def assemble_rhs(mesh, f):
    """Consistent load vector: each tet spreads f * vol / 4 over its vertices.

    f is a (3,) density or a {region tag: (3,)} mapping.
    """
    b = np.zeros(3 * mesh.num_vertices)
    if isinstance(f, dict):
        table = np.zeros((mesh.num_tets, 3))
        for tag, val in f.items():
            table[mesh.region_tags == int(tag)] = np.asarray(val, dtype=float)
    else:
        table = np.broadcast_to(np.asarray(f, dtype=float), (mesh.num_tets, 3))
    loads = table * (mesh.volumes[:, None] / 4.0)
    for corner in range(4):
        np.add.at(b.reshape(-1, 3), mesh.tets[:, corner], loads)
    return b


def resolve_dirichlet(mesh, bcs):
    """Flatten boundary conditions to (dofs, values), rejecting conflicts."""
    pairs = {}
    for bc in bcs:
        if bc.set_name not in mesh.vertex_sets:
            raise ConfigError(f"unknown vertex set {bc.set_name!r}")
        for v in mesh.vertex_sets[bc.set_name]:
            for comp in range(3):
                if not bc.components[comp]:
                    continue
                dof = 3 * int(v) + comp
                value = float(bc.values[comp])
                if dof in pairs and pairs[dof] != value:
                    raise ConfigError(
                        f"conflicting values on vertex {v} component {comp}: "
                        f"{pairs[dof]} vs {value}"
                    )
                pairs[dof] = value
    dofs = np.array(sorted(pairs), dtype=np.intp)
    values = np.array([pairs[d] for d in dofs])
    return dofs, values


def apply_dirichlet(sys, mesh, bcs):
    """Symmetric elimination of the boundary conditions; returns a new system."""
    return constrain_dofs(sys, *resolve_dirichlet(mesh, bcs))


def constrain_dofs(sys, dofs, values):
    """Eliminate prescribed dofs symmetrically.

    Constrained rows/columns are zeroed with a unit diagonal and the known
    values are moved to the right-hand side, so the operator stays symmetric
    and definite on the free dofs.  Takes raw (dofs, values) so non-constant
    boundary data (an affine patch-test field, a single pinned vertex) can be
    prescribed directly.
    """
    dofs = np.asarray(dofs, dtype=np.intp)
    values = np.asarray(values, dtype=float)
    merged = dict(zip(sys.constrained_dofs.tolist(), sys.constrained_values.tolist()))
    for d, v in zip(dofs.tolist(), values.tolist()):
        if merged.get(d, v) != v:
            raise ConfigError(f"conflicting values on dof {d}")
        merged[d] = v
    dofs = np.array(sorted(merged), dtype=np.intp)
    values = np.array([merged[d] for d in dofs])

    K = sys.matrix_full
    n = sys.num_dofs
    ext = np.zeros(n)
    ext[dofs] = values
    b = sys.rhs_full - K @ ext
    b[dofs] = values

    keep = np.ones(n)
    keep[dofs] = 0.0
    P = sp.diags(keep)
    K_elim = (P @ K @ P + sp.diags(1.0 - keep)).tocsr()
    return SparseSystem(
        matrix=K_elim,
        rhs=b,
        matrix_full=sys.matrix_full,
        rhs_full=sys.rhs_full,
        constrained_dofs=dofs,
        constrained_values=values,
    )


def solve_cg(sys, tol=1e-10, max_iter=None):
    """Jacobi-preconditioned conjugate gradients on the eliminated system.

    Starts from the Dirichlet extension, which the iteration then never
    touches (constrained rows are identity and search directions vanish
    there), so the returned field satisfies the constraints exactly.
    Convergence is on the true residual |Ku - b| / |b|.  Returns
    (displacements (n, 3), iteration count).
    """
    K, b = sys.matrix, sys.rhs
    n = len(b)
    if max_iter is None:
        max_iter = 10 * n
    x = np.zeros(n)
    x[sys.constrained_dofs] = sys.constrained_values
    norm_b = float(np.linalg.norm(b))
    if norm_b == 0.0:
        return x.reshape(-1, 3), 0

    diag = K.diagonal()
    if (diag <= 0).any():
        dof = int(np.argmax(diag <= 0))
        raise SolverError(f"non-positive diagonal at dof {dof}; system is not SPD")
    inv_diag = 1.0 / diag

    r = b - K @ x
    z = inv_diag * r
    p = z.copy()
    rz = float(r @ z)
    iterations = 0
    while iterations < max_iter:
        res = float(np.linalg.norm(r)) / norm_b
        if res <= tol:
            true_res = float(np.linalg.norm(b - K @ x)) / norm_b
            if true_res <= tol:
                return x.reshape(-1, 3), iterations
            r = b - K @ x
            z = inv_diag * r
            p = z.copy()
            rz = float(r @ z)
        Kp = K @ p
        alpha = rz / float(p @ Kp)
        x += alpha * p
        r -= alpha * Kp
        z = inv_diag * r
        rz_next = float(r @ z)
        p = z + (rz_next / rz) * p
        rz = rz_next
        iterations += 1
    res = float(np.linalg.norm(b - K @ x)) / norm_b
    if res <= tol:
        return x.reshape(-1, 3), iterations
    raise SolverError(f"no convergence within {max_iter} iterations (residual {res:.3e})")


def strain_per_tet(mesh, u):
    """Constant symmetric strain per tet from the P1 gradient, (m, 3, 3)."""
    tets = np.ascontiguousarray(mesh.tets, dtype=np.int64)
    return _impl.tet_strains(mesh.vertices, tets, np.ascontiguousarray(u, dtype=float))


def edge_fiber_strain(mesh, u, edge):
    """((u(p2) - u(p1)) . (p2 - p1)) / |p2 - p1|^2 for one edge."""
    a, b = int(edge[0]), int(edge[1])
    delta = mesh.vertices[b] - mesh.vertices[a]
    norm2 = float(delta @ delta)
    if norm2 == 0.0:
        raise MeshError(f"edge ({a}, {b}) has coincident vertices")
    return float((u[b] - u[a]) @ delta) / norm2


def reaction_force(sys, mesh, u, set_name):
    """Net force on a vertex set from the pre-elimination operator."""
    if set_name not in mesh.vertex_sets:
        raise ConfigError(f"unknown vertex set {set_name!r}")
    residual = (sys.matrix_full @ u.ravel() - sys.rhs_full).reshape(-1, 3)
    return residual[mesh.vertex_sets[set_name]].sum(axis=0)


def strain_energy(K, u):
    """1/2 u^T K u for an assembled operator."""
    flat = np.asarray(u, dtype=float).ravel()
    return 0.5 * float(flat @ (K @ flat))
