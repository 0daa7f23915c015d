"""Fiber-reinforced linear elasticity with analytical fiber strain recovery."""

__version__ = "0.1.0"

from .errors import (
    AssemblyError,
    ConfigError,
    FiberFemError,
    FormatError,
    MaterialError,
    MeshError,
    SolverError,
    TransferValidityError,
)
from .tensors import (
    isotropic_stiffness,
    invert_stiffness,
    load_material,
    material_from_dict,
    rotate_tensor4,
    rotation_x,
    rotation_z,
)
from .transfer import (
    EffectiveFiberModulus,
    FiberSection,
    LekhnitskiiParams,
    StrainTransferOperator,
    apply_stp,
    assemble_stp,
    effective_fiber_modulus,
    extended_recovery,
    lekhnitskii_params,
    rotate_stp,
)
from .meshing import (
    BoundaryCondition,
    FiberPath,
    TetMesh,
    box_grid_line,
    build_box_mesh,
    load_msh,
    serialize_msh,
    validate_fiber_path,
)
from .fem import (
    COMPILED_KERNELS,
    FiberModel,
    MaterialMap,
    SparseSystem,
    apply_dirichlet,
    assemble_bulk,
    assemble_fiber,
    assemble_rhs,
    constrain_dofs,
    edge_fiber_strain,
    reaction_force,
    solve_cg,
    strain_energy,
    strain_per_tet,
)
from .pipeline import (
    CaseConfig,
    CaseSolution,
    SensorTrace,
    load_case_config,
    run_case,
    solve_case,
    trace_from_solution,
    write_csv,
)

__all__ = [
    "AssemblyError",
    "BoundaryCondition",
    "COMPILED_KERNELS",
    "CaseConfig",
    "CaseSolution",
    "ConfigError",
    "EffectiveFiberModulus",
    "FiberFemError",
    "FiberModel",
    "FiberPath",
    "FiberSection",
    "FormatError",
    "LekhnitskiiParams",
    "MaterialError",
    "MaterialMap",
    "MeshError",
    "SensorTrace",
    "SolverError",
    "SparseSystem",
    "StrainTransferOperator",
    "TetMesh",
    "TransferValidityError",
    "apply_dirichlet",
    "apply_stp",
    "assemble_bulk",
    "assemble_fiber",
    "assemble_rhs",
    "assemble_stp",
    "box_grid_line",
    "build_box_mesh",
    "constrain_dofs",
    "edge_fiber_strain",
    "effective_fiber_modulus",
    "extended_recovery",
    "invert_stiffness",
    "isotropic_stiffness",
    "lekhnitskii_params",
    "load_case_config",
    "load_material",
    "load_msh",
    "material_from_dict",
    "reaction_force",
    "rotate_stp",
    "rotate_tensor4",
    "rotation_x",
    "rotation_z",
    "run_case",
    "serialize_msh",
    "solve_case",
    "solve_cg",
    "strain_energy",
    "strain_per_tet",
    "trace_from_solution",
    "validate_fiber_path",
    "write_csv",
]
