"""Exception hierarchy; `category` feeds the CLI's machine-readable stderr line."""


class FiberFemError(Exception):
    category = "internal"


class ConfigError(FiberFemError):
    category = "config"


class FormatError(FiberFemError):
    """Malformed or unsupported mesh/material file content."""

    category = "format"


class MeshError(FiberFemError):
    """Invalid mesh topology, fiber chain, or vertex set reference."""

    category = "mesh"


class MaterialError(FiberFemError):
    """Material tensor fails definiteness or symmetry requirements."""

    category = "material"


class TransferValidityError(MaterialError):
    """Material outside the validity range of the analytical transfer solution."""

    category = "validity"


class AssemblyError(FiberFemError):
    category = "assembly"


class SolverError(FiberFemError):
    category = "solver"
