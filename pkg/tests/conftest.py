import numpy as np
import pytest

from fiberfem import tensors

# Homogenized stiffness of a unidirectionally reinforced composite (GPa),
# reinforcement along the z axis of this table.
REINFORCED_VOIGT = np.array(
    [
        [6.34, 3.03, 2.43, 0.0, 0.0, 0.0],
        [3.03, 6.34, 2.43, 0.0, 0.0, 0.0],
        [2.43, 2.43, 38.61, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.75, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 1.75, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 1.65],
    ]
)


@pytest.fixture
def glass():
    return tensors.isotropic_stiffness(73.0, 0.18)


@pytest.fixture
def polymer():
    return tensors.isotropic_stiffness(1.665, 0.36)


@pytest.fixture
def reinforced_local():
    """Reinforced composite stiffness with the reinforcement swapped onto x."""
    return tensors.axis_swap_xz(tensors.voigt_to_stiffness(REINFORCED_VOIGT))
