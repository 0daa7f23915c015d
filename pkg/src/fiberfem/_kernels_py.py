"""Vectorized element kernels, used when the compiled extension is absent.

Both backends expose the same two functions with identical semantics; the
compiled one is selected at import time in the fem module.
"""

import numpy as np


def _gradients(vertices, tets):
    """P1 shape function gradients per tet, (m, 4, 3), plus 6x signed volume."""
    p = vertices[tets]
    D = p[:, 1:] - p[:, :1]
    vol6 = np.linalg.det(D)
    G = np.linalg.inv(D).swapaxes(1, 2)
    grads = np.concatenate([-G.sum(axis=1, keepdims=True), G], axis=1)
    return grads, vol6


def element_stiffness(vertices, tets, cvoigt):
    """Per-tet 12x12 stiffness vol * B^T C B and 6x signed volumes.

    cvoigt holds one 6x6 stiffness per tet; the strain-displacement matrix B
    uses engineering shear rows in the order (11, 22, 33, 23, 13, 12).
    """
    grads, vol6 = _gradients(vertices, tets)
    m = len(tets)
    B = np.zeros((m, 6, 12))
    for a in range(4):
        gx, gy, gz = grads[:, a, 0], grads[:, a, 1], grads[:, a, 2]
        c = 3 * a
        B[:, 0, c] = gx
        B[:, 1, c + 1] = gy
        B[:, 2, c + 2] = gz
        B[:, 3, c + 1] = gz
        B[:, 3, c + 2] = gy
        B[:, 4, c] = gz
        B[:, 4, c + 2] = gx
        B[:, 5, c] = gy
        B[:, 5, c + 1] = gx
    vol = np.abs(vol6) / 6.0
    ke = vol[:, None, None] * np.einsum("tia,tij,tjb->tab", B, cvoigt, B, optimize=True)
    return ke, vol6


def tet_strains(vertices, tets, u):
    """Symmetric displacement gradient per tet, (m, 3, 3)."""
    grads, _ = _gradients(vertices, tets)
    g = np.einsum("tai,taj->tij", u[tets], grads)
    return 0.5 * (g + g.swapaxes(1, 2))
