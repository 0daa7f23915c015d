"""Rank-2 and rank-4 tensor algebra for elasticity.

Symmetric second-order tensors are plain (3,3) arrays and stiffness-like
fourth-order tensors are (3,3,3,3) arrays everywhere inside the package;
Voigt and Mandel 6-vector/6x6 forms appear only at I/O and solver
boundaries.  Component order is (11, 22, 33, 23, 13, 12).
"""

import json

import numpy as np

from .errors import FormatError, MaterialError

# (i, j) index pair backing each of the six vector slots
VOIGT_PAIRS = ((0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1))

# per-slot scale factors of the three vector conventions
_VOIGT_STRAIN = np.array([1.0, 1.0, 1.0, 2.0, 2.0, 2.0])
_VOIGT_STRESS = np.ones(6)
_MANDEL = np.array([1.0, 1.0, 1.0, np.sqrt(2.0), np.sqrt(2.0), np.sqrt(2.0)])

# proper rotation (pi about (1,0,1)/sqrt(2)) exchanging the x and z axes
SWAP_XZ = np.array([[0.0, 0.0, 1.0], [0.0, -1.0, 0.0], [1.0, 0.0, 0.0]])


def sym_tensor(a, tol=1e-8):
    """Return the (3,3) symmetric tensor stored in `a`.

    Symmetrizes inputs whose asymmetry is below `tol` relative to the
    largest component and rejects anything worse.
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (3, 3):
        raise ValueError(f"expected shape (3, 3), got {a.shape}")
    scale = max(np.abs(a).max(), 1.0)
    if np.abs(a - a.T).max() > tol * scale:
        raise ValueError("tensor is not symmetric")
    return 0.5 * (a + a.T)


def rotation_x(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rotation_z(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def check_rotation(R, tol=1e-14):
    """Validate that R is a proper rotation (orthogonal, det = +1)."""
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise ValueError("rotation must be 3x3")
    if np.abs(R.T @ R - np.eye(3)).max() > tol * 10:
        raise ValueError("matrix is not orthogonal")
    if abs(np.linalg.det(R) - 1.0) > tol * 10:
        raise ValueError("matrix is not a proper rotation (det != +1)")
    return R


def _to_vector(t, factors):
    t = np.asarray(t, dtype=float)
    return np.array([factors[I] * t[i, j] for I, (i, j) in enumerate(VOIGT_PAIRS)])


def _from_vector(v, factors):
    v = np.asarray(v, dtype=float)
    t = np.zeros((3, 3))
    for I, (i, j) in enumerate(VOIGT_PAIRS):
        t[i, j] = t[j, i] = v[I] / factors[I]
    return t


def sym_to_voigt_strain(t):
    """Strain-convention 6-vector: shears doubled."""
    return _to_vector(t, _VOIGT_STRAIN)


def voigt_strain_to_sym(v):
    return _from_vector(v, _VOIGT_STRAIN)


def sym_to_voigt_stress(t):
    """Stress-convention 6-vector: shears unscaled."""
    return _to_vector(t, _VOIGT_STRESS)


def voigt_stress_to_sym(v):
    return _from_vector(v, _VOIGT_STRESS)


def sym_to_mandel(t):
    """Mandel 6-vector: shears scaled by sqrt(2), so the dot product of two
    converted tensors equals their double contraction."""
    return _to_vector(t, _MANDEL)


def mandel_to_sym(v):
    return _from_vector(v, _MANDEL)


def _to_matrix(A, left, right):
    A = np.asarray(A, dtype=float)
    M = np.empty((6, 6))
    for I, (i, j) in enumerate(VOIGT_PAIRS):
        for J, (k, l) in enumerate(VOIGT_PAIRS):
            M[I, J] = left[I] * right[J] * A[i, j, k, l]
    return M


def _from_matrix(M, left, right):
    M = np.asarray(M, dtype=float)
    A = np.zeros((3, 3, 3, 3))
    for I, (i, j) in enumerate(VOIGT_PAIRS):
        for J, (k, l) in enumerate(VOIGT_PAIRS):
            val = M[I, J] / (left[I] * right[J])
            A[i, j, k, l] = A[j, i, k, l] = A[i, j, l, k] = A[j, i, l, k] = val
    return A


def stiffness_to_voigt(C):
    """6x6 Voigt stiffness: sigma_voigt = M @ eps_voigt (doubled shears)."""
    return _to_matrix(C, _VOIGT_STRESS, _VOIGT_STRESS)


def voigt_to_stiffness(M):
    return _from_matrix(M, _VOIGT_STRESS, _VOIGT_STRESS)


def stiffness_to_mandel(C):
    return _to_matrix(C, _MANDEL, _MANDEL)


def mandel_to_stiffness(M):
    return _from_matrix(M, _MANDEL, _MANDEL)


def compliance_to_voigt(S):
    """6x6 Voigt compliance: eps_voigt = M @ sigma_voigt."""
    return _to_matrix(S, _VOIGT_STRAIN, _VOIGT_STRAIN)


def voigt_to_compliance(M):
    return _from_matrix(M, _VOIGT_STRAIN, _VOIGT_STRAIN)


def isotropic_stiffness(E, nu):
    """Isotropic stiffness tensor from Young's modulus and Poisson's ratio.

    Parameters
    ----------
    E : float
        Young's modulus, > 0.
    nu : float
        Poisson's ratio, inside the open interval (-1, 0.5).
    """
    if E <= 0:
        raise MaterialError(f"Young's modulus must be positive, got {E}")
    if not -1.0 < nu < 0.5:
        raise MaterialError(f"Poisson's ratio must lie in (-1, 0.5), got {nu}")
    lam = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    mu = E / (2.0 * (1.0 + nu))
    M = np.zeros((6, 6))
    M[:3, :3] = lam
    M[0, 0] = M[1, 1] = M[2, 2] = lam + 2.0 * mu
    M[3, 3] = M[4, 4] = M[5, 5] = mu
    return voigt_to_stiffness(M)


def check_positive_definite(C, rtol=1e-8):
    """Reject stiffness tensors that are not positive definite.

    Eigenvalues of the Mandel 6x6 representation must all exceed
    `rtol` times the largest one.
    """
    M = stiffness_to_mandel(C)
    if np.abs(M - M.T).max() > 1e-10 * max(np.abs(M).max(), 1.0):
        raise MaterialError("stiffness 6x6 representation is not symmetric")
    eig = np.linalg.eigvalsh(0.5 * (M + M.T))
    if eig[0] <= rtol * eig[-1] or eig[-1] <= 0:
        raise MaterialError(
            f"stiffness is not positive definite (eigenvalues {eig.min():.3e}"
            f" .. {eig.max():.3e})"
        )


def invert_stiffness(C):
    """Compliance tensor S with S:C:X = X for all symmetric X."""
    check_positive_definite(C)
    Sv = np.linalg.inv(stiffness_to_voigt(C))
    return voigt_to_compliance(Sv)


def rotate_tensor4(A, R):
    """A^R_ijkl = R_im R_jn R_kp R_lq A_mnpq."""
    return np.einsum("im,jn,kp,lq,mnpq->ijkl", R, R, R, R, A, optimize=True)


def rotate_sym(t, R):
    return R @ t @ R.T


def axis_swap_xz(A):
    """Exchange the x and z axes of a rank-4 tensor (involution)."""
    return rotate_tensor4(A, SWAP_XZ)


def is_orthotropic(C, rtol=1e-8):
    """True when C has the orthotropic zero pattern in the current frame:
    no normal-shear coupling and no coupling between distinct shears."""
    M = stiffness_to_voigt(C)
    scale = np.abs(M).max()
    off = max(
        np.abs(M[:3, 3:]).max(),
        np.abs(M[3:, :3]).max(),
        np.abs(M[3:, 3:] - np.diag(np.diag(M[3:, 3:]))).max(),
    )
    return off <= rtol * scale


def double_contract(A, B):
    """A:B for two (3,3) tensors."""
    return float(np.einsum("ij,ij->", A, B))


def material_from_dict(data):
    """Build a stiffness tensor from a material file dictionary.

    Accepts {"isotropic": {"E": ..., "nu": ...}} or {"voigt": [[6x6]]}.
    """
    if not isinstance(data, dict):
        raise FormatError("material file must contain a JSON object")
    if "isotropic" in data:
        iso = data["isotropic"]
        try:
            C = isotropic_stiffness(float(iso["E"]), float(iso["nu"]))
        except (KeyError, TypeError) as exc:
            raise FormatError(f"isotropic material needs E and nu: {exc}") from exc
    elif "voigt" in data:
        M = np.asarray(data["voigt"], dtype=float)
        if M.shape != (6, 6):
            raise FormatError(f"voigt stiffness must be 6x6, got {M.shape}")
        if np.abs(M - M.T).max() > 1e-8 * max(np.abs(M).max(), 1.0):
            raise FormatError("voigt stiffness matrix must be symmetric")
        C = voigt_to_stiffness(0.5 * (M + M.T))
    else:
        raise FormatError('material file needs an "isotropic" or "voigt" entry')
    check_positive_definite(C)
    return C


def load_material(path):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    return material_from_dict(data)


def material_to_dict(C):
    return {"voigt": stiffness_to_voigt(C).tolist()}
