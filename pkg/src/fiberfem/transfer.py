"""Analytical strain transfer operator for a circular fiber in a matrix.

The operator T maps the far-field matrix strain to the strain inside an
embedded fiber, ``eps_f ~ T : eps_nf``, and is assembled from the plane
elliptic-inclusion solution in a local frame whose first axis is the fiber
direction.  Both materials must be orthotropic in that frame.  The extended
recovery replaces the fiber-direction component of T:eps_nf with the strain
of a dedicated one-dimensional fiber solve.
"""

from dataclasses import dataclass, field

import numpy as np

from . import tensors
from .errors import AssemblyError, TransferValidityError
from .tensors import (
    _MANDEL,
    _VOIGT_STRAIN,
    _VOIGT_STRESS,
    _from_matrix,
    _to_matrix,
    check_positive_definite,
    compliance_to_voigt,
    invert_stiffness,
    is_orthotropic,
    rotate_tensor4,
    rotation_z,
    stiffness_to_voigt,
)

# |mu_R| is floored here before the basis matrices are formed.  The equal-roots
# case (isotropic fiber cross-section plane, mu_R = 0) makes L exactly singular
# while T itself has a regular limit; the floor perturbs T by O(floor^2).
MU_FLOOR = 1e-6

_PIVOT_RTOL = 1e-12


def transfer_to_matrix(T, notation="mandel"):
    """6x6 matrix of a strain-to-strain operator in `notation`."""
    if notation == "mandel":
        return _to_matrix(T, _MANDEL, _MANDEL)
    if notation == "voigt":
        return _to_matrix(T, _VOIGT_STRAIN, _VOIGT_STRESS)
    raise ValueError(f"unknown notation {notation!r}")


def transfer_from_matrix(M, notation="mandel"):
    if notation == "mandel":
        return _from_matrix(M, _MANDEL, _MANDEL)
    if notation == "voigt":
        return _from_matrix(M, _VOIGT_STRAIN, _VOIGT_STRESS)
    raise ValueError(f"unknown notation {notation!r}")


@dataclass(frozen=True)
class FiberSection:
    """Circular fiber cross-section; the semi-axes exist for the elliptic
    formulas but validation pins a = b = radius."""

    radius: float
    a: float = None
    b: float = None
    area: float = None

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"fiber radius must be positive, got {self.radius}")
        object.__setattr__(self, "a", self.radius if self.a is None else self.a)
        object.__setattr__(self, "b", self.radius if self.b is None else self.b)
        if not (self.a == self.b == self.radius):
            raise ValueError("only circular sections supported: a = b = radius")
        object.__setattr__(self, "area", np.pi * self.radius**2)


@dataclass(frozen=True)
class LekhnitskiiParams:
    """Compliance-derived parameters of the inclusion solution.

    `mu_R` and `mu_I` are the real/imaginary parts of the characteristic
    root for the complex-conjugate branch.  When the root pair is purely
    imaginary and distinct instead, `imaginary_pair` is set and the stored
    mu_R is the magnitude of the imaginary offset; `root()` returns the
    effective complex value either way.
    """

    beta_22: float
    beta_23: float
    beta_33: float
    beta_44: float
    mu_R: float
    mu_I: float
    imaginary_pair: bool = False

    def root(self):
        return (1j if self.imaginary_pair else 1.0) * self.mu_R

    def deltas(self):
        muR = self.root()
        if abs(muR) < MU_FLOOR:
            muR = complex(MU_FLOOR)
        muI = self.mu_I
        b22, b23, b33 = self.beta_22, self.beta_23, self.beta_33
        d1 = 2 * b23 + 2 * b22 * (muR**2 - muI**2)
        d2 = 4 * b22 * muR * muI
        d3 = 2 * muR * (b23 + b33 / (muR**2 + muI**2))
        d4 = 2 * muI * (b23 - b33 / (muR**2 + muI**2))
        return muR, muI, d1, d2, d3, d4


def lekhnitskii_params(S):
    """Parameters of the inclusion solution from a compliance tensor.

    Parameters
    ----------
    S : (3,3,3,3) array
        Compliance of the matrix material, fiber along local axis 1.
    """
    Sv = compliance_to_voigt(S)

    def beta(i, j):
        return Sv[i - 1, j - 1] - Sv[i - 1, 0] * Sv[j - 1, 0] / Sv[0, 0]

    b22, b23, b33, b44 = beta(2, 2), beta(2, 3), beta(3, 3), beta(4, 4)
    if b22 <= 0 or b33 <= 0:
        raise TransferValidityError(
            f"transverse compliance not positive (beta_22={b22:.3e}, beta_33={b33:.3e})"
        )
    root = np.sqrt(b33 / (4.0 * b22))
    shift = (2.0 * b23 + b44) / (4.0 * b22)
    rad_R = root - shift
    rad_I = root + shift
    if rad_I <= 0:
        raise TransferValidityError(
            f"material outside analytical transfer validity (mu_I radicand {rad_I:.6e})"
        )
    return LekhnitskiiParams(
        beta_22=b22,
        beta_23=b23,
        beta_33=b33,
        beta_44=b44,
        mu_R=float(np.sqrt(abs(rad_R))),
        mu_I=float(np.sqrt(rad_I)),
        imaginary_pair=bool(rad_R < 0),
    )


@dataclass(frozen=True)
class StrainTransferOperator:
    """Assembled transfer operator plus the record of how it was built.

    `tensor` is the rank-4 map in the operator's current frame; `theta_row`
    keeps the solved angular-displacement row of the 4x4 system, which never
    enters the tensor.  The local-frame stiffnesses are retained so the
    operator can be re-assembled under frame changes.
    """

    tensor: np.ndarray
    theta_row: np.ndarray
    section: FiberSection
    c_matrix: np.ndarray
    c_fiber: np.ndarray
    params: LekhnitskiiParams
    alpha: float = 0.0
    beta: float = 0.0
    v: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))

    def as_matrix(self, notation="mandel"):
        return transfer_to_matrix(self.tensor, notation)

    def to_dict(self, notation="mandel"):
        return {
            "notation": notation,
            "matrix": self.as_matrix(notation).tolist(),
            "theta_row": self.theta_row.tolist(),
            "alpha": self.alpha,
            "beta": self.beta,
            "v": self.v.tolist(),
            "radius": self.section.radius,
            "c_matrix": tensors.stiffness_to_mandel(self.c_matrix).tolist(),
            "c_fiber": tensors.stiffness_to_mandel(self.c_fiber).tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        notation = data["notation"]
        c_matrix = tensors.mandel_to_stiffness(np.asarray(data["c_matrix"]))
        c_fiber = tensors.mandel_to_stiffness(np.asarray(data["c_fiber"]))
        return cls(
            tensor=transfer_from_matrix(np.asarray(data["matrix"]), notation),
            theta_row=np.asarray(data["theta_row"], dtype=float),
            section=FiberSection(radius=float(data["radius"])),
            c_matrix=c_matrix,
            c_fiber=c_fiber,
            params=lekhnitskii_params(invert_stiffness(c_matrix)),
            alpha=float(data["alpha"]),
            beta=float(data["beta"]),
            v=np.asarray(data["v"], dtype=float),
        )


def _solve_dense(A, B):
    """Partial-pivot Gaussian elimination for the tiny assembly systems.

    Complex-safe.  Raises when a pivot falls below 1e-12 times the largest
    input entry, reporting a crude condition estimate.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    single = B.ndim == 1
    if single:
        B = B[:, None]
    n = A.shape[0]
    scale = np.abs(A).max()
    aug = np.hstack([A.copy(), B.copy()])
    for k in range(n):
        p = k + int(np.argmax(np.abs(aug[k:, k])))
        pivot = aug[p, k]
        if abs(pivot) <= _PIVOT_RTOL * scale:
            cond = scale / abs(pivot) if pivot != 0 else np.inf
            raise AssemblyError(
                f"singular {n}x{n} system in transfer assembly "
                f"(condition estimate {cond:.3e})"
            )
        if p != k:
            aug[[k, p]] = aug[[p, k]]
        aug[k + 1 :] -= np.outer(aug[k + 1 :, k] / pivot, aug[k])
    X = np.zeros((n, B.shape[1]), dtype=complex)
    for k in range(n - 1, -1, -1):
        X[k] = (aug[k, n:] - aug[k, k + 1 : n] @ X[k + 1 : n]) / aug[k, k]
    return X[:, 0] if single else X


def assemble_stp(C_matrix, C_fiber, sec):
    """Assemble the strain transfer operator in the fiber-aligned frame.

    Parameters
    ----------
    C_matrix, C_fiber : (3,3,3,3) arrays
        Stiffness tensors in the local frame: fiber along axis 1, both
        materials orthotropic in this frame.
    sec : FiberSection

    Returns
    -------
    StrainTransferOperator
        The fiber-direction row of the operator is exactly the identity
        row; transverse rows come from the 4x4 inclusion system, the two
        axial-shear rows from closed-form ratios.
    """
    check_positive_definite(C_matrix)
    check_positive_definite(C_fiber)
    for name, C in (("matrix", C_matrix), ("fiber", C_fiber)):
        if not is_orthotropic(C):
            raise TransferValidityError(
                f"{name} stiffness is not orthotropic in the fiber-aligned frame"
            )

    Cm = stiffness_to_voigt(C_matrix)
    Cf = stiffness_to_voigt(C_fiber)
    params = lekhnitskii_params(invert_stiffness(C_matrix))
    muR, muI, d1, d2, d3, d4 = params.deltas()
    a, b = sec.a, sec.b

    K = np.array([[a, 0, 0], [0, 0, b / 2], [0, 0, a / 2], [0, b, 0]], dtype=float)
    H = np.array([0.0, b, -a, 0.0])
    W = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, 1]], dtype=float)
    Q = np.array(
        [[Cm[1, 1], Cm[1, 2], 0], [Cm[2, 1], Cm[2, 2], 0], [0, 0, Cm[3, 3]]]
    )
    Qf = np.array(
        [[Cf[1, 1], Cf[1, 2], 0], [Cf[2, 1], Cf[2, 2], 0], [0, 0, Cf[3, 3]]]
    )
    U = np.array(
        [
            [d1, -d2, d1, d2],
            [d2, d1, -d2, d1],
            [d3, -d4, -d3, -d4],
            [d4, d3, d4, -d3],
        ]
    )
    L = np.array(
        [
            [2 * muI / b, 2 * muR / b, 2 * muI / b, -2 * muR / b],
            [2 / a, 0, 2 / a, 0],
            [0, -2 / b, 0, -2 / b],
            [-2 * muR / a, 2 * muI / a, 2 * muR / a, 2 * muI / a],
        ]
    )
    O = np.hstack([K, H[:, None]])
    N = np.hstack([W @ Qf, np.zeros((4, 1))])

    ULinv = U @ _solve_dense(L, np.eye(4))
    M = O - ULinv @ N

    dvec = np.array([Cf[1, 0] - Cm[1, 0], Cf[2, 0] - Cm[2, 0], 0.0])
    rhs = np.column_stack([ULinv @ (W @ dvec), K - ULinv @ (W @ Q)])
    sol = _solve_dense(M, rhs)

    imag_max = np.abs(sol.imag).max()
    real_scale = max(np.abs(sol.real).max(), 1.0)
    if imag_max > 1e-8 * real_scale:
        raise AssemblyError(
            f"transfer solution has a non-vanishing imaginary part ({imag_max:.3e})"
        )
    sol = sol.real

    Tv = np.zeros((6, 6))
    Tv[0, 0] = 1.0
    Tv[1:4, 0] = sol[:3, 0]
    Tv[1:4, 1:4] = sol[:3, 1:]
    C55, C66 = Cm[4, 4], Cm[5, 5]
    Tv[4, 4] = (b + np.sqrt(C55 / C66) * a) / (b + Cf[4, 4] / np.sqrt(C66 * C55) * a)
    Tv[5, 5] = (a + np.sqrt(C66 / C55) * b) / (a + Cf[5, 5] / np.sqrt(C66 * C55) * b)

    return StrainTransferOperator(
        tensor=transfer_from_matrix(Tv, "voigt"),
        theta_row=sol[3, :].copy(),
        section=sec,
        c_matrix=C_matrix,
        c_fiber=C_fiber,
        params=params,
    )


def rotate_stp(op, alpha, beta):
    """Place an operator at in-plane angle beta, with the matrix material
    turned by alpha about the local fiber-normal axis first.

    A nonzero alpha changes the relative orientation of fiber and matrix,
    which invalidates the assembled solution, so the operator is re-assembled
    with the rotated matrix stiffness rather than rotated as a tensor.  The
    in-plane placement is a plain rank-4 rotation by R_z(beta).
    """
    if alpha != 0.0:
        C_rot = rotate_tensor4(op.c_matrix, rotation_z(alpha))
        base = assemble_stp(C_rot, op.c_fiber, op.section)
        base = StrainTransferOperator(
            tensor=base.tensor,
            theta_row=base.theta_row,
            section=base.section,
            c_matrix=base.c_matrix,
            c_fiber=base.c_fiber,
            params=base.params,
            alpha=alpha,
        )
    else:
        base = op
    total = base.beta + beta
    R = rotation_z(beta)
    return StrainTransferOperator(
        tensor=rotate_tensor4(base.tensor, R),
        theta_row=base.theta_row,
        section=base.section,
        c_matrix=base.c_matrix,
        c_fiber=base.c_fiber,
        params=base.params,
        alpha=base.alpha,
        beta=total,
        v=rotation_z(total) @ np.array([1.0, 0.0, 0.0]),
    )


@dataclass(frozen=True)
class EffectiveFiberModulus:
    """Excess stiffness of the fiber over the matrix in direction v."""

    E_m: float
    E_f: float
    E: float
    v: np.ndarray


def effective_fiber_modulus(C_matrix, E_f, v):
    """Directional matrix modulus and the effective fiber excess.

    E_m is the stretching modulus of the matrix along the unit vector v,
    read from the compliance; the effective modulus is the nonnegative
    excess E_f - E_m (a fiber softer than the matrix contributes nothing).
    """
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if not np.isclose(norm, 1.0, atol=1e-8):
        raise ValueError(f"direction must be a unit vector, |v| = {norm}")
    v = v / norm
    S = invert_stiffness(C_matrix)
    P = np.outer(v, v)
    E_m = 1.0 / float(np.einsum("ij,ijkl,kl->", P, S, P))
    return EffectiveFiberModulus(E_m=E_m, E_f=E_f, E=max(0.0, E_f - E_m), v=v)


def apply_stp(T, eps_nf):
    """T : eps_nf, symmetric result."""
    tensor = T.tensor if isinstance(T, StrainTransferOperator) else T
    out = np.einsum("ijkl,kl->ij", tensor, eps_nf)
    return 0.5 * (out + out.T)


def extended_recovery(T, eps_nf, eps_gamma_f, v):
    """Full fiber strain from the transfer image and the axial fiber strain.

    The component along the fiber projector P = v v^T is replaced by
    eps_gamma_f; everything orthogonal to P is inherited from T:eps_nf.
    """
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    P = np.outer(v, v)
    t = apply_stp(T, eps_nf)
    return t - P * tensors.double_contract(P, t) + P * eps_gamma_f
