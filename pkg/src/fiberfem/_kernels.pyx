# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled element kernels; semantics identical to _kernels_py."""

import numpy as np


def element_stiffness(const double[:, ::1] vertices, const long[:, ::1] tets,
                      const double[:, :, ::1] cvoigt):
    cdef Py_ssize_t m = tets.shape[0]
    ke_arr = np.zeros((m, 12, 12))
    vol6_arr = np.zeros(m)
    cdef double[:, :, ::1] ke = ke_arr
    cdef double[::1] vol6 = vol6_arr
    cdef Py_ssize_t t, a, c, i, j, k, v0, va
    cdef double D[3][3]
    cdef double A[3][3]
    cdef double G[4][3]
    cdef double B[6][12]
    cdef double CB[6][12]
    cdef double det, inv_det, vol, acc

    for t in range(m):
        v0 = tets[t, 0]
        for i in range(3):
            va = tets[t, i + 1]
            for j in range(3):
                D[i][j] = vertices[va, j] - vertices[v0, j]
        det = (D[0][0] * (D[1][1] * D[2][2] - D[1][2] * D[2][1])
               - D[0][1] * (D[1][0] * D[2][2] - D[1][2] * D[2][0])
               + D[0][2] * (D[1][0] * D[2][1] - D[1][1] * D[2][0]))
        vol6[t] = det
        inv_det = 1.0 / det
        A[0][0] = (D[1][1] * D[2][2] - D[1][2] * D[2][1]) * inv_det
        A[0][1] = (D[0][2] * D[2][1] - D[0][1] * D[2][2]) * inv_det
        A[0][2] = (D[0][1] * D[1][2] - D[0][2] * D[1][1]) * inv_det
        A[1][0] = (D[1][2] * D[2][0] - D[1][0] * D[2][2]) * inv_det
        A[1][1] = (D[0][0] * D[2][2] - D[0][2] * D[2][0]) * inv_det
        A[1][2] = (D[0][2] * D[1][0] - D[0][0] * D[1][2]) * inv_det
        A[2][0] = (D[1][0] * D[2][1] - D[1][1] * D[2][0]) * inv_det
        A[2][1] = (D[0][1] * D[2][0] - D[0][0] * D[2][1]) * inv_det
        A[2][2] = (D[0][0] * D[1][1] - D[0][1] * D[1][0]) * inv_det
        # gradient of shape a+1 is column a of D^{-1}; shape 0 balances the sum
        for a in range(3):
            for j in range(3):
                G[a + 1][j] = A[j][a]
        for j in range(3):
            G[0][j] = -(G[1][j] + G[2][j] + G[3][j])

        for i in range(6):
            for j in range(12):
                B[i][j] = 0.0
        for a in range(4):
            c = 3 * a
            B[0][c] = G[a][0]
            B[1][c + 1] = G[a][1]
            B[2][c + 2] = G[a][2]
            B[3][c + 1] = G[a][2]
            B[3][c + 2] = G[a][1]
            B[4][c] = G[a][2]
            B[4][c + 2] = G[a][0]
            B[5][c] = G[a][1]
            B[5][c + 1] = G[a][0]

        for i in range(6):
            for j in range(12):
                acc = 0.0
                for k in range(6):
                    acc += cvoigt[t, i, k] * B[k][j]
                CB[i][j] = acc
        vol = det if det > 0 else -det
        vol /= 6.0
        for i in range(12):
            for j in range(12):
                acc = 0.0
                for k in range(6):
                    acc += B[k][i] * CB[k][j]
                ke[t, i, j] = vol * acc
    return ke_arr, vol6_arr


def tet_strains(const double[:, ::1] vertices, const long[:, ::1] tets,
                const double[:, ::1] u):
    cdef Py_ssize_t m = tets.shape[0]
    eps_arr = np.zeros((m, 3, 3))
    cdef double[:, :, ::1] eps = eps_arr
    cdef Py_ssize_t t, a, i, j, v0, va
    cdef double D[3][3]
    cdef double A[3][3]
    cdef double G[4][3]
    cdef double g[3][3]
    cdef double det, inv_det

    for t in range(m):
        v0 = tets[t, 0]
        for i in range(3):
            va = tets[t, i + 1]
            for j in range(3):
                D[i][j] = vertices[va, j] - vertices[v0, j]
        det = (D[0][0] * (D[1][1] * D[2][2] - D[1][2] * D[2][1])
               - D[0][1] * (D[1][0] * D[2][2] - D[1][2] * D[2][0])
               + D[0][2] * (D[1][0] * D[2][1] - D[1][1] * D[2][0]))
        inv_det = 1.0 / det
        A[0][0] = (D[1][1] * D[2][2] - D[1][2] * D[2][1]) * inv_det
        A[0][1] = (D[0][2] * D[2][1] - D[0][1] * D[2][2]) * inv_det
        A[0][2] = (D[0][1] * D[1][2] - D[0][2] * D[1][1]) * inv_det
        A[1][0] = (D[1][2] * D[2][0] - D[1][0] * D[2][2]) * inv_det
        A[1][1] = (D[0][0] * D[2][2] - D[0][2] * D[2][0]) * inv_det
        A[1][2] = (D[0][2] * D[1][0] - D[0][0] * D[1][2]) * inv_det
        A[2][0] = (D[1][0] * D[2][1] - D[1][1] * D[2][0]) * inv_det
        A[2][1] = (D[0][1] * D[2][0] - D[0][0] * D[2][1]) * inv_det
        A[2][2] = (D[0][0] * D[1][1] - D[0][1] * D[1][0]) * inv_det
        for a in range(3):
            for j in range(3):
                G[a + 1][j] = A[j][a]
        for j in range(3):
            G[0][j] = -(G[1][j] + G[2][j] + G[3][j])

        for i in range(3):
            for j in range(3):
                g[i][j] = 0.0
        for a in range(4):
            va = tets[t, a]
            for i in range(3):
                for j in range(3):
                    g[i][j] += u[va, i] * G[a][j]
        for i in range(3):
            for j in range(3):
                eps[t, i, j] = 0.5 * (g[i][j] + g[j][i])
    return eps_arr
