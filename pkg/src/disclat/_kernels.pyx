# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-triangle kernels; same contracts as disclat._kernels_py."""

from libc.math cimport fabs, sqrt, copysign, pow

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef double SQRT3 = sqrt(3.0)


cdef inline double phi_val(double r, double p) noexcept:
    return pow(fabs(r), p) / p


cdef inline double phi_prime(double r, double p) noexcept:
    if r == 0.0:
        return 0.0
    return copysign(pow(fabs(r), p - 1.0), r)


cdef inline double phi_second(double r, double p) noexcept:
    if p == 2.0:
        return 1.0
    if r == 0.0:
        return 0.0
    return (p - 1.0) * pow(fabs(r), p - 2.0)


def tri_energies(cnp.ndarray[cnp.float64_t, ndim=2] u,
                 cnp.ndarray[cnp.int64_t, ndim=2] tris,
                 double eps, double p, int psi_kind,
                 double kappa, double delta):
    cdef Py_ssize_t nt = tris.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(nt)
    cdef Py_ssize_t t
    cdef Py_ssize_t a, b, c
    cdef double d1x, d1y, d2x, d2y, d3x, d3y
    cdef double l1, l2, l3, det, dens, tt, root
    for t in range(nt):
        a = tris[t, 0]; b = tris[t, 1]; c = tris[t, 2]
        d1x = u[b, 0] - u[a, 0]; d1y = u[b, 1] - u[a, 1]
        d2x = u[c, 0] - u[a, 0]; d2y = u[c, 1] - u[a, 1]
        d3x = d2x - d1x; d3y = d2y - d1y
        l1 = sqrt(d1x * d1x + d1y * d1y) / eps
        l2 = sqrt(d2x * d2x + d2y * d2y) / eps
        l3 = sqrt(d3x * d3x + d3y * d3y) / eps
        dens = phi_val(l1 - 1.0, p) + phi_val(l2 - 1.0, p) + phi_val(l3 - 1.0, p)
        if psi_kind != 0:
            det = (d1x * d2y - d1y * d2x) / (SQRT3 / 2.0 * eps * eps)
            tt = det - 1.0
            root = sqrt(tt * tt + delta * delta)
            dens += kappa * (root - delta)
        out[t] = dens
    return out


def tri_gradients(cnp.ndarray[cnp.float64_t, ndim=2] u,
                  cnp.ndarray[cnp.int64_t, ndim=2] tris,
                  double eps, double p, int psi_kind,
                  double kappa, double delta, double bond_floor):
    cdef Py_ssize_t nt = tris.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] g = np.zeros((nt, 3, 2))
    cdef Py_ssize_t t
    cdef Py_ssize_t a, b, c
    cdef double d1x, d1y, d2x, d2y, d3x, d3y
    cdef double l1, l2, l3, k1, k2, k3
    cdef double det, tt, root, dpsi, c0, gbx, gby, gcx, gcy
    for t in range(nt):
        a = tris[t, 0]; b = tris[t, 1]; c = tris[t, 2]
        d1x = u[b, 0] - u[a, 0]; d1y = u[b, 1] - u[a, 1]
        d2x = u[c, 0] - u[a, 0]; d2y = u[c, 1] - u[a, 1]
        d3x = d2x - d1x; d3y = d2y - d1y
        l1 = sqrt(d1x * d1x + d1y * d1y) / eps
        l2 = sqrt(d2x * d2x + d2y * d2y) / eps
        l3 = sqrt(d3x * d3x + d3y * d3y) / eps
        if l1 <= bond_floor or l2 <= bond_floor or l3 <= bond_floor:
            return None, t
        k1 = phi_prime(l1 - 1.0, p) / (eps * eps * l1)
        k2 = phi_prime(l2 - 1.0, p) / (eps * eps * l2)
        k3 = phi_prime(l3 - 1.0, p) / (eps * eps * l3)
        g[t, 1, 0] += k1 * d1x; g[t, 1, 1] += k1 * d1y
        g[t, 0, 0] -= k1 * d1x; g[t, 0, 1] -= k1 * d1y
        g[t, 2, 0] += k2 * d2x; g[t, 2, 1] += k2 * d2y
        g[t, 0, 0] -= k2 * d2x; g[t, 0, 1] -= k2 * d2y
        g[t, 2, 0] += k3 * d3x; g[t, 2, 1] += k3 * d3y
        g[t, 1, 0] -= k3 * d3x; g[t, 1, 1] -= k3 * d3y
        if psi_kind != 0:
            c0 = 2.0 / (SQRT3 * eps * eps)
            det = (d1x * d2y - d1y * d2x) / (SQRT3 / 2.0 * eps * eps)
            tt = det - 1.0
            root = sqrt(tt * tt + delta * delta)
            dpsi = kappa * tt / root
            gbx = dpsi * c0 * d2y
            gby = -dpsi * c0 * d2x
            gcx = -dpsi * c0 * d1y
            gcy = dpsi * c0 * d1x
            g[t, 1, 0] += gbx; g[t, 1, 1] += gby
            g[t, 2, 0] += gcx; g[t, 2, 1] += gcy
            g[t, 0, 0] -= gbx + gcx; g[t, 0, 1] -= gby + gcy
    return np.asarray(g), -1


def tri_hessians(cnp.ndarray[cnp.float64_t, ndim=2] u,
                 cnp.ndarray[cnp.int64_t, ndim=2] tris,
                 double eps, double p, int psi_kind,
                 double kappa, double delta, double bond_floor):
    cdef Py_ssize_t nt = tris.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] h = np.zeros((nt, 6, 6))
    cdef Py_ssize_t t, i, j
    cdef Py_ssize_t a, b, c
    cdef double[3][2] dv
    cdef double[3] ll
    cdef double[3] along
    cdef double[3] trans
    cdef int[3] src
    cdef int[3] dst
    cdef double d1x, d1y, d2x, d2y
    cdef double ux, uy, kxx, kxy, kyy, r
    cdef double det, tt, root, dpsi, d2psi, c0
    cdef double[6] gd
    cdef int s, d
    src[0] = 0; dst[0] = 1
    src[1] = 0; dst[1] = 2
    src[2] = 1; dst[2] = 2
    for t in range(nt):
        a = tris[t, 0]; b = tris[t, 1]; c = tris[t, 2]
        d1x = u[b, 0] - u[a, 0]; d1y = u[b, 1] - u[a, 1]
        d2x = u[c, 0] - u[a, 0]; d2y = u[c, 1] - u[a, 1]
        dv[0][0] = d1x; dv[0][1] = d1y
        dv[1][0] = d2x; dv[1][1] = d2y
        dv[2][0] = d2x - d1x; dv[2][1] = d2y - d1y
        for i in range(3):
            ll[i] = sqrt(dv[i][0] * dv[i][0] + dv[i][1] * dv[i][1]) / eps
            if ll[i] <= bond_floor:
                return None, t
        for i in range(3):
            r = ll[i] - 1.0
            along[i] = phi_second(r, p) / (eps * eps)
            trans[i] = phi_prime(r, p) / (eps * eps * ll[i])
        for i in range(3):
            # spring block for bond i between local vertices src[i], dst[i]
            ux = dv[i][0] / (eps * ll[i])
            uy = dv[i][1] / (eps * ll[i])
            kxx = along[i] * ux * ux + trans[i] * (1.0 - ux * ux)
            kxy = (along[i] - trans[i]) * ux * uy
            kyy = along[i] * uy * uy + trans[i] * (1.0 - uy * uy)
            s = src[i]; d = dst[i]
            h[t, 2 * d, 2 * d] += kxx; h[t, 2 * d, 2 * d + 1] += kxy
            h[t, 2 * d + 1, 2 * d] += kxy; h[t, 2 * d + 1, 2 * d + 1] += kyy
            h[t, 2 * s, 2 * s] += kxx; h[t, 2 * s, 2 * s + 1] += kxy
            h[t, 2 * s + 1, 2 * s] += kxy; h[t, 2 * s + 1, 2 * s + 1] += kyy
            h[t, 2 * d, 2 * s] -= kxx; h[t, 2 * d, 2 * s + 1] -= kxy
            h[t, 2 * d + 1, 2 * s] -= kxy; h[t, 2 * d + 1, 2 * s + 1] -= kyy
            h[t, 2 * s, 2 * d] -= kxx; h[t, 2 * s, 2 * d + 1] -= kxy
            h[t, 2 * s + 1, 2 * d] -= kxy; h[t, 2 * s + 1, 2 * d + 1] -= kyy
        if psi_kind != 0:
            c0 = 2.0 / (SQRT3 * eps * eps)
            det = (d1x * d2y - d1y * d2x) / (SQRT3 / 2.0 * eps * eps)
            tt = det - 1.0
            root = sqrt(tt * tt + delta * delta)
            dpsi = kappa * tt / root
            d2psi = kappa * delta * delta / (root * root * root)
            gd[2] = c0 * d2y; gd[3] = -c0 * d2x        # d det / d u_b
            gd[4] = -c0 * d1y; gd[5] = c0 * d1x        # d det / d u_c
            gd[0] = -gd[2] - gd[4]; gd[1] = -gd[3] - gd[5]
            for i in range(6):
                for j in range(6):
                    h[t, i, j] += d2psi * gd[i] * gd[j]
            # constant curvature of det: c0 * [[0,1],[-1,0]] on cyclic pairs
            for i in range(3):
                s = i; d = (i + 1) % 3
                h[t, 2 * s, 2 * d + 1] += dpsi * c0
                h[t, 2 * s + 1, 2 * d] -= dpsi * c0
                h[t, 2 * d + 1, 2 * s] += dpsi * c0
                h[t, 2 * d, 2 * s + 1] -= dpsi * c0
    return np.asarray(h), -1
