"""Pure-numpy kernels for per-triangle energy, gradient and Hessian blocks.

Every triangle contributes the density

    dens(T) = Phi(l1 - 1) + Phi(l2 - 1) + Phi(l3 - 1) + Psi(det)

where l1, l2, l3 are the stretches |u_b - u_a|/eps, |u_c - u_a|/eps,
|u_c - u_b|/eps of its three edges, Phi(r) = |r|^p / p, and det is the
determinant of the cell gradient (cross(u_b - u_a, u_c - u_a) divided by the
reference cross product sqrt(3)*eps^2/2, positive on counter-clockwise
reference triangles).  Summing the three per-edge terms over all triangles
counts interior edges twice and boundary edges once, which is exactly the
half of the six-bond fan that the weighted bond sum prescribes.

The compiled extension `disclat._kernels` implements the same three entry
points; either backend may be selected at import (see disclat._backend).

psi_kind: 0 = Zero, 1 = SmoothedAbs with parameters kappa, delta.
Gradient/Hessian kernels return (result, first_bad); first_bad is the id of
the first triangle with a bond at or below bond_floor (-1 when none), in
which case result is None and the caller raises.
"""

import numpy as np

SQRT3 = np.sqrt(3.0)


def _phi_prime(r, p):
    # Phi(r) = |r|^p / p, so Phi'(r) = sign(r)|r|^(p-1)
    return np.sign(r) * np.abs(r) ** (p - 1.0)


def _phi_second(r, p):
    return (p - 1.0) * np.abs(r) ** (p - 2.0)


def _psi_derivs(det, psi_kind, kappa, delta):
    """Psi, Psi', Psi'' elementwise; zeros for psi_kind 0."""
    if psi_kind == 0:
        z = np.zeros_like(det)
        return z, z, z.copy()
    t = det - 1.0
    root = np.sqrt(t * t + delta * delta)
    val = kappa * (root - delta)
    d1 = kappa * t / root
    d2 = kappa * delta * delta / root**3
    return val, d1, d2


def _edge_geometry(u, tris, eps):
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    d1 = u[b] - u[a]
    d2 = u[c] - u[a]
    d3 = d2 - d1
    l1 = np.hypot(d1[:, 0], d1[:, 1]) / eps
    l2 = np.hypot(d2[:, 0], d2[:, 1]) / eps
    l3 = np.hypot(d3[:, 0], d3[:, 1]) / eps
    det = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / (SQRT3 / 2.0 * eps * eps)
    return d1, d2, d3, l1, l2, l3, det


def _first_degenerate(l1, l2, l3, bond_floor):
    bad = (l1 <= bond_floor) | (l2 <= bond_floor) | (l3 <= bond_floor)
    if bad.any():
        return int(np.argmax(bad))
    return -1


def tri_energies(u, tris, eps, p, psi_kind, kappa, delta):
    """Per-triangle densities, shape (|T|,).  Multiply by the cell area to
    integrate."""
    _, _, _, l1, l2, l3, det = _edge_geometry(u, tris, eps)
    dens = (
        np.abs(l1 - 1.0) ** p + np.abs(l2 - 1.0) ** p + np.abs(l3 - 1.0) ** p
    ) / p
    psi, _, _ = _psi_derivs(det, psi_kind, kappa, delta)
    return dens + psi


def tri_gradients(u, tris, eps, p, psi_kind, kappa, delta, bond_floor):
    """Per-triangle density gradients, shape (|T|, 3, 2), vertex order (a, b, c)."""
    d1, d2, d3, l1, l2, l3, det = _edge_geometry(u, tris, eps)
    bad = _first_degenerate(l1, l2, l3, bond_floor)
    if bad >= 0:
        return None, bad
    g = np.zeros(tris.shape + (2,))
    for dvec, length, s, t in ((d1, l1, 0, 1), (d2, l2, 0, 2), (d3, l3, 1, 2)):
        # d(|dvec|/eps - 1)/du_t = unit(dvec)/eps
        coeff = _phi_prime(length - 1.0, p) / (eps * eps * length)
        pull = coeff[:, None] * dvec
        g[:, t] += pull
        g[:, s] -= pull
    _, dpsi, _ = _psi_derivs(det, psi_kind, kappa, delta)
    if psi_kind != 0:
        c0 = 2.0 / (SQRT3 * eps * eps)
        perp2 = np.column_stack([d2[:, 1], -d2[:, 0]])   # d det / d d1 (over c0)
        perp1 = np.column_stack([d1[:, 1], -d1[:, 0]])
        gb = (dpsi * c0)[:, None] * perp2
        gc = -(dpsi * c0)[:, None] * perp1
        g[:, 1] += gb
        g[:, 2] += gc
        g[:, 0] -= gb + gc
    return g, -1


def tri_hessians(u, tris, eps, p, psi_kind, kappa, delta, bond_floor):
    """Per-triangle density Hessians, shape (|T|, 6, 6), dof order
    (ax, ay, bx, by, cx, cy)."""
    d1, d2, d3, l1, l2, l3, det = _edge_geometry(u, tris, eps)
    bad = _first_degenerate(l1, l2, l3, bond_floor)
    if bad >= 0:
        return None, bad
    nt = len(tris)
    h = np.zeros((nt, 3, 2, 3, 2))
    eye = np.eye(2)
    for dvec, length, s, t in ((d1, l1, 0, 1), (d2, l2, 0, 2), (d3, l3, 1, 2)):
        r = length - 1.0
        unit = dvec / (eps * length)[:, None]
        outer = unit[:, :, None] * unit[:, None, :]
        # spring block: Phi'' along the bond, Phi'/|bond| transversally
        k = (
            _phi_second(r, p)[:, None, None] / (eps * eps) * outer
            + (_phi_prime(r, p) / (eps * eps * length))[:, None, None]
            * (eye - outer)
        )
        h[:, t, :, t, :] += k
        h[:, s, :, s, :] += k
        h[:, t, :, s, :] -= k
        h[:, s, :, t, :] -= k
    if psi_kind != 0:
        _, dpsi, d2psi = _psi_derivs(det, psi_kind, kappa, delta)
        c0 = 2.0 / (SQRT3 * eps * eps)
        gdet = np.zeros((nt, 3, 2))
        gdet[:, 1] = c0 * np.column_stack([d2[:, 1], -d2[:, 0]])
        gdet[:, 2] = -c0 * np.column_stack([d1[:, 1], -d1[:, 0]])
        gdet[:, 0] = -gdet[:, 1] - gdet[:, 2]
        h += d2psi[:, None, None, None, None] * (
            gdet[:, :, :, None, None] * gdet[:, None, None, :, :]
        )
        # constant curvature of det itself: c0 * Z on the cyclic vertex pairs
        z = np.array([[0.0, 1.0], [-1.0, 0.0]])
        coeff = (dpsi * c0)[:, None, None]
        for v, w in ((0, 1), (1, 2), (2, 0)):
            h[:, v, :, w, :] += coeff * z
            h[:, w, :, v, :] += coeff * z.T
    return h.reshape(nt, 6, 6), -1
