"""Diagnostics on 2x2 deformation matrices: closed-form SVD, distance to the
rotation group, triangle orientation checks, and the structural
verifications (six-bond coercivity inequality, zero-energy laminate,
rigidity ratio, frustration).
"""

import numpy as np

from .energy import cell_gradients
from .lattice import rot

SQRT3 = np.sqrt(3.0)
_SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])


def triangle_dets(graph, config):
    """det of the affine deformation gradient on every triangle, signed.

    Positive on orientation-preserving cells; the reference configuration
    gives +1 on every triangle.
    """
    grads = cell_gradients(graph, config)
    return np.linalg.det(grads)


def det_summary(graph, config):
    """(per-triangle dets, min det, count of nonpositive dets)."""
    dets = triangle_dets(graph, config)
    return dets, float(dets.min()), int(np.sum(dets <= 0.0))


class Svd2:
    """Singular value decomposition of a 2x2 matrix, a = p1 @ diag(sigma) @ p2.

    sigma is ascending (sigma[0] <= sigma[1], both >= 0), p1 and p2 are
    orthogonal (possibly reflections), det_sign is +1 for det a >= 0 and -1
    otherwise.
    """

    def __init__(self, sigma, p1, p2, det):
        self.sigma = sigma
        self.p1 = p1
        self.p2 = p2
        self.det = det
        self.det_sign = 1.0 if det >= 0.0 else -1.0

    def reconstruct(self):
        return self.p1 @ np.diag(self.sigma) @ self.p2


def svd2(a):
    """Closed-form SVD of a 2x2 matrix (no iteration).

    Writing a in the basis {I, J} blocks: with e = (a11+a22)/2,
    f = (a11-a22)/2, g = (a21+a12)/2, h = (a21-a12)/2 the singular values
    are q+r and |q-r| for q = hypot(e, h), r = hypot(f, g), and the
    rotation angles come from atan2 of the same four numbers.
    """
    a = np.asarray(a, dtype=float)
    e = (a[0, 0] + a[1, 1]) / 2.0
    f = (a[0, 0] - a[1, 1]) / 2.0
    g = (a[1, 0] + a[0, 1]) / 2.0
    h = (a[1, 0] - a[0, 1]) / 2.0
    q = np.hypot(e, h)
    r = np.hypot(f, g)
    s_big = q + r
    s_small = q - r          # carries the sign of det a
    theta_u = (np.arctan2(h, e) + np.arctan2(g, f)) / 2.0
    theta_v = (np.arctan2(h, e) - np.arctan2(g, f)) / 2.0
    # a = rot(theta_u) @ diag(s_big, s_small) @ rot(theta_v); reorder to
    # ascending nonnegative sigma with orthogonal (reflecting) factors
    p1 = rot(theta_u) @ _SWAP
    p2 = _SWAP @ rot(theta_v)
    if s_small < 0.0:
        p1 = p1 @ np.diag([-1.0, 1.0])
    return Svd2(
        np.array([abs(s_small), s_big]), p1, p2, float(np.linalg.det(a))
    )


def singular_values(a):
    """Singular values of a 2x2 matrix, ascending."""
    return svd2(a).sigma


def dist_so2_squared(a):
    """Squared Frobenius distance from a 2x2 matrix to the rotation group.

    (sigma1 - 1)^2 + (sigma2 - 1)^2 when det a >= 0; when det a < 0 the
    small singular value enters as (sigma1 + 1)^2 (one direction must be
    flipped, cheapest along the weakest axis).
    """
    dec = svd2(np.asarray(a, dtype=float))
    s1, s2 = dec.sigma
    if dec.det_sign >= 0.0:
        return float((s1 - 1.0) ** 2 + (s2 - 1.0) ** 2)
    return float((s1 + 1.0) ** 2 + (s2 - 1.0) ** 2)


def dist_so2(a, p=2.0):
    """dist(a, SO(2))^p for a 2x2 matrix."""
    return dist_so2_squared(a) ** (p / 2.0)


def dist_so2_grid(a, n_grid=1_000_000):
    """Brute-force min over a uniform angle grid of |a - R(theta)|_F^2.

    Independent cross-check for dist_so2_squared.  |a - R|^2 = |a|^2 + 2
    - 2*(t cos theta + d sin theta) with t = tr a, d = a21 - a12, so the
    scan needs only one vectorized pass.
    """
    a = np.asarray(a, dtype=float)
    theta = np.linspace(0.0, 2.0 * np.pi, n_grid, endpoint=False)
    proj = (a[0, 0] + a[1, 1]) * np.cos(theta) + (a[1, 0] - a[0, 1]) * np.sin(theta)
    return float((a * a).sum() + 2.0 - 2.0 * proj.max())


def six_bond_sum(sigma1, sigma2, theta):
    """sum_k (|diag(s1,s2) R(theta + k pi/3) e1| - 1)^2 over the six bond
    directions."""
    angles = theta + np.arange(6) * (np.pi / 3.0)
    lengths = np.sqrt(
        (sigma1 * np.cos(angles)) ** 2 + (sigma2 * np.sin(angles)) ** 2
    )
    return float(((lengths - 1.0) ** 2).sum())


def check_lemma_a1(n_samples=100_000, seed=0, sigma_max=10.0):
    """Sampled verification of 14 * six_bond_sum >= (s1-1)^2 + (s2-1)^2.

    Draws (sigma1, sigma2) with 0 <= sigma1 <= sigma2 <= sigma_max and
    theta in [0, pi/3).  Returns (violations, min_slack), slack = LHS - RHS.
    """
    rng = np.random.default_rng(seed)
    lo = rng.uniform(0.0, sigma_max, size=n_samples)
    hi = rng.uniform(0.0, sigma_max, size=n_samples)
    sigma1 = np.minimum(lo, hi)
    sigma2 = np.maximum(lo, hi)
    theta = rng.uniform(0.0, np.pi / 3.0, size=n_samples)
    angles = theta[:, None] + np.arange(6)[None, :] * (np.pi / 3.0)
    lengths = np.sqrt(
        (sigma1[:, None] * np.cos(angles)) ** 2
        + (sigma2[:, None] * np.sin(angles)) ** 2
    )
    lhs = 14.0 * ((lengths - 1.0) ** 2).sum(axis=1)
    rhs = (sigma1 - 1.0) ** 2 + (sigma2 - 1.0) ** 2
    slack = lhs - rhs
    return int(np.sum(slack < 0.0)), float(slack.min())


def laminate_matrices():
    """The zero-energy four-matrix laminate with equal weights 1/4."""
    a1 = np.diag([1.0, -1.0])
    a2 = np.eye(2)
    return [a1, a2, -a1, -a2], np.full(4, 0.25)


def check_laminate(law=None):
    """Verify the laminate: weighted average zero, rank-one connections at
    both lamination levels (second singular value of each difference ~ 0,
    first one nonzero), unit bond images, and zero bond energy per matrix.
    """
    from .energy import BOND_DIRECTIONS, MaterialLaw, w_density

    if law is None:
        law = MaterialLaw(p=2.0, psi="zero")
    mats, weights = laminate_matrices()
    average = sum(w * m for w, m in zip(weights, mats))
    diffs = [
        mats[0] - mats[1],
        mats[2] - mats[3],
        0.5 * (mats[0] + mats[1]) - 0.5 * (mats[2] + mats[3]),
    ]
    rank_one_defects = [float(singular_values(d)[0]) for d in diffs]
    rank_one_strengths = [float(singular_values(d)[1]) for d in diffs]
    bond_errs = [
        float(np.abs(np.linalg.norm(BOND_DIRECTIONS @ m.T, axis=1) - 1.0).max())
        for m in mats
    ]
    energies = [w_density(m, law) for m in mats]
    return {
        "average_norm": float(np.abs(average).max()),
        "rank_one_defects": rank_one_defects,
        "rank_one_strengths": rank_one_strengths,
        "max_bond_length_error": max(bond_errs),
        "max_energy": max(energies),
    }


def check_rigidity(law, n_samples=10_000, seed=0, sigma_max=5.0, dist_floor=1e-8):
    """Sampled minimum of w_density(A) / dist(A, SO(2))^p.

    Needs a volumetric term: with psi == zero the density vanishes on all
    of O(2) while the distance to SO(2) does not, and the ratio degenerates
    on the reflection component.  Samples A = R(u) diag(s1, s2) R(v) with
    singular values in [0, sigma_max] and a random sign flip; skips samples
    with dist < dist_floor.  Returns (min_ratio, n_used).
    """
    from .energy import w_density

    if law.psi_kind == 0:
        raise ValueError("rigidity ratio needs a psi term (psi != zero)")
    rng = np.random.default_rng(seed)
    min_ratio = np.inf
    used = 0
    for _ in range(n_samples):
        s = rng.uniform(0.0, sigma_max, size=2)
        u, v = rng.uniform(0.0, 2.0 * np.pi, size=2)
        mat = rot(u) @ np.diag(s) @ rot(v)
        if rng.random() < 0.5:
            mat = mat @ np.diag([1.0, -1.0])
        d2 = dist_so2_squared(mat)
        if d2 < dist_floor**2:
            continue
        ratio = w_density(mat, law) / d2 ** (law.p / 2.0)
        min_ratio = min(min_ratio, ratio)
        used += 1
    return float(min_ratio), used


def frustration_check(energies, converged=None, energy_floor=1e-4):
    """Check that minimizer energies stay bounded away from zero.

    energies: sweep energies ordered from the coarsest level.  Reports the
    minimum energy, whether every (converged) level clears energy_floor,
    and an extrapolated limit from the last difference assuming geometric
    decay of the increments.
    """
    energies = np.asarray(energies, dtype=float)
    if converged is None:
        converged = np.ones(len(energies), dtype=bool)
    converged = np.asarray(converged, dtype=bool)
    checked = energies[converged]
    min_energy = float(checked.min()) if checked.size else np.nan
    limit = float(energies[-1])
    if len(energies) >= 3:
        d_last = energies[-1] - energies[-2]
        d_prev = energies[-2] - energies[-3]
        if d_prev != 0.0 and abs(d_last) < abs(d_prev):
            q = d_last / d_prev
            limit = float(energies[-1] + d_last * q / (1.0 - q))
    return {
        "min_energy": min_energy,
        "all_above_floor": bool(checked.size and (checked > energy_floor).all()),
        "limit_estimate": limit,
        "limit_positive": limit > energy_floor,
    }
