"""Density, analytic derivatives, assembly, and the two-forms identity."""

import numpy as np
import pytest

from disclat import _kernels_py
from disclat.energy import (
    BOND_DIRECTIONS,
    DegenerateCellError,
    MaterialLaw,
    NonFiniteEnergyError,
    assemble_energy,
    assemble_full_gradient,
    assemble_gradient,
    assemble_hessian,
    bond_sum_energy,
    cell_gradient,
    cell_gradients,
    w_density,
    w_grad,
    w_hess,
)
from disclat.lattice import (
    DofLayout,
    LatticeGraph,
    build_constraints,
    expand,
    reduce_config,
    rot,
)

PHI5 = 2.0 * np.pi / 5.0
LAW2 = MaterialLaw(p=2.0)
LAW3S = MaterialLaw(p=3.0, psi="smoothed_abs")


def random_admissible(graph, phi, seed, scale=0.1):
    """Admissible configuration near the reference (cells stay nondegenerate)."""
    cmap = build_constraints(graph, phi)
    layout = DofLayout(graph, cmap)
    rng = np.random.default_rng(seed)
    q = reduce_config(graph.pos, layout)
    q = q + scale * graph.eps * rng.normal(size=q.size)
    return expand(q, cmap, layout), cmap, layout


def test_law_validation():
    with pytest.raises(ValueError):
        MaterialLaw(p=1.5)
    with pytest.raises(ValueError):
        MaterialLaw(psi="cubic")
    with pytest.raises(ValueError):
        MaterialLaw(psi="smoothed_abs", kappa=0.0)
    with pytest.raises(ValueError):
        MaterialLaw(psi="smoothed_abs", delta=-1.0)


def test_density_zero_on_rotations():
    for theta in (0.0, 0.3, 2.0):
        assert w_density(rot(theta), LAW2) <= 1e-14
    # smoothed psi also vanishes at det = 1
    law = MaterialLaw(p=2.0, psi="smoothed_abs")
    assert w_density(np.eye(2), law) <= 1e-14


def test_density_against_direct_bond_loop():
    # independent recomputation of the six-bond fan
    rng = np.random.default_rng(7)
    law = MaterialLaw(p=2.5, psi="smoothed_abs", kappa=0.7, delta=0.05)
    for _ in range(20):
        a = np.eye(2) + 0.4 * rng.normal(size=(2, 2))
        total = 0.0
        for k in range(6):
            e = np.array([np.cos(k * np.pi / 3.0), np.sin(k * np.pi / 3.0)])
            stretch = np.linalg.norm(a.T @ e)
            total += abs(stretch - 1.0) ** law.p / law.p
        total += float(law.Psi(np.linalg.det(a)))
        assert abs(w_density(a, law) - total) <= 1e-12 * max(1.0, total)


def test_bond_directions_closed_under_negation():
    dirs = {tuple(np.round(d, 12)) for d in BOND_DIRECTIONS}
    for d in BOND_DIRECTIONS:
        assert tuple(np.round(-d, 12)) in dirs


def test_w_grad_matches_finite_differences():
    rng = np.random.default_rng(11)
    h = 1e-6
    for law in (LAW2, LAW3S, MaterialLaw(p=4.0)):
        for _ in range(10):
            a = np.eye(2) + 0.3 * rng.normal(size=(2, 2))
            g = w_grad(a, law)
            fd = np.zeros((2, 2))
            for r in range(2):
                for c in range(2):
                    da = np.zeros((2, 2))
                    da[r, c] = h
                    fd[r, c] = (w_density(a + da, law) - w_density(a - da, law)) / (
                        2.0 * h
                    )
            assert np.abs(g - fd).max() <= 1e-6 * max(1.0, np.abs(g).max())


def test_w_hess_matches_finite_differences():
    rng = np.random.default_rng(13)
    h = 1e-5
    for law in (LAW2, LAW3S):
        for _ in range(5):
            a = np.eye(2) + 0.3 * rng.normal(size=(2, 2))
            hess = w_hess(a, law)       # 4x4, row-major pair index 2i+j
            for r in range(2):
                for c in range(2):
                    da = np.zeros((2, 2))
                    da[r, c] = h
                    fd = (w_grad(a + da, law) - w_grad(a - da, law)) / (2.0 * h)
                    col = hess[:, 2 * r + c].reshape(2, 2)
                    assert np.abs(col - fd).max() <= 1e-5 * max(
                        1.0, np.abs(hess).max()
                    )


def test_cell_gradient_convention():
    # u = M x on a reference cell must return M^T, so that the transpose
    # applied to a unit bond is the deformed bond image
    g = LatticeGraph(2)
    m = np.array([[1.3, 0.4], [-0.2, 0.9]])     # deliberately non-symmetric
    xa, xb, xc = g.pos[g.tris[0]]
    a = cell_gradient(xa, xb, xc, m @ xa, m @ xb, m @ xc)
    np.testing.assert_allclose(a, m.T, atol=1e-13)
    e1 = np.array([1.0, 0.0])
    stretch = np.linalg.norm(a.T @ e1)
    assert abs(stretch - np.linalg.norm(m @ xb - m @ xa) / g.eps) <= 1e-13


def test_cell_gradients_reference_identity():
    g = LatticeGraph(3)
    grads = cell_gradients(g, g.pos)
    np.testing.assert_allclose(grads, np.broadcast_to(np.eye(2), grads.shape), atol=1e-13)


def test_cell_gradient_cyclic_relabeling():
    g = LatticeGraph(2)
    rng = np.random.default_rng(17)
    xa, xb, xc = g.pos[g.tris[1]]
    ua, ub, uc = (x + 0.05 * rng.normal(size=2) for x in (xa, xb, xc))
    base = w_density(cell_gradient(xa, xb, xc, ua, ub, uc), LAW2)
    cyc = w_density(cell_gradient(xb, xc, xa, ub, uc, ua), LAW2)
    assert abs(base - cyc) <= 1e-12 * max(1.0, base)


def test_assembled_energy_reference_is_zero():
    for law in (LAW2, MaterialLaw(p=2.0, psi="smoothed_abs")):
        g = LatticeGraph(4)
        assert assemble_energy(g, g.pos, law) <= 1e-14


def test_energy_form_identity():
    # triangle-sum == sqrt(3)/2 * weighted bond sum + psi part, to 1e-12
    for n in (1, 2, 4, 8):
        g = LatticeGraph(n)
        for seed, law in ((n, LAW2), (n + 50, LAW3S)):
            u, _, _ = random_admissible(g, PHI5, seed)
            e_tri = assemble_energy(g, u, law)
            e_bond = bond_sum_energy(g, u, law)
            assert abs(e_tri - e_bond) <= 1e-12 * max(1.0, abs(e_tri))


def test_frame_indifference_of_assembly():
    g = LatticeGraph(4)
    u, _, _ = random_admissible(g, PHI5, 23)
    e0 = assemble_energy(g, u, LAW2)
    rng = np.random.default_rng(29)
    for _ in range(5):
        r = rot(rng.uniform(0.0, 2.0 * np.pi))
        c = rng.normal(size=2)
        e1 = assemble_energy(g, u @ r.T + c, LAW2)
        assert abs(e1 - e0) <= 1e-12 * max(1.0, e0)


def test_energy_grows_with_uniform_stretch():
    g = LatticeGraph(2)
    es = [assemble_energy(g, s * g.pos, LAW2) for s in (1.0, 1.2, 1.5, 2.0)]
    assert es[0] <= 1e-14
    assert es[1] < es[2] < es[3]


def test_degenerate_cell_raises():
    g = LatticeGraph(2)
    u = g.pos.copy()
    t = g.tris[0]
    u[t[1]] = u[t[0]]       # collapse one bond
    with pytest.raises(DegenerateCellError):
        assemble_full_gradient(g, u, LAW2)
    cmap = build_constraints(g, PHI5)
    layout = DofLayout(g, cmap)
    with pytest.raises(DegenerateCellError):
        assemble_hessian(g, u, LAW2, cmap, layout)


def test_nonfinite_energy_raises():
    g = LatticeGraph(2)
    u = g.pos.copy()
    u[1, 0] = np.inf
    with pytest.raises(NonFiniteEnergyError):
        assemble_energy(g, u, LAW2)


def test_reduced_gradient_matches_finite_differences():
    h = 1e-6
    for n in (4, 8):
        g = LatticeGraph(n)
        for seed, law in ((2 * n, LAW2), (2 * n + 1, MaterialLaw(p=2.0, psi="smoothed_abs"))):
            u, cmap, layout = random_admissible(g, PHI5, seed)
            q = reduce_config(u, layout)
            grad = assemble_gradient(g, u, law, cmap, layout)
            scale = max(1.0, np.abs(grad).max())
            rng = np.random.default_rng(seed + 100)
            for slot in rng.choice(layout.n_reduced, size=12, replace=False):
                dq = np.zeros(layout.n_reduced)
                dq[slot] = h
                fp = assemble_energy(g, expand(q + dq, cmap, layout), law)
                fm = assemble_energy(g, expand(q - dq, cmap, layout), law)
                fd = (fp - fm) / (2.0 * h)
                assert abs(grad[slot] - fd) <= 1e-6 * scale


def test_reduced_hessian_matches_finite_differenced_gradient():
    h = 1e-6
    g = LatticeGraph(4)
    for seed, law in ((31, LAW2), (37, MaterialLaw(p=2.0, psi="smoothed_abs"))):
        u, cmap, layout = random_admissible(g, PHI5, seed)
        q = reduce_config(u, layout)
        hess = assemble_hessian(g, u, law, cmap, layout).toarray()
        scale = max(1.0, np.abs(hess).max())
        rng = np.random.default_rng(seed + 200)
        for _ in range(4):
            v = rng.normal(size=layout.n_reduced)
            v /= np.linalg.norm(v)
            gp = assemble_gradient(g, expand(q + h * v, cmap, layout), law, cmap, layout)
            gm = assemble_gradient(g, expand(q - h * v, cmap, layout), law, cmap, layout)
            fd = (gp - gm) / (2.0 * h)
            assert np.abs(hess @ v - fd).max() <= 1e-5 * scale


def test_hessian_symmetry():
    g = LatticeGraph(4)
    u, cmap, layout = random_admissible(g, PHI5, 41)
    hess = assemble_hessian(g, u, LAW2, cmap, layout)
    assert np.abs((hess - hess.T).toarray()).max() <= 1e-13


def test_backend_parity():
    # compiled kernels against the numpy reference on identical inputs
    try:
        from disclat import _kernels
    except ImportError:
        pytest.skip("compiled extension not built")
    g = LatticeGraph(6)
    u, _, _ = random_admissible(g, PHI5, 43)
    args = (u, g.tris, g.eps, 2.0, 1, 1.0, 1e-2)
    e_c = _kernels.tri_energies(*args)
    e_p = _kernels_py.tri_energies(*args)
    np.testing.assert_allclose(e_c, e_p, rtol=0, atol=1e-14)
    g_c, bad_c = _kernels.tri_gradients(*args, 1e-9)
    g_p, bad_p = _kernels_py.tri_gradients(*args, 1e-9)
    assert bad_c == bad_p == -1
    np.testing.assert_allclose(g_c, g_p, rtol=0, atol=1e-13)
    h_c, _ = _kernels.tri_hessians(*args, 1e-9)
    h_p, _ = _kernels_py.tri_hessians(*args, 1e-9)
    np.testing.assert_allclose(h_c, h_p, rtol=0, atol=1e-12)
