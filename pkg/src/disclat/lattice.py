"""Triangular lattice on the unit equilateral triangle, with the boundary
constraint machinery.

The reference domain is the closed triangle spanned by e1 and R60*e1 (side
length 1).  Vertices are indexed by integer pairs (i, j) with i, j >= 0 and
i + j <= N, sitting at eps*(i + j/2, j*sqrt(3)/2) where eps = 1/N.  The three
boundary segments are

    Gamma1: j = 0        (along e1)
    Gamma2: i = 0        (along R60*e1)
    Gamma3: i + j = N    (the far side)

A deformation u is admissible when u(R60*x) = R_phi*u(x) for every vertex x
on Gamma1 and u(0) = 0.  Each Gamma2 vertex (0, i) is therefore slaved to the
Gamma1 master (i, 0), and the origin is pinned, leaving 2*(|V| - N - 1) free
scalar unknowns.
"""

import numpy as np
import scipy.sparse as sp

SQRT3 = np.sqrt(3.0)


def rot(angle):
    """Counter-clockwise 2x2 rotation matrix."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


class LatticeSpec:
    """Lattice parameters: mismatch angle phi and subdivision count N = 1/eps.

    phi is the wedge angle of the disclination (2*pi/5 or 2*pi/7 in the
    classical 5-/7-type cases; any value in (0, 2*pi) is accepted, and
    phi = pi/3 gives the unfrustrated control).
    """

    def __init__(self, phi, n):
        n = int(n)
        if n < 1:
            raise ValueError("need N >= 1, got %d" % n)
        if not 0.0 < phi < 2.0 * np.pi:
            raise ValueError("phi must lie in (0, 2*pi), got %r" % phi)
        self.phi = float(phi)
        self.n = n
        self.eps = 1.0 / n


class LatticeGraph:
    """Vertices, weighted edges and oriented triangles of the lattice.

    Attributes
    ----------
    n : int
        Subdivision count N.
    eps : float
        Lattice spacing 1/N.
    ij : (|V|, 2) int array
        Index pair of each vertex; vertex ids enumerate rows.
    pos : (|V|, 2) float array
        Reference positions eps*(i + j/2, j*sqrt(3)/2).
    edges : (|E|, 2) int array
    weights : (|E|,) float array
        1/2 on boundary edges, 1 on interior edges.
    tris : (|T|, 3) int array
        Counter-clockwise vertex triples; "up" triangles first.
    tri_up : (|T|,) bool array
        True for up triangles (their edge vectors are e1 and R60*e1).
    gamma1, gamma2, gamma3 : (|V|,) bool arrays
        Boundary membership of each vertex.
    """

    def __init__(self, n):
        self.n = n = int(n)
        self.eps = eps = 1.0 / n

        # vertex rows ordered by j, then i; id(i, j) = offset[j] + i
        counts = np.arange(n + 1, 0, -1)          # row j holds N+1-j vertices
        offsets = np.concatenate([[0], np.cumsum(counts)])
        ij = np.array(
            [(i, j) for j in range(n + 1) for i in range(n + 1 - j)], dtype=np.int64
        )
        self._offsets = offsets
        self.ij = ij
        self.pos = eps * np.column_stack(
            [ij[:, 0] + 0.5 * ij[:, 1], ij[:, 1] * (SQRT3 / 2.0)]
        )

        vid = self.vertex_id
        edges = []
        weights = []
        for j in range(n + 1):                    # edges along e1
            for i in range(n - j):
                edges.append((vid(i, j), vid(i + 1, j)))
                weights.append(0.5 if j == 0 else 1.0)
        for j in range(n):                        # edges along R60*e1
            for i in range(n - j):
                edges.append((vid(i, j), vid(i, j + 1)))
                weights.append(0.5 if i == 0 else 1.0)
        for j in range(n):                        # diagonal edges of the cells
            for i in range(n - j):
                edges.append((vid(i + 1, j), vid(i, j + 1)))
                weights.append(0.5 if i + j == n - 1 else 1.0)
        self.edges = np.array(edges, dtype=np.int64)
        self.weights = np.array(weights)

        tris = []
        for j in range(n):                        # up triangles, CCW
            for i in range(n - j):
                tris.append((vid(i, j), vid(i + 1, j), vid(i, j + 1)))
        n_up = len(tris)
        for j in range(n - 1):                    # down triangles, CCW
            for i in range(n - 1 - j):
                tris.append((vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)))
        self.tris = np.array(tris, dtype=np.int64)
        self.tri_up = np.arange(len(tris)) < n_up

        self.gamma1 = ij[:, 1] == 0
        self.gamma2 = ij[:, 0] == 0
        self.gamma3 = ij.sum(axis=1) == n

    def vertex_id(self, i, j):
        return int(self._offsets[j]) + int(i)

    @property
    def n_vertices(self):
        return len(self.ij)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_triangles(self):
        return len(self.tris)

    def triangle_area(self):
        """Reference area of every triangle: sqrt(3)*eps^2/4."""
        return SQRT3 * self.eps**2 / 4.0


class ConstraintMap:
    """Master-slave pairing u(R60*x) = R_phi*u(x) plus the pinned origin.

    masters[k] = id of Gamma1 vertex (k+1, 0); slaves[k] = id of the Gamma2
    vertex (0, k+1) at the rotated reference position.  rotation is R_phi.
    """

    def __init__(self, phi, masters, slaves, pinned):
        self.phi = float(phi)
        self.rotation = rot(phi)
        self.masters = np.asarray(masters, dtype=np.int64)
        self.slaves = np.asarray(slaves, dtype=np.int64)
        self.pinned = int(pinned)


def build_lattice(spec):
    """Construct the lattice graph for a LatticeSpec (or a plain N)."""
    n = spec.n if isinstance(spec, LatticeSpec) else int(spec)
    return LatticeGraph(n)


def build_constraints(graph, phi):
    """Pair each Gamma1 vertex (i, 0), i >= 1, with the Gamma2 vertex (0, i).

    The apex (0, N) lies on both Gamma2 and Gamma3 and is slaved to (N, 0);
    the corner (N, 0) on Gamma1 and Gamma3 is an ordinary master.  Raises if a
    partner is missing, which would indicate a broken lattice.
    """
    n = graph.n
    id_of = {}
    for vid, (i, j) in enumerate(graph.ij):
        id_of[(int(i), int(j))] = vid
    masters, slaves = [], []
    r60 = rot(np.pi / 3.0)
    for i in range(1, n + 1):
        if (i, 0) not in id_of or (0, i) not in id_of:
            raise RuntimeError("Gamma1 vertex (%d,0) has no Gamma2 partner" % i)
        m, s = id_of[(i, 0)], id_of[(0, i)]
        # the slave must sit exactly at R60 times the master reference position
        gap = np.abs(r60 @ graph.pos[m] - graph.pos[s]).max()
        assert gap < 1e-12, "constraint geometry broken at i=%d (gap %g)" % (i, gap)
        masters.append(m)
        slaves.append(s)
    return ConstraintMap(phi, masters, slaves, id_of[(0, 0)])


class DofLayout:
    """Mapping between full per-vertex vectors and reduced free unknowns.

    free_ids lists the vertices carrying 2 unknowns each (everything except
    the slaved Gamma2 vertices and the pinned origin), in ascending id order.
    """

    def __init__(self, graph, cmap):
        nv = graph.n_vertices
        dependent = np.zeros(nv, dtype=bool)
        dependent[cmap.slaves] = True
        dependent[cmap.pinned] = True
        self.free_ids = np.flatnonzero(~dependent)
        self.n_full = nv
        self.n_reduced = 2 * len(self.free_ids)
        # reduced slot of each vertex (-1 for slaves/pinned)
        self._slot = -np.ones(nv, dtype=np.int64)
        self._slot[self.free_ids] = np.arange(len(self.free_ids))
        self._cmap = cmap

        # sparse selection matrix S (2|V| x n_reduced) with u_full = S @ q:
        # identity blocks on free vertices, R_phi blocks slaving Gamma2 to
        # Gamma1.  The pinned origin row is zero.
        rows, cols, vals = [], [], []
        for v in self.free_ids:
            r = self._slot[v]
            for c in range(2):
                rows.append(2 * v + c)
                cols.append(2 * r + c)
                vals.append(1.0)
        rp = cmap.rotation
        for m, s in zip(cmap.masters, cmap.slaves):
            r = self._slot[m]
            for a in range(2):
                for b in range(2):
                    rows.append(2 * s + a)
                    cols.append(2 * r + b)
                    vals.append(rp[a, b])
        self.select = sp.csr_matrix(
            (vals, (rows, cols)), shape=(2 * nv, self.n_reduced)
        )

    def reduced_slot(self, vertex_id):
        return int(self._slot[vertex_id])


def expand(reduced, cmap, layout):
    """Reduced vector -> full (|V|, 2) configuration.

    Free vertices are filled from the reduced vector, the origin is set to
    (0, 0), and every slave is computed as R_phi times its master, so the
    output satisfies the constraint exactly by construction.
    """
    reduced = np.asarray(reduced, dtype=float)
    if reduced.shape != (layout.n_reduced,):
        raise ValueError(
            "reduced vector has shape %r, expected (%d,)"
            % (reduced.shape, layout.n_reduced)
        )
    u = np.zeros((layout.n_full, 2))
    u[layout.free_ids] = reduced.reshape(-1, 2)
    u[cmap.slaves] = u[cmap.masters] @ cmap.rotation.T
    u[cmap.pinned] = 0.0
    return u


def reduce_config(config, layout):
    """Full (|V|, 2) configuration -> reduced vector (free vertices only)."""
    config = np.asarray(config, dtype=float)
    if config.shape != (layout.n_full, 2):
        raise ValueError(
            "config has shape %r, expected (%d, 2)" % (config.shape, layout.n_full)
        )
    return config[layout.free_ids].ravel()


def dump_lattice(graph, cmap, stream):
    """Write the plain-text lattice dump.

    One record per line: `v <id> <i> <j> <x> <y>`, `e <id> <v1> <v2> <w>`,
    `t <id> <v1> <v2> <v3>`, `c <master> <slave>`, `pin <id>`.  Floats carry
    17 significant digits so they round-trip bit-exactly.
    """
    for vid, ((i, j), (x, y)) in enumerate(zip(graph.ij, graph.pos)):
        stream.write("v %d %d %d %.17g %.17g\n" % (vid, i, j, x, y))
    for eid, ((a, b), w) in enumerate(zip(graph.edges, graph.weights)):
        stream.write("e %d %d %d %.17g\n" % (eid, a, b, w))
    for tid, (a, b, c) in enumerate(graph.tris):
        stream.write("t %d %d %d %d\n" % (tid, a, b, c))
    for m, s in zip(cmap.masters, cmap.slaves):
        stream.write("c %d %d\n" % (m, s))
    stream.write("pin %d\n" % cmap.pinned)


def parse_lattice_dump(stream):
    """Read a lattice dump back into plain arrays (for round-trip checks).

    Returns a dict with keys ij, pos, edges, weights, tris, pairs, pinned.
    """
    ij, pos, edges, weights, tris, pairs = [], [], [], [], [], []
    pinned = None
    for line in stream:
        parts = line.split()
        if not parts:
            continue
        tag = parts[0]
        if tag == "v":
            ij.append((int(parts[2]), int(parts[3])))
            pos.append((float(parts[4]), float(parts[5])))
        elif tag == "e":
            edges.append((int(parts[2]), int(parts[3])))
            weights.append(float(parts[4]))
        elif tag == "t":
            tris.append((int(parts[2]), int(parts[3]), int(parts[4])))
        elif tag == "c":
            pairs.append((int(parts[1]), int(parts[2])))
        elif tag == "pin":
            pinned = int(parts[1])
        else:
            raise ValueError("unrecognized dump record %r" % tag)
    return {
        "ij": np.array(ij, dtype=np.int64),
        "pos": np.array(pos),
        "edges": np.array(edges, dtype=np.int64),
        "weights": np.array(weights),
        "tris": np.array(tris, dtype=np.int64),
        "pairs": np.array(pairs, dtype=np.int64),
        "pinned": pinned,
    }
