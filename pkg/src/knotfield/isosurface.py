"""Equipotential surfaces: extraction, topology (components + genus), export.

Level sets phi^-1(v) are pulled out of a sampled grid with marching cubes
(scikit-image's Lewiner variant, whose ambiguity resolution keeps the
meshes closed), then welded and classified. Since phi(x) <= Q / dist(x,
curve), the whole surface phi^-1(v) lies within Q/v of the samples; the
default bounding box uses that margin so no level set is ever clipped by
the grid (a clipped mesh has boundary edges and would fail the closed-
manifold check).

Genus comes from the Euler characteristic of each welded component:
chi = V - E + F, g = (2 - chi)/2, both exact integers for a closed
orientable surface.
"""

from dataclasses import dataclass

import numpy as np

from . import fieldkernel as fk
from .critical import morse_code
from .errors import MeshDefectError, NonRegularValueError, ParameterError

DEFAULT_GRID = 120
REGULAR_VALUE_REL_TOL = 1e-4
WELD_FACTOR = 1e-9         # x box diagonal
BOX_SAFETY = 1.15          # margin factor on the Q/v containment bound


@dataclass(frozen=True)
class TriMesh:
    """Triangulated level set of the potential."""

    vertices: np.ndarray
    triangles: np.ndarray
    level: float

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)


@dataclass(frozen=True)
class ComponentTopology:
    vertices: int
    edges: int
    faces: int
    euler_characteristic: int
    genus: int


@dataclass(frozen=True)
class TopologyReport:
    component_count: int
    components: tuple
    total_genus: int

    def as_dict(self):
        return {
            "component_count": self.component_count,
            "components": [
                {"V": c.vertices, "E": c.edges, "F": c.faces,
                 "chi": c.euler_characteristic, "genus": c.genus}
                for c in self.components
            ],
            "total_genus": self.total_genus,
        }


def containment_box(charges, level, safety=BOX_SAFETY):
    """Axis-aligned box guaranteed to contain all of phi^-1(level)."""
    lo, hi = charges.bounding_box()
    margin = safety * charges.total_charge / level
    return lo - margin, hi + margin


def extract_isosurface(charges, level, grid_resolution=DEFAULT_GRID,
                       bounding_box=None, critical_set=None,
                       dtype=np.float32, threads=None):
    """Marching-cubes triangulation of phi^-1(level).

    level must be a regular value; when a critical_set is supplied, levels
    within 1e-4 (relative) of any critical value raise NonRegularValueError
    carrying the offending value. Triangles are oriented with normals
    pointing toward decreasing phi (outward through the far field).
    """
    from skimage.measure import marching_cubes

    if level <= 0:
        raise ParameterError(f"level must be positive, got {level}")
    if critical_set is not None:
        for p in critical_set:
            if abs(p.value - level) < REGULAR_VALUE_REL_TOL * level:
                raise NonRegularValueError(
                    f"level {level} is within tolerance of critical value "
                    f"{p.value}; perturb it to a regular value",
                    critical_value=p.value)

    if bounding_box is None:
        lo, hi = containment_box(charges, level)
    else:
        lo = np.asarray(bounding_box[0], dtype=np.float64)
        hi = np.asarray(bounding_box[1], dtype=np.float64)

    r = int(grid_resolution)
    axes = [np.linspace(lo[c], hi[c], r + 1) for c in range(3)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    phi = fk.potential_grid(charges, grid.reshape(-1, 3), dtype=dtype,
                            threads=threads)
    vol = phi.reshape(r + 1, r + 1, r + 1)
    if not (vol.min() < level < vol.max()):
        raise ParameterError(
            f"level {level} outside sampled range "
            f"[{vol.min():.4g}, {vol.max():.4g}]")

    spacing = tuple((hi - lo) / r)
    verts, faces, _, _ = marching_cubes(vol, level=level, spacing=spacing)
    verts = verts.astype(np.float64) + lo

    verts, faces = _weld(verts, faces, float(np.linalg.norm(hi - lo)))
    faces = _orient_outward(charges, verts, faces)
    return TriMesh(vertices=verts, triangles=faces, level=float(level))


def _weld(verts, faces, box_diag):
    """Merge vertices within the weld tolerance; drop degenerate faces."""
    tol = WELD_FACTOR * box_diag
    keys = np.round(verts / tol).astype(np.int64)
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    # representative coordinates: first occurrence of each key
    first = np.full(len(uniq), -1, dtype=np.int64)
    order = np.arange(len(verts))[::-1]
    first[inverse[order]] = order
    new_verts = verts[first]
    new_faces = inverse[faces]
    a, b, c = new_faces.T
    good = (a != b) & (b != c) & (a != c)
    return new_verts, new_faces[good]


def _orient_outward(charges, verts, faces):
    """Flip components whose normals point up the potential gradient."""
    labels, n_comp = _face_components(verts, faces)
    faces = faces.copy()
    for comp in range(n_comp):
        sel = np.flatnonzero(labels == comp)
        tri = faces[sel[0]]
        centroid = verts[tri].mean(axis=0)
        normal = np.cross(verts[tri[1]] - verts[tri[0]],
                          verts[tri[2]] - verts[tri[0]])
        e = fk.field(charges, centroid)
        if float(normal @ e) < 0.0:  # E points toward decreasing phi
            faces[sel] = faces[sel][:, ::-1]
    return faces


def _edge_array(faces):
    edges = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]],
                            faces[:, [2, 0]]])
    edges.sort(axis=1)
    return edges


def _face_components(verts, faces):
    """Label faces by the connected component of the vertex graph.

    Labels are dense 0..k-1 in order of first appearance among sorted
    component ids, so output is deterministic.
    """
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    if len(faces) == 0:
        return np.zeros(0, dtype=np.int64), 0
    n = len(verts)
    edges = _edge_array(faces)
    adj = coo_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])),
                     shape=(n, n))
    _, vlabels = connected_components(adj, directed=False)
    flabels = vlabels[faces[:, 0]]
    uniq, flabels = np.unique(flabels, return_inverse=True)
    return flabels, int(len(uniq))


def topology(mesh):
    """Connected components, Euler characteristics, and genus of a mesh.

    Raises MeshDefectError when any edge is not shared by exactly two
    triangles (a non-manifold or clipped surface, usually a sign the grid
    is too coarse near a near-critical neck).
    """
    verts, faces = mesh.vertices, mesh.triangles
    if len(faces) == 0:
        raise MeshDefectError("mesh has no triangles")
    edges = _edge_array(faces)
    uniq_edges, counts = np.unique(edges, axis=0, return_counts=True)
    bad = uniq_edges[counts != 2]
    if len(bad):
        raise MeshDefectError(
            f"{len(bad)} edges not shared by exactly 2 triangles "
            "(non-manifold or clipped surface; raise the grid resolution)",
            bad_edges=[tuple(int(v) for v in e) for e in bad[:32]])

    flabels, n_comp = _face_components(verts, faces)
    comps = []
    total = 0
    for comp in range(n_comp):
        f_sel = faces[flabels == comp]
        v_used = np.unique(f_sel)
        e_sel = _edge_array(f_sel)
        n_edges = len(np.unique(e_sel, axis=0))
        chi = len(v_used) - n_edges + len(f_sel)
        if chi % 2 != 0:
            raise MeshDefectError(
                f"component {comp} has odd Euler characteristic {chi}")
        genus = (2 - chi) // 2
        if genus < 0:
            raise MeshDefectError(
                f"component {comp} has negative genus (chi={chi})")
        comps.append(ComponentTopology(
            vertices=int(len(v_used)), edges=int(n_edges),
            faces=int(len(f_sel)), euler_characteristic=int(chi),
            genus=int(genus)))
        total += genus
    return TopologyReport(component_count=n_comp, components=tuple(comps),
                          total_genus=int(total))


def extract_with_topology(charges, level, grid_resolution=DEFAULT_GRID,
                          bounding_box=None, critical_set=None,
                          dtype=np.float32, threads=None):
    """Extraction plus topology, retrying once at doubled resolution if the
    mesh comes out defective."""
    mesh = extract_isosurface(charges, level, grid_resolution, bounding_box,
                              critical_set, dtype, threads)
    try:
        return mesh, topology(mesh)
    except MeshDefectError:
        mesh = extract_isosurface(charges, level, 2 * grid_resolution,
                                  bounding_box, critical_set, dtype, threads)
        return mesh, topology(mesh)


def gallery_levels(critical_set, rel_tol=1e-6):
    """One regular level per regime: above all critical values, between
    each consecutive distinct pair, and below the smallest. Descending."""
    code = morse_code(critical_set, rel_tol=rel_tol)
    values = [v for v, _, _ in code]
    levels = [1.05 * values[-1]]
    for hi, lo in zip(values[::-1][:-1], values[::-1][1:]):
        levels.append(0.5 * (hi + lo))
    levels.append(0.95 * values[0])
    return levels


def morse_transition_gallery(charges, critical_set, grid_resolution=DEFAULT_GRID,
                             dtype=np.float32, threads=None):
    """Extract one representative surface per topological regime.

    Returns a list of (level, TriMesh, TopologyReport) ordered from the
    highest level (thin tube around the loop) to the lowest (far-field
    sphere).
    """
    if not critical_set:
        raise ParameterError("critical set is empty")
    out = []
    for level in gallery_levels(critical_set):
        mesh, report = extract_with_topology(
            charges, level, grid_resolution, critical_set=critical_set,
            dtype=dtype, threads=threads)
        out.append((level, mesh, report))
    return out


def save_obj(mesh, path):
    """Write the mesh as ASCII OBJ, one object per connected component."""
    labels, n_comp = _face_components(mesh.vertices, mesh.triangles)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# equipotential surface, level {mesh.level!r}\n")
        offset = 0
        for comp in range(n_comp):
            f_sel = mesh.triangles[labels == comp]
            v_used = np.unique(f_sel)
            remap = {int(v): i + 1 + offset for i, v in enumerate(v_used)}
            fh.write(f"o component_{comp}\n")
            for v in mesh.vertices[v_used]:
                fh.write(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}\n")
            for tri in f_sel:
                fh.write(f"f {remap[int(tri[0])]} {remap[int(tri[1])]} "
                         f"{remap[int(tri[2])]}\n")
            offset += len(v_used)
