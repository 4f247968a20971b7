#pragma once

#include "mhdnv/geom.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mhdnv {

// One boundary facet: an edge (v0,v1) in 2D, a single vertex (v0 == v1) in 1D.
struct BoundaryFacet {
    int v0 = -1;
    int v1 = -1;
    int tag = 0;
};

// A coordinate direction in which the domain wraps around: values at
// coord == hi are identified with values at coord == lo.
struct PeriodicAxis {
    int axis = 0; // 0 = x, 1 = y
    double lo = 0.0;
    double hi = 0.0;
};

// Conforming simplex mesh: intervals (dim == 1) or triangles (dim == 2).
struct Triangulation {
    int dim = 2;
    std::vector<Vec2> vertices;            // y == 0 in 1D
    std::vector<int> cells;                // (dim+1) vertex ids per cell
    std::vector<BoundaryFacet> boundary_facets;
    std::vector<PeriodicAxis> periodic_axes;
    std::vector<std::pair<int, int>> periodic_pairs; // (slave, master) vertex ids

    int n_vertices() const { return int(vertices.size()); }
    int n_cells() const { return int(cells.size()) / (dim + 1); }
    const int* cell(int c) const { return cells.data() + std::size_t(c) * (dim + 1); }

    double cell_measure(int c) const;
    Vec2 cell_centroid(int c) const;
    double domain_diameter() const; // bounding-box diagonal
    double domain_measure() const;  // sum of cell measures

    // Maps a point to its canonical representative under the periodic axes
    // (hi side folded onto lo side).
    Vec2 wrap_point(Vec2 p) const;

    // Checks conformity (each facet shared by two cells, tagged as boundary,
    // or periodic-matched), positive cell measures, and the periodic-pair
    // geometry. Throws std::runtime_error on the first violation.
    void validate() const;

    // Fills periodic_pairs from periodic_axes by matching wrapped vertex
    // positions. Called by the generators; public for meshes read from files.
    void rebuild_periodic_pairs();
};

// Jacobian of the affine map from the equilateral reference cell onto cell c.
// Reference cells have unit edges: the interval [0,1] in 1D and the
// equilateral triangle (0,0), (1,0), (1/2, sqrt(3)/2) in 2D.
Mat2 equilateral_jacobian(const Triangulation& mesh, int cell);

// Offset of the same map (image of the reference origin).
Vec2 equilateral_offset(const Triangulation& mesh, int cell);

// Adjacency of a node set against the cells that contain it.  Nodes are any
// indexing of points on the mesh (vertices, or Lagrange nodes of a space).
struct PatchTable {
    std::vector<std::vector<int>> node_cells; // cells touching node i, sorted
    std::vector<std::vector<int>> node_nodes; // nodes sharing a cell with i (incl. i), sorted
    std::vector<std::vector<int>> cell_nodes; // node ids per cell

    int n_nodes() const { return int(node_cells.size()); }
    int nel(int i) const { return int(node_cells[i].size()); }

    // Cells shared by the supports of nodes i and j.
    std::vector<int> cells_shared(int i, int j) const;
};

// cell_nodes: flattened node ids, nodes_per_cell consecutive ids per cell.
PatchTable build_patches(int n_nodes, const std::vector<int>& cell_nodes, int nodes_per_cell);

// Convenience: vertex patches of the triangulation itself.
PatchTable build_vertex_patches(const Triangulation& mesh);

// Local cell-size contrast around node i: max over patch cells of |K| divided
// by the min. Requires measures indexed like the patch's cells.
double mesh_quality(int node, const PatchTable& patches, const std::vector<double>& cell_measures);
std::vector<double> mesh_quality(const PatchTable& patches, const std::vector<double>& cell_measures);

// Principal-lattice nodes of degree k on every cell, deduplicated across
// cells by geometric hashing (tolerance 1e-10 times the domain diameter).
struct LatticeNodes {
    int degree = 1;
    int nodes_per_cell = 0;
    std::vector<Vec2> nodes;      // deduplicated positions
    std::vector<int> cell_nodes;  // nodes_per_cell ids per cell, lattice order
};

LatticeNodes build_lattice_nodes(const Triangulation& mesh, int degree);

// Splits every cell into k (1D) or k^2 (2D) sub-simplices whose vertices are
// the degree-k lattice nodes. k == 1 returns a copy of the mesh (with the
// same vertex ordering as LatticeNodes). Boundary tags and periodic axes are
// propagated to the sub-facets and coincident fine nodes.
Triangulation build_fine_submesh(const Triangulation& mesh, int degree);

// Same, but reusing already-built lattice nodes so callers can keep the
// node indexing aligned with a function space.
Triangulation build_fine_submesh(const Triangulation& mesh, const LatticeNodes& lattice);

// Uniform or randomly perturbed generators. Perturbation moves interior
// vertices by at most perturb * local spacing (seeded, deterministic).
Triangulation make_interval_mesh(double x0, double x1, int n, bool periodic = false);
Triangulation make_rect_mesh(double x0, double x1, double y0, double y1, int nx, int ny,
                             bool periodic_x = false, bool periodic_y = false,
                             double perturb = 0.0, uint64_t seed = 0);

// Boundary tags used by the generators.
enum BoundaryTag : int { tag_left = 1, tag_right = 2, tag_bottom = 3, tag_top = 4 };

// Plain-text mesh format:
//   dim nv nc
//   nv coordinate lines (dim numbers each)
//   nc cell lines (dim+1 zero-based vertex ids)
//   remaining lines: boundary facets "v0 v1 tag" (2D) or "v0 tag" (1D)
Triangulation read_mesh(std::istream& in);
Triangulation read_mesh_file(const std::string& path);
void write_mesh(std::ostream& out, const Triangulation& mesh);
void write_mesh_file(const std::string& path, const Triangulation& mesh);

// Deduplicating point registry with a fixed absolute tolerance, used for
// lattice-node merging and periodic matching.
class PointRegistry {
public:
    explicit PointRegistry(double tolerance);

    // Returns the id of a point within tol of p, or -1.
    int find(const Vec2& p) const;
    // Returns the existing id or inserts p with a new id.
    int find_or_insert(const Vec2& p);

    const std::vector<Vec2>& points() const { return pts_; }

private:
    double tol_;
    double cell_;
    std::vector<Vec2> pts_;
    std::unordered_map<uint64_t, std::vector<int>> buckets_;
};

} // namespace mhdnv
