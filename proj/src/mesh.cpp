#include "mhdnv/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mhdnv {

namespace {

void fail(const std::string& what) { throw std::runtime_error("mesh: " + what); }

} // namespace

double Triangulation::cell_measure(int c) const {
    const int* v = cell(c);
    if (dim == 1)
        return std::abs(vertices[v[1]].x - vertices[v[0]].x);
    const Vec2 e1 = vertices[v[1]] - vertices[v[0]];
    const Vec2 e2 = vertices[v[2]] - vertices[v[0]];
    return 0.5 * std::abs(cross(e1, e2));
}

Vec2 Triangulation::cell_centroid(int c) const {
    const int* v = cell(c);
    Vec2 s;
    for (int i = 0; i <= dim; ++i)
        s += vertices[v[i]];
    return s * (1.0 / (dim + 1));
}

double Triangulation::domain_diameter() const {
    if (vertices.empty())
        return 0.0;
    double xmin = vertices[0].x, xmax = xmin, ymin = vertices[0].y, ymax = ymin;
    for (const Vec2& p : vertices) {
        xmin = std::min(xmin, p.x); xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y); ymax = std::max(ymax, p.y);
    }
    return std::hypot(xmax - xmin, ymax - ymin);
}

double Triangulation::domain_measure() const {
    double s = 0.0;
    for (int c = 0; c < n_cells(); ++c)
        s += cell_measure(c);
    return s;
}

Vec2 Triangulation::wrap_point(Vec2 p) const {
    for (const PeriodicAxis& ax : periodic_axes) {
        const double tol = 1e-10 * std::max(std::abs(ax.hi - ax.lo), 1.0);
        double& c = (ax.axis == 0) ? p.x : p.y;
        if (std::abs(c - ax.hi) <= tol)
            c = ax.lo;
    }
    return p;
}

namespace {

// Sorted facet key: (v0) in 1D, (min,max) in 2D.
struct FacetKey {
    int a, b;
    bool operator<(const FacetKey& o) const { return a != o.a ? a < o.a : b < o.b; }
    bool operator==(const FacetKey& o) const { return a == o.a && b == o.b; }
};

std::vector<std::pair<FacetKey, int>> collect_facets(const Triangulation& mesh) {
    std::vector<std::pair<FacetKey, int>> fk;
    const int d = mesh.dim;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const int* v = mesh.cell(c);
        if (d == 1) {
            fk.push_back({{v[0], v[0]}, c});
            fk.push_back({{v[1], v[1]}, c});
        } else {
            for (int e = 0; e < 3; ++e) {
                int a = v[e], b = v[(e + 1) % 3];
                fk.push_back({{std::min(a, b), std::max(a, b)}, c});
            }
        }
    }
    std::sort(fk.begin(), fk.end(),
              [](const auto& l, const auto& r) { return l.first < r.first; });
    return fk;
}

} // namespace

void Triangulation::validate() const {
    if (dim != 1 && dim != 2)
        fail("dim must be 1 or 2");
    if (n_cells() == 0)
        fail("no cells");
    const int nv = n_vertices();
    for (int id : cells)
        if (id < 0 || id >= nv)
            fail("cell vertex id out of range");
    for (int c = 0; c < n_cells(); ++c)
        if (!(cell_measure(c) > 0.0))
            fail("degenerate cell " + std::to_string(c));

    std::set<FacetKey> tagged;
    for (const BoundaryFacet& f : boundary_facets) {
        if (f.v0 < 0 || f.v0 >= nv || f.v1 < 0 || f.v1 >= nv)
            fail("boundary facet vertex out of range");
        tagged.insert({std::min(f.v0, f.v1), std::max(f.v0, f.v1)});
    }

    // Conformity: every facet belongs to two cells, or is tagged, or has a
    // periodic partner among the remaining single-cell facets.
    auto fk = collect_facets(*this);
    std::vector<FacetKey> once;
    for (std::size_t i = 0; i < fk.size();) {
        std::size_t j = i;
        while (j < fk.size() && fk[j].first == fk[i].first)
            ++j;
        const std::size_t count = j - i;
        if (count > 2)
            fail("non-conforming mesh: facet shared by more than two cells");
        if (count == 1 && !tagged.count(fk[i].first))
            once.push_back(fk[i].first);
        i = j;
    }
    if (!once.empty()) {
        if (periodic_axes.empty())
            fail("untagged boundary facet without periodic axes");
        // Group untagged single-cell facets by their wrapped midpoint. The
        // midpoint identifies a facet uniquely on the torus (endpoint sets do
        // not: on a two-cell-wide periodic strip, distinct facets can share
        // wrapped endpoints).
        PointRegistry reg(1e-10 * std::max(domain_diameter(), 1.0));
        std::map<int, int> groups;
        for (const FacetKey& f : once) {
            const Vec2 mid = (vertices[f.a] + vertices[f.b]) * 0.5;
            groups[reg.find_or_insert(wrap_point(mid))]++;
        }
        for (const auto& [key, count] : groups)
            if (count != 2)
                fail("boundary facet neither tagged nor periodic-matched");
    }

    // Periodic pairs map slave positions onto master positions exactly.
    const double ptol = 1e-10 * std::max(domain_diameter(), 1.0);
    std::set<int> slaves;
    for (const auto& [s, m] : periodic_pairs)
        slaves.insert(s);
    for (const auto& [s, m] : periodic_pairs) {
        if (s < 0 || s >= nv || m < 0 || m >= nv)
            fail("periodic pair vertex out of range");
        if (slaves.count(m))
            fail("periodic pair chains to another slave");
        const Vec2 w = wrap_point(vertices[s]);
        if (norm(w - vertices[m]) > ptol)
            fail("periodic pair positions do not match");
    }
}

void Triangulation::rebuild_periodic_pairs() {
    periodic_pairs.clear();
    if (periodic_axes.empty())
        return;
    PointRegistry reg(1e-10 * std::max(domain_diameter(), 1.0));
    std::vector<int> canon(n_vertices());
    for (int i = 0; i < n_vertices(); ++i)
        canon[i] = reg.find_or_insert(wrap_point(vertices[i]));
    // Master of a class: the vertex whose position is unchanged by wrapping.
    std::unordered_map<int, int> master;
    for (int i = 0; i < n_vertices(); ++i) {
        const Vec2 w = wrap_point(vertices[i]);
        if (w.x == vertices[i].x && w.y == vertices[i].y && !master.count(canon[i]))
            master[canon[i]] = i;
    }
    for (int i = 0; i < n_vertices(); ++i) {
        auto it = master.find(canon[i]);
        if (it == master.end())
            fail("periodic slave vertex has no master on the low side");
        if (it->second != i)
            periodic_pairs.push_back({i, it->second});
    }
}

Mat2 equilateral_jacobian(const Triangulation& mesh, int cell) {
    const int* v = mesh.cell(cell);
    Mat2 J;
    if (mesh.dim == 1) {
        J.m[0][0] = mesh.vertices[v[1]].x - mesh.vertices[v[0]].x;
        J.m[1][1] = 1.0;
        return J;
    }
    const Vec2 e1 = mesh.vertices[v[1]] - mesh.vertices[v[0]];
    const Vec2 e2 = mesh.vertices[v[2]] - mesh.vertices[v[0]];
    // Inverse of the reference edge matrix [[1, 1/2], [0, sqrt(3)/2]].
    const double inv_ref[2][2] = {{1.0, -1.0 / std::sqrt(3.0)}, {0.0, 2.0 / std::sqrt(3.0)}};
    const double E[2][2] = {{e1.x, e2.x}, {e1.y, e2.y}};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            J.m[i][j] = E[i][0] * inv_ref[0][j] + E[i][1] * inv_ref[1][j];
    return J;
}

Vec2 equilateral_offset(const Triangulation& mesh, int cell) {
    return mesh.vertices[mesh.cell(cell)[0]];
}

std::vector<int> PatchTable::cells_shared(int i, int j) const {
    std::vector<int> out;
    std::set_intersection(node_cells[i].begin(), node_cells[i].end(),
                          node_cells[j].begin(), node_cells[j].end(),
                          std::back_inserter(out));
    return out;
}

PatchTable build_patches(int n_nodes, const std::vector<int>& cell_nodes, int nodes_per_cell) {
    PatchTable pt;
    const int nc = int(cell_nodes.size()) / nodes_per_cell;
    pt.node_cells.assign(n_nodes, {});
    pt.cell_nodes.assign(nc, {});
    for (int c = 0; c < nc; ++c) {
        pt.cell_nodes[c].assign(cell_nodes.begin() + std::size_t(c) * nodes_per_cell,
                                cell_nodes.begin() + std::size_t(c + 1) * nodes_per_cell);
        for (int n : pt.cell_nodes[c])
            pt.node_cells[n].push_back(c);
    }
    for (auto& cs : pt.node_cells) {
        std::sort(cs.begin(), cs.end());
        cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
    }
    pt.node_nodes.assign(n_nodes, {});
    for (int i = 0; i < n_nodes; ++i) {
        auto& nn = pt.node_nodes[i];
        for (int c : pt.node_cells[i])
            nn.insert(nn.end(), pt.cell_nodes[c].begin(), pt.cell_nodes[c].end());
        std::sort(nn.begin(), nn.end());
        nn.erase(std::unique(nn.begin(), nn.end()), nn.end());
    }
    return pt;
}

PatchTable build_vertex_patches(const Triangulation& mesh) {
    return build_patches(mesh.n_vertices(), mesh.cells, mesh.dim + 1);
}

double mesh_quality(int node, const PatchTable& patches, const std::vector<double>& cell_measures) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int c : patches.node_cells[node]) {
        lo = std::min(lo, cell_measures[c]);
        hi = std::max(hi, cell_measures[c]);
    }
    return hi / lo;
}

std::vector<double> mesh_quality(const PatchTable& patches, const std::vector<double>& cell_measures) {
    std::vector<double> q(patches.n_nodes());
    for (int i = 0; i < patches.n_nodes(); ++i)
        q[i] = mesh_quality(i, patches, cell_measures);
    return q;
}

// ---------------------------------------------------------------------------
// Point registry

PointRegistry::PointRegistry(double tolerance) : tol_(tolerance) {
    if (!(tol_ > 0.0))
        fail("point registry needs a positive tolerance");
    cell_ = 4.0 * tol_;
}

namespace {
uint64_t bucket_key(long long ix, long long iy) {
    return uint64_t(ix) * 0x9e3779b185ebca87ull ^ uint64_t(iy) * 0xc2b2ae3d27d4eb4full;
}
} // namespace

int PointRegistry::find(const Vec2& p) const {
    const long long ix = (long long)std::floor(p.x / cell_);
    const long long iy = (long long)std::floor(p.y / cell_);
    int best = -1;
    double best_d = tol_;
    for (long long dy = -1; dy <= 1; ++dy)
        for (long long dx = -1; dx <= 1; ++dx) {
            auto it = buckets_.find(bucket_key(ix + dx, iy + dy));
            if (it == buckets_.end())
                continue;
            for (int id : it->second) {
                const double d = norm(pts_[id] - p);
                if (d <= best_d) {
                    best = id;
                    best_d = d;
                }
            }
        }
    return best;
}

int PointRegistry::find_or_insert(const Vec2& p) {
    int id = find(p);
    if (id >= 0)
        return id;
    id = int(pts_.size());
    pts_.push_back(p);
    const long long ix = (long long)std::floor(p.x / cell_);
    const long long iy = (long long)std::floor(p.y / cell_);
    buckets_[bucket_key(ix, iy)].push_back(id);
    return id;
}

// ---------------------------------------------------------------------------
// Lattice nodes and fine submesh

namespace {

// Index of lattice point (b, c) inside one cell, matching the enumeration
// order below (c outer, b inner).
int lattice_index(int k, int b, int c) {
    return b + c * (k + 1) - c * (c - 1) / 2;
}

} // namespace

LatticeNodes build_lattice_nodes(const Triangulation& mesh, int degree) {
    if (degree < 1)
        fail("lattice degree must be >= 1");
    const int k = degree;
    LatticeNodes out;
    out.degree = k;
    out.nodes_per_cell = (mesh.dim == 1) ? k + 1 : (k + 1) * (k + 2) / 2;

    PointRegistry reg(1e-10 * std::max(mesh.domain_diameter(), 1.0));
    // Seed with the mesh vertices so lattice corner ids equal vertex ids.
    for (const Vec2& p : mesh.vertices)
        reg.find_or_insert(p);

    out.cell_nodes.reserve(std::size_t(mesh.n_cells()) * out.nodes_per_cell);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const int* v = mesh.cell(c);
        const Vec2 p0 = mesh.vertices[v[0]];
        if (mesh.dim == 1) {
            const Vec2 e1 = mesh.vertices[v[1]] - p0;
            for (int b = 0; b <= k; ++b)
                out.cell_nodes.push_back(reg.find_or_insert(p0 + (double(b) / k) * e1));
        } else {
            const Vec2 e1 = mesh.vertices[v[1]] - p0;
            const Vec2 e2 = mesh.vertices[v[2]] - p0;
            for (int cc = 0; cc <= k; ++cc)
                for (int b = 0; b <= k - cc; ++b)
                    out.cell_nodes.push_back(
                        reg.find_or_insert(p0 + (double(b) / k) * e1 + (double(cc) / k) * e2));
        }
    }
    out.nodes = reg.points();
    return out;
}

Triangulation build_fine_submesh(const Triangulation& mesh, int degree) {
    mesh.validate();
    return build_fine_submesh(mesh, build_lattice_nodes(mesh, degree));
}

Triangulation build_fine_submesh(const Triangulation& mesh, const LatticeNodes& lattice) {
    const int k = lattice.degree;
    const int npc = lattice.nodes_per_cell;
    Triangulation fine;
    fine.dim = mesh.dim;
    fine.vertices = lattice.nodes;
    fine.periodic_axes = mesh.periodic_axes;

    for (int c = 0; c < mesh.n_cells(); ++c) {
        const int* ln = lattice.cell_nodes.data() + std::size_t(c) * npc;
        if (mesh.dim == 1) {
            for (int b = 0; b < k; ++b) {
                fine.cells.push_back(ln[b]);
                fine.cells.push_back(ln[b + 1]);
            }
        } else {
            for (int cc = 0; cc < k; ++cc)
                for (int b = 0; b < k - cc; ++b) {
                    fine.cells.push_back(ln[lattice_index(k, b, cc)]);
                    fine.cells.push_back(ln[lattice_index(k, b + 1, cc)]);
                    fine.cells.push_back(ln[lattice_index(k, b, cc + 1)]);
                    if (b + cc <= k - 2) {
                        fine.cells.push_back(ln[lattice_index(k, b + 1, cc)]);
                        fine.cells.push_back(ln[lattice_index(k, b + 1, cc + 1)]);
                        fine.cells.push_back(ln[lattice_index(k, b, cc + 1)]);
                    }
                }
        }
    }

    // Split each tagged boundary facet into its k sub-facets.
    if (!mesh.boundary_facets.empty()) {
        // Map from sorted facet vertices to one owning cell.
        std::map<std::pair<int, int>, int> owner;
        for (int c = 0; c < mesh.n_cells(); ++c) {
            const int* v = mesh.cell(c);
            if (mesh.dim == 1) {
                owner.insert({{v[0], v[0]}, c});
                owner.insert({{v[1], v[1]}, c});
            } else {
                for (int e = 0; e < 3; ++e) {
                    int a = v[e], b = v[(e + 1) % 3];
                    owner.insert({{std::min(a, b), std::max(a, b)}, c});
                }
            }
        }
        for (const BoundaryFacet& f : mesh.boundary_facets) {
            const std::pair<int, int> key{std::min(f.v0, f.v1), std::max(f.v0, f.v1)};
            auto it = owner.find(key);
            if (it == owner.end())
                fail("boundary facet does not belong to any cell");
            const int c = it->second;
            const int* v = mesh.cell(c);
            const int* ln = lattice.cell_nodes.data() + std::size_t(c) * npc;
            if (mesh.dim == 1) {
                // The facet is the vertex itself; its lattice id is the vertex id.
                fine.boundary_facets.push_back({f.v0, f.v0, f.tag});
            } else {
                int m0 = -1, m1 = -1;
                for (int m = 0; m < 3; ++m) {
                    if (v[m] == f.v0) m0 = m;
                    if (v[m] == f.v1) m1 = m;
                }
                if (m0 < 0 || m1 < 0 || m0 == m1)
                    fail("boundary facet vertices not found in owning cell");
                // Lattice nodes along the edge from local vertex m0 to m1:
                // barycentric multiplicities a[m0] = k - s, a[m1] = s.
                auto edge_node = [&](int s) {
                    int a[3] = {0, 0, 0};
                    a[m0] = k - s;
                    a[m1] = s;
                    return ln[lattice_index(k, a[1], a[2])];
                };
                for (int s = 0; s < k; ++s)
                    fine.boundary_facets.push_back({edge_node(s), edge_node(s + 1), f.tag});
            }
        }
    }

    fine.rebuild_periodic_pairs();
    return fine;
}

// ---------------------------------------------------------------------------
// Generators

Triangulation make_interval_mesh(double x0, double x1, int n, bool periodic) {
    if (n < 1 || !(x1 > x0))
        fail("bad interval mesh parameters");
    Triangulation mesh;
    mesh.dim = 1;
    const double h = (x1 - x0) / n;
    for (int i = 0; i <= n; ++i)
        mesh.vertices.push_back({i == n ? x1 : x0 + i * h, 0.0});
    for (int i = 0; i < n; ++i) {
        mesh.cells.push_back(i);
        mesh.cells.push_back(i + 1);
    }
    if (periodic) {
        mesh.periodic_axes.push_back({0, x0, x1});
        mesh.rebuild_periodic_pairs();
    } else {
        mesh.boundary_facets.push_back({0, 0, tag_left});
        mesh.boundary_facets.push_back({n, n, tag_right});
    }
    mesh.validate();
    return mesh;
}

Triangulation make_rect_mesh(double x0, double x1, double y0, double y1, int nx, int ny,
                             bool periodic_x, bool periodic_y, double perturb, uint64_t seed) {
    if (nx < 1 || ny < 1 || !(x1 > x0) || !(y1 > y0))
        fail("bad rectangle mesh parameters");
    Triangulation mesh;
    mesh.dim = 2;
    const double hx = (x1 - x0) / nx;
    const double hy = (y1 - y0) / ny;
    auto vid = [&](int i, int j) { return j * (nx + 1) + i; };

    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            mesh.vertices.push_back({i == nx ? x1 : x0 + i * hx, j == ny ? y1 : y0 + j * hy});

    if (perturb > 0.0) {
        if (perturb > 0.3)
            fail("perturbation amplitude above 0.3 risks degenerate cells");
        Rng rng(seed);
        const double ax = perturb * hx, ay = perturb * hy;
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i) {
                // Draw for every vertex so the pattern does not depend on
                // which sides are periodic or boundary.
                const double dx = rng.uniform(-ax, ax);
                const double dy = rng.uniform(-ay, ay);
                if (i > 0 && i < nx && j > 0 && j < ny) {
                    mesh.vertices[vid(i, j)].x += dx;
                    mesh.vertices[vid(i, j)].y += dy;
                }
            }
    }

    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
            mesh.cells.insert(mesh.cells.end(), {a, b, c});
            mesh.cells.insert(mesh.cells.end(), {a, c, d});
        }

    if (!periodic_x) {
        for (int j = 0; j < ny; ++j) {
            mesh.boundary_facets.push_back({vid(0, j), vid(0, j + 1), tag_left});
            mesh.boundary_facets.push_back({vid(nx, j), vid(nx, j + 1), tag_right});
        }
    }
    if (!periodic_y) {
        for (int i = 0; i < nx; ++i) {
            mesh.boundary_facets.push_back({vid(i, 0), vid(i + 1, 0), tag_bottom});
            mesh.boundary_facets.push_back({vid(i, ny), vid(i + 1, ny), tag_top});
        }
    }
    if (periodic_x)
        mesh.periodic_axes.push_back({0, x0, x1});
    if (periodic_y)
        mesh.periodic_axes.push_back({1, y0, y1});
    mesh.rebuild_periodic_pairs();
    mesh.validate();
    return mesh;
}

// ---------------------------------------------------------------------------
// Plain-text format

Triangulation read_mesh(std::istream& in) {
    Triangulation mesh;
    int nv = 0, nc = 0;
    if (!(in >> mesh.dim >> nv >> nc))
        fail("cannot read mesh header");
    if (mesh.dim != 1 && mesh.dim != 2)
        fail("mesh file dim must be 1 or 2");
    mesh.vertices.resize(nv);
    for (int i = 0; i < nv; ++i) {
        if (mesh.dim == 1) {
            if (!(in >> mesh.vertices[i].x))
                fail("cannot read vertex " + std::to_string(i));
        } else if (!(in >> mesh.vertices[i].x >> mesh.vertices[i].y)) {
            fail("cannot read vertex " + std::to_string(i));
        }
    }
    mesh.cells.resize(std::size_t(nc) * (mesh.dim + 1));
    for (std::size_t i = 0; i < mesh.cells.size(); ++i)
        if (!(in >> mesh.cells[i]))
            fail("cannot read cells");
    // Remaining lines are boundary facets.
    while (true) {
        BoundaryFacet f;
        if (mesh.dim == 1) {
            if (!(in >> f.v0 >> f.tag))
                break;
            f.v1 = f.v0;
        } else if (!(in >> f.v0 >> f.v1 >> f.tag)) {
            break;
        }
        mesh.boundary_facets.push_back(f);
    }
    return mesh;
}

Triangulation read_mesh_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        fail("cannot open " + path);
    return read_mesh(in);
}

void write_mesh(std::ostream& out, const Triangulation& mesh) {
    out << mesh.dim << ' ' << mesh.n_vertices() << ' ' << mesh.n_cells() << '\n';
    char buf[80];
    for (const Vec2& p : mesh.vertices) {
        if (mesh.dim == 1)
            std::snprintf(buf, sizeof buf, "%.17g\n", p.x);
        else
            std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x, p.y);
        out << buf;
    }
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const int* v = mesh.cell(c);
        for (int i = 0; i <= mesh.dim; ++i)
            out << v[i] << (i == mesh.dim ? '\n' : ' ');
    }
    for (const BoundaryFacet& f : mesh.boundary_facets) {
        if (mesh.dim == 1)
            out << f.v0 << ' ' << f.tag << '\n';
        else
            out << f.v0 << ' ' << f.v1 << ' ' << f.tag << '\n';
    }
}

void write_mesh_file(const std::string& path, const Triangulation& mesh) {
    std::ofstream out(path);
    if (!out)
        fail("cannot open " + path);
    write_mesh(out, mesh);
}

} // namespace mhdnv
