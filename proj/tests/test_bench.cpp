#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mhdnv/bench.hpp"
#include "mhdnv/output.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace mhdnv;

namespace {

constexpr double pi = std::numbers::pi;

double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

// Smooth conserved fields (not an MHD solution; just integrable data). The
// bulk momentum keeps the derived velocity away from zero, where the
// magnitude would put a kink into the error integrands.
MhdState smooth_state(Vec2 x) {
    const double sx = std::sin(pi * x.x), cy = std::cos(pi * x.y);
    return MhdState{1.0 + 0.05 * sx * cy,
                    {0.5 + 0.1 * cy, 0.3 + 0.05 * sx},
                    2.0 + 0.1 * sx * sx,
                    {0.2 + 0.02 * cy, 0.1 * sx}};
}

MhdState shifted_state(Vec2 x) {
    MhdState s = smooth_state(x);
    s.rho += 0.05;
    s.m += Vec2{0.03, -0.02};
    s.E += 0.1;
    s.B += Vec2{0.02, 0.01};
    return s;
}

} // namespace

TEST_CASE("registry holds the benchmark constants") {
    const std::map<std::string, ProblemSpec> reg = registry();
    REQUIRE(reg.size() == 5);
    for (const char* name : {"vortex", "brio-wu", "orszag-tang", "kelvin-helmholtz", "blast"})
        REQUIRE(reg.count(name) == 1);
    CHECK(reg.count("foo") == 0);

    const ProblemSpec& vx = reg.at("vortex");
    CHECK(vx.gamma == 5.0 / 3.0);
    CHECK(vx.cfl == 0.1);
    CHECK(vx.t_final == 0.05);
    CHECK(vx.x0 == -10.0);
    CHECK(vx.x1 == 10.0);
    CHECK((vx.periodic_x && vx.periodic_y));
    // Far from the vortex the perturbation is below machine precision.
    const MhdState far = vx.initial({10.0, 10.0}, 0);
    CHECK(far.rho == 1.0);
    CHECK(rel_diff(far.m.x, 1.0) < 1e-14);
    CHECK(rel_diff(far.B.x, 0.1) < 1e-14);
    CHECK(rel_diff(far.E, 1.5 + 1.0 + 0.01) < 1e-14); // p/(gamma-1) + |u|^2/2 + |B|^2/2
    // The exact solution is the initial data advected by (1,1).
    const MhdState a = vx.initial({0.3, -0.2}, 0);
    const MhdState b = vx.exact({0.3 + 0.05, -0.2 + 0.05}, 0.05);
    CHECK(rel_diff(a.E, b.E) < 1e-14);
    CHECK(rel_diff(a.m.x, b.m.x) < 1e-14);

    const ProblemSpec& bw = reg.at("brio-wu");
    CHECK(bw.gamma == 2.0);
    CHECK(bw.cfl == 0.3);
    CHECK(bw.t_final == 0.1);
    CHECK(bw.pseudo_1d);
    const MhdState left = bw.initial({0.25, 0.0}, 0);
    CHECK(left.rho == 1.0);
    CHECK(left.E == 1.78125);
    CHECK(left.B.x == 0.75);
    CHECK(left.B.y == 1.0);
    const MhdState right = bw.initial({0.75, 0.0}, 0);
    CHECK(right.rho == 0.125);
    CHECK(right.B.y == -1.0);
    CHECK(rel_diff(right.E, 0.88125) < 1e-15);
    CHECK(bw.bc.at(tag_left) == BcKind::dirichlet);
    CHECK(bw.bc.at(tag_right) == BcKind::dirichlet);

    const ProblemSpec& ot = reg.at("orszag-tang");
    CHECK(ot.gamma == 5.0 / 3.0);
    CHECK(ot.cfl == 0.3);
    CHECK(ot.t_final == 1.0);
    const MhdState s = ot.initial({0.25, 0.0}, 0);
    const double rho0 = 25.0 / (36.0 * pi);
    CHECK(rel_diff(s.rho, rho0) < 1e-15);
    CHECK(std::abs(s.m.x) < 1e-15);            // u_x = -sin(0)
    CHECK(rel_diff(s.m.y, rho0) < 1e-15);      // u_y = sin(pi/2)
    CHECK(std::abs(s.B.y) < 1e-15);            // sin(pi) / sqrt(4 pi)
    CHECK(rel_diff(pressure(s, ot.gamma), 5.0 / (12.0 * pi)) < 1e-13);

    const ProblemSpec& kh = reg.at("kelvin-helmholtz");
    CHECK(kh.gamma == 5.0 / 3.0);
    CHECK(kh.cfl == 0.4);
    CHECK(kh.t_final == 6.0);
    const MhdState inner = kh.initial({0.1, 0.0}, 42);
    const MhdState outer = kh.initial({0.1, 0.4}, 42);
    CHECK(inner.rho == 2.0);
    CHECK(outer.rho == 1.0);
    CHECK(std::abs(inner.m.x / inner.rho - 0.5) <= 0.005);
    CHECK(std::abs(outer.m.x / outer.rho + 0.5) <= 0.005);
    CHECK(std::abs(inner.m.y / inner.rho) <= 0.005);
    CHECK(rel_diff(pressure(inner, kh.gamma), 2.5) < 1e-13);
    CHECK(inner.B.x == 0.0);
    // Seeded noise: reproducible, seed-dependent.
    const MhdState again = kh.initial({0.1, 0.0}, 42);
    CHECK(inner.m.x == again.m.x);
    CHECK(inner.m.y == again.m.y);
    const MhdState other = kh.initial({0.1, 0.0}, 43);
    CHECK(inner.m.x != other.m.x);
    CHECK(registry(0.1, 0.2).at("kelvin-helmholtz").initial({0.1, 0.0}, 0).B.x == 0.2);

    const ProblemSpec& bl = reg.at("blast");
    CHECK(bl.gamma == 1.4);
    CHECK(bl.cfl == 0.2);
    CHECK(bl.t_final == 0.01);
    const MhdState center = bl.initial({0.0, 0.0}, 0);
    const MhdState ambient = bl.initial({0.3, 0.0}, 0);
    CHECK(rel_diff(pressure(center, 1.4) / pressure(ambient, 1.4), 10000.0) < 1e-12);
    CHECK(rel_diff(center.B.x, 100.0 / std::sqrt(4.0 * pi)) < 1e-15);
    CHECK(rel_diff(pressure(bl.initial({0.05, 0.05}, 0), 1.4), 1000.0) < 1e-13);
    // Radius is configurable.
    CHECK(rel_diff(pressure(registry(0.25).at("blast").initial({0.2, 0.0}, 0), 1.4), 1000.0) <
          1e-13);

    // Initial data is physical wherever it is sampled.
    for (const auto& [name, pr] : reg)
        for (double xs : {-0.49, -0.2, 0.0, 0.26, 0.49})
            for (double ys : {-0.49, 0.0, 0.23, 0.49}) {
                const Vec2 x{pr.x0 + (xs + 0.5) * (pr.x1 - pr.x0),
                             pr.y0 + (ys + 0.5) * (pr.y1 - pr.y0)};
                INFO(name << " at (" << x.x << ", " << x.y << ")");
                CHECK(state_valid(pr.initial(x, 17)));
            }
}

TEST_CASE("problem meshes match the domain layout") {
    const std::map<std::string, ProblemSpec> reg = registry();

    Triangulation strip = problem_mesh(reg.at("brio-wu"), 6);
    CHECK(strip.dim == 2);
    double ymax = 0.0;
    for (const Vec2& v : strip.vertices)
        ymax = std::max(ymax, v.y);
    CHECK(rel_diff(ymax, 1.0 / 6.0) < 1e-15);
    LagrangeSpace sp = build_space(strip, 1);
    CHECK(sp.n_dofs == 7); // periodic y identifies the two rows

    Triangulation vx = problem_mesh(reg.at("vortex"), 8);
    LagrangeSpace spv = build_space(vx, 1);
    CHECK(spv.n_dofs == 64); // doubly periodic 8x8

    const MhdBcs bcs = problem_bcs(reg.at("brio-wu"));
    CHECK(bcs.kind.size() == 2);
    const MhdState d = bcs.dirichlet({0.25, 0.0});
    CHECK(d.rho == 1.0);
}

TEST_CASE("error norms vanish on reproducible fields") {
    Triangulation mesh = make_rect_mesh(0.0, 1.0, 0.0, 1.0, 4, 4, false, false, 0.2, 9);
    for (int degree : {1, 2}) {
        LagrangeSpace sp = build_space(mesh, degree);
        // Conserved components polynomial of degree <= k: the interpolant
        // matches pointwise, so even the derived-variable errors vanish.
        const auto exact = [degree](Vec2 x) {
            const double q = degree == 1 ? 0.0 : 0.3 * x.x * x.y;
            return MhdState{1.2 + 0.1 * x.x + q,
                            {0.2 * x.y, 0.1 * x.x + q},
                            3.0 + 0.5 * x.y + q,
                            {0.3 - 0.1 * x.y, 0.2 * x.x}};
        };
        MhdField u(sp.n_dofs);
        for (int i = 0; i < sp.n_dofs; ++i)
            u.set_state(i, exact(sp.dof_pos[i]));
        const ErrorReport rep = error_norms(u, exact, sp, 5.0 / 3.0);
        CHECK(rep.dofs == sp.n_dofs);
        REQUIRE(rep.rows.size() == 5);
        for (const ErrorRow& row : rep.rows) {
            INFO("degree " << degree << ", " << row.var);
            CHECK(row.l1 <= 1e-12);
            CHECK(row.l2 <= 1e-12);
            CHECK(row.linf <= 1e-12);
        }
    }
}

TEST_CASE("error norms match an independent quadrature oracle") {
    // Interpolated smooth data against a shifted exact solution; the shifts
    // dominate the interpolation error, so every integrand stays smooth.
    Triangulation mesh = make_rect_mesh(0.0, 1.0, 0.0, 1.0, 12, 12);
    LagrangeSpace sp = build_space(mesh, 1);
    MhdField u(sp.n_dofs);
    for (int i = 0; i < sp.n_dofs; ++i)
        u.set_state(i, smooth_state(sp.dof_pos[i]));
    const ErrorReport rep = error_norms(u, shifted_state, sp, 5.0 / 3.0);

    // Dense rule, P1 evaluation through barycentric coordinates.
    const double gamma = 5.0 / 3.0;
    const QuadratureRule rule = simplex_quadrature(2, 16);
    double l1[5]{}, l2[5]{}, d1[5]{}, d2[5]{};
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const int* d = sp.dofs(c);
        const int* v = mesh.cell(c);
        for (int qp = 0; qp < rule.size(); ++qp) {
            const Vec2 p = rule.points[qp];
            const double lam[3] = {1.0 - p.x - p.y, p.x, p.y};
            MhdState h{0.0, {0.0, 0.0}, 0.0, {0.0, 0.0}};
            Vec2 x{0.0, 0.0};
            for (int j = 0; j < 3; ++j) {
                const MhdState sj = u.state(d[j]);
                h.rho += lam[j] * sj.rho;
                h.m += sj.m * lam[j];
                h.E += lam[j] * sj.E;
                h.B += sj.B * lam[j];
                x += mesh.vertices[v[j]] * lam[j];
            }
            const MhdState ex = shifted_state(x);
            const double err[5] = {std::abs(h.rho - ex.rho),
                                   norm(h.m * (1.0 / h.rho) - ex.m * (1.0 / ex.rho)),
                                   std::abs(pressure(h, gamma) - pressure(ex, gamma)),
                                   norm(h.B - ex.B), std::abs(h.E - ex.E)};
            const double den[5] = {std::abs(ex.rho), norm(ex.m * (1.0 / ex.rho)),
                                   std::abs(pressure(ex, gamma)), norm(ex.B),
                                   std::abs(ex.E)};
            const double w = rule.weights[qp] * 2.0 * mesh.cell_measure(c);
            for (int k = 0; k < 5; ++k) {
                l1[k] += w * err[k];
                l2[k] += w * err[k] * err[k];
                d1[k] += w * den[k];
                d2[k] += w * den[k] * den[k];
            }
        }
    }
    const char* names[5] = {"rho", "u", "p", "B", "E"};
    for (int k = 0; k < 5; ++k) {
        CAPTURE(names[k]);
        CHECK(rel_diff(rep.row(names[k]).l1, l1[k] / d1[k]) < 1e-8);
        CHECK(rel_diff(rep.row(names[k]).l2, std::sqrt(l2[k]) / std::sqrt(d2[k])) < 1e-8);
    }
}

TEST_CASE("error norms are invariant under cell reordering") {
    Triangulation mesh = make_rect_mesh(0.0, 1.0, 0.0, 1.0, 5, 4);
    Triangulation flipped = mesh;
    const int npc = 3;
    for (int c = 0; c < mesh.n_cells() / 2; ++c)
        for (int j = 0; j < npc; ++j)
            std::swap(flipped.cells[c * npc + j],
                      flipped.cells[(mesh.n_cells() - 1 - c) * npc + j]);

    ErrorReport reps[2];
    int idx = 0;
    for (const Triangulation* m : {&mesh, &flipped}) {
        LagrangeSpace sp = build_space(*m, 2);
        MhdField u(sp.n_dofs);
        for (int i = 0; i < sp.n_dofs; ++i)
            u.set_state(i, smooth_state(sp.dof_pos[i]));
        reps[idx++] = error_norms(u, shifted_state, sp, 5.0 / 3.0);
    }
    CHECK(reps[0].dofs == reps[1].dofs);
    for (const ErrorRow& row : reps[0].rows) {
        const ErrorRow& other = reps[1].row(row.var);
        CHECK(rel_diff(row.l1, other.l1) < 1e-13);
        CHECK(rel_diff(row.l2, other.l2) < 1e-13);
        CHECK(rel_diff(row.linf, other.linf) < 1e-13);
    }

    LagrangeSpace sp = build_space(mesh, 1);
    MhdField u(sp.n_dofs);
    CHECK_THROWS_AS(error_norms(u, nullptr, sp, 5.0 / 3.0), std::invalid_argument);
}

TEST_CASE("convergence rows carry observed rates") {
    ErrorReport a, b;
    a.dofs = 100;
    a.rows = {{"u", 1e-2, 2e-2, 3e-2}};
    b.dofs = 400; // h halves in 2D
    b.rows = {{"u", 2.5e-3, 5e-3, 1.5e-2}};
    const std::vector<ConvergenceRow> rows = convergence_rows({a, b}, 2);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].dofs == 100);
    CHECK(std::isnan(rows[0].rate));
    CHECK(rows[3].var == "u");
    CHECK(rows[3].norm == "l1");
    CHECK(rel_diff(rows[3].rate, 2.0) < 1e-12); // log(4)/log(2)
    CHECK(rel_diff(rows[4].rate, 2.0) < 1e-12);
    CHECK(rel_diff(rows[5].rate, 1.0) < 1e-12);
}

TEST_CASE("schlieren field") {
    Triangulation mesh = make_rect_mesh(0.0, 1.0, 0.0, 1.0, 6, 5);
    LagrangeSpace sp = build_space(mesh, 1);
    Triangulation fine = fine_submesh_aligned(sp);
    PatchTable fp = fine_dof_patches(sp, fine);
    NodalGeometry geo = build_nodal_geometry(sp, fine, fp);

    const std::vector<double> flat(sp.n_dofs, 2.5);
    for (double v : schlieren(flat, sp, geo))
        CHECK(v == 1.0);

    // Linear density: the recovered gradient is the same everywhere, so the
    // ratio to the max is 1 at every node.
    const std::vector<double> ramp = sp.interpolate([](Vec2 x) { return x.x; });
    for (double v : schlieren(ramp, sp, geo))
        CHECK(rel_diff(v, std::exp(-5.0)) < 1e-13);
    for (double v : schlieren(ramp, sp, geo, 2.0))
        CHECK(rel_diff(v, std::exp(-2.0)) < 1e-13);

    // Quadratic density: the steepest node sits at the right edge and gets
    // exactly exp(-zeta).
    const std::vector<double> quad = sp.interpolate([](Vec2 x) { return x.x * x.x; });
    const std::vector<double> sig = schlieren(quad, sp, geo);
    double smin = 1.0;
    for (double v : sig)
        smin = std::min(smin, v);
    CHECK(rel_diff(smin, std::exp(-5.0)) < 1e-13);

    Triangulation line = make_interval_mesh(0.0, 1.0, 4);
    LagrangeSpace sp1 = build_space(line, 1);
    Triangulation f1 = fine_submesh_aligned(sp1);
    PatchTable p1 = fine_dof_patches(sp1, f1);
    NodalGeometry g1 = build_nodal_geometry(sp1, f1, p1);
    CHECK_THROWS_AS(schlieren(std::vector<double>(sp1.n_dofs, 1.0), sp1, g1),
                    std::invalid_argument);
}

TEST_CASE("convergence csv round-trips at full precision") {
    std::vector<ConvergenceRow> rows = {
        {361, "rho", "l1", 0.051280000000000713, std::numeric_limits<double>::quiet_NaN()},
        {721, "rho", "l1", 3.2199999999999e-2, 0.43999999999999995},
        {1441, "u", "linf", 1.0 / 3.0, -1.25e-17},
    };
    std::ostringstream os;
    write_convergence_csv(os, rows, "self-reference against the finest run\nsecond line");
    const std::string text = os.str();
    CHECK(text.find("# self-reference") == 0);
    CHECK(text.find("dofs,var,norm,error,rate") != std::string::npos);

    std::istringstream is(text);
    const std::vector<ConvergenceRow> back = read_convergence_csv(is);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].dofs == rows[i].dofs);
        CHECK(back[i].var == rows[i].var);
        CHECK(back[i].norm == rows[i].norm);
        CHECK(back[i].error == rows[i].error); // 17 digits: bit-exact
        if (std::isnan(rows[i].rate))
            CHECK(std::isnan(back[i].rate));
        else
            CHECK(back[i].rate == rows[i].rate);
    }
}

TEST_CASE("vtu output is well formed") {
    Triangulation mesh = make_rect_mesh(0.0, 1.0, 0.0, 1.0, 3, 2);
    LagrangeSpace sp = build_space(mesh, 2);
    Triangulation fine = fine_submesh_aligned(sp);
    std::vector<double> field(sp.n_dofs);
    for (int i = 0; i < sp.n_dofs; ++i)
        field[i] = 0.5 + i;

    std::ostringstream os;
    write_vtu(os, sp, fine, {{"f", field.data()}}, {{"v", field.data(), field.data()}});
    const std::string text = os.str();
    CHECK(text.find("<VTKFile type=\"UnstructuredGrid\"") != std::string::npos);
    CHECK(text.find("NumberOfPoints=\"" + std::to_string(fine.n_vertices()) + "\"") !=
          std::string::npos);
    CHECK(text.find("NumberOfCells=\"" + std::to_string(fine.n_cells()) + "\"") !=
          std::string::npos);
    CHECK(text.find("Name=\"f\"") != std::string::npos);
    CHECK(text.find("Name=\"v\" NumberOfComponents=\"3\"") != std::string::npos);
    CHECK(text.find("0.5\n") != std::string::npos);
    // Every opened DataArray closes.
    std::size_t opens = 0, closes = 0, pos = 0;
    while ((pos = text.find("<DataArray", pos)) != std::string::npos)
        ++opens, ++pos;
    pos = 0;
    while ((pos = text.find("</DataArray>", pos)) != std::string::npos)
        ++closes, ++pos;
    CHECK(opens == closes);
    CHECK(opens == 6); // points, connectivity, offsets, types, f, v
}

TEST_CASE("nodal csv and run metadata round-trip") {
    Triangulation mesh = make_interval_mesh(0.0, 1.0, 3);
    LagrangeSpace sp = build_space(mesh, 1);
    std::vector<double> f = {0.25, -1.5, 3.75, 0.125};
    std::ostringstream os;
    write_nodal_csv(os, sp, {{"f", f.data()}});
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "x,y,f");
    int count = 0;
    std::string line;
    while (std::getline(is, line))
        ++count;
    CHECK(count == sp.n_dofs);

    RunMetadata md;
    md.problem = "orszag-tang";
    md.degree = 2;
    md.dofs = 4225;
    md.cfl = 0.3;
    md.t_final = 0.5;
    md.seed = 1234567890123ull;
    md.steps = 321;
    md.wall_seconds = 12.75;
    std::ostringstream js;
    write_run_metadata(js, md);
    std::istringstream jr(js.str());
    const RunMetadata back = read_run_metadata(jr);
    CHECK(back.problem == md.problem);
    CHECK(back.degree == md.degree);
    CHECK(back.dofs == md.dofs);
    CHECK(back.cfl == md.cfl);
    CHECK(back.t_final == md.t_final);
    CHECK(back.seed == md.seed);
    CHECK(back.steps == md.steps);
    CHECK(back.wall_seconds == md.wall_seconds);
}
