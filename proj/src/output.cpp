#include "mhdnv/output.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mhdnv {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows,
                           const std::string& comment) {
    if (!comment.empty()) {
        std::istringstream lines(comment);
        std::string line;
        while (std::getline(lines, line))
            os << "# " << line << "\n";
    }
    os << "dofs,var,norm,error,rate\n";
    for (const ConvergenceRow& r : rows)
        os << r.dofs << ',' << r.var << ',' << r.norm << ',' << fmt17(r.error) << ','
           << fmt17(r.rate) << "\n";
}

std::vector<ConvergenceRow> read_convergence_csv(std::istream& is) {
    std::vector<ConvergenceRow> rows;
    std::string line;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        if (!header_seen) {
            if (line != "dofs,var,norm,error,rate")
                throw std::runtime_error("convergence csv: unexpected header: " + line);
            header_seen = true;
            continue;
        }
        const std::vector<std::string> f = split_csv(line);
        if (f.size() != 5)
            throw std::runtime_error("convergence csv: bad row: " + line);
        ConvergenceRow r;
        r.dofs = std::stoi(f[0]);
        r.var = f[1];
        r.norm = f[2];
        r.error = std::strtod(f[3].c_str(), nullptr);
        r.rate = std::strtod(f[4].c_str(), nullptr);
        rows.push_back(r);
    }
    return rows;
}

void write_vtu(std::ostream& os, const LagrangeSpace& space, const Triangulation& fine,
               const std::vector<NodalScalar>& scalars, const std::vector<NodalVector>& vectors) {
    const int np = fine.n_vertices();
    const int nc = fine.n_cells();
    const int npc = fine.dim + 1;

    os << "<?xml version=\"1.0\"?>\n"
       << "<VTKFile type=\"UnstructuredGrid\" version=\"0.1\" byte_order=\"LittleEndian\">\n"
       << "<UnstructuredGrid>\n"
       << "<Piece NumberOfPoints=\"" << np << "\" NumberOfCells=\"" << nc << "\">\n";

    os << "<Points>\n<DataArray type=\"Float64\" NumberOfComponents=\"3\" format=\"ascii\">\n";
    for (int i = 0; i < np; ++i)
        os << fmt17(fine.vertices[i].x) << ' ' << fmt17(fine.vertices[i].y) << " 0\n";
    os << "</DataArray>\n</Points>\n";

    os << "<Cells>\n<DataArray type=\"Int32\" Name=\"connectivity\" format=\"ascii\">\n";
    for (int c = 0; c < nc; ++c) {
        const int* v = fine.cell(c);
        for (int j = 0; j < npc; ++j)
            os << v[j] << (j + 1 == npc ? '\n' : ' ');
    }
    os << "</DataArray>\n<DataArray type=\"Int32\" Name=\"offsets\" format=\"ascii\">\n";
    for (int c = 0; c < nc; ++c)
        os << (c + 1) * npc << "\n";
    os << "</DataArray>\n<DataArray type=\"UInt8\" Name=\"types\" format=\"ascii\">\n";
    for (int c = 0; c < nc; ++c)
        os << (fine.dim == 1 ? 3 : 5) << "\n"; // VTK line / triangle
    os << "</DataArray>\n</Cells>\n";

    os << "<PointData>\n";
    for (const NodalScalar& f : scalars) {
        os << "<DataArray type=\"Float64\" Name=\"" << f.name << "\" format=\"ascii\">\n";
        for (int i = 0; i < np; ++i)
            os << fmt17(f.values[space.node_dof[i]]) << "\n";
        os << "</DataArray>\n";
    }
    for (const NodalVector& f : vectors) {
        os << "<DataArray type=\"Float64\" Name=\"" << f.name
           << "\" NumberOfComponents=\"3\" format=\"ascii\">\n";
        for (int i = 0; i < np; ++i) {
            const int d = space.node_dof[i];
            os << fmt17(f.x[d]) << ' ' << fmt17(f.y[d]) << " 0\n";
        }
        os << "</DataArray>\n";
    }
    os << "</PointData>\n</Piece>\n</UnstructuredGrid>\n</VTKFile>\n";
}

void write_mhd_vtu(std::ostream& os, const MhdSystem& sys, const MhdField& u,
                   const std::vector<double>* eps) {
    const LagrangeSpace& space = sys.space();
    const int n = space.n_dofs;
    const double gm1 = sys.gamma() - 1.0;

    // Derived nodal fields, computed without validity checks so that partial
    // or failed runs can still be inspected.
    std::vector<double> ux(n), uy(n), p(n);
    for (int i = 0; i < n; ++i) {
        const MhdState s = u.state(i);
        ux[i] = s.m.x / s.rho;
        uy[i] = s.m.y / s.rho;
        p[i] = gm1 * (s.E - 0.5 * dot(s.m, s.m) / s.rho - 0.5 * dot(s.B, s.B));
    }

    std::vector<NodalScalar> scalars = {{"rho", u.comp(comp_rho)},
                                        {"E", u.comp(comp_energy)},
                                        {"p", p.data()}};
    std::vector<double> sigma;
    if (space.dim == 2) {
        const std::vector<double> rho(u.comp(comp_rho), u.comp(comp_rho) + n);
        sigma = schlieren(rho, space, sys.geometry());
        scalars.push_back({"schlieren", sigma.data()});
    }
    if (eps)
        scalars.push_back({"eps", eps->data()});

    const std::vector<NodalVector> vectors = {
        {"u", ux.data(), uy.data()},
        {"m", u.comp(comp_mx), u.comp(comp_my)},
        {"B", u.comp(comp_bx), u.comp(comp_by)},
    };
    write_vtu(os, space, sys.fine(), scalars, vectors);
}

void write_nodal_csv(std::ostream& os, const LagrangeSpace& space,
                     const std::vector<NodalScalar>& scalars) {
    os << "x,y";
    for (const NodalScalar& f : scalars)
        os << ',' << f.name;
    os << "\n";
    for (int i = 0; i < space.n_dofs; ++i) {
        os << fmt17(space.dof_pos[i].x) << ',' << fmt17(space.dof_pos[i].y);
        for (const NodalScalar& f : scalars)
            os << ',' << fmt17(f.values[i]);
        os << "\n";
    }
}

void write_run_metadata(std::ostream& os, const RunMetadata& md) {
    nlohmann::json j;
    j["problem"] = md.problem;
    j["degree"] = md.degree;
    j["dofs"] = md.dofs;
    j["cfl"] = md.cfl;
    j["t_final"] = md.t_final;
    j["seed"] = md.seed;
    j["steps"] = md.steps;
    j["wall_seconds"] = md.wall_seconds;
    os << j.dump(2) << "\n";
}

RunMetadata read_run_metadata(std::istream& is) {
    const nlohmann::json j = nlohmann::json::parse(is);
    RunMetadata md;
    md.problem = j.at("problem").get<std::string>();
    md.degree = j.at("degree").get<int>();
    md.dofs = j.at("dofs").get<int>();
    md.cfl = j.at("cfl").get<double>();
    md.t_final = j.at("t_final").get<double>();
    md.seed = j.at("seed").get<uint64_t>();
    md.steps = j.at("steps").get<int>();
    md.wall_seconds = j.at("wall_seconds").get<double>();
    return md;
}

} // namespace mhdnv
