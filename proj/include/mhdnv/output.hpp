#pragma once

#include "mhdnv/bench.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace mhdnv {

// Convergence table CSV with header `dofs,var,norm,error,rate`, values at 17
// significant digits (round-trip exact). Optional leading comment lines are
// written with a '#' prefix and skipped by the reader. Undefined rates are
// written as nan.
void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows,
                           const std::string& comment = "");
std::vector<ConvergenceRow> read_convergence_csv(std::istream& is);

// Nodal fields for the VTU writer; `values` holds one double per dof
// (component pointers for vectors). Data is replicated onto every geometric
// node, so periodic copies get the shared value.
struct NodalScalar {
    std::string name;
    const double* values = nullptr;
};
struct NodalVector {
    std::string name;
    const double* x = nullptr;
    const double* y = nullptr;
};

// XML unstructured-grid file (ascii float64) on the fine nodal submesh.
void write_vtu(std::ostream& os, const LagrangeSpace& space, const Triangulation& fine,
               const std::vector<NodalScalar>& scalars, const std::vector<NodalVector>& vectors);

// Conserved fields plus derived velocity and pressure; the viscosity field
// is included when given, the schlieren field on 2D meshes.
void write_mhd_vtu(std::ostream& os, const MhdSystem& sys, const MhdField& u,
                   const std::vector<double>* eps = nullptr);

// Nodal values as CSV: x,y then one column per field.
void write_nodal_csv(std::ostream& os, const LagrangeSpace& space,
                     const std::vector<NodalScalar>& scalars);

struct RunMetadata {
    std::string problem;
    int degree = 1;
    int dofs = 0;
    double cfl = 0.0;
    double t_final = 0.0;
    uint64_t seed = 0;
    int steps = 0;
    double wall_seconds = 0.0;
};
void write_run_metadata(std::ostream& os, const RunMetadata& md);
RunMetadata read_run_metadata(std::istream& is);

} // namespace mhdnv
