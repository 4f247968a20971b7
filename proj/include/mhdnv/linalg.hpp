#pragma once

#include <vector>

namespace mhdnv {

// Compressed sparse row matrix with sorted column indices per row.
struct CsrMatrix {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<int> row_ptr;
    std::vector<int> cols;
    std::vector<double> vals;

    void mul(const std::vector<double>& x, std::vector<double>& y) const;
    std::vector<double> diagonal() const;
    double row_sum(int i) const;
};

// Accumulates duplicate (i, j) entries, then compresses.
class CsrBuilder {
public:
    CsrBuilder(int n_rows, int n_cols);

    void add(int i, int j, double v);
    CsrMatrix compress() const;

private:
    int n_rows_, n_cols_;
    std::vector<std::vector<std::pair<int, double>>> rows_;
};

struct CgOptions {
    double rel_tol = 1e-10;
    int max_iter = 10000;
    // Project the constant vector out of the right-hand side and iterates;
    // used for singular pure-Neumann or fully periodic operators.
    bool remove_mean = false;
    // If set, receives sqrt(r' M^{-1} r) per iteration (index 0 = initial).
    std::vector<double>* precond_residual_history = nullptr;
};

struct CgResult {
    bool converged = false;
    int iterations = 0;
    double rel_residual = 0.0;
};

// Preconditioned conjugate gradients with a diagonal preconditioner.
// `precond_diag` holds the diagonal entries themselves (inverted internally);
// pass the matrix diagonal or a lumped approximation. All reductions are
// sequential, so results are bitwise deterministic for fixed inputs.
CgResult cg_solve(const CsrMatrix& A, const std::vector<double>& b,
                  const std::vector<double>& precond_diag, std::vector<double>& x,
                  const CgOptions& opts = {});

// Preconditions with the matrix's own diagonal.
CgResult cg_solve(const CsrMatrix& A, const std::vector<double>& b, std::vector<double>& x,
                  const CgOptions& opts = {});

} // namespace mhdnv
