#include "mhdnv/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mhdnv {

void CsrMatrix::mul(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(n_rows, 0.0);
    for (int i = 0; i < n_rows; ++i) {
        double s = 0.0;
        for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
            s += vals[p] * x[cols[p]];
        y[i] = s;
    }
}

std::vector<double> CsrMatrix::diagonal() const {
    std::vector<double> d(n_rows, 0.0);
    for (int i = 0; i < n_rows; ++i)
        for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
            if (cols[p] == i)
                d[i] = vals[p];
    return d;
}

double CsrMatrix::row_sum(int i) const {
    double s = 0.0;
    for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
        s += vals[p];
    return s;
}

CsrBuilder::CsrBuilder(int n_rows, int n_cols) : n_rows_(n_rows), n_cols_(n_cols) {
    rows_.resize(n_rows);
}

void CsrBuilder::add(int i, int j, double v) {
    rows_[i].push_back({j, v});
}

CsrMatrix CsrBuilder::compress() const {
    CsrMatrix A;
    A.n_rows = n_rows_;
    A.n_cols = n_cols_;
    A.row_ptr.assign(n_rows_ + 1, 0);
    std::vector<std::pair<int, double>> row;
    for (int i = 0; i < n_rows_; ++i) {
        row.assign(rows_[i].begin(), rows_[i].end());
        std::sort(row.begin(), row.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t p = 0; p < row.size();) {
            std::size_t q = p;
            double s = 0.0;
            while (q < row.size() && row[q].first == row[p].first)
                s += row[q++].second;
            A.cols.push_back(row[p].first);
            A.vals.push_back(s);
            p = q;
        }
        A.row_ptr[i + 1] = int(A.cols.size());
    }
    return A;
}

namespace {

double dot_seq(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

void remove_mean_of(std::vector<double>& v) {
    double m = 0.0;
    for (double x : v)
        m += x;
    m /= double(v.size());
    for (double& x : v)
        x -= m;
}

} // namespace

CgResult cg_solve(const CsrMatrix& A, const std::vector<double>& b_in,
                  const std::vector<double>& precond_diag, std::vector<double>& x,
                  const CgOptions& opts) {
    const int n = A.n_rows;
    if (int(b_in.size()) != n || int(precond_diag.size()) != n)
        throw std::invalid_argument("cg_solve: size mismatch");
    if (int(x.size()) != n)
        x.assign(n, 0.0);

    std::vector<double> b = b_in;
    if (opts.remove_mean) {
        remove_mean_of(b);
        remove_mean_of(x);
    }

    if (dot_seq(b, b) == 0.0) {
        // The exact solution (in the projected space when remove_mean is set).
        x.assign(n, 0.0);
        CgResult res;
        res.converged = true;
        return res;
    }

    std::vector<double> inv_d(n);
    for (int i = 0; i < n; ++i) {
        if (!(precond_diag[i] != 0.0))
            throw std::invalid_argument("cg_solve: zero preconditioner diagonal");
        inv_d[i] = 1.0 / precond_diag[i];
    }

    std::vector<double> r(n), z(n), p(n), Ap(n);
    A.mul(x, Ap);
    for (int i = 0; i < n; ++i)
        r[i] = b[i] - Ap[i];
    if (opts.remove_mean)
        remove_mean_of(r);

    const double b_norm = std::sqrt(dot_seq(b, b));
    const double stop = opts.rel_tol * (b_norm > 0.0 ? b_norm : 1.0);

    CgResult res;
    double r_norm = std::sqrt(dot_seq(r, r));
    if (r_norm <= stop) {
        res.converged = true;
        res.rel_residual = b_norm > 0.0 ? r_norm / b_norm : r_norm;
        return res;
    }

    for (int i = 0; i < n; ++i)
        z[i] = inv_d[i] * r[i];
    p = z;
    double rz = dot_seq(r, z);
    if (opts.precond_residual_history) {
        opts.precond_residual_history->clear();
        opts.precond_residual_history->push_back(std::sqrt(rz));
    }

    for (int it = 1; it <= opts.max_iter; ++it) {
        A.mul(p, Ap);
        const double pAp = dot_seq(p, Ap);
        if (!(pAp > 0.0))
            break; // not SPD on the current subspace
        const double alpha = rz / pAp;
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        if (opts.remove_mean) {
            remove_mean_of(r);
            remove_mean_of(x);
        }
        res.iterations = it;
        r_norm = std::sqrt(dot_seq(r, r));
        if (r_norm <= stop) {
            res.converged = true;
            break;
        }
        for (int i = 0; i < n; ++i)
            z[i] = inv_d[i] * r[i];
        const double rz_new = dot_seq(r, z);
        if (opts.precond_residual_history)
            opts.precond_residual_history->push_back(std::sqrt(rz_new));
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i)
            p[i] = z[i] + beta * p[i];
    }
    res.rel_residual = b_norm > 0.0 ? r_norm / b_norm : r_norm;
    return res;
}

CgResult cg_solve(const CsrMatrix& A, const std::vector<double>& b, std::vector<double>& x,
                  const CgOptions& opts) {
    return cg_solve(A, b, A.diagonal(), x, opts);
}

} // namespace mhdnv
