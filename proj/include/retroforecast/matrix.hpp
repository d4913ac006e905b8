// Dense row-major matrix of doubles with the handful of kernels the
// training and inference paths actually need. Deliberately not a general
// linear-algebra layer.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace rf {

class Matrix {
public:
    Matrix() = default;
    Matrix(size_t rows, size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), d_(rows * cols, fill) {}

    static Matrix row_vector(const std::vector<double>& v) {
        Matrix m(1, v.size());
        m.d_ = v;
        return m;
    }

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    size_t size() const { return d_.size(); }
    bool empty() const { return d_.empty(); }

    double& operator()(size_t i, size_t j) { return d_[i * cols_ + j]; }
    double operator()(size_t i, size_t j) const { return d_[i * cols_ + j]; }

    double* data() { return d_.data(); }
    const double* data() const { return d_.data(); }
    double* row(size_t i) { return d_.data() + i * cols_; }
    const double* row(size_t i) const { return d_.data() + i * cols_; }

    std::vector<double>& raw() { return d_; }
    const std::vector<double>& raw() const { return d_; }

    void fill(double v) { std::fill(d_.begin(), d_.end(), v); }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    bool all_finite() const {
        for (double v : d_)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    size_t rows_ = 0, cols_ = 0;
    std::vector<double> d_;
};

inline void require_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(what) + ": shape mismatch " +
                                    std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                    " vs " + std::to_string(b.rows()) + "x" +
                                    std::to_string(b.cols()));
}

// C += A * B
inline void matmul_nn_acc(const Matrix& a, const Matrix& b, Matrix& c) {
    if (a.cols() != b.rows() || c.rows() != a.rows() || c.cols() != b.cols())
        throw std::invalid_argument("matmul_nn: incompatible shapes");
    const size_t n = a.rows(), k = a.cols(), m = b.cols();
    for (size_t i = 0; i < n; ++i) {
        double* ci = c.row(i);
        const double* ai = a.row(i);
        for (size_t p = 0; p < k; ++p) {
            const double av = ai[p];
            const double* bp = b.row(p);
            for (size_t j = 0; j < m; ++j) ci[j] += av * bp[j];
        }
    }
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols());
    matmul_nn_acc(a, b, c);
    return c;
}

// C += A^T * B   (A is n x k, B is n x m, C is k x m)
inline void matmul_tn_acc(const Matrix& a, const Matrix& b, Matrix& c) {
    if (a.rows() != b.rows() || c.rows() != a.cols() || c.cols() != b.cols())
        throw std::invalid_argument("matmul_tn: incompatible shapes");
    const size_t n = a.rows(), k = a.cols(), m = b.cols();
    for (size_t i = 0; i < n; ++i) {
        const double* ai = a.row(i);
        const double* bi = b.row(i);
        for (size_t p = 0; p < k; ++p) {
            const double av = ai[p];
            double* cp = c.row(p);
            for (size_t j = 0; j < m; ++j) cp[j] += av * bi[j];
        }
    }
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (size_t i = 0; i < a.rows(); ++i)
        for (size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

// C += A * B^T   (A is n x k, B is m x k, C is n x m), via explicit transpose.
inline void matmul_nt_acc(const Matrix& a, const Matrix& b, Matrix& c) {
    matmul_nn_acc(a, transpose(b), c);
}

inline double squared_norm(const Matrix& m) {
    double s = 0.0;
    for (double v : m.raw()) s += v * v;
    return s;
}

}  // namespace rf
