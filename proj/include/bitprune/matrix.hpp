#ifndef BITPRUNE_MATRIX_HPP
#define BITPRUNE_MATRIX_HPP

#include <cstdint>
#include <vector>

namespace bitprune {

// Dense row-major double matrix. Deliberately minimal: the kernels in this
// library index raw rows, they do not need expression templates.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), v_(static_cast<size_t>(rows) * cols, fill) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    size_t size() const { return v_.size(); }

    double& operator()(int i, int j) { return v_[static_cast<size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return v_[static_cast<size_t>(i) * cols_ + j]; }

    double* row(int i) { return v_.data() + static_cast<size_t>(i) * cols_; }
    const double* row(int i) const { return v_.data() + static_cast<size_t>(i) * cols_; }

    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> v_;
};

using Vector = std::vector<double>;

// 0/1 element mask with matrix shape.
class Mask {
public:
    Mask() = default;
    Mask(int rows, int cols, uint8_t fill = 0)
        : rows_(rows), cols_(cols), v_(static_cast<size_t>(rows) * cols, fill) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    uint8_t& operator()(int i, int j) { return v_[static_cast<size_t>(i) * cols_ + j]; }
    uint8_t operator()(int i, int j) const { return v_[static_cast<size_t>(i) * cols_ + j]; }

    const uint8_t* data() const { return v_.data(); }

    size_t count() const {
        size_t c = 0;
        for (uint8_t b : v_) c += b;
        return c;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<uint8_t> v_;
};

// y = A * x for symmetric or general square A; sizes must agree.
void matvec(const Matrix& a, const double* x, double* y);

// In-place lower Cholesky of an SPD matrix. Returns false when a pivot
// drops below tol (matrix not positive definite to working precision).
bool cholesky(Matrix& a, double tol = 0.0);

// Inverse of an SPD matrix via Cholesky. Throws NumericError on breakdown.
Matrix spd_inverse(const Matrix& a);

bool all_finite(const Matrix& a);

} // namespace bitprune

#endif
