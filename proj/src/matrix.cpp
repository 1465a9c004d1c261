#include "fedflip/matrix.hpp"

#include <sstream>

#include "fedflip/errors.hpp"

namespace fedflip {

namespace {

[[noreturn]] void shape_fail(const char* op, const Matrix& a, const Matrix& b) {
    std::ostringstream msg;
    msg << op << ": incompatible shapes (" << a.rows() << "x" << a.cols() << ") and ("
        << b.rows() << "x" << b.cols() << ")";
    throw ShapeError(msg.str());
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) shape_fail("matmul", a, b);
    Matrix c(a.rows(), b.cols());
    const std::size_t n = b.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = arow[k];
            const double* brow = b.row(k);
            for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) shape_fail("matmul_at_b", a, b);
    Matrix c(a.cols(), b.cols());
    const std::size_t n = b.cols();
    for (std::size_t k = 0; k < a.rows(); ++k) {
        const double* arow = a.row(k);
        const double* brow = b.row(k);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double aki = arow[i];
            double* crow = c.row(i);
            for (std::size_t j = 0; j < n; ++j) crow[j] += aki * brow[j];
        }
    }
    return c;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) shape_fail("matmul_a_bt", a, b);
    Matrix c(a.rows(), b.rows());
    const std::size_t k = a.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* brow = b.row(j);
            double acc = 0.0;
            for (std::size_t t = 0; t < k; ++t) acc += arow[t] * brow[t];
            crow[j] = acc;
        }
    }
    return c;
}

}  // namespace fedflip
