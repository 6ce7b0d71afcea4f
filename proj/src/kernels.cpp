#include "sepgl/kernels.hpp"

#include <algorithm>

#include <omp.h>

namespace sepgl::kernels {

namespace {

using Eigen::Index;

// Row block [r0, r1) of out = X * b, column-major sweep.
void gemv_rows(const Eigen::MatrixXd& X, const Eigen::VectorXd& b, Eigen::VectorXd& out,
               Index r0, Index r1)
{
    double* y = out.data();
    for (Index i = r0; i < r1; ++i) {
        y[i] = 0.0;
    }
    for (Index j = 0; j < X.cols(); ++j) {
        const double bj = b[j];
        const double* col = X.data() + j * X.rows();
        for (Index i = r0; i < r1; ++i) {
            y[i] += col[i] * bj;
        }
    }
}

double column_dot(const Eigen::MatrixXd& X, Index j, const double* r)
{
    const double* col = X.data() + j * X.rows();
    double acc = 0.0;
    for (Index i = 0; i < X.rows(); ++i) {
        acc += col[i] * r[i];
    }
    return acc;
}

// Row i of out = Z * L^T: out(i, a) = sum_{k <= a} Z(i, k) L(a, k).
void mul_lower_t_rows(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& L, Eigen::MatrixXd& out,
                      Index r0, Index r1)
{
    const Index p = L.rows();
    for (Index a = 0; a < p; ++a) {
        for (Index i = r0; i < r1; ++i) {
            out(i, a) = 0.0;
        }
        for (Index k = 0; k <= a; ++k) {
            const double lak = L(a, k);
            const double* zcol = Z.data() + k * Z.rows();
            double* ocol = out.data() + a * out.rows();
            for (Index i = r0; i < r1; ++i) {
                ocol[i] += zcol[i] * lak;
            }
        }
    }
}

constexpr Index kRowBlock = 256;

} // namespace

namespace serial {

void gemv(const Eigen::MatrixXd& X, const Eigen::VectorXd& b, Eigen::VectorXd& out)
{
    out.resize(X.rows());
    gemv_rows(X, b, out, 0, X.rows());
}

void gemv_t(const Eigen::MatrixXd& X, const Eigen::VectorXd& r, Eigen::VectorXd& out)
{
    out.resize(X.cols());
    for (Index j = 0; j < X.cols(); ++j) {
        out[j] = column_dot(X, j, r.data());
    }
}

void mul_lower_t(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& L, Eigen::MatrixXd& out)
{
    out.resize(Z.rows(), L.rows());
    mul_lower_t_rows(Z, L, out, 0, Z.rows());
}

} // namespace serial

namespace parallel {

void gemv(const Eigen::MatrixXd& X, const Eigen::VectorXd& b, Eigen::VectorXd& out)
{
    out.resize(X.rows());
    const Index n = X.rows();
    const Index blocks = (n + kRowBlock - 1) / kRowBlock;
#pragma omp parallel for schedule(static)
    for (Index blk = 0; blk < blocks; ++blk) {
        const Index r0 = blk * kRowBlock;
        gemv_rows(X, b, out, r0, std::min(n, r0 + kRowBlock));
    }
}

void gemv_t(const Eigen::MatrixXd& X, const Eigen::VectorXd& r, Eigen::VectorXd& out)
{
    out.resize(X.cols());
    const double* rp = r.data();
#pragma omp parallel for schedule(static)
    for (Index j = 0; j < X.cols(); ++j) {
        out[j] = column_dot(X, j, rp);
    }
}

void mul_lower_t(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& L, Eigen::MatrixXd& out)
{
    out.resize(Z.rows(), L.rows());
    const Index n = Z.rows();
    const Index blocks = (n + kRowBlock - 1) / kRowBlock;
#pragma omp parallel for schedule(static)
    for (Index blk = 0; blk < blocks; ++blk) {
        const Index r0 = blk * kRowBlock;
        mul_lower_t_rows(Z, L, out, r0, std::min(n, r0 + kRowBlock));
    }
}

} // namespace parallel

void gemv(const Eigen::MatrixXd& X, const Eigen::VectorXd& b, Eigen::VectorXd& out)
{
    if (X.size() < kParallelThreshold || omp_in_parallel()) {
        serial::gemv(X, b, out);
    } else {
        parallel::gemv(X, b, out);
    }
}

void gemv_t(const Eigen::MatrixXd& X, const Eigen::VectorXd& r, Eigen::VectorXd& out)
{
    if (X.size() < kParallelThreshold || omp_in_parallel()) {
        serial::gemv_t(X, r, out);
    } else {
        parallel::gemv_t(X, r, out);
    }
}

void mul_lower_t(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& L, Eigen::MatrixXd& out)
{
    if (Z.size() < kParallelThreshold || omp_in_parallel()) {
        serial::mul_lower_t(Z, L, out);
    } else {
        parallel::mul_lower_t(Z, L, out);
    }
}

void set_threads(int threads)
{
    if (threads > 0) {
        omp_set_num_threads(threads);
    }
}

int max_threads()
{
    return omp_get_max_threads();
}

} // namespace sepgl::kernels
