#pragma once

#include <Eigen/Core>

namespace sepgl::kernels {

// Dense kernels used on the solver hot path. Each kernel exists in a serial
// reference form and an OpenMP form. Both accumulate every output entry in
// the same order, so their results are bitwise identical regardless of the
// thread count.

namespace serial {

/// out = X * b
void gemv(const Eigen::MatrixXd& X, const Eigen::VectorXd& b, Eigen::VectorXd& out);
/// out = X^T * r
void gemv_t(const Eigen::MatrixXd& X, const Eigen::VectorXd& r, Eigen::VectorXd& out);
/// out = Z * L^T for lower-triangular L (rows of Z are independent draws).
void mul_lower_t(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& L, Eigen::MatrixXd& out);

} // namespace serial

namespace parallel {

void gemv(const Eigen::MatrixXd& X, const Eigen::VectorXd& b, Eigen::VectorXd& out);
void gemv_t(const Eigen::MatrixXd& X, const Eigen::VectorXd& r, Eigen::VectorXd& out);
void mul_lower_t(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& L, Eigen::MatrixXd& out);

} // namespace parallel

/// Below this many matrix entries the dispatching kernels stay serial.
inline constexpr long kParallelThreshold = 1L << 16;

// Dispatch to the parallel form for large inputs. Inside an enclosing
// parallel region (e.g. replicate-level parallelism) OpenMP runs the inner
// team with one thread.
void gemv(const Eigen::MatrixXd& X, const Eigen::VectorXd& b, Eigen::VectorXd& out);
void gemv_t(const Eigen::MatrixXd& X, const Eigen::VectorXd& r, Eigen::VectorXd& out);
void mul_lower_t(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& L, Eigen::MatrixXd& out);

/// Thread count for kernels and replicate loops (0 keeps the OpenMP default).
void set_threads(int threads);
int max_threads();

} // namespace sepgl::kernels
