#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace iqo {

/// y = A x for a real symmetric operator of fixed dimension.
using SymmetricOperator = std::function<void(std::span<const double> x, std::span<double> y)>;

struct LanczosOptions {
    std::size_t max_iterations = 300; ///< Krylov dimension cap (clamped to the operator dimension)
    double tolerance = 1e-10;         ///< residual bound relative to max(1, |theta|)
    std::uint64_t seed = 12345;       ///< start vector
    bool want_vectors = false;
};

struct LanczosResult {
    Eigen::VectorXd values;  ///< k lowest Ritz values, ascending
    Eigen::MatrixXd vectors; ///< dim x k, empty unless requested
    std::size_t iterations = 0;
    bool converged = false;
};

/// Lowest `k` eigenpairs by Lanczos with full reorthogonalization. A fresh
/// random direction is injected on breakdown, so exact multiplicities are
/// only resolved up to roundoff.
LanczosResult lanczos_lowest(const SymmetricOperator& op, std::size_t dim, std::size_t k,
                             const LanczosOptions& options = {});

} // namespace iqo
