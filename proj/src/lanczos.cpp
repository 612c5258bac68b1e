#include "iqo/lanczos.hpp"

#include <algorithm>
#include <cmath>

#include "iqo/errors.hpp"
#include "iqo/rng.hpp"

namespace iqo {

namespace {

// Orthogonalize against the first m basis columns (two passes) and return the norm left.
double orthogonalize(Eigen::Ref<Eigen::VectorXd> w, const Eigen::MatrixXd& basis, std::size_t m) {
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j < m; ++j) w -= basis.col(j).dot(w) * basis.col(j);
    }
    return w.norm();
}

} // namespace

LanczosResult lanczos_lowest(const SymmetricOperator& op, std::size_t dim, std::size_t k,
                             const LanczosOptions& options) {
    if (dim == 0 || k == 0) throw InvalidArgument("lanczos_lowest: empty problem");
    if (k > dim) throw InvalidArgument("lanczos_lowest: k exceeds dimension");
    const std::size_t max_m = std::clamp<std::size_t>(options.max_iterations, std::min(dim, k + 1), dim);

    Rng rng(options.seed);
    Eigen::MatrixXd basis(dim, max_m);
    std::vector<double> alpha;
    std::vector<double> beta; // beta[j] couples basis j and j+1
    alpha.reserve(max_m);
    beta.reserve(max_m);

    Eigen::VectorXd q(dim);
    for (std::size_t i = 0; i < dim; ++i) q[i] = rng.normal();
    q.normalize();
    basis.col(0) = q;

    Eigen::VectorXd w(dim);
    LanczosResult result;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri_solver;

    for (std::size_t m = 0; m < max_m; ++m) {
        op(std::span<const double>(basis.col(m).data(), dim), std::span<double>(w.data(), dim));
        const double a = basis.col(m).dot(w);
        alpha.push_back(a);
        double b = orthogonalize(w, basis, m + 1);

        const std::size_t size = m + 1;
        const bool last = size == max_m;
        const bool breakdown = b < 1e-12 * std::max(1.0, std::abs(a));
        const bool check = size >= k && (size % 10 == 0 || last || breakdown);

        if (check) {
            Eigen::MatrixXd t = Eigen::MatrixXd::Zero(size, size);
            for (std::size_t j = 0; j < size; ++j) {
                t(j, j) = alpha[j];
                if (j + 1 < size) t(j, j + 1) = t(j + 1, j) = beta[j];
            }
            tri_solver.compute(t);
            const auto& theta = tri_solver.eigenvalues();
            const auto& y = tri_solver.eigenvectors();
            bool ok = true;
            // On breakdown the Krylov space is invariant and residuals vanish.
            const double coupling = breakdown ? 0.0 : b;
            for (std::size_t i = 0; i < k; ++i) {
                const double resid = std::abs(coupling * y(size - 1, i));
                if (resid > options.tolerance * std::max(1.0, std::abs(theta[i]))) ok = false;
            }
            if (ok || last) {
                result.values = theta.head(k);
                result.iterations = size;
                result.converged = ok;
                if (options.want_vectors) result.vectors = basis.leftCols(size) * y.leftCols(k);
                return result;
            }
        }
        if (last) break;

        if (breakdown) {
            // Restart in the orthogonal complement with a random direction.
            for (std::size_t i = 0; i < dim; ++i) w[i] = rng.normal();
            b = orthogonalize(w, basis, m + 1);
            if (b < 1e-12) break;
            beta.push_back(0.0);
        } else {
            beta.push_back(b);
        }
        basis.col(m + 1) = w / b;
    }
    return result;
}

} // namespace iqo
