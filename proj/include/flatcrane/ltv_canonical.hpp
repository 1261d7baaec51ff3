#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "flatcrane/errors.hpp"

namespace flatcrane {

/// Singular-value ratio below which a matrix is declared rank deficient.
inline constexpr double kRankRatioTol = 1e-10;

/// One sample (A_k, b_k) of a linear time-variant single-input system
/// x_{k+1} = A_k x_k + b_k u_k.
struct LtvPair {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
};

/// Time-variant system data on a contiguous index window [k_min, k_max].
/// Pairs are materialized once; requests outside the window throw WindowError
/// rather than extrapolate.
class LtvProvider {
public:
    LtvProvider(int n, long k_min, std::vector<LtvPair> pairs)
        : n_(n), k_min_(k_min), pairs_(std::move(pairs)) {
        for (const auto& p : pairs_) {
            if (p.A.rows() != n_ || p.A.cols() != n_ || p.b.size() != n_) {
                throw Error("LtvProvider: pair dimensions do not match n");
            }
            if (!p.A.allFinite() || !p.b.allFinite()) {
                throw Error("LtvProvider: non-finite system matrices");
            }
        }
    }

    static LtvProvider from_function(int n, long k_min, long k_max,
                                     const std::function<LtvPair(long)>& fn) {
        std::vector<LtvPair> pairs;
        pairs.reserve(static_cast<std::size_t>(k_max - k_min + 1));
        for (long k = k_min; k <= k_max; ++k) {
            pairs.push_back(fn(k));
        }
        return LtvProvider(n, k_min, std::move(pairs));
    }

    /// Constant (A, b) on the given window.
    static LtvProvider constant(long k_min, long k_max, const Eigen::MatrixXd& A,
                                const Eigen::VectorXd& b) {
        return from_function(static_cast<int>(A.rows()), k_min, k_max,
                             [&](long) { return LtvPair{A, b}; });
    }

    int dim() const { return n_; }
    long k_min() const { return k_min_; }
    long k_max() const { return k_min_ + static_cast<long>(pairs_.size()) - 1; }

    const LtvPair& at(long k) const {
        if (k < k_min() || k > k_max()) {
            throw WindowError("LtvProvider: index " + std::to_string(k) +
                                  " outside window [" + std::to_string(k_min()) + ", " +
                                  std::to_string(k_max()) + "]",
                              k);
        }
        return pairs_[static_cast<std::size_t>(k - k_min_)];
    }

private:
    int n_;
    long k_min_;
    std::vector<LtvPair> pairs_;
};

/// Canonical covector, transformation and companion coefficients at index k.
struct CanonicalData {
    long k = 0;
    Eigen::VectorXd c;    ///< canonical covector c_k
    Eigen::MatrixXd T;    ///< T_k
    Eigen::MatrixXd Tinv; ///< T_k^{-1}; its first row is c_k^T
    Eigen::VectorXd a;    ///< companion coefficients a_{0,k} .. a_{n-1,k}
};

struct RegularityEntry {
    long k;
    double sigma_min;
    double sigma_max;
    bool full_rank;
};

struct RegularityReport {
    std::vector<RegularityEntry> entries;
    std::vector<long> rank_failures;
    bool all_full_rank = true;
    double min_sigma = std::numeric_limits<double>::infinity();
    double min_ratio = std::numeric_limits<double>::infinity();
};

// The index windows stack up to four orders of T_s inside the reachability
// matrices, so the downstream solves are inherently ill-conditioned at fast
// sampling. The covector/transform chain therefore runs in extended
// precision and only the results are rounded to double; every exposed
// quantity is then an accurately evaluated function of the double (A_k, b_k)
// samples.
namespace detail {

using ScalarL = long double;
using MatL = Eigen::Matrix<ScalarL, Eigen::Dynamic, Eigen::Dynamic>;
using VecL = Eigen::Matrix<ScalarL, Eigen::Dynamic, 1>;

inline std::pair<double, double> extreme_singular_values(const Eigen::MatrixXd& M) {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    return {sv[sv.size() - 1], sv[0]};
}

inline void guard_regular(const Eigen::MatrixXd& M, const char* what) {
    const auto [smin, smax] = extreme_singular_values(M);
    if (!(smax > 0.0) || smin < kRankRatioTol * smax) {
        throw SingularMatrixError(std::string(what) + " rank deficient",
                                  smax > 0.0 ? smax / smin
                                             : std::numeric_limits<double>::infinity());
    }
}

/// M_k = [b_{k-1}, A_{k-1} b_{k-2}, ..., A_{k-1} ... A_{k-n+1} b_{k-n}].
inline MatL reachability_l(const LtvProvider& p, long k) {
    const int n = p.dim();
    MatL M(n, n);
    M.col(0) = p.at(k - 1).b.cast<ScalarL>();
    MatL prod = MatL::Identity(n, n);
    for (int j = 1; j < n; ++j) {
        prod = prod * p.at(k - j).A.cast<ScalarL>();
        M.col(j) = prod * p.at(k - j - 1).b.cast<ScalarL>();
    }
    return M;
}

/// Solves c^T M = e_n^T by LU with partial pivoting; the rank guard uses the
/// double singular values, the solve runs in extended precision.
inline VecL covector_l(const MatL& M, const char* what = "reachability matrix") {
    guard_regular(M.cast<double>(), what);
    const long n = M.rows();
    VecL en = VecL::Zero(n);
    en[n - 1] = 1.0L;
    const Eigen::PartialPivLU<MatL> lu(M.transpose());
    const VecL c = lu.solve(en);
    const double residual = static_cast<double>((M.transpose() * c - en).norm());
    const double scale = static_cast<double>(c.norm() * M.norm());
    if (residual > 1e-10 * std::max(1.0, scale)) {
        const auto [smin, smax] = extreme_singular_values(M.cast<double>());
        throw SingularMatrixError("canonical covector solve failed the residual check",
                                  smax / smin);
    }
    return c;
}

/// Rows of T_k^{-1}: c_k^T, c_{k+1}^T A_k, ..., c_{k+n-1}^T A_{k+n-2} ... A_k.
inline MatL tinv_l(const LtvProvider& p, long k) {
    const int n = p.dim();
    MatL Tinv(n, n);
    MatL prod = MatL::Identity(n, n);
    for (int i = 0; i < n; ++i) {
        if (i > 0) {
            prod = p.at(k + i - 1).A.cast<ScalarL>() * prod;
        }
        Tinv.row(i) = covector_l(reachability_l(p, k + i)).transpose() * prod;
    }
    return Tinv;
}

struct CanonicalL {
    MatL Tinv;
    MatL T;
    VecL a;
};

inline CanonicalL canonical_l(const LtvProvider& p, long k) {
    CanonicalL d;
    d.Tinv = tinv_l(p, k);
    guard_regular(d.Tinv.cast<double>(), "canonical transformation");
    d.T = Eigen::PartialPivLU<MatL>(d.Tinv).inverse();
    const MatL Abar = tinv_l(p, k + 1) * p.at(k).A.cast<ScalarL>() * d.T;
    d.a = -Abar.row(p.dim() - 1).transpose();
    return d;
}

} // namespace detail

/// Reachability matrix
///   M_k = [ b_{k-1}, A_{k-1} b_{k-2}, ..., A_{k-1} ... A_{k-n+1} b_{k-n} ];
/// reads provider indices [k-n, k-1]. For a time-invariant system this is the
/// controllability matrix [b, A b, ..., A^{n-1} b].
inline Eigen::MatrixXd reachability_matrix(const LtvProvider& p, long k) {
    return detail::reachability_l(p, k).cast<double>();
}

/// Solves c_k^T M_k = e_n^T. Throws SingularMatrixError when M_k is rank
/// deficient (singular-value ratio below kRankRatioTol) or the residual
/// exceeds 1e-10 ||c|| ||M||.
inline Eigen::VectorXd canonical_covector(const Eigen::MatrixXd& Mk) {
    return detail::covector_l(Mk.cast<detail::ScalarL>()).cast<double>();
}

/// As above, straight from the provider at index k.
inline Eigen::VectorXd canonical_covector(const LtvProvider& p, long k) {
    return detail::covector_l(detail::reachability_l(p, k)).cast<double>();
}

/// Rank report over M_k for k in [k_first, k_last].
inline RegularityReport check_regularity(const LtvProvider& p, long k_first, long k_last,
                                         double ratio_tol = kRankRatioTol) {
    RegularityReport report;
    for (long k = k_first; k <= k_last; ++k) {
        const auto [smin, smax] =
            detail::extreme_singular_values(reachability_matrix(p, k));
        const bool full = smax > 0.0 && smin >= ratio_tol * smax;
        report.entries.push_back({k, smin, smax, full});
        if (!full) {
            report.all_full_rank = false;
            report.rank_failures.push_back(k);
        }
        report.min_sigma = std::min(report.min_sigma, smin);
        if (smax > 0.0) {
            report.min_ratio = std::min(report.min_ratio, smin / smax);
        } else {
            report.min_ratio = 0.0;
        }
    }
    return report;
}

/// Rows of T_k^{-1}: c_k^T, c_{k+1}^T A_k, ..., c_{k+n-1}^T A_{k+n-2} ... A_k.
/// Reads provider indices [k-n, k+n-2].
inline Eigen::MatrixXd canonical_tinv(const LtvProvider& p, long k) {
    return detail::tinv_l(p, k).cast<double>();
}

/// Transformation into controller canonical form at index k together with the
/// companion coefficients a_{i,k} read from the last row of T_{k+1}^{-1} A_k T_k.
/// Reads provider indices [k-n, k+n-1].
inline CanonicalData canonical_transform(const LtvProvider& p, long k) {
    try {
        const detail::CanonicalL d = detail::canonical_l(p, k);
        CanonicalData out;
        out.k = k;
        out.Tinv = d.Tinv.cast<double>();
        out.c = out.Tinv.row(0).transpose();
        out.T = d.T.cast<double>();
        out.a = d.a.cast<double>();
        return out;
    } catch (SingularMatrixError& e) {
        throw SingularMatrixError("canonical transform at index " + std::to_string(k) + ": " +
                                      e.what(),
                                  e.condition_estimate, k);
    }
}

/// Flat output y_k = c_k^T x_k of the time-variant system.
inline double flat_output_ltv(const LtvProvider& p, long k, const Eigen::VectorXd& x) {
    return static_cast<double>(
        detail::covector_l(detail::reachability_l(p, k)).dot(x.cast<detail::ScalarL>()));
}

struct LtvPoint {
    Eigen::VectorXd x;
    double u = 0.0;
};

/// Parameterization of (x_k, u_k) from the flat-output window
/// (y_k, ..., y_{k+n}):
///   x_k = T_k (y_k, ..., y_{k+n-1})^T,
///   u_k = y_{k+n} + sum_i a_{i,k} y_{k+i}.
inline LtvPoint parameterize_ltv(const LtvProvider& p, long k, const Eigen::VectorXd& y_window) {
    const int n = p.dim();
    if (y_window.size() != n + 1) {
        throw WindowError("parameterize_ltv: expected a window of n+1 = " +
                              std::to_string(n + 1) + " samples, got " +
                              std::to_string(y_window.size()),
                          k);
    }
    try {
        const detail::CanonicalL d = detail::canonical_l(p, k);
        const detail::VecL y = y_window.cast<detail::ScalarL>();
        LtvPoint point;
        point.x = (d.T * y.head(n)).cast<double>();
        point.u = static_cast<double>(y[n] + d.a.dot(y.head(n)));
        return point;
    } catch (SingularMatrixError& e) {
        throw SingularMatrixError("parameterize_ltv at index " + std::to_string(k) + ": " +
                                      e.what(),
                                  e.condition_estimate, k);
    }
}

} // namespace flatcrane
