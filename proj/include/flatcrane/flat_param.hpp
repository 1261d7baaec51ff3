#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "flatcrane/decoupling.hpp"
#include "flatcrane/ltv_canonical.hpp"

namespace flatcrane {

/// Flat-output reference in the forward-only (re-indexed) convention: the
/// parameterization at step k reads y1[k .. k+9] and y2[k .. k+4]. In the
/// original indexing the first flat-output component satisfies y1_k =
/// x3_{k-4}; the stored sequence is that component shifted by four samples,
/// so x3 at step k equals y1[k+4].
struct FlatReference {
    std::vector<double> y1; ///< indices 0 .. N+9
    std::vector<double> y2; ///< indices 0 .. N+4
    double T_s = 0.0;

    long horizon() const { return static_cast<long>(y1.size()) - 10; }

    void validate() const {
        if (y1.size() < 10 || y2.size() < 5) {
            throw WindowError("FlatReference: y1 needs >= 10 and y2 >= 5 samples");
        }
        if (y2.size() != y1.size() - 5) {
            throw WindowError("FlatReference: expected y2 length = y1 length - 5");
        }
        if (!(T_s > 0.0)) {
            throw Error("FlatReference: T_s must be positive");
        }
        for (double v : y1) {
            if (!std::isfinite(v)) throw Error("FlatReference: non-finite y1 sample");
        }
        for (double v : y2) {
            if (!std::isfinite(v)) throw Error("FlatReference: non-finite y2 sample");
        }
    }
};

/// Vertical states and input recovered from three consecutive y1 samples:
/// x3_k = y1_k, x6_k = (y1_{k+1} - y1_k)/T_s,
/// ubar2_k = (y1_{k+2} - 2 y1_{k+1} + y1_k)/T_s^2.
struct VerticalSample {
    double x3;
    double x6;
    double ubar2;
};

inline VerticalSample param_vertical(double y0, double y1, double y2, double T_s) {
    VerticalSample s;
    s.x3 = y0;
    s.x6 = (y1 - y0) / T_s;
    s.ubar2 = (y2 - 2.0 * y1 + y0) / (T_s * T_s);
    return s;
}

/// Backward values of the extension variables zeta1 = x3 and zeta2 = x1:
/// zeta*[i] holds the value at step k-4+i. Only the zeta1 history enters the
/// computed flat output; zeta2 is carried for completeness.
struct ZetaHistory {
    std::array<double, 4> zeta1{};
    std::array<double, 4> zeta2{};
};

/// Discrete LTV provider of the horizontal subsystem driven by a y1 sequence:
/// index j maps to discretize_ltv(extract_ltv(...)) at the vertical values
/// recovered from y1[j .. j+2]. Window: [0, len(y1) - 3].
inline LtvProvider crane_ltv_provider(const CraneModel& m, const std::vector<double>& y1,
                                      double affinity_tol = 1e-9) {
    if (y1.size() < 3) {
        throw WindowError("crane_ltv_provider: need at least 3 y1 samples");
    }
    const double T_s = m.params().T_s;
    const long k_max = static_cast<long>(y1.size()) - 3;
    return LtvProvider::from_function(4, 0, k_max, [&](long j) {
        const VerticalSample v =
            param_vertical(y1[static_cast<std::size_t>(j)], y1[static_cast<std::size_t>(j + 1)],
                           y1[static_cast<std::size_t>(j + 2)], T_s);
        if (!(v.x3 >= 0.0 && v.x3 <= m.params().L)) {
            throw DomainError("crane_ltv_provider: induced x3 = " + std::to_string(v.x3) +
                                  " outside [0, L] at index " + std::to_string(j),
                              j);
        }
        const LtvSample d = discretize_ltv(extract_ltv(m, v.x3, v.x6, v.ubar2, affinity_tol), T_s);
        return LtvPair{d.A1, d.b1};
    });
}

/// Flat output of the sampled-data crane at one step:
///   y1 = zeta1_{k-4},  y2 = c_k^T (x1, x2, x4, x5),
/// with c_k built from the reachability matrix that the zeta1 history and the
/// current (x3, x6) induce.
inline Vec2 flat_output_crane(const CraneModel& m, const ZetaHistory& hist, const CraneState& x) {
    const double T_s = m.params().T_s;
    std::vector<double> window(6);
    for (int i = 0; i < 4; ++i) {
        window[static_cast<std::size_t>(i)] = hist.zeta1[static_cast<std::size_t>(i)];
    }
    window[4] = x[2];
    window[5] = x[2] + T_s * x[5];
    const LtvProvider local = crane_ltv_provider(m, window);
    const Eigen::VectorXd c = canonical_covector(local, 4);
    Vec4 x1;
    x1 << x[0], x[1], x[3], x[4];
    return Vec2(hist.zeta1[0], c.dot(x1));
}

/// One evaluated point of the parameterizing map.
struct ParamPoint {
    CraneState x;
    ForceInput u;
    TransformedInput ubar;
};

/// Evaluates the parameterizing map
///   (x_k, u_k) = F(y1[k..k+9], y2[k..k+4])
/// along one reference. The LTV provider is materialized once at
/// construction; per-step evaluation is independent and side-effect free.
class FlatParameterizer {
public:
    FlatParameterizer(const CraneModel& m, FlatReference ref, double affinity_tol = 1e-9)
        : model_(&m),
          ref_(std::move(ref)),
          provider_((ref_.validate(), crane_ltv_provider(m, ref_.y1, affinity_tol))) {}

    long horizon() const { return ref_.horizon(); }
    const FlatReference& reference() const { return ref_; }
    const LtvProvider& provider() const { return provider_; }
    const CraneModel& model() const { return *model_; }

    ParamPoint at(long k) const {
        if (k < 0 || k > horizon()) {
            throw WindowError("parameterize: step " + std::to_string(k) +
                                  " outside plan horizon [0, " + std::to_string(horizon()) + "]",
                              k);
        }
        const auto y1 = [&](long i) { return ref_.y1[static_cast<std::size_t>(i)]; };
        const auto y2 = [&](long i) { return ref_.y2[static_cast<std::size_t>(i)]; };

        // vertical subsystem: x3 at step k sits four samples into the window
        const VerticalSample v = param_vertical(y1(k + 4), y1(k + 5), y1(k + 6), ref_.T_s);

        // horizontal subsystem at LTV index k+4
        Eigen::VectorXd y2_window(5);
        for (int i = 0; i <= 4; ++i) {
            y2_window[i] = y2(k + i);
        }
        const LtvPoint h = parameterize_ltv(provider_, k + 4, y2_window);

        ParamPoint point;
        point.x << h.x[0], h.x[1], v.x3, h.x[2], h.x[3], v.x6;
        point.ubar << h.u, v.ubar2;
        point.u = invert_input_transform(*model_, point.x, point.ubar);
        return point;
    }

private:
    const CraneModel* model_;
    FlatReference ref_;
    LtvProvider provider_;
};

/// Single-point convenience wrapper around FlatParameterizer.
inline ParamPoint parameterize_crane(const CraneModel& m, const FlatReference& ref, long k) {
    return FlatParameterizer(m, ref).at(k);
}

struct SubmersivityReport {
    int rank = 0;
    double sigma_ratio = 0.0;
    bool full_row_rank = false;
};

/// Rank of the Jacobian of the Euler map x + T_s f(x, u) w.r.t. (x, u),
/// by central differences. Full row rank (6) is the submersivity condition.
inline SubmersivityReport check_submersivity(const CraneModel& m, const CraneState& x,
                                             const ForceInput& u, double fd_step = 1e-6) {
    const double T_s = m.params().T_s;
    const auto euler = [&](const CraneState& xs, const ForceInput& us) -> Vec6 {
        return xs + T_s * m.dynamics_rhs(xs, us);
    };
    Eigen::Matrix<double, 6, 8> J;
    for (int i = 0; i < 8; ++i) {
        CraneState xp = x, xm = x;
        ForceInput up = u, um = u;
        if (i < 6) {
            xp[i] += fd_step;
            xm[i] -= fd_step;
        } else {
            up[i - 6] += fd_step;
            um[i - 6] -= fd_step;
        }
        J.col(i) = (euler(xp, up) - euler(xm, um)) / (2.0 * fd_step);
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
    const auto& sv = svd.singularValues();
    SubmersivityReport report;
    report.sigma_ratio = sv[0] > 0.0 ? sv[sv.size() - 1] / sv[0] : 0.0;
    for (int i = 0; i < sv.size(); ++i) {
        if (sv[i] >= kRankRatioTol * sv[0]) {
            ++report.rank;
        }
    }
    report.full_row_rank = report.rank == 6;
    return report;
}

} // namespace flatcrane
