#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "flatcrane/flat_param.hpp"

namespace flatcrane {

/// Rest position: straight beam, zero velocities, q2 = 0.
struct RestPosition {
    double q1 = 0.0; ///< driving-unit position [m]
    double q3 = 0.0; ///< lifting-unit height [m]

    CraneState state() const {
        CraneState x = CraneState::Zero();
        x[0] = q1;
        x[2] = q3;
        return x;
    }
};

/// Rest-to-rest transition request.
struct PlanSpec {
    RestPosition start;
    RestPosition goal;
    long N = 240;        ///< horizon [steps]
    long head_len = 10;  ///< leading constant run [steps]
    long tail_len = 10;  ///< trailing constant run [steps]
    int blend_degree = 9; ///< odd polynomial degree 2d+1 of the blend
    double q3_min = 0.0; ///< planner keeps x3 inside [q3_min, q3_max]
    double q3_max = 0.0;

    void validate(const PhysicalParams& p) const {
        if (head_len < 10 || tail_len < 10) {
            throw ConfigError("plan: head_len and tail_len must be at least 10 samples");
        }
        if (N <= head_len + tail_len) {
            throw ConfigError("plan: horizon too short, need N > head_len + tail_len");
        }
        if (blend_degree < 5 || blend_degree % 2 == 0) {
            throw ConfigError("plan: blend_degree must be an odd integer >= 5");
        }
        if (!(q3_min > 0.0 && q3_min < q3_max && q3_max < p.L)) {
            throw ConfigError("plan: require 0 < q3_min < q3_max < L");
        }
        for (const auto& [rest, name] :
             {std::pair{&start, "start"}, std::pair{&goal, "goal"}}) {
            if (!(rest->q3 >= q3_min && rest->q3 <= q3_max)) {
                throw ConfigError(std::string("plan: ") + name +
                                  ".q3 outside [q3_min, q3_max]");
            }
            if (!std::isfinite(rest->q1)) {
                throw ConfigError(std::string("plan: ") + name + ".q1 not finite");
            }
        }
    }
};

struct FeedforwardDiagnostics {
    double max_open_loop_dev = 0.0;        ///< max rollout deviation / (1 + max ||x_d||)
    double min_sv_Mk = 0.0;                ///< min singular value of M_k along the plan
    double min_sv_ratio_Mk = 0.0;          ///< min sigma_min/sigma_max of M_k
    std::vector<long> rank_failures;       ///< plan steps with rank-deficient M_k
};

/// Parameterized trajectory plus open-loop verification data. x_d, u_d and
/// ubar_d all run over steps 0..N; the rollout consumes u_d[0..N-1].
struct FeedforwardResult {
    std::vector<CraneState> x_d;
    std::vector<ForceInput> u_d;
    std::vector<TransformedInput> ubar_d;
    FeedforwardDiagnostics diagnostics;
};

/// Smoothstep S_d on [0, 1]: the unique degree-(2d+1) polynomial with
/// S(0) = 0, S(1) = 1 and d vanishing derivatives at both ends.
/// d = 2 gives the classic 6 t^5 - 15 t^4 + 10 t^3.
inline double smoothstep(int d, double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    auto binomial = [](int n, int k) {
        double r = 1.0;
        for (int i = 1; i <= k; ++i) {
            r *= static_cast<double>(n - k + i) / static_cast<double>(i);
        }
        return r;
    };
    double sum = 0.0;
    for (int i = d; i >= 0; --i) {
        const double coeff = (i % 2 == 0 ? 1.0 : -1.0) * binomial(d + i, i) *
                             binomial(2 * d + 1, d - i);
        sum = sum * t + coeff;
    }
    return sum * std::pow(t, d + 1);
}

/// Flat-output values (y1*, y2*) of a rest position. The map is verified on
/// the spot: parameterizing the constant reference must return the rest state
/// and the gravity-compensating force (0, m_h g) to 1e-9.
inline std::pair<double, double> rest_flat_values(const CraneModel& m, const RestPosition& rest) {
    ZetaHistory hist;
    hist.zeta1.fill(rest.q3);
    hist.zeta2.fill(rest.q1);
    const Vec2 y = flat_output_crane(m, hist, rest.state());

    FlatReference constant;
    constant.T_s = m.params().T_s;
    constant.y1.assign(10, y[0]);
    constant.y2.assign(5, y[1]);
    const ParamPoint p = parameterize_crane(m, constant, 0);
    const ForceInput u_eq(0.0, m.params().m_h * m.params().g);
    const double x_err = (p.x - rest.state()).lpNorm<Eigen::Infinity>();
    const double u_err = (p.u - u_eq).lpNorm<Eigen::Infinity>();
    if (x_err > 1e-9 * (1.0 + rest.state().lpNorm<Eigen::Infinity>()) ||
        u_err > 1e-9 * (1.0 + u_eq.lpNorm<Eigen::Infinity>())) {
        throw Error("rest_flat_values: inverse check failed (state error " +
                    std::to_string(x_err) + ", force error " + std::to_string(u_err) + ")");
    }
    return {y[0], y[1]};
}

/// Piecewise constant / smoothstep / constant reference between two rest
/// positions. The constant runs make the rest sample conditions hold exactly:
/// y1[0..9] and y1[N..N+9] (and the five-sample y2 analogs) are bit-equal.
inline FlatReference plan_reference(const CraneModel& m, const PlanSpec& spec) {
    spec.validate(m.params());
    const auto [y1s, y2s] = rest_flat_values(m, spec.start);
    const auto [y1g, y2g] = rest_flat_values(m, spec.goal);

    const int d = (spec.blend_degree - 1) / 2;
    const long blend_span = spec.N - spec.tail_len - spec.head_len;
    const auto sample = [&](double vs, double vg, long k) {
        if (k <= spec.head_len) return vs;
        if (k >= spec.N - spec.tail_len) return vg;
        const double tau = static_cast<double>(k - spec.head_len) /
                           static_cast<double>(blend_span);
        return vs + (vg - vs) * smoothstep(d, tau);
    };

    FlatReference ref;
    ref.T_s = m.params().T_s;
    ref.y1.resize(static_cast<std::size_t>(spec.N + 10));
    ref.y2.resize(static_cast<std::size_t>(spec.N + 5));
    for (long k = 0; k < spec.N + 10; ++k) {
        ref.y1[static_cast<std::size_t>(k)] = sample(y1s, y1g, k);
    }
    for (long k = 0; k < spec.N + 5; ++k) {
        ref.y2[static_cast<std::size_t>(k)] = sample(y2s, y2g, k);
    }
    return ref;
}

/// One explicit Euler step x + T_s f(x, u).
inline CraneState euler_step(const CraneModel& m, const CraneState& x, const ForceInput& u) {
    return x + m.params().T_s * m.dynamics_rhs(x, u);
}

/// Iterated Euler steps; returns all visited states (length u.size() + 1).
/// A domain exit is reported with the failing step index.
inline std::vector<CraneState> rollout(const CraneModel& m, const CraneState& x0,
                                       std::span<const ForceInput> u) {
    std::vector<CraneState> states;
    states.reserve(u.size() + 1);
    states.push_back(x0);
    for (std::size_t k = 0; k < u.size(); ++k) {
        try {
            states.push_back(euler_step(m, states.back(), u[k]));
        } catch (const DomainError& e) {
            throw DomainError("rollout left the model domain at step " + std::to_string(k) +
                                  ": " + e.what(),
                              static_cast<long>(k));
        }
    }
    return states;
}

/// Evaluates the parameterizing map along the reference and verifies it by an
/// open-loop rollout from x_d[0] under u_d[0..N-1].
inline FeedforwardResult feedforward(const CraneModel& m, const FlatReference& ref,
                                     double affinity_tol = 1e-9) {
    const FlatParameterizer param(m, ref, affinity_tol);
    const long N = param.horizon();

    FeedforwardResult result;
    result.x_d.reserve(static_cast<std::size_t>(N + 1));
    result.u_d.reserve(static_cast<std::size_t>(N + 1));
    result.ubar_d.reserve(static_cast<std::size_t>(N + 1));
    for (long k = 0; k <= N; ++k) {
        const ParamPoint p = param.at(k);
        result.x_d.push_back(p.x);
        result.u_d.push_back(p.u);
        result.ubar_d.push_back(p.ubar);
    }

    // every M_k the map touches for steps 0..N, including the lookahead ones
    const RegularityReport reg = check_regularity(param.provider(), 4, N + 8);
    result.diagnostics.min_sv_Mk = reg.min_sigma;
    result.diagnostics.min_sv_ratio_Mk = reg.min_ratio;
    for (long k : reg.rank_failures) {
        result.diagnostics.rank_failures.push_back(k - 4);
    }

    const std::vector<CraneState> sim =
        rollout(m, result.x_d.front(),
                std::span<const ForceInput>(result.u_d.data(), static_cast<std::size_t>(N)));
    double max_norm = 0.0;
    for (const CraneState& x : result.x_d) {
        max_norm = std::max(max_norm, x.lpNorm<Eigen::Infinity>());
    }
    double max_dev = 0.0;
    for (long k = 0; k <= N; ++k) {
        max_dev = std::max(max_dev, (sim[static_cast<std::size_t>(k)] -
                                     result.x_d[static_cast<std::size_t>(k)])
                                        .lpNorm<Eigen::Infinity>());
    }
    result.diagnostics.max_open_loop_dev = max_dev / (1.0 + max_norm);
    return result;
}

} // namespace flatcrane
