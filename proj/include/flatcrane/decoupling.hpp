#pragma once

#include <Eigen/Dense>

#include "flatcrane/beam_model.hpp"
#include "flatcrane/errors.hpp"

namespace flatcrane {

/// A1 (4x4) and b1 (4-vector) of the x1 = (x1, x2, x4, x5) subsystem, in
/// continuous-time or Euler-discretized form.
struct LtvSample {
    Mat4 A1;
    Vec4 b1;
    bool discrete = false;
};

/// The constant pair of the Euler-discretized vertical subsystem (x3, x6).
struct VerticalDiscretePair {
    Mat2 A2;
    Vec2 b2;
};

/// ubar = (f4(x, u), f6(x, u)): the accelerations of q1 and q3 under u.
inline TransformedInput transformed_input(const CraneModel& m, const CraneState& x,
                                          const ForceInput& u) {
    const Vec6 rhs = m.dynamics_rhs(x, u);
    return TransformedInput(rhs[3], rhs[5]);
}

/// Inverse of the input transformation: finds u with
/// transformed_input(m, x, u) = ubar. The accelerations are affine in u, so a
/// 2x2 linear solve suffices.
inline ForceInput invert_input_transform(const CraneModel& m, const CraneState& x,
                                         const TransformedInput& ubar) {
    const Vec3 q = x.head<3>();
    const Vec3 v = x.tail<3>();
    const Vec3 C = m.coriolis(q, v);
    // acc(u) = M^{-1} (G u - C); rows 1 and 3 give the 2x2 sensitivity.
    const Vec3 acc0 = m.solve_mass(q, -C);
    const Vec3 col1 = m.solve_mass(q, Vec3(1.0, 0.0, 0.0));
    const Vec3 col2 = m.solve_mass(q, Vec3(0.0, 0.0, 1.0));
    Mat2 S;
    S << col1[0], col2[0], col1[2], col2[2];
    const Eigen::JacobiSVD<Mat2> svd(S, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double smax = svd.singularValues()[0];
    const double smin = svd.singularValues()[1];
    if (!(smin > 1e-12 * smax) || !(smax > 0.0)) {
        throw SingularMatrixError("input-transform sensitivity singular",
                                  smax > 0.0 ? smax / smin
                                             : std::numeric_limits<double>::infinity());
    }
    const Vec2 residual(ubar[0] - acc0[0], ubar[1] - acc0[2]);
    return svd.solve(residual);
}

/// Vector field of the transformed system: dynamics under ubar instead of u.
inline Vec6 transformed_rhs(const CraneModel& m, const CraneState& x,
                            const TransformedInput& ubar) {
    const ForceInput u = invert_input_transform(m, x, ubar);
    return m.dynamics_rhs(x, u);
}

namespace detail {

/// The (x1, x2, x4, x5)-rows of the transformed vector field for a given
/// x1-part, with the (x3, x6) states and ubar fixed.
inline Vec4 transformed_x1_rows(const CraneModel& m, const Vec4& x1, double x3, double x6,
                                double ubar1, double ubar2) {
    CraneState x;
    x << x1[0], x1[1], x3, x1[2], x1[3], x6;
    const Vec6 rhs = transformed_rhs(m, x, TransformedInput(ubar1, ubar2));
    return Vec4(rhs[0], rhs[1], rhs[3], rhs[4]);
}

} // namespace detail

/// Extracts A1, b1 of the decoupled subsystem by probing the transformed
/// dynamics at the origin, at unit vectors and at ubar1 = 1. The affine
/// structure is certified: a nonzero offset or a superposition residual above
/// affinity_tol raises DecouplingError.
inline LtvSample extract_ltv(const CraneModel& m, double x3, double x6, double ubar2,
                             double affinity_tol = 1e-9) {
    const Vec4 offset = detail::transformed_x1_rows(m, Vec4::Zero(), x3, x6, 0.0, ubar2);
    if (offset.lpNorm<Eigen::Infinity>() > affinity_tol) {
        throw DecouplingError("transformed x1-dynamics have nonzero offset at x1 = 0");
    }
    LtvSample s;
    for (int i = 0; i < 4; ++i) {
        s.A1.col(i) = detail::transformed_x1_rows(m, Vec4::Unit(i), x3, x6, 0.0, ubar2) - offset;
    }
    s.b1 = detail::transformed_x1_rows(m, Vec4::Zero(), x3, x6, 1.0, ubar2) - offset;
    s.discrete = false;

    // fixed off-axis probe; catches any nonlinearity the basis misses
    const Vec4 probe(0.37, -0.24, 0.81, -0.56);
    const double probe_u = 0.63;
    const Vec4 predicted = s.A1 * probe + s.b1 * probe_u + offset;
    const Vec4 actual = detail::transformed_x1_rows(m, probe, x3, x6, probe_u, ubar2);
    if ((actual - predicted).lpNorm<Eigen::Infinity>() > affinity_tol) {
        throw DecouplingError("transformed x1-dynamics failed the superposition check");
    }
    return s;
}

/// Explicit Euler discretization: A1d = I + T_s A1, b1d = T_s b1.
inline LtvSample discretize_ltv(const LtvSample& s, double T_s) {
    if (s.discrete) {
        throw Error("discretize_ltv: sample is already discrete");
    }
    if (!(T_s > 0.0)) {
        throw Error("discretize_ltv: T_s must be positive");
    }
    LtvSample d;
    d.A1 = Mat4::Identity() + T_s * s.A1;
    d.b1 = T_s * s.b1;
    d.discrete = true;
    return d;
}

/// A2d = [[1, T_s], [0, 1]], b2d = (0, T_s): the vertical subsystem is a
/// discrete double integrator.
inline VerticalDiscretePair vertical_discrete_pair(double T_s) {
    VerticalDiscretePair p;
    p.A2 << 1.0, T_s, 0.0, 1.0;
    p.b2 << 0.0, T_s;
    return p;
}

} // namespace flatcrane
