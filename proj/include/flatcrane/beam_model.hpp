#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>

#include "flatcrane/errors.hpp"
#include "flatcrane/params.hpp"

namespace flatcrane {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// State x = (q1, q2, q3, v1, v2, v3): positions and velocities of the
/// driving unit, the beam modal coordinate and the lifting unit.
using CraneState = Vec6;
/// Actuator forces u = (F1, F2) [N].
using ForceInput = Vec2;
/// Transformed input ubar = (ubar1, ubar2): the accelerations of q1 and q3.
using TransformedInput = Vec2;

enum class CoriolisVariant {
    Printed,  ///< literal C(q, qdot) formulas, including the inconsistent C1 term
    Lagrange, ///< Christoffel construction from the mass matrix (default)
};

inline const char* to_string(CoriolisVariant v) {
    return v == CoriolisVariant::Printed ? "printed" : "lagrange";
}

/// Finite-dimensional crane dynamics with a one-mode Rayleigh-Ritz beam:
/// mass matrix, Coriolis/potential terms, continuous-time vector field and
/// the configuration-flat output.
///
/// All member functions are pure; the model is safe to share across threads.
class CraneModel {
public:
    explicit CraneModel(PhysicalParams params,
                        CoriolisVariant variant = CoriolisVariant::Lagrange)
        : p_(std::move(params)), variant_(variant) {
        p_.validate();
        c_ = derive_constants(p_);
    }

    const PhysicalParams& params() const { return p_; }
    const BeamConstants& constants() const { return c_; }
    CoriolisVariant variant() const { return variant_; }

    /// Shape value and first two derivatives at height z. Throws DomainError
    /// for z outside [0, L].
    AnsatzEval eval_ansatz(double z) const {
        check_height(z);
        return p_.ansatz.eval(z);
    }

    Mat3 mass_matrix(const Vec3& q) const {
        const AnsatzEval s = eval_ansatz(q[2]);
        const double mh = p_.m_h;
        Mat3 M;
        M(0, 0) = c_.m11;
        M(0, 1) = c_.m12 + mh * s.phi;
        M(0, 2) = mh * q[1] * s.dphi;
        M(1, 1) = c_.m22 + mh * s.phi * s.phi;
        M(1, 2) = mh * q[1] * s.phi * s.dphi;
        M(2, 2) = mh + mh * (q[1] * s.dphi) * (q[1] * s.dphi);
        M(1, 0) = M(0, 1);
        M(2, 0) = M(0, 2);
        M(2, 1) = M(1, 2);
        return M;
    }

    /// Analytic partial derivatives of M w.r.t. q2 and q3.
    void mass_matrix_partials(const Vec3& q, Mat3& dM_dq2, Mat3& dM_dq3) const {
        const AnsatzEval s = eval_ansatz(q[2]);
        const double mh = p_.m_h;
        const double q2 = q[1];

        dM_dq2.setZero();
        dM_dq2(0, 2) = mh * s.dphi;
        dM_dq2(1, 2) = mh * s.phi * s.dphi;
        dM_dq2(2, 2) = 2.0 * mh * q2 * s.dphi * s.dphi;
        dM_dq2(2, 0) = dM_dq2(0, 2);
        dM_dq2(2, 1) = dM_dq2(1, 2);

        dM_dq3.setZero();
        dM_dq3(0, 1) = mh * s.dphi;
        dM_dq3(0, 2) = mh * q2 * s.ddphi;
        dM_dq3(1, 1) = 2.0 * mh * s.phi * s.dphi;
        dM_dq3(1, 2) = mh * q2 * (s.dphi * s.dphi + s.phi * s.ddphi);
        dM_dq3(2, 2) = 2.0 * mh * q2 * q2 * s.dphi * s.ddphi;
        dM_dq3(1, 0) = dM_dq3(0, 1);
        dM_dq3(2, 0) = dM_dq3(0, 2);
        dM_dq3(2, 1) = dM_dq3(1, 2);
    }

    /// Closed-form Coriolis variant. Its C1 second term carries q2 where the
    /// velocity-quadratic structure of a Lagrangian system requires v2, so it
    /// is not energy-consistent; kept for comparison (see coriolis_discrepancy).
    Vec3 coriolis_printed(const Vec3& q, const Vec3& v) const {
        const AnsatzEval s = eval_ansatz(q[2]);
        const double mh = p_.m_h;
        const double c1 = mh * v[2] * v[2] * q[1] * s.ddphi + 2.0 * mh * v[2] * q[1] * s.dphi;
        Vec3 C;
        C[0] = c1;
        C[1] = q[1] * c_.k_el + s.phi * c1;
        C[2] = c1 * q[1] * s.dphi + p_.m_h * p_.g;
        return C;
    }

    /// C(q, v) from the Euler-Lagrange equations:
    ///   C = Mdot(q, v) v - 1/2 d/dq (v^T M v) + dV/dq,
    /// with V = 1/2 k_el q2^2 + m_h g q3 and analytic mass-matrix partials.
    Vec3 coriolis_lagrange(const Vec3& q, const Vec3& v) const {
        Mat3 dM2, dM3;
        mass_matrix_partials(q, dM2, dM3);
        const Mat3 Mdot = dM2 * v[1] + dM3 * v[2];
        Vec3 C = Mdot * v;
        C[1] -= 0.5 * v.dot(dM2 * v);
        C[2] -= 0.5 * v.dot(dM3 * v);
        C[1] += c_.k_el * q[1];
        C[2] += p_.m_h * p_.g;
        return C;
    }

    Vec3 coriolis(const Vec3& q, const Vec3& v) const {
        return variant_ == CoriolisVariant::Printed ? coriolis_printed(q, v)
                                                    : coriolis_lagrange(q, v);
    }

    /// Continuous-time vector field f(x, u) = (v, M^{-1}(q) (G u - C(q, v))).
    Vec6 dynamics_rhs(const CraneState& x, const ForceInput& u) const {
        return dynamics_rhs(x, u, variant_);
    }

    Vec6 dynamics_rhs(const CraneState& x, const ForceInput& u, CoriolisVariant variant) const {
        const Vec3 q = x.head<3>();
        const Vec3 v = x.tail<3>();
        const Vec3 C = variant == CoriolisVariant::Printed ? coriolis_printed(q, v)
                                                           : coriolis_lagrange(q, v);
        Vec3 Gu;
        Gu << u[0], 0.0, u[1];
        const Vec3 a = solve_mass(q, Gu - C);
        Vec6 rhs;
        rhs.head<3>() = v;
        rhs.tail<3>() = a;
        return rhs;
    }

    /// Solves M(q) y = rhs with a singularity guard (condition estimate 1e12).
    Vec3 solve_mass(const Vec3& q, const Vec3& rhs) const {
        const Mat3 M = mass_matrix(q);
        Eigen::LLT<Mat3> llt(M);
        if (llt.info() != Eigen::Success || llt.rcond() < 1e-12) {
            const double cond = llt.info() == Eigen::Success ? 1.0 / llt.rcond()
                                                             : std::numeric_limits<double>::infinity();
            throw SingularMatrixError("mass matrix numerically singular", cond);
        }
        return llt.solve(rhs);
    }

    /// Configuration-flat output of the continuous-time model; evaluation
    /// only, the associated parameterization is singular at stationary points
    /// and is not provided.
    Vec2 configuration_flat_output(const CraneState& x) const {
        const AnsatzEval s = eval_ansatz(x[2]);
        Vec2 y;
        y[0] = x[0] + s.phi * x[1];
        y[1] = x[0] * (c_.m22 - c_.m12 * s.phi);
        return y;
    }

    double kinetic_energy(const CraneState& x) const {
        const Vec3 v = x.tail<3>();
        return 0.5 * v.dot(mass_matrix(x.head<3>()) * v);
    }

    double potential_energy(const CraneState& x) const {
        return 0.5 * c_.k_el * x[1] * x[1] + p_.m_h * p_.g * x[2];
    }

    double total_energy(const CraneState& x) const {
        return kinetic_energy(x) + potential_energy(x);
    }

    /// Difference between the printed and the Lagrange Coriolis vector and how
    /// much of it the C1 scalar explains: the full difference should equal
    /// (1, Phi, q2 Phi')^T * delta_c1.
    struct CoriolisDiscrepancy {
        Vec3 delta;      ///< printed - lagrange
        double delta_c1; ///< difference of the C1 scalar alone
        double residual; ///< || delta - (1, Phi, q2 Phi')^T delta_c1 ||
    };

    CoriolisDiscrepancy coriolis_discrepancy(const Vec3& q, const Vec3& v) const {
        const AnsatzEval s = eval_ansatz(q[2]);
        CoriolisDiscrepancy d;
        d.delta = coriolis_printed(q, v) - coriolis_lagrange(q, v);
        d.delta_c1 = 2.0 * p_.m_h * v[2] * s.dphi * (q[1] - v[1]);
        Vec3 explained;
        explained << d.delta_c1, s.phi * d.delta_c1, q[1] * s.dphi * d.delta_c1;
        d.residual = (d.delta - explained).norm();
        return d;
    }

private:
    void check_height(double z) const {
        if (!(z >= 0.0 && z <= p_.L)) {
            throw DomainError("lifting-unit height " + std::to_string(z) +
                              " outside beam domain [0, " + std::to_string(p_.L) + "]");
        }
    }

    PhysicalParams p_;
    BeamConstants c_;
    CoriolisVariant variant_;
};

/// Cholesky-based positive-definiteness check.
inline bool is_positive_definite(const Mat3& m) {
    return Eigen::LLT<Mat3>(m).info() == Eigen::Success;
}

} // namespace flatcrane
