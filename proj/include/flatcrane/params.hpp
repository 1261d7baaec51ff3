#pragma once

#include <cmath>
#include <string>

#include "flatcrane/ansatz.hpp"
#include "flatcrane/errors.hpp"

namespace flatcrane {

/// Lumped constants of the one-mode beam approximation.
struct BeamConstants {
    double m11 = 0.0;  ///< total translating mass [kg]
    double m12 = 0.0;  ///< rhoA * int Phi dz [kg]
    double m22 = 0.0;  ///< rhoA * int Phi^2 dz [kg]
    double k_el = 0.0; ///< EI * int (Phi'')^2 dz [N/m]
};

/// Physical constants of the crane model.
struct PhysicalParams {
    double m_w = 450.0;  ///< driving-unit mass [kg]
    double m_h = 200.0;  ///< lifting-unit mass [kg]
    double rhoA = 50.0;  ///< beam mass density per length [kg/m]
    double EI = 2.5e5;   ///< flexural rigidity [N m^2]
    double L = 10.0;     ///< mast length [m]
    double g = 9.81;     ///< gravitational acceleration [m/s^2]
    double T_s = 0.05;   ///< sampling time [s]
    AnsatzShape ansatz;

    static PhysicalParams defaults() {
        PhysicalParams p;
        p.ansatz = AnsatzShape::default_cubic(p.L);
        return p;
    }

    /// Throws ConfigError naming the violated field.
    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw ConfigError(std::string("params: ") + name + " must be strictly positive");
            }
        };
        positive(m_w, "m_w");
        positive(m_h, "m_h");
        positive(rhoA, "rhoA");
        positive(EI, "EI");
        positive(L, "L");
        positive(T_s, "T_s");
        if (!(g >= 0.0) || !std::isfinite(g)) {
            throw ConfigError("params: g must be non-negative");
        }
        if (ansatz.coefficients().empty()) {
            throw ConfigError("params: ansatz shape is not set");
        }
    }
};

/// Computes m11, m12, m22 and k_el for the configured shape. Closed forms are
/// used for the default cubic, adaptive quadrature (rel. tol 1e-10) otherwise.
inline BeamConstants derive_constants(const PhysicalParams& p) {
    BeamConstants c;
    c.m11 = p.m_w + p.rhoA * p.L + p.m_h;
    if (p.ansatz.is_default_cubic()) {
        c.m12 = 3.0 / 8.0 * p.rhoA * p.L;
        c.m22 = 33.0 / 140.0 * p.rhoA * p.L;
        c.k_el = 3.0 * p.EI / (p.L * p.L * p.L);
    } else {
        const AnsatzShape& shape = p.ansatz;
        c.m12 = p.rhoA * integrate_adaptive([&](double z) { return shape.eval(z).phi; }, 0.0, p.L);
        c.m22 = p.rhoA * integrate_adaptive(
                    [&](double z) {
                        const double v = shape.eval(z).phi;
                        return v * v;
                    },
                    0.0, p.L);
        c.k_el = p.EI * integrate_adaptive(
                     [&](double z) {
                         const double v = shape.eval(z).ddphi;
                         return v * v;
                     },
                     0.0, p.L);
    }
    if (!(c.k_el > 0.0)) {
        throw ConfigError("params: ansatz shape yields non-positive elastic stiffness k_el");
    }
    return c;
}

} // namespace flatcrane
