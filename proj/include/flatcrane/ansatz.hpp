#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "flatcrane/errors.hpp"

namespace flatcrane {

/// Shape value and its first two spatial derivatives at one point.
struct AnsatzEval {
    double phi;
    double dphi;
    double ddphi;
};

/// One-mode spatial shape Phi(z) for the beam deflection w(z,t) = Phi(z) q2(t).
///
/// Polynomial in z on [0, L], clamped at the base (Phi(0) = Phi'(0) = 0) and
/// normalized at the tip (Phi(L) = 1). The default is the static tip-load
/// cubic Phi(z) = (3 L z^2 - z^3) / (2 L^3).
class AnsatzShape {
public:
    AnsatzShape() = default;

    static AnsatzShape default_cubic(double length) {
        AnsatzShape s;
        const double L2 = length * length;
        s.coeffs_ = {0.0, 0.0, 3.0 / (2.0 * L2), -1.0 / (2.0 * L2 * length)};
        s.length_ = length;
        s.default_cubic_ = true;
        return s;
    }

    /// Builds a shape from polynomial coefficients, Phi(z) = sum c[i] z^i.
    /// Throws ConfigError if the clamped-base or tip-normalization conditions
    /// are violated.
    static AnsatzShape from_coefficients(std::vector<double> coeffs, double length) {
        if (coeffs.size() < 3) {
            throw ConfigError("ansatz: need at least 3 polynomial coefficients");
        }
        AnsatzShape s;
        s.coeffs_ = std::move(coeffs);
        s.length_ = length;
        s.default_cubic_ = false;
        const AnsatzEval base = s.eval(0.0);
        if (std::abs(base.phi) > 1e-12 || std::abs(base.dphi) > 1e-12) {
            throw ConfigError("ansatz: shape must satisfy Phi(0) = 0 and Phi'(0) = 0");
        }
        const AnsatzEval tip = s.eval(length);
        if (std::abs(tip.phi - 1.0) > 1e-9) {
            throw ConfigError("ansatz: shape must be normalized to Phi(L) = 1");
        }
        return s;
    }

    /// Horner evaluation of Phi, Phi', Phi''. Domain checks live in the model.
    AnsatzEval eval(double z) const {
        double p = 0.0, dp = 0.0, ddp = 0.0;
        for (std::size_t i = coeffs_.size(); i-- > 0;) {
            ddp = ddp * z + 2.0 * dp;
            dp = dp * z + p;
            p = p * z + coeffs_[i];
        }
        return {p, dp, ddp};
    }

    const std::vector<double>& coefficients() const { return coeffs_; }
    double length() const { return length_; }
    bool is_default_cubic() const { return default_cubic_; }

private:
    std::vector<double> coeffs_{};
    double length_ = 0.0;
    bool default_cubic_ = false;
};

namespace detail {

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] with relative tolerance rel_tol.
inline double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                 double rel_tol = 1e-10) {
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double scale = std::max(std::abs(whole), 1e-3 * std::abs(b - a));
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, rel_tol * scale, 48);
}

} // namespace flatcrane
