// physics.hpp - Planck emission, frequency quadrature and scattering phase matrices
//
// This software is licensed under the terms of the Apache Licence Version 2.0
// which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

#ifndef VRTE_PHYSICS_HPP
#define VRTE_PHYSICS_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vrte {

using Mat2 = std::array<std::array<double, 2>, 2>;
using Mat4 = std::array<std::array<double, 4>, 4>;

// Nondimensionalization constants. Temperatures are in units of 4798 K,
// altitudes in units of 10 km, and wavelength relates to the scaled
// frequency through lambda[um] = 3/nu.
inline constexpr double kTemperatureScaleK = 4798.0;
inline constexpr double kWavelengthScaleUm = 3.0;

inline double wavelength_um(double nu) { return kWavelengthScaleUm / nu; }
inline double nu_from_wavelength_um(double lambda_um) { return kWavelengthScaleUm / lambda_um; }
inline double kelvin(double t_scaled) { return t_scaled * kTemperatureScaleK; }
inline double celsius(double t_scaled) { return kelvin(t_scaled) - 273.15; }

// Spectral radiance of a black body, B_nu(T) = nu^3 / (e^{nu/T} - 1).
// Evaluated through expm1 so that the Rayleigh-Jeans regime nu/T -> 0 keeps
// full relative accuracy; the exponent is clamped at 700 where the result
// underflows anyway.
inline double planck(double nu, double T) {
    if (!(nu > 0.0)) throw std::domain_error("planck: nu must be positive");
    if (T < 0.0) throw std::domain_error("planck: T must be nonnegative");
    if (T == 0.0) return 0.0;
    const double x = nu / T;
    if (x >= 700.0) return 0.0;
    return nu * nu * nu / std::expm1(x);
}

// dB_nu/dT = nu^4 / (T^2 * 4 sinh^2(x/2)), x = nu/T.
inline double planck_dT(double nu, double T) {
    if (!(nu > 0.0)) throw std::domain_error("planck_dT: nu must be positive");
    if (!(T > 0.0)) throw std::domain_error("planck_dT: T must be positive");
    const double x = nu / T;
    if (x >= 700.0) return 0.0;
    const double s = std::sinh(0.5 * x);
    return nu * nu * nu * nu / (T * T * 4.0 * s * s);
}

// Stefan's law in scaled units: integral of B_nu(T) over nu is (pi T)^4 / 15.
inline double stefan_integral(double T) {
    const double pT = std::numbers::pi * T;
    return pT * pT * pT * pT / 15.0;
}

// Quadrature grid for integrals over nu in (0, inf). Nodes are geometric on
// [nu_min, nu_max]; the weights are a trapezoid rule in log(nu) with a
// Rayleigh-Jeans tail weight folded into the first node (the integrand is
// assumed ~ nu^2 below the cutoff, which holds for Planck-type integrands).
struct FrequencyGrid {
    std::vector<double> nodes;
    std::vector<double> weights;
    double nu_min = 0.0;
    double nu_max = 0.0;

    static FrequencyGrid geometric(double nu_min = 0.005, double nu_max = 20.0,
                                   std::size_t n = 128) {
        if (!(nu_min > 0.0) || !(nu_max > nu_min) || n < 2)
            throw std::invalid_argument("FrequencyGrid: need 0 < nu_min < nu_max, n >= 2");
        FrequencyGrid g;
        g.nu_min = nu_min;
        g.nu_max = nu_max;
        g.nodes.resize(n);
        g.weights.resize(n);
        const double t0 = std::log(nu_min), t1 = std::log(nu_max);
        const double dt = (t1 - t0) / static_cast<double>(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            g.nodes[i] = std::exp(t0 + dt * static_cast<double>(i));
            g.weights[i] = g.nodes[i] * dt;
        }
        g.weights.front() *= 0.5;
        g.weights.back() *= 0.5;
        g.weights.front() += g.nodes.front() / 3.0;  // sub-cutoff tail
        return g;
    }

    std::size_t size() const { return nodes.size(); }

    double integrate(std::span<const double> f) const {
        if (f.size() != nodes.size())
            throw std::invalid_argument("FrequencyGrid::integrate: size mismatch");
        double s = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) s += weights[i] * f[i];
        return s;
    }

    template <class F>
    double integrate_fn(F&& fn) const {
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * fn(nodes[i]);
        return s;
    }
};

// ---------------------------------------------------------------------------
// Phase matrices for the phi-averaged (Ibar, Qbar) system, written in the
// (I_l, I_r) component basis.

enum class PhaseKind { rayleigh, isotropic };

inline Mat2 rayleigh_reduced(double mu, double mup) {
    const double m2 = mu * mu, p2 = mup * mup;
    return Mat2{{{1.5 * (2.0 * (1.0 - m2) * (1.0 - p2) + m2 * p2), 1.5 * m2},
                 {1.5 * p2, 1.5}}};
}

inline Mat2 isotropic_reduced() {
    return Mat2{{{0.5, 0.5}, {0.5, 0.5}}};
}

// beta * Z_R + (1 - beta) * Z_I
inline Mat2 reduced_phase(double beta, double mu, double mup) {
    if (!(beta >= 0.0 && beta <= 1.0))
        throw std::domain_error("reduced_phase: beta must be in [0,1]");
    if (std::abs(mu) > 1.0 || std::abs(mup) > 1.0)
        throw std::domain_error("reduced_phase: mu, mu' must be in [-1,1]");
    const Mat2 r = rayleigh_reduced(mu, mup);
    const Mat2 i = isotropic_reduced();
    Mat2 out{};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) out[a][b] = beta * r[a][b] + (1.0 - beta) * i[a][b];
    return out;
}

inline Mat2 reduced_phase(PhaseKind kind, double beta, double mu, double mup) {
    if (kind == PhaseKind::isotropic) return reduced_phase(0.0, mu, mup);
    return reduced_phase(beta, mu, mup);
}

struct PhaseMatrixReduced {
    PhaseKind kind = PhaseKind::rayleigh;
    double beta = 1.0;
    Mat2 operator()(double mu, double mup) const { return reduced_phase(kind, beta, mu, mup); }
};

// Full 4x4 Rayleigh phase matrix
//   Z(mu,phi; mu',phi') = Q [ P0 + sqrt(1-mu^2) sqrt(1-mu'^2) P1 + P2 ],
// Q = diag(1,1,2,2).
inline Mat4 full_phase(double mu, double phi, double mup, double phip) {
    if (std::abs(mu) > 1.0 || std::abs(mup) > 1.0)
        throw std::domain_error("full_phase: mu, mu' must be in [-1,1]");
    const double m2 = mu * mu, p2 = mup * mup;
    const double d = phip - phi;
    const double c1 = std::cos(d), s1 = std::sin(d);
    const double c2 = std::cos(2.0 * d), s2 = std::sin(2.0 * d);

    Mat4 P0{};
    P0[0][0] = 2.0 * (1.0 - m2) * (1.0 - p2) + m2 * p2;
    P0[0][1] = m2;
    P0[1][0] = p2;
    P0[1][1] = 1.0;
    P0[3][3] = mu * mup;

    Mat4 P1{};
    P1[0][0] = 4.0 * mu * mup * c1;
    P1[0][2] = 2.0 * mu * s1;
    P1[2][0] = -2.0 * mup * s1;
    P1[2][2] = c1;
    P1[3][3] = c1;

    Mat4 P2{};
    P2[0][0] = m2 * p2 * c2;
    P2[0][1] = -m2 * c2;
    P2[0][2] = m2 * mup * s2;
    P2[1][0] = -p2 * c2;
    P2[1][1] = c2;
    P2[1][2] = -mup * s2;
    P2[2][0] = -mu * p2 * s2;
    P2[2][1] = mu * s2;
    P2[2][2] = mu * mup * c2;

    const double g = std::sqrt(1.0 - m2) * std::sqrt(1.0 - p2);
    const double q[4] = {1.0, 1.0, 2.0, 2.0};
    Mat4 out{};
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            out[a][b] = q[a] * 0.75 * (P0[a][b] + g * P1[a][b] + P2[a][b]);
    return out;
}

// P1 and P2 blocks alone (scaled by 3/4, without Q), used to verify that
// their azimuthal averages vanish.
inline Mat4 full_phase_p1_term(double mu, double phi, double mup, double phip) {
    const double d = phip - phi;
    const double c1 = std::cos(d), s1 = std::sin(d);
    const double g = std::sqrt(1.0 - mu * mu) * std::sqrt(1.0 - mup * mup);
    Mat4 P1{};
    P1[0][0] = 4.0 * mu * mup * c1;
    P1[0][2] = 2.0 * mu * s1;
    P1[2][0] = -2.0 * mup * s1;
    P1[2][2] = c1;
    P1[3][3] = c1;
    for (auto& row : P1)
        for (auto& v : row) v *= 0.75 * g;
    return P1;
}

inline Mat4 full_phase_p2_term(double mu, double phi, double mup, double phip) {
    const double m2 = mu * mu, p2 = mup * mup;
    const double d = phip - phi;
    const double c2 = std::cos(2.0 * d), s2 = std::sin(2.0 * d);
    Mat4 P2{};
    P2[0][0] = m2 * p2 * c2;
    P2[0][1] = -m2 * c2;
    P2[0][2] = m2 * mup * s2;
    P2[1][0] = -p2 * c2;
    P2[1][1] = c2;
    P2[1][2] = -mup * s2;
    P2[2][0] = -mu * p2 * s2;
    P2[2][1] = mu * s2;
    P2[2][2] = mu * mup * c2;
    for (auto& row : P2)
        for (auto& v : row) v *= 0.75;
    return P2;
}

class UnsupportedConfiguration : public std::runtime_error {
  public:
    explicit UnsupportedConfiguration(const std::string& what) : std::runtime_error(what) {}
};

// Proof token carried by the solver: with unpolarized boundary sources the U
// and V Stokes components vanish identically, so only (I, Q) are transported.
struct UvZeroToken {
    bool uv_identically_zero = true;
};

template <class Scenario>
UvZeroToken assert_uv_zero(const Scenario& scenario) {
    if (scenario.boundary.polarized)
        throw UnsupportedConfiguration(
            "polarized boundary sources requested: U/V transport is not supported");
    return UvZeroToken{};
}

}  // namespace vrte

#endif  // VRTE_PHYSICS_HPP
