// scenario.hpp - atmosphere problem description: grids, absorption, scattering, boundaries
//
// This software is licensed under the terms of the Apache Licence Version 2.0
// which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

#ifndef VRTE_SCENARIO_HPP
#define VRTE_SCENARIO_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "vrte/optics.hpp"
#include "vrte/physics.hpp"

namespace vrte {

// Absorption spectrum keyed by wavelength in micrometers, linear
// interpolation, clamped at the edges. Values are floored at kappa_floor so
// that kappa_m > 0, which the convergence theory requires.
struct KappaTable {
    std::vector<double> wavelengths_um;  // strictly increasing
    std::vector<double> kappa;
    double floor = 1e-3;

    void validate() const {
        if (wavelengths_um.size() != kappa.size() || wavelengths_um.empty())
            throw std::invalid_argument("KappaTable: empty or mismatched columns");
        for (std::size_t i = 0; i < wavelengths_um.size(); ++i) {
            if (kappa[i] < 0.0) throw std::invalid_argument("KappaTable: kappa must be >= 0");
            if (i > 0 && !(wavelengths_um[i] > wavelengths_um[i - 1]))
                throw std::invalid_argument("KappaTable: wavelengths must be strictly increasing");
        }
        if (!(floor > 0.0)) throw std::invalid_argument("KappaTable: floor must be positive");
    }

    double at_wavelength(double lambda_um) const {
        double v;
        if (lambda_um <= wavelengths_um.front()) {
            v = kappa.front();
        } else if (lambda_um >= wavelengths_um.back()) {
            v = kappa.back();
        } else {
            auto it = std::upper_bound(wavelengths_um.begin(), wavelengths_um.end(), lambda_um);
            const std::size_t hi = static_cast<std::size_t>(it - wavelengths_um.begin());
            const std::size_t lo = hi - 1;
            const double t =
                (lambda_um - wavelengths_um[lo]) / (wavelengths_um[hi] - wavelengths_um[lo]);
            v = kappa[lo] + t * (kappa[hi] - kappa[lo]);
        }
        return std::max(v, floor);
    }

    double at_nu(double nu) const { return at_wavelength(wavelength_um(nu)); }
};

// Separable absorption model kappa(nu, z) = value(nu) * shape(z). The
// experiments use shape == 1; the kernel precision study uses 1 - z/2.
struct KappaModel {
    enum class Source { constant, table };
    enum class Shape { uniform, linear_decay };

    Source source = Source::constant;
    double constant_value = 0.5;
    KappaTable table;
    Shape shape = Shape::uniform;

    static KappaModel constant(double k) {
        KappaModel m;
        m.source = Source::constant;
        m.constant_value = k;
        return m;
    }

    static KappaModel from_table(KappaTable t) {
        t.validate();
        KappaModel m;
        m.source = Source::table;
        m.table = std::move(t);
        return m;
    }

    double value(double nu) const {
        return source == Source::constant ? constant_value : table.at_nu(nu);
    }

    double shape_at(double z) const {
        return shape == Shape::uniform ? 1.0 : 1.0 - 0.5 * z;
    }

    double operator()(double nu, double z) const { return value(nu) * shape_at(z); }
};

// Single-scattering albedo
//   a_s(nu, z) = a1 1_{z in (z1,z2)} + a2 1_{z > z2} 1_{nu in (nu1,nu2)} (nu/nu2)^4
// and the Rayleigh/isotropic mix weight beta.
struct ScatteringModel {
    double beta = 0.5;
    double a1 = 0.7;
    double a2 = 0.3;
    double z1 = 0.4;
    double z2 = 0.8;
    double nu1 = 0.6;
    double nu2 = 1.5;

    double albedo(double nu, double z) const {
        double a = 0.0;
        if (z > z1 && z < z2) a += a1;
        if (z > z2 && nu > nu1 && nu < nu2) {
            const double r = nu / nu2;
            a += a2 * r * r * r * r;
        }
        return a;
    }

    void validate() const {
        if (!(beta >= 0.0 && beta <= 1.0))
            throw std::invalid_argument("ScatteringModel: beta must be in [0,1]");
        if (a1 < 0.0 || a2 < 0.0 || a1 >= 1.0 || a1 + a2 >= 1.0 + 1e-12)
            throw std::invalid_argument("ScatteringModel: albedo must stay in [0,1)");
    }
};

// Boundary sources: unpolarized ground emission of strength c_E at
// temperature T_E entering at z = 0, and sunlight of strength c_S at
// temperature T_S entering at z = Z.
struct BoundarySources {
    double c_E = 2.5;
    double T_E = 300.0 / kTemperatureScaleK;
    double c_S = 0.0;
    double T_S = 5700.0 / kTemperatureScaleK;
    bool polarized = false;
};

struct AtmosphereScenario {
    std::vector<double> z_grid;  // ascending, z_grid.front() = 0, back() = Z
    FrequencyGrid freq;
    RefractiveProfile profile = RefractiveProfile::constant();
    KappaModel kappa;
    ScatteringModel scattering;
    BoundarySources boundary;

    static std::vector<double> uniform_grid(std::size_t n = 100, double z_top = 1.0) {
        std::vector<double> z(n);
        for (std::size_t i = 0; i < n; ++i)
            z[i] = z_top * static_cast<double>(i) / static_cast<double>(n - 1);
        return z;
    }

    static AtmosphereScenario defaults() {
        AtmosphereScenario s;
        s.z_grid = uniform_grid();
        s.freq = FrequencyGrid::geometric();
        return s;
    }

    std::size_t nz() const { return z_grid.size(); }
    std::size_t nnu() const { return freq.size(); }
    double z_top() const { return z_grid.back(); }

    double kappa_a(double nu, double z) const {
        return kappa(nu, z) * (1.0 - scattering.albedo(nu, z));
    }
    double kappa_s(double nu, double z) const {
        return kappa(nu, z) * scattering.albedo(nu, z);
    }

    // Trapezoid weights over the z grid.
    std::vector<double> z_weights() const {
        const std::size_t n = z_grid.size();
        std::vector<double> w(n, 0.0);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double h = 0.5 * (z_grid[i + 1] - z_grid[i]);
            w[i] += h;
            w[i + 1] += h;
        }
        return w;
    }

    void validate() const {
        if (z_grid.size() < 2 || z_grid.front() != 0.0)
            throw std::invalid_argument("scenario: z grid must start at 0 with >= 2 nodes");
        for (std::size_t i = 1; i < z_grid.size(); ++i)
            if (!(z_grid[i] > z_grid[i - 1]))
                throw std::invalid_argument("scenario: z grid must be strictly increasing");
        scattering.validate();
        for (double nu : freq.nodes)
            for (double z : {0.0, 0.5 * z_top(), z_top()})
                if (!(kappa(nu, z) > 0.0))
                    throw std::invalid_argument("scenario: kappa must be positive (floor it)");
    }
};

}  // namespace vrte

#endif  // VRTE_SCENARIO_HPP
