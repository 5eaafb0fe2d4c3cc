// optics.hpp - ray direction transport and admissibility under a varying refractive index
//
// This software is licensed under the terms of the Apache Licence Version 2.0
// which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

#ifndef VRTE_OPTICS_HPP
#define VRTE_OPTICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vrte {

// Refractive index profile n(z) on [0, z_top]. Path integrals treat n as
// piecewise constant over the inner quadrature cells (midpoint sampling), so
// a discontinuous cloud indicator is handled without ODE stepping.
class RefractiveProfile {
  public:
    enum class Kind { constant, cloud_slab, table };

    static RefractiveProfile constant(double z_top = 1.0) {
        RefractiveProfile p;
        p.kind_ = Kind::constant;
        p.z_top_ = z_top;
        return p;
    }

    // n(z) = 1 + eps * 1_{z in (z1, z2)}
    static RefractiveProfile cloud_slab(double eps, double z1 = 0.5, double z2 = 0.7,
                                        double z_top = 1.0) {
        if (eps < 0.0) throw std::invalid_argument("cloud_slab: eps must be >= 0");
        if (!(z1 < z2)) throw std::invalid_argument("cloud_slab: need z1 < z2");
        RefractiveProfile p;
        p.kind_ = eps == 0.0 ? Kind::constant : Kind::cloud_slab;
        p.eps_ = eps;
        p.z1_ = z1;
        p.z2_ = z2;
        p.z_top_ = z_top;
        return p;
    }

    // Tabulated profile, linear interpolation; z strictly increasing, n >= 1.
    static RefractiveProfile from_table(std::vector<std::pair<double, double>> zn,
                                        double z_top = 1.0) {
        if (zn.size() < 2) throw std::invalid_argument("profile table: need at least 2 rows");
        for (std::size_t i = 0; i < zn.size(); ++i) {
            if (zn[i].second < 1.0)
                throw std::invalid_argument("profile table: n must be >= 1");
            if (i > 0 && !(zn[i].first > zn[i - 1].first))
                throw std::invalid_argument("profile table: z must be strictly increasing");
        }
        RefractiveProfile p;
        p.kind_ = Kind::table;
        p.table_ = std::move(zn);
        p.z_top_ = z_top;
        return p;
    }

    double operator()(double z) const {
        switch (kind_) {
            case Kind::constant: return 1.0;
            case Kind::cloud_slab: return (z > z1_ && z < z2_) ? 1.0 + eps_ : 1.0;
            case Kind::table: {
                if (z <= table_.front().first) return table_.front().second;
                if (z >= table_.back().first) return table_.back().second;
                auto it = std::upper_bound(
                    table_.begin(), table_.end(), z,
                    [](double v, const std::pair<double, double>& q) { return v < q.first; });
                const auto& hi = *it;
                const auto& lo = *(it - 1);
                const double t = (z - lo.first) / (hi.first - lo.first);
                return lo.second + t * (hi.second - lo.second);
            }
        }
        return 1.0;
    }

    Kind kind() const { return kind_; }
    bool uniform() const { return kind_ == Kind::constant; }
    double z_top() const { return z_top_; }
    double eps() const { return eps_; }
    double slab_lo() const { return z1_; }
    double slab_hi() const { return z2_; }

  private:
    Kind kind_ = Kind::constant;
    double eps_ = 0.0;
    double z1_ = 0.5, z2_ = 0.7;
    double z_top_ = 1.0;
    std::vector<std::pair<double, double>> table_;
};

// Direction cosine transported along a characteristic from altitude z to z2:
//   eta(mu, z, z2) = sign(mu) * sqrt(1 - (1 - mu^2) n_z^2 / n_{z2}^2).
// Empty when the radicand is nonpositive (total refraction; the ray never
// reaches z2).
inline std::optional<double> eta(double mu, double z, double z2, const RefractiveProfile& n) {
    const double nz = n(z), nz2 = n(z2);
    const double rad = 1.0 - (1.0 - mu * mu) * (nz * nz) / (nz2 * nz2);
    if (rad <= 0.0) {
        if (std::abs(mu) >= 1.0) return std::copysign(1.0, mu);
        return std::nullopt;
    }
    return std::copysign(std::sqrt(rad), mu);
}

// Which ratio orientation the fast approximation uses; the printed formula is
//   eta_h = mu * n_{z'} / n_z.
enum class EtaOrientation { as_printed, reciprocal };

inline double eta_h(double mu, double z, double zp, const RefractiveProfile& n,
                    EtaOrientation o = EtaOrientation::as_printed) {
    const double r = (o == EtaOrientation::as_printed) ? n(zp) / n(z) : n(z) / n(zp);
    return mu * r;
}

// Admissible directions at altitude z: mu^2 >= mu*^2 with
//   mu*^2 = max{0, 1 - n_0^2/n_z^2, 1 - n_Z^2/n_z^2}.
// Directions with mu^2 in (mu_lo^2, mu_hi^2) undergo total refraction before
// reaching a boundary and are excluded from all transport integrals.
struct AdmissibilityCone {
    double z = 0.0;
    double mu_star_sq = 0.0;
    double mu_lo = 0.0;  // negative-side bound (-mu*)
    double mu_hi = 0.0;  // positive-side bound (+mu*)

    bool admissible(double mu) const { return mu * mu > mu_star_sq; }
};

inline AdmissibilityCone admissibility(double z, const RefractiveProfile& n) {
    const double nz = n(z), n0 = n(0.0), nZ = n(n.z_top());
    const double a = 1.0 - (n0 * n0) / (nz * nz);
    const double b = 1.0 - (nZ * nZ) / (nz * nz);
    AdmissibilityCone c;
    c.z = z;
    c.mu_star_sq = std::max({0.0, a, b});
    c.mu_hi = std::sqrt(c.mu_star_sq);
    c.mu_lo = -c.mu_hi;
    return c;
}

// Lattice check of admissibility propagation: a direction admissible at z
// stays admissible when transported to every other grid altitude.
struct PropagationReport {
    std::size_t checked = 0;
    std::size_t skipped = 0;  // (z, mu) pairs filtered out by the cone
    std::size_t violations = 0;
    std::vector<std::string> details;  // first few violating triples

    bool ok() const { return violations == 0; }
};

inline PropagationReport check_propagation(const RefractiveProfile& n,
                                           const std::vector<double>& z_grid,
                                           std::size_t mu_per_z = 50,
                                           double slack = 1e-12) {
    PropagationReport rep;
    for (double z : z_grid) {
        const auto cone = admissibility(z, n);
        for (std::size_t j = 1; j <= mu_per_z; ++j) {
            const double mu = cone.mu_hi +
                              (1.0 - cone.mu_hi) * static_cast<double>(j) /
                                  static_cast<double>(mu_per_z + 1);
            if (!cone.admissible(mu)) {
                ++rep.skipped;
                continue;
            }
            for (double zp : z_grid) {
                ++rep.checked;
                const auto m = eta(mu, z, zp, n);
                const auto conep = admissibility(zp, n);
                const bool bad =
                    !m.has_value() || (m.value() * m.value() < conep.mu_star_sq - slack);
                if (bad) {
                    ++rep.violations;
                    if (rep.details.size() < 8)
                        rep.details.push_back("z=" + std::to_string(z) + " mu=" +
                                              std::to_string(mu) + " zp=" + std::to_string(zp));
                }
            }
        }
    }
    return rep;
}

}  // namespace vrte

#endif  // VRTE_OPTICS_HPP
