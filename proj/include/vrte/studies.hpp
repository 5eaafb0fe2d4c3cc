// studies.hpp - precision and property studies behind the verify command
//
// This software is licensed under the terms of the Apache Licence Version 2.0
// which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

#ifndef VRTE_STUDIES_HPP
#define VRTE_STUDIES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "vrte/expint.hpp"
#include "vrte/kernels.hpp"
#include "vrte/optics.hpp"
#include "vrte/physics.hpp"

namespace vrte {

// Kernel precision study: with constant n, kappa_nu = 0.5 and the linear
// shape kappa(z) = 1 - z/2, the quadrature kernel must reduce to the
// classical E_k of the path integral. Reports the worst pointwise relative
// error per order over the z grid.
struct KernelPrecisionResult {
    double max_rel_err_k1 = 0.0;
    double max_rel_err_k3 = 0.0;
    double max_rel_err_k5 = 0.0;
    bool pass(double gate = 0.01) const {
        return max_rel_err_k1 < gate && max_rel_err_k3 < gate && max_rel_err_k5 < gate;
    }
};

inline KernelPrecisionResult kernel_precision_study(double kappa_nu = 0.5,
                                                    std::size_t nz = 100,
                                                    QuadratureSpec quad = {}) {
    const auto profile = RefractiveProfile::constant();
    auto kfn = [kappa_nu](double z) { return kappa_nu * (1.0 - 0.5 * z); };
    KernelPrecisionResult r;
    for (std::size_t i = 1; i < nz; ++i) {
        const double zp = static_cast<double>(i) / static_cast<double>(nz - 1);
        const double tau = kappa_nu * (zp - 0.25 * zp * zp);
        for (int k : {1, 3, 5}) {
            const double exact = expint(k, tau);
            const double approx = ek_general(k, 0.0, zp, kfn, profile, quad);
            const double rel = std::abs(approx - exact) / exact;
            if (k == 1) r.max_rel_err_k1 = std::max(r.max_rel_err_k1, rel);
            if (k == 3) r.max_rel_err_k3 = std::max(r.max_rel_err_k3, rel);
            if (k == 5) r.max_rel_err_k5 = std::max(r.max_rel_err_k5, rel);
        }
    }
    return r;
}

// Refinement study on the cloud profile: |E1 quadrature at delta_mu - the
// 1/800 oracle| per altitude, for delta_mu in {1/100, 1/200, 1/400}.
struct RefinementResult {
    std::vector<double> err100, err200, err400;  // per z node
    double max_err = 0.0;
    double monotone_fraction = 0.0;     // nodes where halving never increased the error
    double worst_increase = 0.0;        // largest error increase under halving

    bool pass(double bound = 0.012, double mono_gate = 0.95) const {
        return max_err < bound && monotone_fraction >= mono_gate;
    }
};

inline RefinementResult refinement_study(double eps = 0.01, double kappa_nu = 0.5,
                                         std::size_t nz = 100, QuadratureSpec quad = {}) {
    const auto profile = RefractiveProfile::cloud_slab(eps);
    auto kfn = [kappa_nu](double) { return kappa_nu; };
    RefinementResult r;
    std::vector<double> v100, v200, v400, v800;
    for (std::size_t i = 1; i < nz; ++i) {
        const double z = static_cast<double>(i) / static_cast<double>(nz - 1);
        QuadratureSpec q = quad;
        q.delta_mu = 1.0 / 100.0;
        v100.push_back(ek_general(1, z, 0.0, kfn, profile, q));
        q.delta_mu = 1.0 / 200.0;
        v200.push_back(ek_general(1, z, 0.0, kfn, profile, q));
        q.delta_mu = 1.0 / 400.0;
        v400.push_back(ek_general(1, z, 0.0, kfn, profile, q));
        q.delta_mu = quad.delta_mu_oracle;
        v800.push_back(ek_general(1, z, 0.0, kfn, profile, q));
    }
    std::size_t mono = 0;
    for (std::size_t i = 0; i < v800.size(); ++i) {
        const double e1 = std::abs(v100[i] - v800[i]);
        const double e2 = std::abs(v200[i] - v800[i]);
        const double e4 = std::abs(v400[i] - v800[i]);
        r.err100.push_back(e1);
        r.err200.push_back(e2);
        r.err400.push_back(e4);
        r.max_err = std::max({r.max_err, e1, e2, e4});
        const double inc = std::max(e2 - e1, e4 - e2);
        r.worst_increase = std::max(r.worst_increase, inc);
        if (inc <= 1e-12) ++mono;
    }
    r.monotone_fraction = static_cast<double>(mono) / static_cast<double>(v800.size());
    return r;
}

// Stefan gate: grid quadrature of the Planck function against (pi T)^4 / 15.
struct StefanResult {
    double max_rel_err = 0.0;
    bool pass(double gate = 1e-3) const { return max_rel_err < gate; }
};

inline StefanResult stefan_check(const FrequencyGrid& g,
                                 std::vector<double> temps = {0.02, 0.0625, 0.2}) {
    StefanResult r;
    for (double T : temps) {
        const double q = g.integrate_fn([T](double nu) { return planck(nu, T); });
        r.max_rel_err = std::max(r.max_rel_err, std::abs(q - stefan_integral(T)) /
                                                    stefan_integral(T));
    }
    return r;
}

// Attenuation bound samples (Lemma check) on random admissible rays.
struct BoundCheckResult {
    std::size_t checked = 0;
    std::size_t failed = 0;
    bool pass() const { return checked > 0 && failed == 0; }
};

inline BoundCheckResult phi_bound_samples(const RefractiveProfile& profile, double kappa_nu,
                                          std::size_t n_samples, unsigned seed = 12345) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uz(0.0, 1.0);
    BoundCheckResult r;
    while (r.checked < n_samples) {
        const double z = uz(rng);
        const double zp = uz(rng);
        const auto cone = admissibility(z, profile);
        const double mu = cone.mu_hi + (1.0 - cone.mu_hi) * uz(rng);
        if (!cone.admissible(mu) || mu <= 0.0) continue;
        OpticalPath p;
        p.z = z;
        p.zp = zp;
        p.kappa = [kappa_nu](double) { return kappa_nu; };
        p.profile = profile;
        bool ok = true;
        try {
            ok = phi_bound_check(p, mu);
        } catch (const ForbiddenRayError&) {
            continue;  // mid-path blocked rays carry no radiation; not a bound failure
        }
        ++r.checked;
        if (!ok) ++r.failed;
    }
    return r;
}

}  // namespace vrte

#endif  // VRTE_STUDIES_HPP
