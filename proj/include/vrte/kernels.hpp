// kernels.hpp - attenuation factor phi, generalized exponential-integral kernels and their table
//
// This software is licensed under the terms of the Apache Licence Version 2.0
// which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

#ifndef VRTE_KERNELS_HPP
#define VRTE_KERNELS_HPP

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "vrte/expint.hpp"
#include "vrte/optics.hpp"
#include "vrte/scenario.hpp"

namespace vrte {

class ForbiddenRayError : public std::runtime_error {
  public:
    explicit ForbiddenRayError(const std::string& what) : std::runtime_error(what) {}
};

struct QuadratureSpec {
    double delta_mu = 0.01;          // outer mu step
    double mu_switch = 0.1;          // squared nodes below, linear nodes above
    double dz_inner = 1.0 / 60.0;    // inner path-integral step
    double delta_mu_oracle = 1.0 / 800.0;

    void validate() const {
        if (!(delta_mu > 0.0 && delta_mu <= 0.05))
            throw std::invalid_argument("QuadratureSpec: delta_mu must be in (0, 0.05]");
        if (!(dz_inner > 0.0))
            throw std::invalid_argument("QuadratureSpec: dz_inner must be positive");
        if (!(delta_mu_oracle < delta_mu))
            throw std::invalid_argument("QuadratureSpec: oracle step must be finer");
    }
};

// Graded mu mesh on (mu_star, 1]: nodes mu_star + (j dmu)^2 while below the
// switch, uniform spacing ~dmu above. The first node is offset to
// mu_star + (dmu/2)^2 so the integrand is never evaluated at the cone edge,
// where the k = 1 weight is singular.
struct MuLadder {
    double mu_star = 0.0;
    std::vector<double> nodes;
    std::vector<double> weights;  // trapezoid weights plus the left strip on node 0
};

inline MuLadder mu_ladder(double mu_star, const QuadratureSpec& q) {
    MuLadder lad;
    lad.mu_star = mu_star;
    std::vector<double>& x = lad.nodes;
    const double first = mu_star + 0.25 * q.delta_mu * q.delta_mu;
    if (first < 1.0) x.push_back(first);
    for (std::size_t j = 1;; ++j) {
        const double step = static_cast<double>(j) * q.delta_mu;
        const double off = step * step;
        if (off >= q.mu_switch) break;
        const double v = mu_star + off;
        if (v >= 1.0) break;
        x.push_back(v);
    }
    const double lin_start = mu_star + q.mu_switch;
    if (lin_start < 1.0) {
        const std::size_t m = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil((1.0 - lin_start) / q.delta_mu)));
        for (std::size_t j = 0; j <= m; ++j)
            x.push_back(lin_start + (1.0 - lin_start) * static_cast<double>(j) /
                                        static_cast<double>(m));
    } else {
        x.push_back(1.0);
    }
    std::sort(x.begin(), x.end());
    x.erase(std::unique(x.begin(), x.end()), x.end());

    lad.weights.assign(x.size(), 0.0);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double h = 0.5 * (x[i + 1] - x[i]);
        lad.weights[i] += h;
        lad.weights[i + 1] += h;
    }
    lad.weights.front() += x.front() - mu_star;
    return lad;
}

// Optical path between two altitudes with the absorption sampled along it.
struct OpticalPath {
    double z = 0.0;
    double zp = 0.0;
    std::function<double(double)> kappa;  // kappa(z'') along the path, frequency included
    RefractiveProfile profile = RefractiveProfile::constant();
    double dz_inner = 1.0 / 60.0;
};

namespace detail {

// Composite midpoint evaluation of int_z^zp f(z'') / eta(mu, z, z'') dz''.
// Returns false when the ray is forbidden somewhere on the path.
template <class F>
bool path_integral(double z, double zp, double mu, const RefractiveProfile& n, double dz_inner,
                   F&& f, double& out) {
    out = 0.0;
    if (z == zp) return true;
    const double nz = n(z);
    const double L = std::abs(zp - z);
    const std::size_t m =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(L / dz_inner)));
    const double h = (zp - z) / static_cast<double>(m);
    const double ah = std::abs(h);
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double zm = z + (static_cast<double>(i) + 0.5) * h;
        const double nm = n(zm);
        const double rad = 1.0 - (1.0 - mu * mu) * (nz * nz) / (nm * nm);
        if (rad <= 0.0) return false;
        acc += ah * f(zm) / std::sqrt(rad);
    }
    out = acc;
    return true;
}

}  // namespace detail

// Attenuation factor phi = exp(-|int kappa/eta dz''|) along the path, for a
// ray with direction cosine mu at path.z.
inline double phi(const OpticalPath& path, double mu) {
    double p = 0.0;
    const bool ok = detail::path_integral(path.z, path.zp, mu, path.profile, path.dz_inner,
                                          [&](double zm) { return path.kappa(zm); }, p);
    if (!ok)
        throw ForbiddenRayError("phi: ray forbidden on path (total refraction)");
    return std::exp(-std::abs(p));
}

// Generalized exponential integral
//   E_k(kappa; z, z') = int_{mu*}^1 phi(kappa, z', z, mu) mu^{k-2}(z') dmu
// over the admissible cone at z, with the graded mu mesh. Rays blocked by
// total refraction in mid-path contribute zero (they carry no transmitted
// radiation).
template <class KappaFn>
double ek_general(int k, double z, double zp, KappaFn&& kappa_fn, const RefractiveProfile& n,
                  const QuadratureSpec& quad) {
    if (k != 1 && k != 3 && k != 5)
        throw std::invalid_argument("ek_general: only k in {1, 3, 5} is supported");
    const auto cone = admissibility(z, n);
    const MuLadder lad = mu_ladder(cone.mu_hi, quad);
    const double nz = n(z), nzp = n(zp);
    double sum = 0.0;
    for (std::size_t j = 0; j < lad.nodes.size(); ++j) {
        const double mu = lad.nodes[j];
        double p = 0.0;
        if (!detail::path_integral(z, zp, mu, n, quad.dz_inner, kappa_fn, p)) continue;
        const double rad = 1.0 - (1.0 - mu * mu) * (nz * nz) / (nzp * nzp);
        if (rad <= 0.0) continue;
        const double muzp = std::sqrt(rad);
        double w;
        if (k == 1)
            w = 1.0 / muzp;
        else if (k == 3)
            w = muzp;
        else
            w = muzp * muzp * muzp;
        sum += lad.weights[j] * std::exp(-p) * w;
    }
    return sum;
}

// Fast approximation (n_{z'}/n_z)^{k-2} E_k(int kappa n_z/n_{z''} dz''), valid
// for k >= 3 only; the k = 1 kernel is too sensitive near the cone edge.
template <class KappaFn>
double ek_approx(int k, double z, double zp, KappaFn&& kappa_fn, const RefractiveProfile& n,
                 double dz_inner = 1.0 / 60.0,
                 EtaOrientation orient = EtaOrientation::as_printed) {
    if (k != 3 && k != 5)
        throw std::invalid_argument("ek_approx: only k in {3, 5} is supported");
    const double nz = n(z), nzp = n(zp);
    double tau = 0.0;
    if (z != zp) {
        const double L = std::abs(zp - z);
        const std::size_t m =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(L / dz_inner)));
        const double h = (zp - z) / static_cast<double>(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double zm = z + (static_cast<double>(i) + 0.5) * h;
            const double r = (orient == EtaOrientation::as_printed) ? nz / n(zm) : n(zm) / nz;
            tau += std::abs(h) * kappa_fn(zm) * r;
        }
    }
    const double ratio = (orient == EtaOrientation::as_printed) ? nzp / nz : nz / nzp;
    double pre = 1.0;
    for (int j = 0; j < k - 2; ++j) pre *= ratio;
    return pre * expint(k, tau);
}

// Lemma bound: phi <= exp(-(1/mu) int kappa/(1+eps) dz'') with
// eps(s, z) = max{1, n_s/n_z} - 1. Checked with the same midpoint rule on
// both sides; true when the bound holds within an absolute 1e-12 slack.
inline bool phi_bound_check(const OpticalPath& path, double mu, double slack = 1e-12) {
    const double p = phi(path, mu);
    const double nz = path.profile(path.z);
    double q = 0.0;
    detail::path_integral(path.z, path.zp, 1.0, RefractiveProfile::constant(), path.dz_inner,
                          [&](double zm) {
                              const double eps = std::max(1.0, path.profile(zm) / nz) - 1.0;
                              return path.kappa(zm) / (1.0 + eps);
                          },
                          q);
    const double bound = std::exp(-std::abs(q) / std::abs(mu));
    return p <= bound + slack;
}

namespace detail {

inline void parallel_rows(std::size_t n_rows, std::size_t n_threads,
                          const std::function<void(std::size_t)>& row_fn) {
    if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<std::size_t>(n_threads, n_rows);
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < n_rows; ++i) row_fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) {
        pool.emplace_back([=, &row_fn] {
            for (std::size_t i = t; i < n_rows; i += n_threads) row_fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

// Not-a-knot cubic spline second derivatives for n >= 4 nodes; linear
// fallback (all zeros) below that.
inline void spline_d2(const std::vector<double>& x, const double* y, double* M) {
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) M[i] = 0.0;
    if (n < 4) return;
    std::vector<double> h(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) h[i] = x[i + 1] - x[i];
    // unknowns M[1..n-2]; M[0], M[n-1] eliminated by the not-a-knot relations
    const std::size_t m = n - 2;
    std::vector<double> a(m, 0.0), b(m, 0.0), c(m, 0.0), r(m, 0.0);
    for (std::size_t i = 1; i <= n - 2; ++i) {
        const std::size_t row = i - 1;
        a[row] = h[i - 1];
        b[row] = 2.0 * (h[i - 1] + h[i]);
        c[row] = h[i];
        r[row] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
    }
    // left: M0 = ((h0+h1) M1 - h0 M2) / h1
    b[0] += a[0] * (h[0] + h[1]) / h[1];
    c[0] -= a[0] * h[0] / h[1];
    a[0] = 0.0;
    // right: M_{n-1} = ((h_{n-3}+h_{n-2}) M_{n-2} - h_{n-2} M_{n-3}) / h_{n-3}
    const std::size_t e = m - 1;
    b[e] += c[e] * (h[n - 3] + h[n - 2]) / h[n - 3];
    a[e] -= c[e] * h[n - 2] / h[n - 3];
    c[e] = 0.0;
    // Thomas
    for (std::size_t i = 1; i < m; ++i) {
        const double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        r[i] -= w * r[i - 1];
    }
    std::vector<double> sol(m);
    sol[m - 1] = r[m - 1] / b[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) sol[i] = (r[i] - c[i] * sol[i + 1]) / b[i];
    for (std::size_t i = 0; i < m; ++i) M[i + 1] = sol[i];
    M[0] = ((h[0] + h[1]) * M[1] - h[0] * M[2]) / h[1];
    M[n - 1] = ((h[n - 3] + h[n - 2]) * M[n - 2] - h[n - 2] * M[n - 3]) / h[n - 3];
}

inline double spline_eval(const std::vector<double>& x, const double* y, const double* M,
                          double u) {
    const std::size_t n = x.size();
    if (n == 1) return y[0];
    u = std::clamp(u, x.front(), x.back());
    std::size_t i = static_cast<std::size_t>(
        std::upper_bound(x.begin(), x.end(), u) - x.begin());
    i = std::clamp<std::size_t>(i, 1, n - 1) - 1;
    const double h = x[i + 1] - x[i];
    const double A = (x[i + 1] - u) / h;
    const double B = 1.0 - A;
    return A * y[i] + B * y[i + 1] +
           ((A * A * A - A) * M[i] + (B * B * B - B) * M[i + 1]) * h * h / 6.0;
}

}  // namespace detail

// Per-(z, z') ray geometry shared by every kappa value: the graded mu nodes,
// their weights, the transported direction cosine at z' and the
// kappa-independent path factor P_j = int shape(z'')/eta dz''. A node blocked
// by total refraction carries weight zero.
struct PairGeometry {
    std::vector<double> weights;
    std::vector<double> muzp;
    std::vector<double> path_factor;
};

inline PairGeometry pair_geometry(double z, double zp, const AtmosphereScenario& s,
                                  const QuadratureSpec& quad) {
    const RefractiveProfile& n = s.profile;
    const auto cone = admissibility(z, n);
    const MuLadder lad = mu_ladder(cone.mu_hi, quad);
    const double nz = n(z), nzp = n(zp);
    PairGeometry g;
    const std::size_t J = lad.nodes.size();
    g.weights.assign(J, 0.0);
    g.muzp.assign(J, 1.0);
    g.path_factor.assign(J, 0.0);
    for (std::size_t j = 0; j < J; ++j) {
        const double mu = lad.nodes[j];
        double p = 0.0;
        if (!detail::path_integral(z, zp, mu, n, quad.dz_inner,
                                   [&](double zm) { return s.kappa.shape_at(zm); }, p))
            continue;
        const double rad = 1.0 - (1.0 - mu * mu) * (nz * nz) / (nzp * nzp);
        if (rad <= 0.0) continue;
        g.weights[j] = lad.weights[j];
        g.muzp[j] = std::sqrt(rad);
        g.path_factor[j] = p;
    }
    return g;
}

// E_1, E_3, E_5 for one kappa_nu from a precomputed geometry.
inline std::array<double, 3> ek_from_geometry(const PairGeometry& g, double kappa_nu) {
    double e1 = 0.0, e3 = 0.0, e5 = 0.0;
    for (std::size_t j = 0; j < g.weights.size(); ++j) {
        const double w = g.weights[j];
        if (w == 0.0) continue;
        const double f = w * std::exp(-kappa_nu * g.path_factor[j]);
        const double m = g.muzp[j];
        e1 += f / m;
        e3 += f * m;
        e5 += f * m * m * m;
    }
    return {e1, e3, e5};
}

// Precomputed kernel lattice: E_k(kappa_nu; z, z') for k in {1, 3, 5} on the
// scenario z grid and a logarithmic kappa lattice. Lookups interpolate with a
// not-a-knot cubic spline in (log kappa -> log E); the (z, z') axes are the
// solver's own grid, with bilinear interpolation offered for off-node probes
// away from the singular diagonal.
class KernelTable {
  public:
    std::vector<double> z_nodes;
    std::vector<double> kappa_nodes;
    double build_seconds = 0.0;

    static constexpr std::array<int, 3> orders{1, 3, 5};

    std::size_t nz() const { return z_nodes.size(); }
    std::size_t nkappa() const { return kappa_nodes.size(); }
    bool empty() const { return z_nodes.empty(); }

    double value_at_nodes(int k, std::size_t iz, std::size_t izp, std::size_t ik) const {
        return values_[k_index(k)][(iz * nz() + izp) * nkappa() + ik];
    }

    // Kernel at lattice (z, z') and arbitrary kappa.
    double at(int k, std::size_t iz, std::size_t izp, double kappa_nu) const {
        const std::size_t ki = k_index(k);
        const std::size_t off = (iz * nz() + izp) * nkappa();
        if (nkappa() == 1) return values_[ki][off];
        const double u = std::log(kappa_nu);
        const double ly = detail::spline_eval(log_kappa_, &logval_[ki][off], &d2_[ki][off], u);
        return std::exp(ly);
    }

    // Generic probe: bilinear in (z, z'), spline in kappa.
    double interpolate(int k, double z, double zp, double kappa_nu) const {
        const auto [i0, i1, tz] = locate(z);
        const auto [j0, j1, tp] = locate(zp);
        const double v00 = at(k, i0, j0, kappa_nu), v01 = at(k, i0, j1, kappa_nu);
        const double v10 = at(k, i1, j0, kappa_nu), v11 = at(k, i1, j1, kappa_nu);
        return (1.0 - tz) * ((1.0 - tp) * v00 + tp * v01) + tz * ((1.0 - tp) * v10 + tp * v11);
    }

    void save(const std::string& path) const {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("KernelTable::save: cannot open " + path);
        const char magic[8] = {'V', 'R', 'T', 'E', 'K', 'T', '0', '1'};
        os.write(magic, 8);
        const std::uint64_t dims[2] = {nz(), nkappa()};
        os.write(reinterpret_cast<const char*>(dims), sizeof(dims));
        write_vec(os, z_nodes);
        write_vec(os, kappa_nodes);
        for (const auto& v : values_) write_vec(os, v);
    }

    static KernelTable load(const std::string& path) {
        std::ifstream is(path, std::ios::binary);
        if (!is) throw std::runtime_error("KernelTable::load: cannot open " + path);
        char magic[8];
        is.read(magic, 8);
        if (!is || std::memcmp(magic, "VRTEKT01", 8) != 0)
            throw std::runtime_error("KernelTable::load: bad magic in " + path);
        std::uint64_t dims[2];
        is.read(reinterpret_cast<char*>(dims), sizeof(dims));
        KernelTable t;
        t.z_nodes.resize(dims[0]);
        t.kappa_nodes.resize(dims[1]);
        read_vec(is, t.z_nodes);
        read_vec(is, t.kappa_nodes);
        for (auto& v : t.values_) {
            v.resize(dims[0] * dims[0] * dims[1]);
            read_vec(is, v);
        }
        if (!is) throw std::runtime_error("KernelTable::load: truncated file " + path);
        t.finalize_spline();
        return t;
    }

    bool same_values(const KernelTable& o) const {
        return z_nodes == o.z_nodes && kappa_nodes == o.kappa_nodes && values_ == o.values_;
    }

    friend KernelTable build_table(const AtmosphereScenario&, const QuadratureSpec&, std::size_t,
                                   std::size_t);

  private:
    std::array<std::vector<double>, 3> values_;
    std::array<std::vector<double>, 3> logval_;
    std::array<std::vector<double>, 3> d2_;
    std::vector<double> log_kappa_;

    static std::size_t k_index(int k) {
        switch (k) {
            case 1: return 0;
            case 3: return 1;
            case 5: return 2;
        }
        throw std::invalid_argument("KernelTable: only k in {1, 3, 5}");
    }

    std::tuple<std::size_t, std::size_t, double> locate(double z) const {
        if (z <= z_nodes.front()) return {0, 0, 0.0};
        if (z >= z_nodes.back()) return {nz() - 1, nz() - 1, 0.0};
        const std::size_t hi = static_cast<std::size_t>(
            std::upper_bound(z_nodes.begin(), z_nodes.end(), z) - z_nodes.begin());
        const std::size_t lo = hi - 1;
        return {lo, hi, (z - z_nodes[lo]) / (z_nodes[hi] - z_nodes[lo])};
    }

    void finalize_spline() {
        const std::size_t nk = nkappa();
        log_kappa_.resize(nk);
        for (std::size_t i = 0; i < nk; ++i) log_kappa_[i] = std::log(kappa_nodes[i]);
        for (std::size_t ki = 0; ki < 3; ++ki) {
            logval_[ki].resize(values_[ki].size());
            d2_[ki].assign(values_[ki].size(), 0.0);
            for (std::size_t i = 0; i < values_[ki].size(); ++i)
                logval_[ki][i] = std::log(std::max(values_[ki][i], 1e-300));
            if (nk >= 2) {
                const std::size_t pairs = nz() * nz();
                for (std::size_t p = 0; p < pairs; ++p)
                    detail::spline_d2(log_kappa_, &logval_[ki][p * nk], &d2_[ki][p * nk]);
            }
        }
    }

    static void write_vec(std::ofstream& os, const std::vector<double>& v) {
        os.write(reinterpret_cast<const char*>(v.data()),
                 static_cast<std::streamsize>(v.size() * sizeof(double)));
    }
    static void read_vec(std::ifstream& is, std::vector<double>& v) {
        is.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(v.size() * sizeof(double)));
    }
};

// Kappa lattice covering the scenario's absorption range, log spacing.
inline std::vector<double> kappa_lattice(const AtmosphereScenario& s, std::size_t n_kappa) {
    double kmin = 1e300, kmax = 0.0;
    for (double nu : s.freq.nodes) {
        const double k = s.kappa.value(nu);
        kmin = std::min(kmin, k);
        kmax = std::max(kmax, k);
    }
    if (!(kmax / kmin > 1.0 + 1e-9)) return {kmin};
    std::vector<double> ks(n_kappa);
    const double l0 = std::log(kmin), l1 = std::log(kmax);
    for (std::size_t i = 0; i < n_kappa; ++i)
        ks[i] = std::exp(l0 + (l1 - l0) * static_cast<double>(i) /
                                  static_cast<double>(n_kappa - 1));
    ks.front() = kmin;
    ks.back() = kmax;
    return ks;
}

// Fill the (z, z', kappa) lattice for k in {1, 3, 5}. Rows (fixed z) are
// distributed over threads; each writes disjoint slots, so the result is
// bit-identical regardless of scheduling.
inline KernelTable build_table(const AtmosphereScenario& s, const QuadratureSpec& quad,
                               std::size_t n_kappa = 50, std::size_t n_threads = 0) {
    quad.validate();
    KernelTable t;
    t.z_nodes = s.z_grid;
    t.kappa_nodes = kappa_lattice(s, n_kappa);
    const std::size_t nz = t.z_nodes.size(), nk = t.kappa_nodes.size();
    for (auto& v : t.values_) v.assign(nz * nz * nk, 0.0);

    const auto start = std::chrono::steady_clock::now();
    detail::parallel_rows(nz, n_threads, [&](std::size_t iz) {
        for (std::size_t izp = 0; izp < nz; ++izp) {
            const PairGeometry g = pair_geometry(t.z_nodes[iz], t.z_nodes[izp], s, quad);
            const std::size_t off = (iz * nz + izp) * nk;
            for (std::size_t ik = 0; ik < nk; ++ik) {
                const auto e = ek_from_geometry(g, t.kappa_nodes[ik]);
                t.values_[0][off + ik] = e[0];
                t.values_[1][off + ik] = e[1];
                t.values_[2][off + ik] = e[2];
            }
        }
    });
    t.build_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    t.finalize_spline();
    return t;
}

}  // namespace vrte

#endif  // VRTE_KERNELS_HPP
