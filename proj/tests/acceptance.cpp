// acceptance.cpp - end-to-end acceptance suite; one pass/fail line per criterion
//
// This software is licensed under the terms of the Apache Licence Version 2.0
// which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "vrte/expint.hpp"
#include "vrte/fields.hpp"
#include "vrte/physics.hpp"
#include "vrte/scenario_io.hpp"
#include "vrte/solver.hpp"
#include "vrte/studies.hpp"

using namespace vrte;

namespace {

int g_failures = 0;

class Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void report(int criterion, bool pass, const std::string& what, double seconds) {
    std::printf("[%s] criterion %2d: %s  (%.1f s)\n", pass ? "PASS" : "FAIL", criterion,
                what.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), f, a, b, c);
    return std::string(buf);
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

// three significant digits of agreement on the Kelvin values
bool three_digits(double a_scaled, double b_scaled) {
    const double a = kelvin(a_scaled), b = kelvin(b_scaled);
    const double mag = std::max(std::abs(a), std::abs(b));
    if (mag == 0.0) return true;
    const double unit = std::pow(10.0, std::floor(std::log10(mag)) - 2.0);
    return std::abs(a - b) <= 0.5 * unit;
}

// ---------------------------------------------------------------------------
// Independent scalar-RTE oracle for the isotropic limit: direct iteration of
// the classical E-kernel integral equation on a 4x-refined grid, with
// analytic per-cell kernel masses and a bisection temperature closure. Shares
// nothing with the mu-ladder/kernel-table path it cross-checks.
struct ScalarOracle {
    std::vector<double> z;   // fine grid, aligned with the solver grid every 4th node
    std::vector<double> T;

    static ScalarOracle run(const AtmosphereScenario& s, double kappa, int refine = 4) {
        ScalarOracle o;
        const std::size_t nzc = s.nz();
        const std::size_t nf = (nzc - 1) * static_cast<std::size_t>(refine) + 1;
        o.z.resize(nf);
        for (std::size_t i = 0; i < nf; ++i)
            o.z[i] = static_cast<double>(i) / static_cast<double>(nf - 1);

        // cell masses M[i][c] = int_{cell c} E1(kappa |z_i - s|) ds, exact via E2
        const std::size_t nc = nf - 1;
        std::vector<double> mass(nf * nc);
        for (std::size_t i = 0; i < nf; ++i) {
            const double zi = o.z[i];
            for (std::size_t c = 0; c < nc; ++c) {
                const double a = o.z[c], b = o.z[c + 1];
                double m;
                if (b <= zi) {
                    m = (expint(2, kappa * (zi - b)) - expint(2, kappa * (zi - a))) / kappa;
                } else if (a >= zi) {
                    m = (expint(2, kappa * (a - zi)) - expint(2, kappa * (b - zi))) / kappa;
                } else {
                    m = (2.0 - expint(2, kappa * (zi - a)) - expint(2, kappa * (b - zi))) / kappa;
                }
                mass[i * nc + c] = m;
            }
        }

        const std::size_t nnu = s.nnu();
        std::vector<double> J(nnu * nf, 0.0), Jn(nnu * nf);
        o.T.assign(nf, 0.0);

        auto closure = [&](std::size_t i) {
            // bisection on int kappa_a (B(T) - J) dnu = 0
            double rhs = 0.0;
            for (std::size_t inu = 0; inu < nnu; ++inu)
                rhs += s.freq.weights[inu] * s.kappa_a(s.freq.nodes[inu], o.z[i]) *
                       J[inu * nf + i];
            if (rhs <= 0.0) return 0.0;
            auto F = [&](double t) {
                double v = 0.0;
                for (std::size_t inu = 0; inu < nnu; ++inu)
                    v += s.freq.weights[inu] * s.kappa_a(s.freq.nodes[inu], o.z[i]) *
                         planck(s.freq.nodes[inu], t);
                return v - rhs;
            };
            double lo = 0.0, hi = 0.05;
            while (F(hi) < 0.0) hi *= 2.0;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                (F(mid) < 0.0 ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        };

        std::vector<double> A(nc);
        for (int iter = 0; iter < 400; ++iter) {
            double dT = 0.0;
            std::vector<double> Tn(nf);
            for (std::size_t i = 0; i < nf; ++i) Tn[i] = closure(i);
            for (std::size_t inu = 0; inu < nnu; ++inu) {
                const double nu = s.freq.nodes[inu];
                const double bnd = 0.5 * s.boundary.c_E * planck(nu, s.boundary.T_E);
                for (std::size_t c = 0; c < nc; ++c) {
                    const double zm = 0.5 * (o.z[c] + o.z[c + 1]);
                    const double jm = 0.5 * (J[inu * nf + c] + J[inu * nf + c + 1]);
                    const double tm = 0.5 * (o.T[c] + o.T[c + 1]);
                    A[c] = s.kappa_a(nu, zm) * planck(nu, tm) + s.kappa_s(nu, zm) * jm;
                }
                for (std::size_t i = 0; i < nf; ++i) {
                    double acc = 0.0;
                    const double* mi = &mass[i * nc];
                    for (std::size_t c = 0; c < nc; ++c) acc += mi[c] * A[c];
                    Jn[inu * nf + i] = bnd * expint(3, kappa * o.z[i]) + 0.5 * acc;
                }
            }
            J.swap(Jn);
            for (std::size_t i = 0; i < nf; ++i) dT = std::max(dT, std::abs(Tn[i] - o.T[i]));
            o.T.swap(Tn);
            if (iter > 3 && dT < 1e-8) break;
        }
        // final closure against the converged J
        for (std::size_t i = 0; i < nf; ++i) o.T[i] = closure(i);
        return o;
    }
};

}  // namespace

int main() {
    std::printf("acceptance suite\n");

    // ---- criterion 1: kernel precision study --------------------------------
    {
        Timer t;
        const auto r = kernel_precision_study();
        const bool ok = r.pass(0.01) && t.seconds() < 10.0;
        report(1, ok,
               fmt("kernel quadrature vs classical E_k: rel err k1 %.2e k3 %.2e k5 %.2e < 1%%",
                   r.max_rel_err_k1, r.max_rel_err_k3, r.max_rel_err_k5),
               t.seconds());
    }

    // ---- criterion 2: refinement study --------------------------------------
    {
        Timer t;
        const auto r = refinement_study();
        const bool ok = r.max_err < 0.012 && r.monotone_fraction >= 0.95;
        report(2, ok,
               fmt("refinement vs 1/800 oracle: max err %.2e < 0.012, monotone at %.0f%% of nodes",
                   r.max_err, 100.0 * r.monotone_fraction),
               t.seconds());
    }

    // ---- criteria 3, 4, 9: case 1 with the site spectrum ---------------------
    RunConfig case1 = parse_config_file("configs/case1.cfg");
    const AtmosphereScenario s1 = make_scenario(case1, "configs");
    SolveResult r1;
    {
        Timer t;
        r1 = solve(s1, make_solve_options(case1));
        const double secs = t.seconds();

        bool mono = r1.report.converged;
        for (std::size_t i = 1; i < r1.report.records.size(); ++i) {
            if (r1.report.records[i].T_inc_trace <
                r1.report.records[i - 1].T_inc_trace - 1e-10)
                mono = false;
            if (r1.report.records[i].T_dec_trace >
                r1.report.records[i - 1].T_dec_trace + 1e-10)
                mono = false;
        }
        int agree_at = -1;
        for (std::size_t i = 0; i < r1.report.records.size(); ++i) {
            if (three_digits(r1.report.records[i].T_inc_trace,
                             r1.report.records[i].T_dec_trace)) {
                agree_at = r1.report.records[i].iteration;
                break;
            }
        }
        const bool ok = mono && agree_at > 0 && agree_at <= 20 && secs < 300.0;
        report(3, ok,
               fmt("monotone traces at z=0.03, 3-digit branch agreement at iteration %.0f <= 20",
                   static_cast<double>(agree_at)),
               secs);

        const bool ok4 = r1.report.final_bracket < 2.0 * case1.tol &&
                         r1.report.min_bracket >= -1e-10 &&
                         r1.report.min_bracket_seen >= -1e-10;
        report(4, ok4,
               fmt("bracket width %.2e < 2 tol, pointwise T_dec - T_inc >= %.1e",
                   r1.report.final_bracket, r1.report.min_bracket_seen),
               secs);

        double worst = 0.0, scale = 0.0;
        for (std::size_t iz = 0; iz < s1.nz(); ++iz) {
            const double n = s1.profile(s1.z_grid[iz]);
            double res = 0.0, sc = 0.0;
            for (std::size_t inu = 0; inu < s1.nnu(); ++inu) {
                const double nu = s1.freq.nodes[inu];
                const double ka = s1.kappa_a(nu, s1.z_grid[iz]);
                res += s1.freq.weights[inu] *
                       ka * (planck(nu, r1.state.T[iz]) / (n * n) -
                             r1.state.J0[r1.state.idx(inu, iz)]);
                sc += s1.freq.weights[inu] * ka * r1.state.J0[r1.state.idx(inu, iz)];
            }
            worst = std::max(worst, std::abs(res));
            scale = std::max(scale, sc);
        }
        report(9, worst < 1e-8 * scale,
               fmt("thermal-closure residual %.2e < 1e-8 of the source integral %.2e", worst,
                   scale),
               0.0);
    }

    // ---- criterion 5: cloud cooling ------------------------------------------
    {
        Timer t;
        RunConfig c = parse_config_file("configs/case1_k05.cfg");
        const AtmosphereScenario flat = make_scenario(c, "configs");
        RunConfig cc = c;
        cc.profile_kind = "cloud";
        cc.eps = 0.01;
        const AtmosphereScenario cloud = make_scenario(cc, "configs");
        const SolveResult rf = solve(flat, make_solve_options(c));
        const SolveResult rc = solve(cloud, make_solve_options(cc));
        double mf = 0.0, mc = 0.0;
        std::size_t n = 0;
        for (std::size_t iz = 0; iz < flat.nz(); ++iz) {
            const double z = flat.z_grid[iz];
            if (z > 0.5 && z < 0.7) {
                mf += rf.state.T[iz];
                mc += rc.state.T[iz];
                ++n;
            }
        }
        mf /= n;
        mc /= n;
        report(5, rf.report.converged && rc.report.converged && mc < mf,
               fmt("cloud slab mean T: eps=0.01 gives %.2f K vs %.2f K (colder in the cloud)",
                   kelvin(mc), kelvin(mf)),
               t.seconds());
    }

    // ---- criterion 6: added band opacity, both cases --------------------------
    {
        Timer t;
        RunConfig c1b = case1;
        c1b.co2_level = 0.15;
        const AtmosphereScenario s1b = make_scenario(c1b, "configs");
        const SolveResult r1b = solve(s1b, make_solve_options(c1b));
        bool ok = r1b.report.converged;
        double dT0_C = 0.0;
        bool upper_neg = true;
        if (ok) {
            dT0_C = kelvin(r1b.state.T[0] - r1.state.T[0]);
            for (std::size_t iz = 0; iz < s1.nz(); ++iz)
                if (s1.z_grid[iz] > 0.5 &&
                    r1b.state.T[iz] - r1.state.T[iz] >= -1e-12)
                    upper_neg = false;
            ok = dT0_C > 0.1 && dT0_C < 2.0 && upper_neg;
        }

        RunConfig c2 = parse_config_file("configs/case2.cfg");
        const AtmosphereScenario s2 = make_scenario(c2, "configs");
        RunConfig c2b = c2;
        c2b.co2_level = 0.15;
        const AtmosphereScenario s2b = make_scenario(c2b, "configs");
        const SolveResult r2 = solve(s2, make_solve_options(c2));
        const SolveResult r2b = solve(s2b, make_solve_options(c2b));
        bool ok2 = r2.report.converged && r2b.report.converged;
        double worst2 = -1e300;
        if (ok2) {
            for (std::size_t iz = 0; iz < s2.nz(); ++iz)
                worst2 = std::max(worst2, r2b.state.T[iz] - r2.state.T[iz]);
            ok2 = worst2 <= 1e-10;
        }
        report(6, ok && ok2,
               fmt("case 1: ground +%.2f C in (0.1, 2), cooling at all z > 0.5; "
                   "case 2: max dT %.2e <= 0",
                   dT0_C, worst2),
               t.seconds());
    }

    // ---- criterion 7: attenuation bound samples -------------------------------
    {
        // Known-red: the bound exp(-(1/mu) int kappa/(1+eps)) fails for rays
        // referenced below the slab that cross it at shallow mu; refraction
        // steepens them inside the higher-index layer (eta > mu(1+eps), any
        // mu^2 < 1/((1+eps)^2+1)), so they attenuate less than the bound
        // claims. The check is kept as stated and reports the honest count.
        Timer t;
        const auto a = phi_bound_samples(RefractiveProfile::constant(), 0.5, 1000, 11);
        const auto b = phi_bound_samples(RefractiveProfile::cloud_slab(0.01), 0.5, 1000, 12);
        report(7, a.pass() && b.pass(),
               fmt("attenuation bound: constant profile %.0f/1000 ok, cloud profile %.0f/1000 ok "
                   "(slab-crossing rays steepen and beat the bound)",
                   static_cast<double>(a.checked - a.failed),
                   static_cast<double>(b.checked - b.failed)),
               t.seconds());
    }

    // ---- criterion 8: admissibility propagation -------------------------------
    {
        Timer t;
        const auto grid = AtmosphereScenario::uniform_grid(100);
        bool ok = true;
        std::size_t viol = 0;
        for (double eps : {0.01, 0.03}) {
            const auto rep = check_propagation(RefractiveProfile::cloud_slab(eps), grid, 50);
            viol += rep.violations;
            ok = ok && rep.ok();
        }
        report(8, ok, fmt("100x50 transported-direction lattices: %.0f violations",
                          static_cast<double>(viol)),
               t.seconds());
    }

    // ---- criterion 10: isotropic-limit oracle ---------------------------------
    {
        Timer t;
        AtmosphereScenario s = AtmosphereScenario::defaults();
        s.kappa = KappaModel::constant(0.5);
        s.scattering.beta = 0.0;
        SolveOptions opt;
        const SolveResult r = solve(s, opt);
        const ScalarOracle o = ScalarOracle::run(s, 0.5);
        double worst = 0.0;
        for (std::size_t iz = 0; iz < s.nz(); ++iz) {
            const double ref = o.T[iz * 4];
            worst = std::max(worst, std::abs(r.state.T[iz] - ref) / ref);
        }
        report(10, r.report.converged && worst < 0.01,
               fmt("beta=0 fixed point vs independent E-kernel iteration: max rel dT %.2e < 1%%",
                   worst),
               t.seconds());
    }

    // ---- criterion 11: Stefan gate --------------------------------------------
    {
        Timer t;
        const auto r = stefan_check(FrequencyGrid::geometric());
        report(11, r.pass(1e-3),
               fmt("Planck quadrature vs (pi T)^4/15 at three temperatures: rel err %.2e < 1e-3",
                   r.max_rel_err),
               t.seconds());
    }

    // ---- criterion 12: phase-matrix cancellation ------------------------------
    {
        Timer t;
        const int nphi = 64;
        double worst_cancel = 0.0;
        double cmin = 1e300, cmax = -1e300;
        for (double mu : {0.2, 0.45, 0.7, 0.9}) {
            for (double mup : {0.15, 0.5, 0.85}) {
                Mat4 a1{}, a2{}, avg{};
                for (int n = 0; n < nphi; ++n) {
                    const double phip = 2.0 * std::numbers::pi * n / nphi;
                    const Mat4 p1 = full_phase_p1_term(mu, 0.0, mup, phip);
                    const Mat4 p2 = full_phase_p2_term(mu, 0.0, mup, phip);
                    const Mat4 z = full_phase(mu, 0.0, mup, phip);
                    for (int i = 0; i < 4; ++i)
                        for (int j = 0; j < 4; ++j) {
                            a1[i][j] += p1[i][j] / nphi;
                            a2[i][j] += p2[i][j] / nphi;
                            avg[i][j] += z[i][j] / nphi;
                        }
                }
                for (int i = 0; i < 4; ++i)
                    for (int j = 0; j < 4; ++j)
                        worst_cancel = std::max(
                            {worst_cancel, std::abs(a1[i][j]), std::abs(a2[i][j])});
                const Mat2 zr = rayleigh_reduced(mu, mup);
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) {
                        if (std::abs(zr[i][j]) < 1e-14) continue;
                        const double c = avg[i][j] / zr[i][j];
                        cmin = std::min(cmin, c);
                        cmax = std::max(cmax, c);
                    }
            }
        }
        report(12, worst_cancel < 1e-12 && (cmax - cmin) < 1e-10,
               fmt("azimuthal averages of P1/P2 vanish (%.1e); block ratio constant within %.1e",
                   worst_cancel, cmax - cmin),
               t.seconds());
    }

    // ---- criterion 13: determinism --------------------------------------------
    {
        Timer t;
        std::filesystem::create_directories("build/acc_a");
        std::filesystem::create_directories("build/acc_b");
        write_outputs("build/acc_a", s1, r1, case1);
        const SolveResult again = solve(s1, make_solve_options(case1));
        write_outputs("build/acc_b", s1, again, case1);
        bool ok = true;
        for (const char* f : {"temperature.txt", "spectra_z0.txt", "spectra_zZ.txt",
                              "convergence.txt", "diagnostic.txt"})
            ok = ok && slurp(std::string("build/acc_a/") + f) ==
                           slurp(std::string("build/acc_b/") + f);
        std::filesystem::remove_all("build/acc_a");
        std::filesystem::remove_all("build/acc_b");
        report(13, ok, "repeated solve runs produce byte-identical output tables", t.seconds());
    }

    std::printf("%d of 13 criteria passed\n", 13 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
