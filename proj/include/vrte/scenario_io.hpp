// scenario_io.hpp - configuration, absorption-spectrum ingestion, result writers, CLI
//
// This software is licensed under the terms of the Apache Licence Version 2.0
// which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

#ifndef VRTE_SCENARIO_IO_HPP
#define VRTE_SCENARIO_IO_HPP

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vrte/fields.hpp"
#include "vrte/kernels.hpp"
#include "vrte/scenario.hpp"
#include "vrte/solver.hpp"

namespace vrte {

class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class DataError : public std::runtime_error {
  public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Absorption table ingestion: two whitespace-separated columns
// (wavelength um, kappa), '#' comments, strictly increasing wavelengths.

inline KappaTable load_kappa(std::istream& is, double floor = 1e-3) {
    KappaTable t;
    t.floor = floor;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double lam, kap;
        if (!(ls >> lam)) continue;  // blank
        if (!(ls >> kap)) throw DataError("kappa table: malformed row at line " +
                                          std::to_string(lineno));
        double extra;
        if (ls >> extra)
            throw DataError("kappa table: too many columns at line " + std::to_string(lineno));
        if (!t.wavelengths_um.empty() && !(lam > t.wavelengths_um.back()))
            throw DataError("kappa table: wavelengths not strictly increasing at line " +
                            std::to_string(lineno));
        t.wavelengths_um.push_back(lam);
        t.kappa.push_back(kap);
    }
    if (t.wavelengths_um.empty()) throw DataError("kappa table: no data rows");
    t.validate();
    return t;
}

inline KappaTable load_kappa(const std::string& path, double floor = 1e-3) {
    std::ifstream is(path);
    if (!is) throw DataError("kappa table: cannot open " + path);
    try {
        return load_kappa(is, floor);
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

// Added opacity over a wavelength band; the shipped default is a constant
// plateau on 14-18 um whose level is a calibration fit to the modified curve,
// not a tabulated value.
struct Co2Modifier {
    double band_lo_um = 14.0;
    double band_hi_um = 18.0;
    double level = 0.15;

    double added(double lambda_um) const {
        return (lambda_um >= band_lo_um && lambda_um <= band_hi_um) ? level : 0.0;
    }
};

inline KappaTable apply_co2(const KappaTable& t, const Co2Modifier& m) {
    if (m.level < 0.0) throw ConfigError("apply_co2: added opacity must be >= 0");
    if (m.band_lo_um < t.wavelengths_um.front() || m.band_hi_um > t.wavelengths_um.back())
        throw ConfigError("apply_co2: band outside the data range");
    KappaTable out = t;
    // sample the band edges so the plateau is represented exactly
    auto insert_node = [&](double lam) {
        auto it = std::lower_bound(out.wavelengths_um.begin(), out.wavelengths_um.end(), lam);
        if (it != out.wavelengths_um.end() && *it == lam) return;
        const std::size_t pos = static_cast<std::size_t>(it - out.wavelengths_um.begin());
        const double v = t.at_wavelength(lam);
        out.wavelengths_um.insert(out.wavelengths_um.begin() + static_cast<std::ptrdiff_t>(pos),
                                  lam);
        out.kappa.insert(out.kappa.begin() + static_cast<std::ptrdiff_t>(pos), v);
    };
    const double eps = 1e-9;
    insert_node(m.band_lo_um - eps);
    insert_node(m.band_lo_um);
    insert_node(m.band_hi_um);
    insert_node(m.band_hi_um + eps);
    for (std::size_t i = 0; i < out.wavelengths_um.size(); ++i)
        out.kappa[i] += m.added(out.wavelengths_um[i]);
    out.validate();
    return out;
}

// ---------------------------------------------------------------------------
// Run configuration: flat key = value text with section prefixes.

struct RunConfig {
    std::string case_name = "case1";  // case1 | case2
    std::string out_dir = "out";

    std::size_t z_nodes = 100;
    std::size_t nu_nodes = 128;
    double nu_min = 0.005;
    double nu_max = 20.0;

    std::string profile_kind = "constant";  // constant | cloud | table
    double eps = 0.01;
    double slab_lo = 0.5;
    double slab_hi = 0.7;
    std::string profile_file;

    std::string kappa_source = "constant";  // constant | file
    std::string kappa_file;
    double kappa_constant = 0.5;
    double kappa_floor = 1e-3;
    std::string kappa_shape = "uniform";  // uniform | linear_decay

    double co2_level = 0.0;
    double co2_lo_um = 14.0;
    double co2_hi_um = 18.0;

    ScatteringModel scattering;
    BoundarySources boundary;

    double tol = 1e-4;
    int max_iter = 60;
    std::string kernel = "table";  // table | direct
    double trace_z = 0.03;
    double hot_factor = 1.5;
    std::string t_update = "previous";  // previous | updated

    QuadratureSpec quad;
    std::size_t n_kappa = 50;
    std::size_t n_threads = 0;

    double reconstruct_nu = 0.1436;
    std::size_t reconstruct_n_mu = 200;
    bool clamp_k0 = false;
};

namespace detail {

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        while (pos < v.size() && std::isspace(static_cast<unsigned char>(v[pos]))) ++pos;
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (...) {
        throw ConfigError("config: bad numeric value for " + key + ": '" + v + "'");
    }
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: bad boolean value for " + key + ": '" + v + "'");
}

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace detail

inline void apply_case_preset(RunConfig& c) {
    if (c.case_name == "case1") {
        c.boundary.c_E = 2.5;
        c.boundary.c_S = 0.0;
    } else if (c.case_name == "case2") {
        c.boundary.c_E = 0.0;
        c.boundary.c_S = 2e-5;
    } else {
        throw ConfigError("config: unknown case '" + c.case_name + "'");
    }
}

inline RunConfig parse_config(std::istream& is) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: missing '=' at line " + std::to_string(lineno));
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string val = detail::trim(t.substr(eq + 1));
        if (key.empty()) throw ConfigError("config: empty key at line " + std::to_string(lineno));
        kv[key] = val;
    }

    RunConfig c;
    if (auto it = kv.find("case"); it != kv.end()) c.case_name = it->second;
    apply_case_preset(c);

    auto take = [&](const char* key, auto&& setter) {
        if (auto it = kv.find(key); it != kv.end()) {
            setter(it->second);
            kv.erase(it);
        }
    };
    kv.erase("case");
    using detail::to_bool;
    using detail::to_double;

    take("out", [&](const std::string& v) { c.out_dir = v; });
    take("grid.z_nodes", [&](const std::string& v) {
        c.z_nodes = static_cast<std::size_t>(to_double("grid.z_nodes", v));
    });
    take("grid.nu_nodes", [&](const std::string& v) {
        c.nu_nodes = static_cast<std::size_t>(to_double("grid.nu_nodes", v));
    });
    take("grid.nu_min", [&](const std::string& v) { c.nu_min = to_double("grid.nu_min", v); });
    take("grid.nu_max", [&](const std::string& v) { c.nu_max = to_double("grid.nu_max", v); });
    take("profile.kind", [&](const std::string& v) { c.profile_kind = v; });
    take("profile.eps", [&](const std::string& v) { c.eps = to_double("profile.eps", v); });
    take("profile.z1", [&](const std::string& v) { c.slab_lo = to_double("profile.z1", v); });
    take("profile.z2", [&](const std::string& v) { c.slab_hi = to_double("profile.z2", v); });
    take("profile.file", [&](const std::string& v) { c.profile_file = v; });
    take("kappa.source", [&](const std::string& v) { c.kappa_source = v; });
    take("kappa.file", [&](const std::string& v) { c.kappa_file = v; });
    take("kappa.constant",
         [&](const std::string& v) { c.kappa_constant = to_double("kappa.constant", v); });
    take("kappa.floor", [&](const std::string& v) { c.kappa_floor = to_double("kappa.floor", v); });
    take("kappa.shape", [&](const std::string& v) { c.kappa_shape = v; });
    take("co2.level", [&](const std::string& v) { c.co2_level = to_double("co2.level", v); });
    take("co2.lo_um", [&](const std::string& v) { c.co2_lo_um = to_double("co2.lo_um", v); });
    take("co2.hi_um", [&](const std::string& v) { c.co2_hi_um = to_double("co2.hi_um", v); });
    take("scattering.beta",
         [&](const std::string& v) { c.scattering.beta = to_double("scattering.beta", v); });
    take("scattering.a1",
         [&](const std::string& v) { c.scattering.a1 = to_double("scattering.a1", v); });
    take("scattering.a2",
         [&](const std::string& v) { c.scattering.a2 = to_double("scattering.a2", v); });
    take("scattering.z1",
         [&](const std::string& v) { c.scattering.z1 = to_double("scattering.z1", v); });
    take("scattering.z2",
         [&](const std::string& v) { c.scattering.z2 = to_double("scattering.z2", v); });
    take("scattering.nu1",
         [&](const std::string& v) { c.scattering.nu1 = to_double("scattering.nu1", v); });
    take("scattering.nu2",
         [&](const std::string& v) { c.scattering.nu2 = to_double("scattering.nu2", v); });
    take("boundary.c_E",
         [&](const std::string& v) { c.boundary.c_E = to_double("boundary.c_E", v); });
    take("boundary.T_E",
         [&](const std::string& v) { c.boundary.T_E = to_double("boundary.T_E", v); });
    take("boundary.c_S",
         [&](const std::string& v) { c.boundary.c_S = to_double("boundary.c_S", v); });
    take("boundary.T_S",
         [&](const std::string& v) { c.boundary.T_S = to_double("boundary.T_S", v); });
    take("boundary.polarized",
         [&](const std::string& v) { c.boundary.polarized = to_bool("boundary.polarized", v); });
    take("solver.tol", [&](const std::string& v) { c.tol = to_double("solver.tol", v); });
    take("solver.max_iter", [&](const std::string& v) {
        c.max_iter = static_cast<int>(to_double("solver.max_iter", v));
    });
    take("solver.kernel", [&](const std::string& v) { c.kernel = v; });
    take("solver.trace_z",
         [&](const std::string& v) { c.trace_z = to_double("solver.trace_z", v); });
    take("solver.hot_factor",
         [&](const std::string& v) { c.hot_factor = to_double("solver.hot_factor", v); });
    take("solver.t_update", [&](const std::string& v) { c.t_update = v; });
    take("quad.delta_mu",
         [&](const std::string& v) { c.quad.delta_mu = to_double("quad.delta_mu", v); });
    take("quad.mu_switch",
         [&](const std::string& v) { c.quad.mu_switch = to_double("quad.mu_switch", v); });
    take("quad.dz_inner",
         [&](const std::string& v) { c.quad.dz_inner = to_double("quad.dz_inner", v); });
    take("quad.delta_mu_oracle", [&](const std::string& v) {
        c.quad.delta_mu_oracle = to_double("quad.delta_mu_oracle", v);
    });
    take("table.n_kappa", [&](const std::string& v) {
        c.n_kappa = static_cast<std::size_t>(to_double("table.n_kappa", v));
    });
    take("table.n_threads", [&](const std::string& v) {
        c.n_threads = static_cast<std::size_t>(to_double("table.n_threads", v));
    });
    take("reconstruct.nu",
         [&](const std::string& v) { c.reconstruct_nu = to_double("reconstruct.nu", v); });
    take("reconstruct.n_mu", [&](const std::string& v) {
        c.reconstruct_n_mu = static_cast<std::size_t>(to_double("reconstruct.n_mu", v));
    });
    take("output.clamp_k0",
         [&](const std::string& v) { c.clamp_k0 = to_bool("output.clamp_k0", v); });

    if (!kv.empty()) throw ConfigError("config: unknown key '" + kv.begin()->first + "'");
    return c;
}

inline RunConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    return parse_config(is);
}

inline std::string serialize_config(const RunConfig& c) {
    std::ostringstream os;
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    os << "case = " << c.case_name << "\n";
    os << "out = " << c.out_dir << "\n";
    os << "grid.z_nodes = " << c.z_nodes << "\n";
    os << "grid.nu_nodes = " << c.nu_nodes << "\n";
    os << "grid.nu_min = " << num(c.nu_min) << "\n";
    os << "grid.nu_max = " << num(c.nu_max) << "\n";
    os << "profile.kind = " << c.profile_kind << "\n";
    os << "profile.eps = " << num(c.eps) << "\n";
    os << "profile.z1 = " << num(c.slab_lo) << "\n";
    os << "profile.z2 = " << num(c.slab_hi) << "\n";
    if (!c.profile_file.empty()) os << "profile.file = " << c.profile_file << "\n";
    os << "kappa.source = " << c.kappa_source << "\n";
    if (!c.kappa_file.empty()) os << "kappa.file = " << c.kappa_file << "\n";
    os << "kappa.constant = " << num(c.kappa_constant) << "\n";
    os << "kappa.floor = " << num(c.kappa_floor) << "\n";
    os << "kappa.shape = " << c.kappa_shape << "\n";
    os << "co2.level = " << num(c.co2_level) << "\n";
    os << "co2.lo_um = " << num(c.co2_lo_um) << "\n";
    os << "co2.hi_um = " << num(c.co2_hi_um) << "\n";
    os << "scattering.beta = " << num(c.scattering.beta) << "\n";
    os << "scattering.a1 = " << num(c.scattering.a1) << "\n";
    os << "scattering.a2 = " << num(c.scattering.a2) << "\n";
    os << "scattering.z1 = " << num(c.scattering.z1) << "\n";
    os << "scattering.z2 = " << num(c.scattering.z2) << "\n";
    os << "scattering.nu1 = " << num(c.scattering.nu1) << "\n";
    os << "scattering.nu2 = " << num(c.scattering.nu2) << "\n";
    os << "boundary.c_E = " << num(c.boundary.c_E) << "\n";
    os << "boundary.T_E = " << num(c.boundary.T_E) << "\n";
    os << "boundary.c_S = " << num(c.boundary.c_S) << "\n";
    os << "boundary.T_S = " << num(c.boundary.T_S) << "\n";
    os << "boundary.polarized = " << (c.boundary.polarized ? "true" : "false") << "\n";
    os << "solver.tol = " << num(c.tol) << "\n";
    os << "solver.max_iter = " << c.max_iter << "\n";
    os << "solver.kernel = " << c.kernel << "\n";
    os << "solver.trace_z = " << num(c.trace_z) << "\n";
    os << "solver.hot_factor = " << num(c.hot_factor) << "\n";
    os << "solver.t_update = " << c.t_update << "\n";
    os << "quad.delta_mu = " << num(c.quad.delta_mu) << "\n";
    os << "quad.mu_switch = " << num(c.quad.mu_switch) << "\n";
    os << "quad.dz_inner = " << num(c.quad.dz_inner) << "\n";
    os << "quad.delta_mu_oracle = " << num(c.quad.delta_mu_oracle) << "\n";
    os << "table.n_kappa = " << c.n_kappa << "\n";
    os << "reconstruct.nu = " << num(c.reconstruct_nu) << "\n";
    os << "reconstruct.n_mu = " << c.reconstruct_n_mu << "\n";
    os << "output.clamp_k0 = " << (c.clamp_k0 ? "true" : "false") << "\n";
    return os.str();
}

inline std::uint64_t config_hash(const RunConfig& c) {
    const std::string s = serialize_config(c);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

// Build the scenario a configuration describes. Paths in the config are
// resolved relative to base_dir when given.
inline AtmosphereScenario make_scenario(const RunConfig& c, const std::string& base_dir = "") {
    auto resolve = [&](const std::string& p) {
        if (p.empty() || base_dir.empty()) return p;
        std::filesystem::path fp(p);
        if (fp.is_absolute()) return p;
        return (std::filesystem::path(base_dir) / fp).string();
    };
    AtmosphereScenario s;
    s.z_grid = AtmosphereScenario::uniform_grid(c.z_nodes);
    s.freq = FrequencyGrid::geometric(c.nu_min, c.nu_max, c.nu_nodes);
    if (c.profile_kind == "constant") {
        s.profile = RefractiveProfile::constant();
    } else if (c.profile_kind == "cloud") {
        s.profile = RefractiveProfile::cloud_slab(c.eps, c.slab_lo, c.slab_hi);
    } else if (c.profile_kind == "table") {
        std::ifstream is(resolve(c.profile_file));
        if (!is) throw ConfigError("profile table: cannot open " + c.profile_file);
        std::vector<std::pair<double, double>> zn;
        double z, n;
        while (is >> z >> n) zn.emplace_back(z, n);
        s.profile = RefractiveProfile::from_table(std::move(zn));
    } else {
        throw ConfigError("config: unknown profile.kind '" + c.profile_kind + "'");
    }
    if (c.kappa_source == "constant") {
        s.kappa = KappaModel::constant(c.kappa_constant);
    } else if (c.kappa_source == "file") {
        KappaTable t = load_kappa(resolve(c.kappa_file), c.kappa_floor);
        if (c.co2_level > 0.0)
            t = apply_co2(t, Co2Modifier{c.co2_lo_um, c.co2_hi_um, c.co2_level});
        s.kappa = KappaModel::from_table(std::move(t));
    } else {
        throw ConfigError("config: unknown kappa.source '" + c.kappa_source + "'");
    }
    if (c.kappa_shape == "uniform")
        s.kappa.shape = KappaModel::Shape::uniform;
    else if (c.kappa_shape == "linear_decay")
        s.kappa.shape = KappaModel::Shape::linear_decay;
    else
        throw ConfigError("config: unknown kappa.shape '" + c.kappa_shape + "'");
    s.scattering = c.scattering;
    s.boundary = c.boundary;
    s.validate();
    return s;
}

inline SolveOptions make_solve_options(const RunConfig& c) {
    SolveOptions o;
    o.tol = c.tol;
    o.max_iter = c.max_iter;
    if (c.kernel == "table")
        o.kernel = KernelMode::table;
    else if (c.kernel == "direct")
        o.kernel = KernelMode::direct;
    else
        throw ConfigError("config: unknown solver.kernel '" + c.kernel + "'");
    o.quad = c.quad;
    o.n_kappa = c.n_kappa;
    o.n_threads = c.n_threads;
    o.trace_z = c.trace_z;
    o.hot_factor = c.hot_factor;
    if (c.t_update == "previous")
        o.t_update = TemperatureUpdate::from_previous_moments;
    else if (c.t_update == "updated")
        o.t_update = TemperatureUpdate::from_updated_moments;
    else
        throw ConfigError("config: unknown solver.t_update '" + c.t_update + "'");
    return o;
}

// ---------------------------------------------------------------------------
// Writers. All tables are plain text, whitespace separated, 9 significant
// digits, deterministic ordering, '#' headers carrying the config hash.

namespace detail {

inline std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return std::string(buf);
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open output file " + path);
    return os;
}

}  // namespace detail

inline void write_temperature(const std::string& path, const AtmosphereScenario& s,
                              const RadiationState& st, std::uint64_t hash) {
    auto os = detail::open_out(path);
    os << "# z  T_scaled  T_kelvin  T_celsius\n";
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
    os << "# config " << hex << "\n";
    for (std::size_t iz = 0; iz < s.nz(); ++iz)
        os << detail::fmt9(s.z_grid[iz]) << ' ' << detail::fmt9(st.T[iz]) << ' '
           << detail::fmt9(kelvin(st.T[iz])) << ' ' << detail::fmt9(celsius(st.T[iz])) << "\n";
}

// J0 and K0 against wavelength at one altitude, in physical units (times
// n^2). The optional clamp reproduces the display convention
// K0 -> max(K0, -2e-6).
inline void write_spectra(const std::string& path, const AtmosphereScenario& s,
                          const RadiationState& st, std::size_t iz, bool clamp_k0,
                          std::uint64_t hash) {
    auto os = detail::open_out(path);
    os << "# lambda_um  nu  J0  K0" << (clamp_k0 ? "_clamped" : "") << "\n";
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
    os << "# config " << hex << "  z = " << detail::fmt9(s.z_grid[iz]) << "\n";
    const double n = s.profile(s.z_grid[iz]);
    const double n2 = n * n;
    for (std::size_t inu = s.nnu(); inu-- > 0;) {  // ascending wavelength
        const double nu = s.freq.nodes[inu];
        double j0 = n2 * st.J0[st.idx(inu, iz)];
        double k0 = n2 * st.K0[st.idx(inu, iz)];
        if (clamp_k0) k0 = std::max(k0, -2e-6);
        os << detail::fmt9(wavelength_um(nu)) << ' ' << detail::fmt9(nu) << ' '
           << detail::fmt9(j0) << ' ' << detail::fmt9(k0) << "\n";
    }
}

inline void write_convergence(const std::string& path, const IterationReport& rep,
                              std::uint64_t hash) {
    auto os = detail::open_out(path);
    os << "# iteration  branch  T_trace_scaled  T_trace_celsius  max_dT  bracket_width\n";
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
    os << "# config " << hex << "  trace_z = " << detail::fmt9(rep.trace_z) << "\n";
    for (const auto& r : rep.records) {
        os << r.iteration << " inc " << detail::fmt9(r.T_inc_trace) << ' '
           << detail::fmt9(celsius(r.T_inc_trace)) << ' ' << detail::fmt9(r.max_dT_inc) << ' '
           << detail::fmt9(r.bracket_width) << "\n";
        os << r.iteration << " dec " << detail::fmt9(r.T_dec_trace) << ' '
           << detail::fmt9(celsius(r.T_dec_trace)) << ' ' << detail::fmt9(r.max_dT_dec) << ' '
           << detail::fmt9(r.bracket_width) << "\n";
    }
}

inline void write_diagnostic(const std::string& path, const ContractionDiagnostic& d,
                             std::uint64_t hash) {
    auto os = detail::open_out(path);
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
    os << "# contraction diagnostic, config " << hex << "\n";
    os << "kappa_m " << detail::fmt9(d.kappa_m) << "\n";
    os << "kappa_M " << detail::fmt9(d.kappa_M) << "\n";
    os << "eps_M " << detail::fmt9(d.eps_M) << "\n";
    os << "a_m " << detail::fmt9(d.a_m) << "\n";
    os << "a_M " << detail::fmt9(d.a_M) << "\n";
    os << "beta_M " << detail::fmt9(d.beta_M) << "\n";
    os << "eta " << detail::fmt9(d.eta_ratio) << "\n";
    os << "R " << detail::fmt9(d.R) << "\n";
    os << "geometric_certificate " << (d.certified() ? "yes" : "no") << "\n";
}

// Surface export: (z, mu, value) triples, blank line between z blocks,
// forbidden cells omitted.
inline void write_surface(const std::string& path, const StokesField& f, char channel,
                          std::uint64_t hash) {
    auto os = detail::open_out(path);
    os << "# z  mu  " << channel << "   nu = " << detail::fmt9(f.nu) << "\n";
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
    os << "# config " << hex << "\n";
    const auto& v = (channel == 'Q') ? f.Q : f.I;
    for (std::size_t iz = 0; iz < f.z_nodes.size(); ++iz) {
        for (std::size_t imu = 0; imu < f.mu_nodes.size(); ++imu) {
            const std::size_t o = f.idx(iz, imu);
            if (!f.valid[o]) continue;
            os << detail::fmt9(f.z_nodes[iz]) << ' ' << detail::fmt9(f.mu_nodes[imu]) << ' '
               << detail::fmt9(v[o]) << "\n";
        }
        os << "\n";
    }
}

inline void write_outputs(const std::string& dir, const AtmosphereScenario& s,
                          const SolveResult& res, const RunConfig& cfg) {
    std::filesystem::create_directories(dir);
    const std::uint64_t h = config_hash(cfg);
    write_temperature(dir + "/temperature.txt", s, res.state, h);
    write_spectra(dir + "/spectra_z0.txt", s, res.state, 0, cfg.clamp_k0, h);
    write_spectra(dir + "/spectra_zZ.txt", s, res.state, s.nz() - 1, cfg.clamp_k0, h);
    write_convergence(dir + "/convergence.txt", res.report, h);
    write_diagnostic(dir + "/diagnostic.txt", contraction_ratio(s), h);
}

}  // namespace vrte

#endif  // VRTE_SCENARIO_IO_HPP
