#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "axial.hpp"
#include "fields.hpp"
#include "io.hpp"
#include "perturbation.hpp"
#include "vortex.hpp"

namespace burgers {

struct Tier {
    std::string name;
    int N_perp = 128;
    int N_3 = 64;
    double dt = 0.01;
};

inline Tier tier(const std::string& name) {
    if (name == "coarse") return {name, 64, 32, 0.02};
    if (name == "standard") return {name, 128, 64, 0.01};
    if (name == "fine") return {name, 256, 128, 0.005};
    throw std::invalid_argument("unknown tier '" + name + "' (coarse, standard, fine)");
}

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Stability experiment. Text form: one "key = value" per line, '#' comments,
// nested keys dotted (grid.N_perp). A JSON object with the same nesting is
// also accepted.
struct StabilityConfig {
    double lambda = 0.0, rho = 0.1, m = 2.0;
    std::string tier = "standard";
    double L_perp = 12.0, L_3 = 8.0;
    int N_perp = 128, N_3 = 64;
    double dt = 0.01, T = 10.0;
    std::uint64_t seed = 1;
    std::string initial_type = "builtin";  // builtin | file
    std::string initial_name = "sym-shift";  // sym-shift | decay | equilibrium | random
    std::string initial_file;
    double amplitude = 0.01;      // ||omega0||_{X2(2)}
    double phi_amplitude = 0.02;  // phi0 = phi_amplitude * exp(-x3^2)
    double measure_interval = 4.0;
    std::vector<int> measure_slices;
    int sample_every = 10;
    int checkpoint_every = 0;
    double fit_t0 = 2.0;
    double vortex_tol = 1e-9;

    static StabilityConfig builtin(const std::string& name, const std::string& tier_name = "standard") {
        StabilityConfig c;
        c.set_tier(tier_name);
        c.initial_name = name;
        if (name == "equilibrium") { c.amplitude = 0.0; c.phi_amplitude = 0.0; }
        else if (name == "decay") c.phi_amplitude = 0.0;
        c.validate();
        return c;
    }

    void set_tier(const std::string& name) {
        Tier t = burgers::tier(name);
        tier = t.name;
        N_perp = t.N_perp;
        N_3 = t.N_3;
        dt = t.dt;
    }

    Grid3D grid() const { return Grid3D(Grid2D(L_perp, N_perp), L_3, N_3); }
    VortexParams params() const { return {lambda, rho, m}; }

    void validate() const {
        auto need = [](bool ok, const std::string& msg) {
            if (!ok) throw ConfigError(msg);
        };
        need(lambda >= 0.0 && lambda < 1.0, "lambda: must lie in [0,1)");
        need(std::isfinite(rho), "rho: must be finite");
        need(m > 1.5, "m: must exceed 3/2");
        need(L_perp > 0.0 && L_3 > 0.0, "grid: half-widths must be positive");
        need(N_perp >= 16 && N_perp % 2 == 0, "grid.N_perp: must be even and >= 16");
        need(N_3 >= 4, "grid.N_3: must be >= 4");
        need(dt > 0.0, "dt: must be positive");
        need(T >= 0.0, "T: must be non-negative");
        need(std::abs(std::llround(T / dt) * dt - T) <= 1e-9 * std::max(1.0, T), "T: must be a multiple of dt");
        need(initial_type == "builtin" || initial_type == "file", "initial.type: builtin or file");
        if (initial_type == "builtin")
            need(initial_name == "sym-shift" || initial_name == "decay" || initial_name == "equilibrium" ||
                     initial_name == "random",
                 "initial.name: sym-shift, decay, equilibrium or random");
        else
            need(!initial_file.empty(), "initial.file: required for initial.type = file");
        need(amplitude >= 0.0, "initial.amplitude: must be non-negative");
        need(std::isfinite(phi_amplitude), "initial.phi_amplitude: must be finite");
        need(measure_interval > 0.0, "measure.interval: must be positive");
        for (int k : measure_slices) need(k >= 0 && k < N_3, "measure.slices: index out of range");
        need(sample_every >= 1, "output.sample_every: must be positive");
        need(checkpoint_every >= 0, "output.checkpoint_every: must be non-negative");
        need(checkpoint_every % sample_every == 0, "output.checkpoint_every: must be a multiple of output.sample_every");
        need(vortex_tol > 0.0, "vortex.tol: must be positive");
    }

    io::json to_json() const {
        return io::json{{"lambda", lambda},
                        {"rho", rho},
                        {"m", m},
                        {"tier", tier},
                        {"grid", {{"L_perp", L_perp}, {"N_perp", N_perp}, {"L_3", L_3}, {"N_3", N_3}}},
                        {"dt", dt},
                        {"T", T},
                        {"seed", seed},
                        {"initial",
                         {{"type", initial_type},
                          {"name", initial_name},
                          {"file", initial_file},
                          {"amplitude", amplitude},
                          {"phi_amplitude", phi_amplitude}}},
                        {"measure", {{"interval", measure_interval}, {"slices", measure_slices}, {"fit_t0", fit_t0}}},
                        {"output", {{"sample_every", sample_every}, {"checkpoint_every", checkpoint_every}}},
                        {"vortex", {{"tol", vortex_tol}}}};
    }

    EvolutionConfig evolution() const {
        EvolutionConfig e;
        e.params = params();
        e.grid = grid();
        e.dt = dt;
        e.T = T;
        e.measure_half_width = measure_interval;
        e.circ_slices = measure_slices;
        e.sample_every = sample_every;
        e.fit_t0 = fit_t0;
        return e;
    }
};

namespace detail {

inline void flatten(const io::json& j, const std::string& prefix, std::map<std::string, std::string>& out) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (it->is_object()) flatten(*it, key, out);
        else if (it->is_string()) out[key] = it->get<std::string>();
        else if (it->is_array()) {
            std::string s;
            for (const auto& e : *it) s += (s.empty() ? "" : ",") + e.dump();
            out[key] = s;
        } else out[key] = it->dump();
    }
}

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
}

inline long long to_int(const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    if (d != std::floor(d)) throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return static_cast<long long>(d);
}

}  // namespace detail

inline std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        try {
            detail::flatten(io::json::parse(text), "", kv);
        } catch (const io::json::exception& e) {
            throw ConfigError(std::string("config: malformed JSON: ") + e.what());
        }
        return kv;
    }
    std::istringstream in(text);
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
        ++no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(no) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq)), value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(no) + ": empty key");
        kv[key] = value;
    }
    return kv;
}

inline StabilityConfig stability_config_from(const std::map<std::string, std::string>& kv) {
    StabilityConfig c;
    auto it = kv.find("tier");
    if (it != kv.end()) {
        try {
            c.set_tier(it->second);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("tier: ") + e.what());
        }
    }
    for (const auto& [k, v] : kv) {
        if (k == "tier") continue;
        else if (k == "lambda") c.lambda = detail::to_double(k, v);
        else if (k == "rho") c.rho = detail::to_double(k, v);
        else if (k == "m") c.m = detail::to_double(k, v);
        else if (k == "grid.L_perp") c.L_perp = detail::to_double(k, v);
        else if (k == "grid.N_perp") c.N_perp = int(detail::to_int(k, v));
        else if (k == "grid.L_3") c.L_3 = detail::to_double(k, v);
        else if (k == "grid.N_3") c.N_3 = int(detail::to_int(k, v));
        else if (k == "dt") c.dt = detail::to_double(k, v);
        else if (k == "T") c.T = detail::to_double(k, v);
        else if (k == "seed") {
            const long long s = detail::to_int(k, v);
            if (s < 0) throw ConfigError("seed: must be non-negative");
            c.seed = std::uint64_t(s);
        } else if (k == "initial.type") c.initial_type = v;
        else if (k == "initial.name") c.initial_name = v;
        else if (k == "initial.file") c.initial_file = v;
        else if (k == "initial.amplitude") c.amplitude = detail::to_double(k, v);
        else if (k == "initial.phi_amplitude") c.phi_amplitude = detail::to_double(k, v);
        else if (k == "measure.interval") c.measure_interval = detail::to_double(k, v);
        else if (k == "measure.fit_t0") c.fit_t0 = detail::to_double(k, v);
        else if (k == "measure.slices") {
            c.measure_slices.clear();
            std::stringstream ss(v);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!detail::trim(item).empty()) c.measure_slices.push_back(int(detail::to_int(k, detail::trim(item))));
        } else if (k == "output.sample_every") c.sample_every = int(detail::to_int(k, v));
        else if (k == "output.checkpoint_every") c.checkpoint_every = int(detail::to_int(k, v));
        else if (k == "vortex.tol") c.vortex_tol = detail::to_double(k, v);
        else throw ConfigError(k + ": unknown key");
    }
    if (c.initial_type == "builtin" && !kv.count("initial.amplitude") && c.initial_name == "equilibrium") c.amplitude = 0.0;
    if (c.initial_type == "builtin" && !kv.count("initial.phi_amplitude") &&
        (c.initial_name == "equilibrium" || c.initial_name == "decay"))
        c.phi_amplitude = 0.0;
    c.validate();
    return c;
}

inline StabilityConfig parse_stability_config(const std::string& text) {
    return stability_config_from(parse_key_values(text));
}

// w3 = A x1 exp(-|x_perp|^2/4) exp(-x3^2/2), mean-free on every slice
inline SlicedField3D dipole_bump(const Grid3D& g) {
    Field2D perp = Field2D::sample(g.perp, [](double x1, double x2) { return x1 * std::exp(-(x1 * x1 + x2 * x2) / 4.0); });
    std::vector<double> ax(g.N3);
    for (int k = 0; k < g.N3; ++k) ax[k] = std::exp(-0.5 * g.x3(k) * g.x3(k));
    return SlicedField3D::outer(g, ax, perp);
}

// three seeded Gaussian blobs, projected to zero mean slice by slice
inline SlicedField3D random_bump(const Grid3D& g, std::uint64_t seed, const Field2D& profile) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> c(-2.0, 2.0), c3(-1.0, 1.0), sgn(-1.0, 1.0);
    SlicedField3D w(g);
    for (int b = 0; b < 3; ++b) {
        const double a1 = c(rng), a2 = c(rng), a3 = c3(rng), s = sgn(rng);
        for (int k = 0; k < g.N3; ++k)
            for (int i = 0; i < g.perp.N; ++i)
                for (int j = 0; j < g.perp.N; ++j) {
                    const double x1 = g.perp.x(i) - a1, x2 = g.perp.x(j) - a2, x3 = g.x3(k) - a3;
                    w(k, i, j) += s * std::exp(-(x1 * x1 + x2 * x2) / 2.0 - x3 * x3 / 2.0);
                }
    }
    project_zero_mean_slices(w, profile);
    return w;
}

inline std::vector<double> gaussian_phi0(const Grid3D& g, double amplitude) {
    std::vector<double> p(g.N3);
    for (int k = 0; k < g.N3; ++k) p[k] = amplitude * std::exp(-g.x3(k) * g.x3(k));
    return p;
}

// Omega0 = Omega^B(rho + phi0(x3)) e3 + (0, 0, w3)
inline Triple initial_vorticity(const StabilityConfig& c, const VortexFamily& fam) {
    const Grid3D g = c.grid();
    if (c.initial_type == "file") {
        auto f = io::read_fields3d(c.initial_file, g, 3);
        return Triple{std::move(f[0]), std::move(f[1]), std::move(f[2])};
    }
    SlicedField3D w3(g);
    if (c.amplitude > 0.0) {
        if (c.initial_name == "random") w3 = random_bump(g, c.seed, invariant_profile(c.params().alphas(), g.perp));
        else if (c.initial_name != "equilibrium") w3 = dipole_bump(g);
        const double n = norm_X2m(w3, 2.0);
        if (n > 0.0) w3 *= c.amplitude / n;
    }
    const std::vector<double> phi0 = gaussian_phi0(g, c.phi_amplitude);
    std::vector<double> slice(g.perp.size());
    for (int k = 0; k < g.N3; ++k) {
        fam.omega_into(c.rho + phi0[k], slice.data());
        double* s = w3.slice_data(k);
        for (std::size_t q = 0; q < slice.size(); ++q) s[q] += slice[q];
    }
    return Triple{SlicedField3D(g), SlicedField3D(g), std::move(w3)};
}

}  // namespace burgers
