#include "cyldtn/cli.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "cyldtn/oracles.hpp"
#include "cyldtn/validation.hpp"
#include "util.hpp"

namespace cyldtn {

namespace {

struct KeyValue {
    std::string value;
    int line;
    bool used = false;
};

using Sections = std::map<std::string, std::map<std::string, KeyValue>>;

Sections tokenize(const std::string& text) {
    Sections sec;
    std::string current = "";
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": malformed section header");
            current = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
        auto& smap = sec[current];
        if (smap.count(key))
            throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key `" +
                              key + "` in section [" + current + "]");
        smap[key] = {value, lineno, false};
    }
    return sec;
}

double to_double(const std::string& section, const std::string& key, const KeyValue& kv) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(kv.value, &pos);
        if (pos != kv.value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError("config line " + std::to_string(kv.line) + ": key `" + key +
                          "` in [" + section + "] is not a number");
    }
}

int to_int(const std::string& section, const std::string& key, const KeyValue& kv) {
    const double v = to_double(section, key, kv);
    if (v != std::floor(v))
        throw ConfigError("config line " + std::to_string(kv.line) + ": key `" + key +
                          "` must be an integer");
    return int(v);
}

Complex to_complex(const std::string& section, const std::string& key, const KeyValue& kv) {
    const auto comma = kv.value.find(',');
    if (comma == std::string::npos)
        return Complex(to_double(section, key, kv), 0.0);
    KeyValue re{kv.value.substr(0, comma), kv.line};
    KeyValue im{kv.value.substr(comma + 1), kv.line};
    return Complex(to_double(section, key, re), to_double(section, key, im));
}

class SectionReader {
  public:
    SectionReader(Sections& sec, std::string name) : sec_(sec), name_(std::move(name)) {}
    bool has(const std::string& key) const {
        auto it = sec_.find(name_);
        return it != sec_.end() && it->second.count(key);
    }
    double number(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        auto& kv = sec_[name_][key];
        kv.used = true;
        return to_double(name_, key, kv);
    }
    int integer(const std::string& key, int fallback) {
        if (!has(key)) return fallback;
        auto& kv = sec_[name_][key];
        kv.used = true;
        return to_int(name_, key, kv);
    }
    std::string text(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        auto& kv = sec_[name_][key];
        kv.used = true;
        return kv.value;
    }
    Complex complex_value(const std::string& key, Complex fallback) {
        if (!has(key)) return fallback;
        auto& kv = sec_[name_][key];
        kv.used = true;
        return to_complex(name_, key, kv);
    }

  private:
    Sections& sec_;
    std::string name_;
};

PotentialTerm parse_term(Sections& sec, const std::string& prefix, int line_hint) {
    SectionReader pot(sec, "potential");
    PotentialTerm t;
    const std::string prof = pot.text(prefix + "profile", "well");
    if (prof == "well") t.profile = RadialProfile::Well;
    else if (prof == "gaussian") t.profile = RadialProfile::Gaussian;
    else
        throw ConfigError("config: potential profile `" + prof +
                          "` unknown (well | gaussian), near line " + std::to_string(line_hint));
    t.amplitude = pot.number(prefix + "amplitude", 1.0);
    t.well_radius = pot.number(prefix + "well_radius", 1.0);
    t.sigma = pot.number(prefix + "sigma", 0.5);
    t.coeff.clear();
    for (int w = 0;; ++w) {
        const std::string key = prefix + "coeff_" + std::to_string(w);
        if (!pot.has(key)) break;
        t.coeff.push_back(pot.complex_value(key, Complex(0.0, 0.0)));
    }
    if (t.coeff.empty()) t.coeff.push_back(Complex(1.0, 0.0));
    return t;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    Sections sec = tokenize(text);
    static const std::map<std::string, int> known_sections = {
        {"geometry", 0}, {"potential", 0}, {"truncation", 0},
        {"tolerances", 0}, {"scan", 0}, {"transport", 0}, {"oracle", 0}};
    for (const auto& [name, _] : sec)
        if (!known_sections.count(name))
            throw ConfigError("config: unknown section [" + name + "]");

    RunConfig rc;
    {
        SectionReader geo(sec, "geometry");
        rc.wg.n = geo.integer("n", 2);
        rc.wg.radius = geo.number("radius", 1.5);
    }
    {
        rc.wg.potential.terms.clear();
        rc.wg.potential.terms.push_back(parse_term(sec, "", 0));
        for (int ti = 2;; ++ti) {
            const std::string prefix = "term" + std::to_string(ti) + "_";
            SectionReader pot(sec, "potential");
            if (!pot.has(prefix + "profile") && !pot.has(prefix + "amplitude")) break;
            rc.wg.potential.terms.push_back(parse_term(sec, prefix, 0));
        }
    }
    {
        SectionReader tr(sec, "truncation");
        rc.wg.trunc.n_r = tr.integer("n_r", 40);
        rc.wg.trunc.ell_max = tr.integer("ell_max", 8);
        rc.wg.trunc.j_max = tr.integer("j_max", 4);
        rc.wg.trunc.q_disc = tr.integer("q_disc", rc.wg.trunc.ell_max + 2);
        rc.wg.trunc.j_disc = tr.integer("j_disc", rc.wg.trunc.j_max);
        rc.wg.trunc.stiffness_refine = tr.integer("stiffness_refine", 1) != 0;
    }
    {
        SectionReader to(sec, "tolerances");
        rc.wg.tol.eps_cross_rel = to.number("eps_cross", 1e-4);
        rc.wg.tol.kernel_tol = to.number("kernel_tol", 1e-6);
        rc.wg.tol.dirichlet_margin_rel = to.number("dirichlet_margin", 1e-3);
        rc.wg.tol.refine_tol = to.number("refine_tol", 1e-10);
    }
    {
        SectionReader sc(sec, "scan");
        rc.scan.k_min = sc.number("k_min", 0.1);
        rc.scan.k_max = sc.number("k_max", 3.0);
        rc.scan.k_count = sc.integer("k_count", 20);
        rc.scan.e_min = sc.number("e_min", -12.0);
        rc.scan.e_max = sc.number("e_max", -0.1);
        rc.scan.e_grid = sc.integer("e_grid", 24);
        rc.scan.band_window = sc.number("band_window", 0.5);
        rc.scan.efn_k = sc.number("eigenfunction_k", 0.7);
        rc.scan.efn_r_max = sc.number("eigenfunction_r_max", 6.0);
    }
    {
        SectionReader tp(sec, "transport");
        rc.transport.envelope_center = tp.number("center", 0.8);
        rc.transport.envelope_width = tp.number("width", 0.15);
        rc.transport.t_max = tp.number("t_max", 1000.0);
        rc.transport.t_count = tp.integer("t_count", 12);
        rc.transport.k_points_min = tp.integer("k_points", 128);
        rc.transport.cell_cap = tp.integer("cell_cap", 20000);
        rc.transport.field_nr = tp.integer("field_nr", 12);
        rc.transport.field_nang = tp.integer("field_nang", 8);
        rc.transport.field_ny = tp.integer("field_ny", 4);
        rc.transport.mass_tol = tp.number("mass_tol", 1e-6);
    }
    {
        SectionReader orc(sec, "oracle");
        rc.oracle.box_L = orc.number("box_L", 12.0);
        rc.oracle.box_nr = orc.integer("box_nr", 84);
    }

    for (const auto& [sname, smap] : sec)
        for (const auto& [key, kv] : smap)
            if (!kv.used)
                throw ConfigError("config line " + std::to_string(kv.line) + ": unknown key `" +
                                  key + "` in section [" + sname + "]");

    try {
        rc.wg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (rc.scan.k_count < 1 || rc.scan.e_grid < 4)
        throw ConfigError("config: k_count >= 1 and e_grid >= 4 required");
    return rc;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string RunConfig::config_hash() const {
    std::ostringstream s;
    s << "n=" << wg.n << ";R=" << util::format_double(wg.radius) << ";";
    for (const auto& t : wg.potential.terms) {
        s << "profile=" << (t.profile == RadialProfile::Well ? "well" : "gaussian")
          << ";amp=" << util::format_double(t.amplitude)
          << ";edge=" << util::format_double(t.well_radius)
          << ";sigma=" << util::format_double(t.sigma) << ";c=";
        for (const auto& c : t.coeff)
            s << util::format_double(c.real()) << "," << util::format_double(c.imag()) << ",";
        s << ";";
    }
    s << "nr=" << wg.trunc.n_r << ";lmax=" << wg.trunc.ell_max << ";jmax=" << wg.trunc.j_max
      << ";Q=" << wg.trunc.q_disc << ";J=" << wg.trunc.j_disc;
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  (unsigned long long)util::fnv1a(s.str()));
    return buf;
}

std::string band_csv(const std::vector<Band>& bands) {
    std::string out = "k,lambda,sigma_min,multiplicity,dlambda_dk\n";
    for (const auto& band : bands) {
        for (std::size_t i = 0; i < band.points.size(); ++i) {
            const auto& p = band.points[i];
            out += util::format_double(p.k) + "," + util::format_double(p.lambda) + "," +
                   util::format_double(p.sigma_min) + "," + std::to_string(p.multiplicity) +
                   "," + util::format_double(band.gradient[i]) + "\n";
        }
    }
    return out;
}

std::string transport_csv(const TransportRecord& rec) {
    std::string out = "t";
    for (int c = 1; c <= rec.n; ++c) out += ",X" + std::to_string(c);
    out += ",Y,norm\n";
    for (std::size_t i = 0; i < rec.t.size(); ++i) {
        out += util::format_double(rec.t[i]);
        for (int c = 0; c < rec.n; ++c) out += "," + util::format_double(rec.X[i][c]);
        out += "," + util::format_double(rec.Y[i]) + "," + util::format_double(rec.norm[i]) +
               "\n";
    }
    return out;
}

std::string bands_to_json(const RunConfig& cfg, const std::vector<Band>& bands) {
    nlohmann::json root;
    root["config_hash"] = cfg.config_hash();
    auto& arr = root["bands"] = nlohmann::json::array();
    for (const auto& band : bands) {
        for (std::size_t i = 0; i < band.points.size(); ++i) {
            const auto& p = band.points[i];
            nlohmann::json jp;
            jp["k"] = p.k;
            jp["lambda"] = p.lambda;
            jp["sigma_min"] = p.sigma_min;
            jp["multiplicity"] = p.multiplicity;
            jp["norm"] = p.norm;
            jp["R_used"] = p.R_used;
            jp["band"] = int(&band - bands.data());
            auto& kern = jp["kernel"] = nlohmann::json::array();
            if (!p.kernel.empty()) {
                const auto& f = p.kernel.front();
                for (int r = 0; r < f.size(); ++r) {
                    if (cfg.wg.n == 2)
                        kern.push_back({f.basis[r].j, f.basis[r].m, f.coeff[r].real(),
                                        f.coeff[r].imag()});
                    else
                        kern.push_back({f.basis[r].j, f.basis[r].ell, f.basis[r].m,
                                        f.coeff[r].real(), f.coeff[r].imag()});
                }
            }
            arr.push_back(std::move(jp));
        }
    }
    return root.dump(1);
}

std::vector<Band> bands_from_json(const std::string& text, const RunConfig& cfg) {
    const auto root = nlohmann::json::parse(text);
    if (root["config_hash"].get<std::string>() != cfg.config_hash())
        throw std::runtime_error(
            "band cache was produced by a different geometry/potential/truncation");
    std::map<int, Band> by_band;
    for (const auto& jp : root["bands"]) {
        BandPoint p;
        p.k = jp["k"].get<double>();
        p.lambda = jp["lambda"].get<double>();
        p.sigma_min = jp["sigma_min"].get<double>();
        p.multiplicity = jp["multiplicity"].get<int>();
        p.norm = jp["norm"].get<double>();
        p.R_used = jp["R_used"].get<double>();
        by_band[jp["band"].get<int>()].points.push_back(std::move(p));
    }
    std::vector<Band> bands;
    for (auto& [_, b] : by_band) {
        std::sort(b.points.begin(), b.points.end(),
                  [](const BandPoint& a, const BandPoint& c) { return a.k < c.k; });
        band_gradient(b);
        bands.push_back(std::move(b));
    }
    return bands;
}

namespace {

namespace fs = std::filesystem;

std::vector<Band> run_dispersion(const RunConfig& cfg, int threads) {
    std::vector<double> kgrid(cfg.scan.k_count);
    for (int i = 0; i < cfg.scan.k_count; ++i)
        kgrid[i] = cfg.scan.k_min +
                   (cfg.scan.k_max - cfg.scan.k_min) * i / std::max(1, cfg.scan.k_count - 1);
    const auto seeds = locate_eigenvalues(cfg.wg, kgrid.front(), cfg.scan.e_min, cfg.scan.e_max,
                                          cfg.scan.e_grid, threads);
    std::vector<Band> bands;
    for (const auto& seed : seeds) {
        Band b = trace_band(cfg.wg, kgrid, seed, cfg.scan.band_window, threads);
        if (!b.points.empty()) bands.push_back(std::move(b));
    }
    return bands;
}

int cmd_dispersion(const RunConfig& cfg, const std::string& out_dir, int threads) {
    const auto bands = run_dispersion(cfg, threads);
    fs::create_directories(out_dir);
    std::ofstream csv(fs::path(out_dir) / "band.csv");
    csv << band_csv(bands);
    std::ofstream cache(fs::path(out_dir) / ("bands_" + cfg.config_hash() + ".json"));
    cache << bands_to_json(cfg, bands);
    std::cout << "dispersion: " << bands.size() << " band(s) written to " << out_dir << "\n";
    return 0;
}

std::vector<Band> load_band_cache(const RunConfig& cfg, const std::string& out_dir) {
    const fs::path p = fs::path(out_dir) / ("bands_" + cfg.config_hash() + ".json");
    if (!fs::exists(p))
        throw std::runtime_error("no band cache found at " + p.string() +
                                 "; run the `dispersion` command first");
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return bands_from_json(ss.str(), cfg);
}

int cmd_transport(const RunConfig& cfg, const std::string& out_dir, int threads) {
    const auto bands = load_band_cache(cfg, out_dir);
    const double lo = cfg.transport.envelope_center - 4.5 * cfg.transport.envelope_width;
    const double hi = cfg.transport.envelope_center + 4.5 * cfg.transport.envelope_width;
    const Band* chosen = nullptr;
    for (const auto& b : bands) {
        if (b.points.size() < 4) continue;
        if (b.points.front().k < lo && b.points.back().k > hi) {
            chosen = &b;
            break;
        }
    }
    if (!chosen)
        throw std::runtime_error("transport: no cached band covers the envelope support");
    const WavepacketSpec packet = build_packet(cfg.wg, *chosen, cfg.transport, threads);
    const TransportRecord rec = transport_record(packet, cfg.transport);
    const VelocityFit fit = velocity_fit(rec, packet);
    fs::create_directories(out_dir);
    std::ofstream csv(fs::path(out_dir) / "transport.csv");
    csv << transport_csv(rec);
    std::cout << "transport: v_y = " << fit.v_y << " (band-average "
              << fit.v_y_expected << "), max |<X>(t)-<X>(0)|/t = " << fit.v_x_max << "\n";
    return 0;
}

int cmd_eigenfunction(const RunConfig& cfg, const std::string& out_dir, int threads) {
    const auto bands = load_band_cache(cfg, out_dir);
    if (bands.empty()) throw std::runtime_error("eigenfunction: band cache is empty");
    // nearest cached sample, then refine at that k
    const BandPoint* near = nullptr;
    for (const auto& b : bands)
        for (const auto& p : b.points)
            if (!near || std::abs(p.k - cfg.scan.efn_k) < std::abs(near->k - cfg.scan.efn_k))
                near = &p;
    const auto pts = locate_eigenvalues(cfg.wg, cfg.scan.efn_k, near->lambda - 0.25,
                                        near->lambda + 0.25, 9, threads);
    if (pts.empty())
        throw std::runtime_error("eigenfunction: no kernel point near the cached band");
    const EigenfunctionField field =
        reconstruct_eigenfunction(cfg.wg, pts.front(), cfg.scan.efn_r_max, 96, 16, 8);
    fs::create_directories(out_dir);
    std::ofstream csv(fs::path(out_dir) / "eigenfunction.csv");
    csv << (cfg.wg.n == 2 ? "r,theta,y,re,im\n" : "r,polar,azimuth,y,re,im\n");
    const int na = field.grid.angular_points();
    const int n_az = cfg.wg.n == 3 ? int(field.grid.ang2.size()) : 1;
    for (int ir = 0; ir < int(field.r.size()); ++ir)
        for (int a = 0; a < na; ++a)
            for (int b = 0; b < int(field.grid.y.size()); ++b) {
                csv << util::format_double(field.r[ir]) << ","
                    << util::format_double(field.grid.ang1[a / n_az]) << ",";
                if (cfg.wg.n == 3) csv << util::format_double(field.grid.ang2[a % n_az]) << ",";
                csv << util::format_double(field.grid.y[b]) << ","
                    << util::format_double(field.values(ir * na + a, b).real()) << ","
                    << util::format_double(field.values(ir * na + a, b).imag()) << "\n";
            }
    std::cout << "eigenfunction: k = " << pts.front().k << ", lambda = " << pts.front().lambda
              << ", trace mismatch " << field.trace_mismatch << ", derivative mismatch "
              << field.deriv_mismatch << "\n";
    return 0;
}

int cmd_oracle_compare(const RunConfig& cfg, const std::string& out_dir, int threads) {
    fs::create_directories(out_dir);
    std::ofstream csv(fs::path(out_dir) / "oracle_compare.csv");
    csv << "k,lambda_dtn,lambda_oracle,diff\n";
    double worst = 0.0;
    if (cfg.wg.potential.y_independent()) {
        RadialProblem pb;
        pb.n = cfg.wg.n;
        pb.ell = 0;
        pb.potential = cfg.wg.potential;
        const auto mus = radial_bound_states(pb, 1);
        if (mus.empty()) throw std::runtime_error("oracle-compare: no oracle bound state");
        for (int i = 0; i < cfg.scan.k_count; ++i) {
            const double k = cfg.scan.k_min + (cfg.scan.k_max - cfg.scan.k_min) * i /
                                                  std::max(1, cfg.scan.k_count - 1);
            const double expected = mus[0] + k * k;
            const auto pts = locate_eigenvalues(cfg.wg, k, expected - 0.3, expected + 0.3, 12,
                                                threads);
            if (pts.empty()) continue;
            csv << util::format_double(k) << "," << util::format_double(pts.front().lambda)
                << "," << util::format_double(expected) << ","
                << util::format_double(pts.front().lambda - expected) << "\n";
            worst = std::max(worst, std::abs(pts.front().lambda - expected));
        }
    } else {
        const double k = cfg.scan.k_min;
        Discretization disc = Discretization::from(cfg.wg.trunc);
        disc.n_r = cfg.oracle.box_nr;
        const auto box = box_eigs(cfg.wg, k, cfg.oracle.box_L, disc, 4);
        const auto pts = locate_eigenvalues(cfg.wg, k, cfg.scan.e_min, cfg.scan.e_max,
                                            cfg.scan.e_grid, threads);
        for (const auto& p : pts) {
            double best = 1e300;
            for (double b : box)
                if (std::abs(b - p.lambda) < std::abs(best - p.lambda)) best = b;
            csv << util::format_double(k) << "," << util::format_double(p.lambda) << ","
                << util::format_double(best) << "," << util::format_double(p.lambda - best)
                << "\n";
            worst = std::max(worst, std::abs(p.lambda - best));
        }
    }
    std::cout << "oracle-compare: worst |diff| = " << worst << "\n";
    return 0;
}

}  // namespace

int run_command(const std::string& command, const RunConfig& cfg, const std::string& out_dir,
                int threads) {
    try {
        if (command == "validate") {
            const auto results = run_validation(cfg.wg, threads);
            bool all = true;
            for (const auto& r : results) {
                std::cout << (r.pass ? "PASS  " : "FAIL  ") << r.name;
                if (!r.detail.empty()) std::cout << "  (" << r.detail << ")";
                std::cout << "\n";
                all = all && r.pass;
            }
            return all ? 0 : 1;
        }
        if (command == "dispersion") return cmd_dispersion(cfg, out_dir, threads);
        if (command == "transport") return cmd_transport(cfg, out_dir, threads);
        if (command == "eigenfunction") return cmd_eigenfunction(cfg, out_dir, threads);
        if (command == "oracle-compare") return cmd_oracle_compare(cfg, out_dir, threads);
        std::cerr << "unknown command: " << command << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace cyldtn
