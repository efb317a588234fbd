#include "ioxsim/config.hpp"

#include "ioxsim/core_model.hpp"
#include "ioxsim/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ioxsim {

namespace {

using nlohmann::json;

struct Context {
    const std::string& text;
    const std::string& source;

    // 1-based line of the first `"key":` in the raw text, 0 if not found
    std::size_t line_of(const std::string& key) const {
        const std::string needle = "\"" + key + "\"";
        std::size_t pos = text.find(needle);
        while (pos != std::string::npos) {
            std::size_t after = pos + needle.size();
            while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) {
                ++after;
            }
            if (after < text.size() && text[after] == ':') {
                return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
            }
            pos = text.find(needle, pos + 1);
        }
        return 0;
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        std::ostringstream msg;
        msg << source;
        if (const std::size_t line = line_of(key); line > 0) {
            msg << ":" << line;
        }
        msg << ": " << what;
        throw ConfigError(msg.str());
    }
};

void check_keys(const Context& ctx, const json& obj, const std::string& block, const std::set<std::string>& allowed) {
    if (!obj.is_object()) {
        ctx.fail(block, "'" + block + "' must be an object");
    }
    for (const auto& item : obj.items()) {
        if (!allowed.count(item.key())) {
            ctx.fail(item.key(), "unknown key '" + item.key() + "' in '" + block + "'");
        }
    }
}

double number(const Context& ctx, const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const json& v = obj.at(key);
    if (!v.is_number()) {
        ctx.fail(key, "'" + key + "' must be a number");
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
        ctx.fail(key, "'" + key + "' must be finite");
    }
    return x;
}

std::vector<double> number_array(const Context& ctx, const json& v, const std::string& key) {
    if (!v.is_array()) {
        ctx.fail(key, "'" + key + "' must be an array of numbers");
    }
    std::vector<double> out;
    out.reserve(v.size());
    for (const json& x : v) {
        if (!x.is_number()) {
            ctx.fail(key, "'" + key + "' must contain only numbers");
        }
        out.push_back(x.get<double>());
    }
    return out;
}

// Either an explicit array or {"start": a, "stop": b, "points": n}.
std::vector<double> grid(const Context& ctx, const json& obj, const std::string& key) {
    const json& v = obj.at(key);
    std::vector<double> out;
    if (v.is_object()) {
        check_keys(ctx, v, key, {"start", "stop", "points"});
        if (!v.contains("start") || !v.contains("stop") || !v.contains("points")) {
            ctx.fail(key, "'" + key + "' needs start, stop and points");
        }
        const double a = number(ctx, v, "start", 0.0);
        const double b = number(ctx, v, "stop", 0.0);
        if (!v.at("points").is_number_integer() || v.at("points").get<long>() < 1) {
            ctx.fail(key, "'" + key + ".points' must be a positive integer");
        }
        const auto n = v.at("points").get<std::size_t>();
        out.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
        }
    } else {
        out = number_array(ctx, v, key);
    }
    if (out.empty()) {
        ctx.fail(key, "'" + key + "' must not be empty");
    }
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (!(out[i] > out[i - 1])) {
            ctx.fail(key, "'" + key + "' must be strictly increasing");
        }
    }
    return out;
}

cplx complex_value(const Context& ctx, const json& obj, const std::string& key, cplx fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const json& v = obj.at(key);
    if (v.is_number()) {
        return {v.get<double>(), 0.0};
    }
    const std::vector<double> parts = number_array(ctx, v, key);
    if (parts.size() != 2) {
        ctx.fail(key, "'" + key + "' must be a number or [re, im]");
    }
    return {parts[0], parts[1]};
}

SystemParams parse_system(const Context& ctx, const json& s) {
    check_keys(ctx, s, "system",
               {"eps0", "delta", "delta_over_bic", "g_rabi", "mass_ratio", "gamma_c", "gamma_x", "gamma_nr_c",
                "gamma_nr_x"});
    SystemParams p;
    p.eps0 = number(ctx, s, "eps0", p.eps0);
    p.delta = number(ctx, s, "delta", p.delta);
    p.g_rabi = number(ctx, s, "g_rabi", p.g_rabi);
    p.mass_ratio = number(ctx, s, "mass_ratio", p.mass_ratio);
    p.gamma_c = number(ctx, s, "gamma_c", p.gamma_c);
    p.gamma_x = number(ctx, s, "gamma_x", p.gamma_x);
    p.gamma_nr_c = number(ctx, s, "gamma_nr_c", p.gamma_nr_c);
    p.gamma_nr_x = number(ctx, s, "gamma_nr_x", p.gamma_nr_x);
    try {
        p.validate();
    } catch (const DomainError& e) {
        ctx.fail("system", e.what());
    }
    if (s.contains("delta_over_bic")) {
        if (s.contains("delta")) {
            ctx.fail("delta_over_bic", "give either 'delta' or 'delta_over_bic', not both");
        }
        const double factor = number(ctx, s, "delta_over_bic", 1.0);
        try {
            p.delta = factor * bic_condition(p).d_eps_bic;
        } catch (const DomainError& e) {
            ctx.fail("delta_over_bic", e.what());
        }
    }
    return p;
}

BathConfig parse_bath(const Context& ctx, const json& b) {
    check_keys(ctx, b, "bath", {"c_light", "omega_min", "omega_max", "kappa_c", "kappa_x", "modes", "taper_fraction"});
    BathConfig out;
    out.c_light = number(ctx, b, "c_light", out.c_light);
    out.omega_min = number(ctx, b, "omega_min", out.omega_min);
    out.omega_max = number(ctx, b, "omega_max", out.omega_max);
    if (b.contains("kappa_c")) {
        out.kappa_c = number(ctx, b, "kappa_c", 0.0);
    }
    if (b.contains("kappa_x")) {
        out.kappa_x = number(ctx, b, "kappa_x", 0.0);
    }
    if (b.contains("modes")) {
        if (!b.at("modes").is_number_integer() || b.at("modes").get<long>() < 2) {
            ctx.fail("modes", "'modes' must be an integer >= 2");
        }
        out.modes = b.at("modes").get<std::size_t>();
    }
    out.taper_fraction = number(ctx, b, "taper_fraction", out.taper_fraction);
    if (!(out.c_light > 0.0)) {
        ctx.fail("c_light", "'c_light' must be positive");
    }
    if (!(out.omega_max > out.omega_min)) {
        ctx.fail("omega_max", "bath window needs omega_min < omega_max");
    }
    if (out.taper_fraction < 0.0 || out.taper_fraction >= 0.5) {
        ctx.fail("taper_fraction", "'taper_fraction' must lie in [0, 0.5)");
    }
    if ((out.kappa_c && *out.kappa_c < 0.0) || (out.kappa_x && *out.kappa_x < 0.0)) {
        ctx.fail("bath", "bath couplings must be non-negative");
    }
    return out;
}

InputOccupation parse_occupation(const Context& ctx, const json& v, double eps0) {
    if (v.is_number()) {
        if (v.get<double>() < 0.0) {
            ctx.fail("input_occupation", "'input_occupation' must be non-negative");
        }
        return InputOccupation::constant(v.get<double>());
    }
    check_keys(ctx, v, "input_occupation", {"omega", "n"});
    if (!v.contains("omega") || !v.contains("n")) {
        ctx.fail("input_occupation", "'input_occupation' table needs 'omega' and 'n'");
    }
    std::vector<double> w = grid(ctx, v, "omega");
    std::vector<double> n = number_array(ctx, v.at("n"), "n");
    if (n.size() != w.size()) {
        ctx.fail("n", "'n' must have as many entries as 'omega'");
    }
    if (std::any_of(n.begin(), n.end(), [](double x) { return x < 0.0; })) {
        ctx.fail("n", "occupations must be non-negative");
    }
    for (double& x : w) {
        x += eps0;
    }
    return InputOccupation::tabulated(std::move(w), std::move(n));
}

ScanConfig parse_scan(const Context& ctx, const json& s, const SystemParams& p) {
    check_keys(ctx, s, "scan",
               {"kind", "k_grid", "omega_grid", "t_grid", "delta_over_bic", "input_occupation", "initial",
                "max_deviation"});
    ScanConfig out;
    if (!s.contains("kind") || !s.at("kind").is_string()) {
        ctx.fail("scan", "'scan.kind' must be one of dispersion, spectrum, dynamics, ep-bic, absorption, "
                         "oracle-compare");
    }
    const auto kind = parse_scan_kind(s.at("kind").get<std::string>());
    if (!kind) {
        ctx.fail("kind", "unknown scan kind '" + s.at("kind").get<std::string>() + "'");
    }
    out.kind = *kind;
    if (s.contains("k_grid")) {
        out.k_grid = grid(ctx, s, "k_grid");
    }
    if (s.contains("omega_grid")) {
        out.omega_grid = grid(ctx, s, "omega_grid");
    }
    if (s.contains("t_grid")) {
        out.t_grid = grid(ctx, s, "t_grid");
        if (out.t_grid.front() < 0.0) {
            ctx.fail("t_grid", "'t_grid' must start at t >= 0");
        }
    }
    if (s.contains("delta_over_bic")) {
        out.delta_over_bic = number_array(ctx, s.at("delta_over_bic"), "delta_over_bic");
        if (out.delta_over_bic.empty()) {
            ctx.fail("delta_over_bic", "'delta_over_bic' must not be empty");
        }
    }
    if (s.contains("input_occupation")) {
        out.occupation = parse_occupation(ctx, s.at("input_occupation"), p.eps0);
    }
    if (s.contains("initial")) {
        const json& init = s.at("initial");
        check_keys(ctx, init, "initial", {"c", "x"});
        out.initial_c = complex_value(ctx, init, "c", {0.0, 0.0});
        out.initial_x = complex_value(ctx, init, "x", {0.0, 0.0});
    }
    out.max_deviation = number(ctx, s, "max_deviation", out.max_deviation);
    if (!(out.max_deviation > 0.0)) {
        ctx.fail("max_deviation", "'max_deviation' must be positive");
    }
    if (out.kind == ScanKind::Dynamics && out.t_grid.empty()) {
        ctx.fail("scan", "dynamics scans need 't_grid'");
    }
    return out;
}

OutputConfig parse_output(const Context& ctx, const json& o) {
    check_keys(ctx, o, "output", {"directory", "formats"});
    OutputConfig out;
    if (o.contains("directory")) {
        if (!o.at("directory").is_string()) {
            ctx.fail("directory", "'directory' must be a string");
        }
        out.directory = o.at("directory").get<std::string>();
    }
    if (o.contains("formats")) {
        const json& f = o.at("formats");
        if (!f.is_array()) {
            ctx.fail("formats", "'formats' must be an array of strings");
        }
        out.csv = false;
        for (const json& x : f) {
            const std::string name = x.is_string() ? x.get<std::string>() : "";
            if (name == "csv") {
                out.csv = true;
            } else if (name == "gnuplot") {
                out.gnuplot = true;
            } else {
                ctx.fail("formats", "unknown output format '" + (x.is_string() ? name : x.dump()) + "'");
            }
        }
        if (!out.csv) {
            ctx.fail("formats", "'formats' must include csv");
        }
    }
    return out;
}

}  // namespace

std::string to_string(ScanKind kind) {
    switch (kind) {
        case ScanKind::Dispersion: return "dispersion";
        case ScanKind::Spectrum: return "spectrum";
        case ScanKind::Dynamics: return "dynamics";
        case ScanKind::EpBic: return "ep-bic";
        case ScanKind::Absorption: return "absorption";
        case ScanKind::OracleCompare: return "oracle-compare";
    }
    return "unknown";
}

std::optional<ScanKind> parse_scan_kind(const std::string& name) {
    for (ScanKind k : {ScanKind::Dispersion, ScanKind::Spectrum, ScanKind::Dynamics, ScanKind::EpBic,
                       ScanKind::Absorption, ScanKind::OracleCompare}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    return std::nullopt;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
    const Context ctx{text, source};
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(source + ": " + e.what());
    }
    check_keys(ctx, doc, "<root>", {"system", "bath", "scan", "output"});
    if (!doc.contains("system")) {
        throw ConfigError(source + ": missing 'system' block");
    }
    if (!doc.contains("scan")) {
        throw ConfigError(source + ": missing 'scan' block");
    }
    RunConfig cfg;
    cfg.source = source;
    cfg.system = parse_system(ctx, doc.at("system"));
    if (doc.contains("bath")) {
        cfg.bath = parse_bath(ctx, doc.at("bath"));
    }
    cfg.scan = parse_scan(ctx, doc.at("scan"), cfg.system);
    if (doc.contains("output")) {
        cfg.output = parse_output(ctx, doc.at("output"));
    }
    if (cfg.scan.kind == ScanKind::OracleCompare && !cfg.bath) {
        cfg.bath = BathConfig{};
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path.string() + ": cannot open file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

BathSpec make_bath(const RunConfig& cfg, double k) {
    const BathConfig bc = cfg.bath.value_or(BathConfig{});
    BathSpec b = bath_for_rates(cfg.system.gamma_c, cfg.system.gamma_x, k, cfg.system.eps0, bc.c_light,
                                bc.omega_min, bc.omega_max);
    if (bc.kappa_c) {
        b.kappa_c = *bc.kappa_c;
    }
    if (bc.kappa_x) {
        b.kappa_x = *bc.kappa_x;
    }
    return b;
}

}  // namespace ioxsim
