#pragma once

// Serialization, run manifests and the on-disk table cache.
//
// JSON is emitted canonically: object keys sorted, no whitespace, integers
// verbatim, floats with 17 significant digits. Exact quantities (counts,
// rationals) are decimal strings. Byte equality of two payloads therefore
// means semantic equality.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <system_error>

#include <json.hpp>

#include "ddesc/core_stats.hpp"
#include "ddesc/exact_dist.hpp"
#include "ddesc/janson.hpp"
#include "ddesc/monte_carlo.hpp"

namespace ddesc {

using json = nlohmann::json;

inline constexpr const char* tool_version = "1.0.0";

inline std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace detail {

inline void canonical_write(const json& j, std::string& out) {
    switch (j.type()) {
    case json::value_t::object: {
        out += '{';
        bool first = true;
        // nlohmann's default object_t is a std::map, so iteration is sorted
        for (const auto& [k, v] : j.items()) {
            if (!first) out += ',';
            first = false;
            out += json(k).dump();
            out += ':';
            canonical_write(v, out);
        }
        out += '}';
        break;
    }
    case json::value_t::array: {
        out += '[';
        bool first = true;
        for (const auto& v : j) {
            if (!first) out += ',';
            first = false;
            canonical_write(v, out);
        }
        out += ']';
        break;
    }
    case json::value_t::number_float: {
        const double x = j.get<double>();
        out += std::isfinite(x) ? format_double(x) : "null";
        break;
    }
    default:
        out += j.dump();
    }
}

} // namespace detail

inline std::string canonical_dump(const json& j) {
    std::string out;
    detail::canonical_write(j, out);
    return out;
}

// FNV-1a, 64 bit. Every step is a bijection of the state, so any single
// byte change alters the digest.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t x) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

inline big_int parse_big_int(const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
        throw input_error("not a non-negative decimal integer: '" + s + "'");
    }
    return big_int(s);
}

// ---- descent_spec ---------------------------------------------------------

inline json to_json(const descent_spec& s) {
    if (s.is_uniform()) return {{"kind", "uniform"}, {"d", s.uniform_d()}};
    return {{"kind", "vector"}, {"d", s.reaches()}};
}

inline descent_spec spec_from_json(const json& j) {
    try {
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "uniform") return descent_spec::uniform(j.at("d").get<int>());
        if (kind == "vector") return descent_spec::vector(j.at("d").get<std::vector<int>>());
        throw input_error("unknown spec kind '" + kind + "'");
    } catch (const json::exception& e) {
        throw input_error(std::string("malformed spec: ") + e.what());
    }
}

// ---- distribution_table ---------------------------------------------------

inline json to_json(const distribution_table& t) {
    json counts = json::array();
    for (const auto& c : t.counts) counts.push_back(c.str());
    return {{"n", t.n}, {"spec", to_json(t.spec)}, {"counts", counts}, {"total", t.total().str()}};
}

inline distribution_table table_from_json(const json& j) {
    try {
        distribution_table t;
        t.n = j.at("n").get<int>();
        t.spec = spec_from_json(j.at("spec"));
        for (const auto& c : j.at("counts")) t.counts.push_back(parse_big_int(c.get<std::string>()));
        if (t.counts.empty()) throw input_error("table without counts");
        if (parse_big_int(j.at("total").get<std::string>()) != t.total()) {
            throw input_error("table total does not match its counts");
        }
        return t;
    } catch (const json::exception& e) {
        throw input_error(std::string("malformed table: ") + e.what());
    }
}

inline std::string table_csv(const distribution_table& t) {
    std::string out = "k,count\n";
    for (std::size_t k = 0; k < t.counts.size(); ++k) {
        out += std::to_string(k) + "," + t.counts[k].str() + "\n";
    }
    return out;
}

inline json to_json(const moment_report& m) {
    return {{"mean", to_string(m.mean)},
            {"variance", to_string(m.variance)},
            {"source", to_string(m.source)}};
}

// ---- normality_report -----------------------------------------------------

inline json to_json(const normality_report& r) {
    return {{"n", r.n},
            {"spec", to_json(r.spec)},
            {"trials", r.trials},
            {"seed", r.seed},
            {"empirical_mean", r.empirical_mean},
            {"empirical_variance", r.empirical_variance},
            {"sample_moments", to_json(r.sample_moments)},
            {"ks_statistic", r.ks_statistic},
            {"skewness", r.skewness},
            {"excess_kurtosis", r.excess_kurtosis},
            {"lattice_floor", r.lattice_floor},
            {"standardization",
             {{"mu", to_string(r.mu)},
              {"sigma", r.sigma},
              {"sigma_sq", to_string(r.sigma_sq)},
              {"source", to_string(r.sigma_source)}}}};
}

inline const char* normality_csv_header =
    "n,d,seed,trials,empirical_mean,empirical_variance,ks_statistic,skewness,excess_kurtosis,"
    "mu,sigma,sigma_source,lattice_floor\n";

inline std::string normality_csv_row(const normality_report& r) {
    const std::string d = r.spec.is_uniform() ? std::to_string(r.spec.uniform_d()) : "vector";
    return std::to_string(r.n) + "," + d + "," + std::to_string(r.seed) + "," +
           std::to_string(r.trials) + "," + format_double(r.empirical_mean) + "," +
           format_double(r.empirical_variance) + "," + format_double(r.ks_statistic) + "," +
           format_double(r.skewness) + "," + format_double(r.excess_kurtosis) + "," +
           to_string(r.mu) + "," + format_double(r.sigma) + "," + to_string(r.sigma_source) +
           "," + format_double(r.lattice_floor) + "\n";
}

// ---- janson_certificate ---------------------------------------------------

inline json to_json(const janson_certificate& c) {
    json j = {{"n", c.n},
              {"d", c.d},
              {"m", c.m},
              {"N_n", c.pairs},
              {"delta_bound", c.delta_bound},
              {"delta_used", c.delta_used},
              {"delta_analytic", c.analytic_delta},
              {"A_n", c.a_bound},
              {"sigma_sq", to_string(c.sigma_sq)},
              {"sigma_sq_published", to_string(c.sigma_sq_published)},
              {"bound_value", c.bound_value},
              {"simplified_bound", c.simplified_bound}};
    j["delta_exact"] = c.delta_exact ? json(*c.delta_exact) : json(nullptr);
    return j;
}

inline const char* janson_csv_header =
    "n,d,m,N_n,delta_used,sigma_sq,bound_value,simplified_bound\n";

inline std::string janson_csv_row(const janson_certificate& c) {
    return std::to_string(c.n) + "," + std::to_string(c.d) + "," + std::to_string(c.m) + "," +
           std::to_string(c.pairs) + "," + std::to_string(c.delta_used) + "," +
           to_string(c.sigma_sq) + "," + format_double(c.bound_value) + "," +
           format_double(c.simplified_bound) + "\n";
}

// ---- run manifest ---------------------------------------------------------

struct run_manifest {
    std::string command;
    std::map<std::string, std::string> parameters;
    std::optional<std::uint64_t> seed;
    std::string tool_version = ddesc::tool_version;
    std::string timestamp;
};

inline std::string rfc3339_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buf;
}

inline json to_json(const run_manifest& m) {
    json j = {{"command", m.command},
              {"parameters", m.parameters},
              {"tool_version", m.tool_version},
              {"timestamp", m.timestamp}};
    j["seed"] = m.seed ? json(*m.seed) : json(nullptr);
    return j;
}

// Result file layout: {"manifest": ..., "result": ...}.
inline json with_manifest(const run_manifest& m, json payload) {
    return {{"manifest", to_json(m)}, {"result", std::move(payload)}};
}

// ---- table cache ----------------------------------------------------------

inline constexpr const char* cache_dir_env = "DDESC_CACHE_DIR";

class table_cache {
public:
    using warning_sink = std::function<void(const std::string&)>;

    explicit table_cache(std::filesystem::path dir, warning_sink warn = default_warning)
        : dir_(std::move(dir)), warn_(std::move(warn)) {}

    // Cache configured through DDESC_CACHE_DIR, if set and non-empty.
    static std::optional<table_cache> from_environment(warning_sink warn = default_warning) {
        const char* dir = std::getenv(cache_dir_env);
        if (dir == nullptr || *dir == '\0') return std::nullopt;
        return table_cache(dir, std::move(warn));
    }

    const std::filesystem::path& directory() const { return dir_; }

    static std::string key_text(int n, const descent_spec& spec) {
        return canonical_dump({{"n", n}, {"spec", to_json(spec)}});
    }

    std::filesystem::path path_for(int n, const descent_spec& spec) const {
        return dir_ / ("table-" + hex64(fnv1a64(key_text(n, spec))) + ".json");
    }

    // Writes to a temporary file in the same directory, then renames.
    void store(const distribution_table& t) const {
        std::filesystem::create_directories(dir_);
        const json body = {{"key", json::parse(key_text(t.n, t.spec))}, {"table", to_json(t)}};
        const json file = {{"body", body}, {"checksum", hex64(fnv1a64(canonical_dump(body)))}};
        const auto target = path_for(t.n, t.spec);
        std::random_device rd;
        const auto tmp = target.string() + ".tmp." + hex64((std::uint64_t{rd()} << 32) | rd());
        {
            std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
            os << canonical_dump(file);
            if (!os) throw std::runtime_error("cannot write cache file " + tmp);
        }
        std::filesystem::rename(tmp, target);
    }

    // Returns the table only if the file parses, is canonical, matches the
    // key and passes its checksum. Anything else is a miss with a warning.
    std::optional<distribution_table> lookup(int n, const descent_spec& spec) const {
        const auto path = path_for(n, spec);
        std::error_code ec;
        if (!std::filesystem::exists(path, ec)) return std::nullopt;

        std::ifstream is(path, std::ios::binary);
        std::string raw((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
        try {
            const json file = json::parse(raw);
            if (canonical_dump(file) != raw) return miss(path, "not in canonical form");
            const json& body = file.at("body");
            if (file.at("checksum").get<std::string>() != hex64(fnv1a64(canonical_dump(body)))) {
                return miss(path, "checksum mismatch");
            }
            if (canonical_dump(body.at("key")) != key_text(n, spec)) {
                return miss(path, "key mismatch");
            }
            auto t = table_from_json(body.at("table"));
            if (t.n != n || !(t.spec == spec)) return miss(path, "table does not match key");
            return t;
        } catch (const std::exception& e) {
            return miss(path, e.what());
        }
    }

private:
    static void default_warning(const std::string& msg) { std::cerr << "warning: " << msg << "\n"; }

    std::optional<distribution_table> miss(const std::filesystem::path& p,
                                           const std::string& why) const {
        warn_("ignoring cache file " + p.string() + ": " + why);
        return std::nullopt;
    }

    std::filesystem::path dir_;
    warning_sink warn_;
};

} // namespace ddesc
