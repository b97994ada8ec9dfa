#pragma once

// Serialization and configuration:
//   - Lagrangian-path sample tables and flow trajectories as CSV
//   - orbit lists, Maslov reports and Morse complexes as JSON
//   - the verify-index sweep table as CSV with a one-line summary
//   - the flat sectioned key-value config format of the command-line driver
//
// All floating-point output uses shortest round-trip decimal formatting
// (std::to_chars), and JSON objects are emitted with sorted keys, so a given
// in-memory value always serializes to the same bytes.  The golden files under
// tests/golden freeze these formats.

#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "maslov/bvp.hpp"
#include "maslov/index_theorem.hpp"
#include "maslov/morse_complex.hpp"

namespace maslov::io {

using json = nlohmann::json;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised on malformed config text, missing/duplicate/unknown keys and values
// that fail validation.  Messages carry the source name and line number.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// number formatting and strict parsing

inline std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::vector<std::string> tokens(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

inline bool parse_double_strict(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    const char* begin = t.data();
    const char* end = t.data() + t.size();
    const auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end;
}

inline bool parse_int_strict(const std::string& s, std::int64_t& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    const char* begin = t.data();
    const char* end = t.data() + t.size();
    const auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CSV: Lagrangian-path sample tables (columns: t, frame entries row-major)

inline void write_path_csv(std::ostream& os, const LagrangianPath& path, int samples) {
    if (samples < 2) throw IoError("write_path_csv: need at least two samples");
    const int n = path.ambient_half_dim();
    os << "t";
    for (int r = 0; r < 2 * n; ++r)
        for (int c = 0; c < n; ++c) os << ",frame_" << r << "_" << c;
    os << "\n";
    const double a = path.t_begin(), b = path.t_end();
    for (int k = 0; k < samples; ++k) {
        const double t = a + (b - a) * k / (samples - 1);
        const Mat F = path.raw(t);
        os << format_double(t);
        for (int r = 0; r < 2 * n; ++r)
            for (int c = 0; c < n; ++c) os << "," << format_double(F(r, c));
        os << "\n";
    }
}

inline LagrangianPath read_path_csv(std::istream& is) {
    std::string line;
    int lineno = 0;
    // header
    int n = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto cols = detail::split(t, ',');
        if (cols.empty() || detail::trim(cols[0]) != "t")
            throw IoError("path csv: line " + std::to_string(lineno) +
                          ": header must start with column 't'");
        const std::size_t entries = cols.size() - 1;
        // 2n x n frame has 2n^2 entries
        for (int m = 1; m <= 32; ++m)
            if (2 * m * m == static_cast<int>(entries)) n = m;
        if (n == 0)
            throw IoError("path csv: line " + std::to_string(lineno) + ": " +
                          std::to_string(entries) +
                          " frame columns do not form a 2n x n frame");
        break;
    }
    if (n == 0) throw IoError("path csv: missing header line");

    std::vector<double> times;
    std::vector<Mat> frames;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto cols = detail::split(t, ',');
        if (static_cast<int>(cols.size()) != 1 + 2 * n * n)
            throw IoError("path csv: line " + std::to_string(lineno) + ": expected " +
                          std::to_string(1 + 2 * n * n) + " columns, found " +
                          std::to_string(cols.size()));
        std::vector<double> row(cols.size());
        for (std::size_t i = 0; i < cols.size(); ++i)
            if (!detail::parse_double_strict(cols[i], row[i]))
                throw IoError("path csv: line " + std::to_string(lineno) +
                              ": bad number '" + detail::trim(cols[i]) + "'");
        Mat F(2 * n, n);
        for (int r = 0; r < 2 * n; ++r)
            for (int c = 0; c < n; ++c) F(r, c) = row[1 + r * n + c];
        times.push_back(row[0]);
        frames.push_back(F);
    }
    if (times.size() < 2) throw IoError("path csv: need at least two sample rows");
    try {
        return LagrangianPath::from_samples(std::move(times), std::move(frames));
    } catch (const std::invalid_argument& e) {
        throw IoError(std::string("path csv: ") + e.what());
    }
}

inline void save_path_csv(const LagrangianPath& path, const std::string& file, int samples) {
    std::ofstream os(file);
    if (!os) throw IoError("cannot open for writing: " + file);
    write_path_csv(os, path, samples);
}

inline LagrangianPath load_path_csv(const std::string& file) {
    std::ifstream is(file);
    if (!is) throw IoError("cannot open for reading: " + file);
    return read_path_csv(is);
}

// ---------------------------------------------------------------------------
// CSV: flow trajectories (columns: t, q, p, monodromy row-major)

inline void write_flow_csv(std::ostream& os, const FlowResult& flow) {
    const int n = static_cast<int>(flow.states().front().size()) / 2;
    os << "t";
    for (int i = 0; i < n; ++i) os << ",q" << i;
    for (int i = 0; i < n; ++i) os << ",p" << i;
    for (int r = 0; r < 2 * n; ++r)
        for (int c = 0; c < 2 * n; ++c) os << ",m_" << r << "_" << c;
    os << "\n";
    for (int k = 0; k < flow.grid_size(); ++k) {
        const Vec& z = flow.states()[k];
        const Mat& M = flow.monodromies()[k];
        os << format_double(flow.t_begin() + k * flow.step());
        for (int i = 0; i < 2 * n; ++i) os << "," << format_double(z(i));
        for (int r = 0; r < 2 * n; ++r)
            for (int c = 0; c < 2 * n; ++c) os << "," << format_double(M(r, c));
        os << "\n";
    }
}

inline void save_flow_csv(const FlowResult& flow, const std::string& file) {
    std::ofstream os(file);
    if (!os) throw IoError("cannot open for writing: " + file);
    write_flow_csv(os, flow);
}

// ---------------------------------------------------------------------------
// JSON builders.  Indices always appear as the exact twice_value integer
// together with the rendered "k/2" string.

inline json half_integer_json(const HalfInteger& h) {
    return json{{"twice", h.twice_value()}, {"rendered", h.to_string()}};
}

inline json vec_json(const Vec& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline json mat_json(const Mat& M) {
    json rows = json::array();
    for (int r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json maslov_result_json(const MaslovResult& r) {
    json crossings = json::array();
    for (const Crossing& c : r.crossings) {
        crossings.push_back(json{{"t", c.t},
                                 {"endpoint", c.endpoint},
                                 {"dim", c.intersection.cols()},
                                 {"signature", c.signature},
                                 {"regular", c.regular}});
    }
    return json{{"index", half_integer_json(r.index)},
                {"crossings", std::move(crossings)},
                {"used_fallback", r.used_fallback},
                {"grid_used", r.grid_used}};
}

inline json orbit_json(const Orbit& orbit) {
    const int n = static_cast<int>(orbit.initial_state().size()) / 2;
    return json{{"action", orbit.action},
                {"index", half_integer_json(orbit.index)},
                {"nullity", orbit.nullity},
                {"q0", vec_json(orbit.initial_state().head(n))},
                {"p0", vec_json(orbit.initial_state().tail(n))},
                {"q1", vec_json(orbit.final_state().head(n))},
                {"p1", vec_json(orbit.final_state().tail(n))},
                {"residuals",
                 json{{"constraint", orbit.residual_constraint},
                      {"momentum", orbit.residual_momentum}}},
                {"degenerate", orbit.degenerate},
                {"index_used_fallback", orbit.index_used_fallback}};
}

inline json solve_report_json(const SolveReport& report) {
    json orbits = json::array();
    for (const Orbit& orbit : report.orbits) orbits.push_back(orbit_json(orbit));
    return json{{"orbits", std::move(orbits)},
                {"seeds_tried", report.seeds_tried},
                {"newton_failures", report.newton_failures},
                {"seed_box", report.seed_box}};
}

inline json index_report_json(const IndexReport& r) {
    return json{{"index_eigen", r.index_eigen},
                {"nullity_eigen", r.nullity_eigen},
                {"index_crossing", r.index_crossing},
                {"nullity_crossing", r.nullity_crossing},
                {"mu_relative", half_integer_json(r.mu_relative)},
                {"shift", half_integer_json(r.shift)},
                {"mu_shifted", half_integer_json(r.mu_shifted)},
                {"nullity_ham", r.nullity_ham},
                {"delta_forward", half_integer_json(r.delta_forward)},
                {"delta_backward", half_integer_json(r.delta_backward)},
                {"delta_nullity", r.delta_nullity},
                {"delta_algorithms", r.delta_algorithms},
                {"legendre_residual", r.legendre_residual},
                {"boundary_residual", r.boundary_residual},
                {"used_fallback", r.used_fallback},
                {"refined", r.refined},
                {"pass", r.pass}};
}

inline json critical_path_json(const CriticalPath& p) {
    json t = json::array();
    for (int k = 0; k <= p.path.segments(); ++k) t.push_back(p.path.time(k));
    return json{{"winding", p.winding},
                {"action", p.action},
                {"index", p.index},
                {"nullity", p.nullity},
                {"residual", p.residual},
                {"t", std::move(t)},
                {"nodes", mat_json(p.path.nodes)}};
}

inline json complex_json(const ComplexInstance& inst) {
    json generators = json::array();
    for (const CriticalPath& p : inst.generators) generators.push_back(critical_path_json(p));
    json boundary = json::array();
    for (const BitMat& B : inst.boundary) {
        json rows = json::array();
        for (int r = 0; r < B.rows(); ++r) {
            json row = json::array();
            for (int c = 0; c < B.cols(); ++c) row.push_back(B(r, c));
            rows.push_back(std::move(row));
        }
        boundary.push_back(json{{"rows", B.rows()}, {"cols", B.cols()},
                                {"entries", std::move(rows)}});
    }
    return json{{"winding", inst.winding},
                {"generators", std::move(generators)},
                {"degree_counts", inst.degree_counts},
                {"boundary", std::move(boundary)},
                {"betti", inst.betti}};
}

// Canonical on-disk form: sorted keys, two-space indent, trailing newline.
inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

inline void save_json(const json& j, const std::string& file) {
    std::ofstream os(file);
    if (!os) throw IoError("cannot open for writing: " + file);
    os << dump_json(j);
}

// ---------------------------------------------------------------------------
// verify-index sweep table

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "label,parameter,index_eigen,nullity_eigen,index_crossing,nullity_crossing,"
          "mu_twice,mu,nullity_ham,legendre_residual,boundary_residual,pass\n";
    for (const SweepRow& row : rows) {
        const IndexReport& r = row.report;
        os << row.label << "," << format_double(row.parameter) << "," << r.index_eigen << ","
           << r.nullity_eigen << "," << r.index_crossing << "," << r.nullity_crossing << ","
           << r.mu_shifted.twice_value() << "," << r.mu_shifted.to_string() << ","
           << r.nullity_ham << "," << format_double(r.legendre_residual) << ","
           << format_double(r.boundary_residual) << "," << (r.pass ? "1" : "0") << "\n";
    }
}

inline std::string sweep_summary(const std::vector<SweepRow>& rows) {
    int passed = 0;
    for (const SweepRow& row : rows) passed += row.report.pass ? 1 : 0;
    std::string s = std::to_string(passed) + "/" + std::to_string(rows.size()) +
                    " instances verified";
    s += (passed == static_cast<int>(rows.size())) ? ": PASS" : ": FAIL";
    return s;
}

// ---------------------------------------------------------------------------
// Config: flat key-value text with [section] headers.  Full key names are
// "section.key".  '#' starts a comment, blank lines are skipped, duplicate
// keys are rejected, and every key must be consumed by the selected command
// (assert_consumed reports the first untouched key with its line number).

class Config {
public:
    static Config parse(std::istream& is, const std::string& source = "<config>") {
        Config cfg;
        cfg.source_ = source;
        std::string line, section;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            const std::string t = detail::trim(line);
            if (t.empty()) continue;
            if (t.front() == '[') {
                if (t.back() != ']')
                    throw ConfigError(cfg.where(lineno) + "unterminated section header");
                section = detail::trim(t.substr(1, t.size() - 2));
                if (!valid_name(section))
                    throw ConfigError(cfg.where(lineno) + "bad section name '" + section + "'");
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError(cfg.where(lineno) +
                                  "expected 'key = value' or '[section]', found '" + t + "'");
            const std::string key = detail::trim(t.substr(0, eq));
            const std::string value = detail::trim(t.substr(eq + 1));
            if (!valid_name(key))
                throw ConfigError(cfg.where(lineno) + "bad key name '" + key + "'");
            const std::string full = section.empty() ? key : section + "." + key;
            if (cfg.entries_.count(full))
                throw ConfigError(cfg.where(lineno) + "duplicate key '" + full +
                                  "' (first defined at line " +
                                  std::to_string(cfg.entries_.at(full).line) + ")");
            cfg.entries_[full] = Entry{value, lineno, false};
            cfg.order_.push_back(full);
        }
        return cfg;
    }

    static Config from_string(const std::string& text, const std::string& source = "<config>") {
        std::istringstream is(text);
        return parse(is, source);
    }

    static Config from_file(const std::string& file) {
        std::ifstream is(file);
        if (!is) throw ConfigError("cannot open config file: " + file);
        return parse(is, file);
    }

    bool has(const std::string& key) const {
        const auto it = entries_.find(key);
        if (it != entries_.end()) it->second.used = true;
        return it != entries_.end();
    }

    std::string str(const std::string& key) const {
        const Entry& e = require(key);
        return e.value;
    }
    std::string str_or(const std::string& key, const std::string& fallback) const {
        return has(key) ? str(key) : fallback;
    }

    double number(const std::string& key) const {
        const Entry& e = require(key);
        double x = 0.0;
        if (!detail::parse_double_strict(e.value, x))
            throw ConfigError(where(e.line) + "value of '" + key + "' is not a number: '" +
                              e.value + "'");
        return x;
    }
    double number_or(const std::string& key, double fallback) const {
        return has(key) ? number(key) : fallback;
    }

    // Tolerances and step sizes: strictly positive by contract.
    double positive(const std::string& key) const {
        const double x = number(key);
        if (!(x > 0.0))
            throw ConfigError(where(entries_.at(key).line) + "value of '" + key +
                              "' must be positive, found " + format_double(x));
        return x;
    }
    double positive_or(const std::string& key, double fallback) const {
        return has(key) ? positive(key) : fallback;
    }

    std::int64_t integer(const std::string& key) const {
        const Entry& e = require(key);
        std::int64_t x = 0;
        if (!detail::parse_int_strict(e.value, x))
            throw ConfigError(where(e.line) + "value of '" + key + "' is not an integer: '" +
                              e.value + "'");
        return x;
    }
    std::int64_t integer_or(const std::string& key, std::int64_t fallback) const {
        return has(key) ? integer(key) : fallback;
    }

    bool flag_or(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const Entry& e = require(key);
        if (e.value == "true" || e.value == "1" || e.value == "yes" || e.value == "on")
            return true;
        if (e.value == "false" || e.value == "0" || e.value == "no" || e.value == "off")
            return false;
        throw ConfigError(where(e.line) + "value of '" + key + "' is not a boolean: '" +
                          e.value + "'");
    }

    // whitespace-separated list of numbers
    Vec vector(const std::string& key) const {
        const Entry& e = require(key);
        const auto toks = detail::tokens(e.value);
        Vec v(static_cast<int>(toks.size()));
        for (std::size_t i = 0; i < toks.size(); ++i)
            if (!detail::parse_double_strict(toks[i], v(static_cast<int>(i))))
                throw ConfigError(where(e.line) + "value of '" + key +
                                  "' is not a number list: bad token '" + toks[i] + "'");
        return v;
    }
    Vec vector_or(const std::string& key, const Vec& fallback) const {
        return has(key) ? vector(key) : fallback;
    }

    // rows separated by ';', entries by whitespace
    Mat matrix(const std::string& key) const {
        const Entry& e = require(key);
        const auto rows = detail::split(e.value, ';');
        std::vector<Vec> parsed;
        for (const std::string& row : rows) {
            const auto toks = detail::tokens(row);
            if (toks.empty())
                throw ConfigError(where(e.line) + "value of '" + key + "' has an empty row");
            Vec v(static_cast<int>(toks.size()));
            for (std::size_t i = 0; i < toks.size(); ++i)
                if (!detail::parse_double_strict(toks[i], v(static_cast<int>(i))))
                    throw ConfigError(where(e.line) + "value of '" + key +
                                      "' is not a matrix: bad token '" + toks[i] + "'");
            if (!parsed.empty() && v.size() != parsed.front().size())
                throw ConfigError(where(e.line) + "value of '" + key +
                                  "' has rows of unequal length");
            parsed.push_back(std::move(v));
        }
        Mat M(static_cast<int>(parsed.size()), parsed.front().size());
        for (std::size_t r = 0; r < parsed.size(); ++r) M.row(static_cast<int>(r)) = parsed[r];
        return M;
    }

    int line_of(const std::string& key) const { return require(key).line; }

    // Unknown keys are rejected: after a command has read its inputs, any
    // entry never touched is a config error.
    void assert_consumed() const {
        for (const std::string& key : order_) {
            const Entry& e = entries_.at(key);
            if (!e.used)
                throw ConfigError(where(e.line) + "unknown key '" + key +
                                  "' (not consumed by this command)");
        }
    }

    std::vector<std::string> keys() const { return order_; }
    const std::string& source() const { return source_; }

private:
    struct Entry {
        std::string value;
        int line = 0;
        mutable bool used = false;
    };

    static bool valid_name(const std::string& s) {
        if (s.empty()) return false;
        for (char c : s)
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
                  c == '.'))
                return false;
        return true;
    }

    const Entry& require(const std::string& key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end())
            throw ConfigError(source_ + ": missing required key '" + key + "'");
        it->second.used = true;
        return it->second;
    }

    std::string where(int line) const {
        return source_ + ":" + std::to_string(line) + ": ";
    }

    std::string source_;
    std::vector<std::string> order_;
    std::map<std::string, Entry> entries_;
};

// ---------------------------------------------------------------------------
// Config -> objects.  Section layouts are documented in the README; every
// preset consumes exactly the keys it needs, so stray keys surface through
// Config::assert_consumed.

inline ElectromagneticLagrangian lagrangian_from_config(const Config& cfg,
                                                        const std::string& section = "system") {
    const auto key = [&](const char* k) { return section + "." + k; };
    const std::string preset = cfg.str(key("preset"));
    const auto base_of = [&](const char* k, BaseSpace fallback) {
        const std::string b = cfg.str_or(key(k), fallback == BaseSpace::torus ? "torus" : "line");
        if (b == "line") return BaseSpace::line;
        if (b == "torus") return BaseSpace::torus;
        throw ConfigError(cfg.source() + ": '" + key(k) + "' must be 'line' or 'torus', found '" +
                          b + "'");
    };
    if (preset == "free") {
        const int n = static_cast<int>(cfg.integer_or(key("dim"), 1));
        return free_lagrangian(n, base_of("base", BaseSpace::line));
    }
    if (preset == "harmonic") {
        Vec omega = cfg.vector(key("omega"));
        if (cfg.has(key("dim"))) {
            const int n = static_cast<int>(cfg.integer(key("dim")));
            if (omega.size() == 1) omega = Vec::Constant(n, omega(0));
            if (omega.size() != n)
                throw ConfigError(cfg.source() + ": '" + key("omega") + "' needs 1 or " +
                                  std::to_string(n) + " entries");
        }
        return harmonic_lagrangian(omega);
    }
    if (preset == "pendulum") {
        const int n = static_cast<int>(cfg.integer_or(key("dim"), 1));
        return pendulum_lagrangian(n, cfg.number(key("eps")), cfg.number_or(key("wave"), 0.0));
    }
    if (preset == "modulated-pendulum") {
        return modulated_pendulum_lagrangian(cfg.number(key("eps")),
                                             cfg.number(key("sigma")));
    }
    if (preset == "double-well") {
        return double_well_lagrangian(cfg.number(key("kappa")), cfg.number(key("a")),
                                      cfg.number_or(key("tilt"), 0.0));
    }
    if (preset == "magnetic") {
        return magnetic_lagrangian(cfg.number(key("b")), cfg.number_or(key("omega"), 0.0));
    }
    if (preset == "polynomial") {
        const int n = static_cast<int>(cfg.integer_or(key("dim"), 1));
        return polynomial_lagrangian(cfg.vector(key("coefficients")), n,
                                     base_of("base", BaseSpace::line));
    }
    throw ConfigError(cfg.source() + ":" + std::to_string(cfg.line_of(key("preset"))) +
                      ": unknown system preset '" + preset +
                      "' (expected free, harmonic, pendulum, modulated-pendulum, "
                      "double-well, magnetic or polynomial)");
}

inline NonlocalBoundary boundary_from_config(const Config& cfg, int n,
                                             const std::string& section = "boundary") {
    const auto key = [&](const char* k) { return section + "." + k; };
    const std::string preset = cfg.str(key("preset"));
    const auto sized = [&](const char* k, int len) {
        const Vec v = cfg.vector(key(k));
        if (v.size() != len)
            throw ConfigError(cfg.source() + ": '" + key(k) + "' needs " + std::to_string(len) +
                              " entries, found " + std::to_string(static_cast<int>(v.size())));
        return v;
    };
    if (preset == "dirichlet") return dirichlet_boundary(sized("q0", n), sized("q1", n));
    if (preset == "neumann") return neumann_boundary(n);
    if (preset == "diagonal") {
        if (cfg.has(key("winding"))) return diagonal_boundary(n, sized("winding", n));
        return diagonal_boundary(n);
    }
    if (preset == "figure8") {
        if (cfg.has(key("winding"))) return figure_eight_boundary(n, sized("winding", n));
        return figure_eight_boundary(n);
    }
    if (preset == "product") {
        const Mat A0 = cfg.matrix(key("A0"));
        const Mat A1 = cfg.matrix(key("A1"));
        return product_boundary(n, A0, sized("b0", static_cast<int>(A0.rows())), A1,
                                sized("b1", static_cast<int>(A1.rows())));
    }
    if (preset == "custom") {
        const Mat A = cfg.matrix(key("A"));
        return NonlocalBoundary(n, A, sized("b", static_cast<int>(A.rows())));
    }
    throw ConfigError(cfg.source() + ":" + std::to_string(cfg.line_of(key("preset"))) +
                      ": unknown boundary preset '" + preset +
                      "' (expected dirichlet, neumann, diagonal, figure8, product or custom)");
}

inline FlowOptions flow_options_from_config(const Config& cfg,
                                            const std::string& section = "flow") {
    const auto key = [&](const char* k) { return section + "." + k; };
    FlowOptions opt;
    opt.step = cfg.positive_or(key("step"), opt.step);
    opt.max_newton = static_cast<int>(cfg.integer_or(key("max_newton"), opt.max_newton));
    opt.newton_tol = cfg.positive_or(key("newton_tol"), opt.newton_tol);
    return opt;
}

inline MaslovOptions maslov_options_from_config(const Config& cfg,
                                                const std::string& section = "maslov") {
    const auto key = [&](const char* k) { return section + "." + k; };
    MaslovOptions opt;
    opt.grid = static_cast<int>(cfg.integer_or(key("grid"), opt.grid));
    opt.crossing_gap = cfg.positive_or(key("crossing_gap"), opt.crossing_gap);
    opt.isect_cutoff = cfg.positive_or(key("isect_cutoff"), opt.isect_cutoff);
    opt.zero_band = cfg.positive_or(key("zero_band"), opt.zero_band);
    opt.allow_fallback = cfg.flag_or(key("allow_fallback"), opt.allow_fallback);
    opt.fallback_eps = cfg.positive_or(key("fallback_eps"), opt.fallback_eps);
    return opt;
}

inline ShootingOptions shooting_from_config(const Config& cfg,
                                            const std::string& section = "solve") {
    const auto key = [&](const char* k) { return section + "." + k; };
    ShootingOptions opt;
    opt.search_flow.step = cfg.positive_or(key("search_step"), opt.search_flow.step);
    opt.polish_flow.step = cfg.positive_or(key("polish_step"), opt.polish_flow.step);
    opt.max_newton = static_cast<int>(cfg.integer_or(key("max_newton"), opt.max_newton));
    opt.residual_tol = cfg.positive_or(key("residual_tol"), opt.residual_tol);
    opt.merge_distance = cfg.positive_or(key("merge_distance"), opt.merge_distance);
    opt.seeds_per_dim = static_cast<int>(cfg.integer_or(key("seeds_per_dim"), opt.seeds_per_dim));
    opt.seed_box = cfg.positive_or(key("seed_box"), opt.seed_box);
    opt.compute_index = cfg.flag_or(key("compute_index"), opt.compute_index);
    return opt;
}

inline VerifyOptions verify_from_config(const Config& cfg,
                                        const std::string& section = "verify") {
    const auto key = [&](const char* k) { return section + "." + k; };
    VerifyOptions opt;
    opt.path_segments =
        static_cast<int>(cfg.integer_or(key("path_segments"), opt.path_segments));
    opt.legendre_tol = cfg.positive_or(key("legendre_tol"), opt.legendre_tol);
    opt.boundary_tol = cfg.positive_or(key("boundary_tol"), opt.boundary_tol);
    opt.allow_refinement = cfg.flag_or(key("allow_refinement"), opt.allow_refinement);
    return opt;
}

inline MorseComplexOptions complex_from_config(const Config& cfg,
                                               const std::string& section = "complex") {
    const auto key = [&](const char* k) { return section + "." + k; };
    MorseComplexOptions opt;
    opt.nodes = static_cast<int>(cfg.integer_or(key("nodes"), opt.nodes));
    opt.seed_amplitude = cfg.positive_or(key("seed_amplitude"), opt.seed_amplitude);
    opt.amplitude_seeds =
        static_cast<int>(cfg.integer_or(key("amplitude_seeds"), opt.amplitude_seeds));
    opt.shift_seeds = static_cast<int>(cfg.integer_or(key("shift_seeds"), opt.shift_seeds));
    opt.max_newton = static_cast<int>(cfg.integer_or(key("max_newton"), opt.max_newton));
    opt.newton_tol = cfg.positive_or(key("newton_tol"), opt.newton_tol);
    opt.merge_distance = cfg.positive_or(key("merge_distance"), opt.merge_distance);
    opt.flow_tol = cfg.positive_or(key("flow_tol"), opt.flow_tol);
    opt.max_flow_steps =
        static_cast<int>(cfg.integer_or(key("max_flow_steps"), opt.max_flow_steps));
    opt.shoot_delta = cfg.positive_or(key("shoot_delta"), opt.shoot_delta);
    opt.classify_tol = cfg.positive_or(key("classify_tol"), opt.classify_tol);
    return opt;
}

}  // namespace maslov::io
