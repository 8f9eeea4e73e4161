#pragma once

#include <cctype>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "rwre/environment.hpp"
#include "rwre/errors.hpp"
#include "rwre/experiments.hpp"

// Run-config files are a TOML-style key-value tree:
//
//   seed = 7
//   law = { kind = "two_point", atoms = [[0.75, 0.6], [0.25, 0.4]] }
//   [walkers]
//   d = 1
//   p = 1
//   starts = [0, 0]
//
// Supported: [section] headers, strings, integers, floats, booleans, arrays
// (nestable) and inline tables. Unknown keys are rejected, and flags given on
// the command line win over file values.

namespace rwre::config {

using ordered_json = nlohmann::ordered_json;

class TomlParser {
public:
    explicit TomlParser(std::string text) : src_(std::move(text)) {}

    ordered_json parse() {
        ordered_json root = ordered_json::object();
        ordered_json* current = &root;
        skip_blank();
        while (!at_end()) {
            if (peek() == '[') {
                current = parse_section_header(root);
            } else {
                const std::string key = parse_key();
                skip_inline_ws();
                expect('=');
                skip_inline_ws();
                ordered_json value = parse_value();
                if (current->contains(key)) fail("duplicate key '" + key + "'");
                (*current)[key] = std::move(value);
                end_of_line();
            }
            skip_blank();
        }
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("config line " + std::to_string(line_) + ": " + msg);
    }
    bool at_end() const { return pos_ >= src_.size(); }
    char peek() const { return at_end() ? '\0' : src_[pos_]; }
    char take() {
        const char c = peek();
        ++pos_;
        if (c == '\n') ++line_;
        return c;
    }
    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        take();
    }
    void skip_inline_ws() {
        while (peek() == ' ' || peek() == '\t') take();
    }
    void skip_comment() {
        if (peek() == '#')
            while (!at_end() && peek() != '\n') take();
    }
    // whitespace, comments and newlines between top-level statements
    void skip_blank() {
        for (;;) {
            skip_inline_ws();
            skip_comment();
            if (peek() == '\n' || peek() == '\r') {
                take();
                continue;
            }
            return;
        }
    }
    void end_of_line() {
        skip_inline_ws();
        skip_comment();
        if (at_end()) return;
        if (peek() == '\n' || peek() == '\r') {
            take();
            return;
        }
        fail("unexpected trailing characters");
    }
    // whitespace inside arrays/inline tables, where newlines are allowed
    void skip_any_ws() {
        for (;;) {
            skip_inline_ws();
            skip_comment();
            if (peek() == '\n' || peek() == '\r') {
                take();
                continue;
            }
            return;
        }
    }

    static bool is_key_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    }

    std::string parse_key() {
        std::string key;
        while (is_key_char(peek())) key += take();
        if (key.empty()) fail("expected a key");
        return key;
    }

    ordered_json* parse_section_header(ordered_json& root) {
        expect('[');
        ordered_json* node = &root;
        for (;;) {
            skip_inline_ws();
            const std::string part = parse_key();
            if (!node->contains(part)) (*node)[part] = ordered_json::object();
            node = &(*node)[part];
            skip_inline_ws();
            if (peek() == '.') {
                take();
                continue;
            }
            break;
        }
        expect(']');
        end_of_line();
        return node;
    }

    ordered_json parse_value() {
        const char c = peek();
        if (c == '"') return parse_string();
        if (c == '[') return parse_array();
        if (c == '{') return parse_inline_table();
        if (c == 't' || c == 'f') return parse_bool();
        return parse_number();
    }

    ordered_json parse_string() {
        expect('"');
        std::string out;
        for (;;) {
            if (at_end()) fail("unterminated string");
            char c = take();
            if (c == '"') break;
            if (c == '\\') {
                const char e = take();
                switch (e) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default: fail("unsupported escape");
                }
            } else {
                out += c;
            }
        }
        return out;
    }

    ordered_json parse_bool() {
        if (src_.compare(pos_, 4, "true") == 0) {
            pos_ += 4;
            return true;
        }
        if (src_.compare(pos_, 5, "false") == 0) {
            pos_ += 5;
            return false;
        }
        fail("expected true or false");
    }

    ordered_json parse_number() {
        const std::size_t start = pos_;
        bool is_float = false;
        if (peek() == '+' || peek() == '-') take();
        while (!at_end()) {
            const char c = peek();
            if (std::isdigit(static_cast<unsigned char>(c))) {
                take();
            } else if (c == '.' || c == 'e' || c == 'E') {
                is_float = true;
                take();
                if (peek() == '+' || peek() == '-') take();
            } else {
                break;
            }
        }
        const std::string text = src_.substr(start, pos_ - start);
        if (text.empty() || text == "+" || text == "-") fail("expected a number");
        try {
            if (is_float) return std::stod(text);
            return static_cast<std::int64_t>(std::stoll(text));
        } catch (const std::exception&) {
            fail("cannot parse number '" + text + "'");
        }
    }

    ordered_json parse_array() {
        expect('[');
        ordered_json arr = ordered_json::array();
        skip_any_ws();
        if (peek() == ']') {
            take();
            return arr;
        }
        for (;;) {
            skip_any_ws();
            arr.push_back(parse_value());
            skip_any_ws();
            if (peek() == ',') {
                take();
                skip_any_ws();
                if (peek() == ']') { // trailing comma
                    take();
                    return arr;
                }
                continue;
            }
            expect(']');
            return arr;
        }
    }

    ordered_json parse_inline_table() {
        expect('{');
        ordered_json obj = ordered_json::object();
        skip_any_ws();
        if (peek() == '}') {
            take();
            return obj;
        }
        for (;;) {
            skip_any_ws();
            const std::string key = parse_key();
            skip_any_ws();
            expect('=');
            skip_any_ws();
            obj[key] = parse_value();
            skip_any_ws();
            if (peek() == ',') {
                take();
                continue;
            }
            expect('}');
            return obj;
        }
    }

    std::string src_;
    std::size_t pos_ = 0;
    int line_ = 1;
};

inline ordered_json parse_toml(const std::string& text) { return TomlParser(text).parse(); }

// --------------------------------------------------------------------------
// json -> domain objects, with unknown keys rejected
// --------------------------------------------------------------------------

inline void reject_unknown_keys(const ordered_json& obj, const std::set<std::string>& allowed,
                                const std::string& context) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + context);
}

inline double as_double(const ordered_json& v, const std::string& ctx) {
    if (!v.is_number()) throw ConfigError(ctx + " must be a number");
    return v.get<double>();
}
inline std::int64_t as_int(const ordered_json& v, const std::string& ctx) {
    if (!v.is_number_integer()) throw ConfigError(ctx + " must be an integer");
    return v.get<std::int64_t>();
}
inline std::string as_string(const ordered_json& v, const std::string& ctx) {
    if (!v.is_string()) throw ConfigError(ctx + " must be a string");
    return v.get<std::string>();
}

inline EnvironmentLaw law_from_json(const ordered_json& j) {
    if (!j.is_object()) throw ConfigError("law must be a table");
    reject_unknown_keys(j, {"kind", "atoms", "lo", "hi"}, "law");
    if (!j.contains("kind")) throw ConfigError("law needs a kind");
    const std::string kind = as_string(j.at("kind"), "law.kind");

    if (kind == "uniform_interval") {
        if (!j.contains("lo") || !j.contains("hi"))
            throw ConfigError("uniform_interval law needs lo and hi");
        return make_uniform_law(as_double(j.at("lo"), "law.lo"), as_double(j.at("hi"), "law.hi"));
    }
    if (kind == "two_point" || kind == "finite_support") {
        if (!j.contains("atoms")) throw ConfigError(kind + " law needs atoms");
        const ordered_json& atoms = j.at("atoms");
        if (!atoms.is_array()) throw ConfigError("law.atoms must be an array of [value, prob]");
        std::vector<Atom> parsed;
        for (const auto& a : atoms) {
            if (!a.is_array() || a.size() != 2)
                throw ConfigError("each atom must be a [value, prob] pair");
            parsed.push_back({as_double(a[0], "atom value"), as_double(a[1], "atom prob")});
        }
        return kind == "two_point" ? make_two_point_law(std::move(parsed))
                                   : make_finite_support_law(std::move(parsed));
    }
    throw ConfigError("unknown law kind '" + kind + "'");
}

// Inline descriptor for flags: "two_point:0.75@0.75,0.25@0.25",
// "finite_support:v@p,...", "uniform_interval:0.6,0.75".
inline EnvironmentLaw law_from_descriptor(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw ConfigError("law descriptor needs the form kind:args");
    const std::string kind = text.substr(0, colon);
    const std::string args = text.substr(colon + 1);

    auto split = [](const std::string& s, char sep) {
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (start <= s.size()) {
            const auto end = s.find(sep, start);
            if (end == std::string::npos) {
                parts.push_back(s.substr(start));
                break;
            }
            parts.push_back(s.substr(start, end - start));
            start = end + 1;
        }
        return parts;
    };
    auto to_double = [](const std::string& s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("cannot parse number '" + s + "' in law descriptor");
        }
    };

    if (kind == "uniform_interval") {
        const auto parts = split(args, ',');
        if (parts.size() != 2) throw ConfigError("uniform_interval descriptor needs lo,hi");
        return make_uniform_law(to_double(parts[0]), to_double(parts[1]));
    }
    if (kind == "two_point" || kind == "finite_support") {
        std::vector<Atom> atoms;
        for (const std::string& part : split(args, ',')) {
            const auto at = part.find('@');
            if (at == std::string::npos)
                throw ConfigError("atom '" + part + "' needs the form value@prob");
            atoms.push_back({to_double(part.substr(0, at)), to_double(part.substr(at + 1))});
        }
        return kind == "two_point" ? make_two_point_law(std::move(atoms))
                                   : make_finite_support_law(std::move(atoms));
    }
    throw ConfigError("unknown law kind '" + kind + "'");
}

struct LoadedConfig {
    ExperimentConfig exp;
    std::optional<EnvironmentLaw> law_b; // comparison law for the regime probe
};

inline LoadedConfig load_config(const ordered_json& root) {
    reject_unknown_keys(root, {"law", "seed", "threads", "schedule", "walkers", "experiment",
                               "regime"},
                        "config");
    LoadedConfig out;
    ExperimentConfig& cfg = out.exp;

    if (root.contains("law")) cfg.law = law_from_json(root.at("law"));
    if (root.contains("seed"))
        cfg.master_seed = static_cast<std::uint64_t>(as_int(root.at("seed"), "seed"));
    if (root.contains("threads")) {
        cfg.threads = static_cast<int>(as_int(root.at("threads"), "threads"));
        if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
    }

    if (root.contains("schedule")) {
        const ordered_json& s = root.at("schedule");
        reject_unknown_keys(s, {"kappa", "epsilon", "C0", "i_max", "horizon_cap"}, "schedule");
        if (s.contains("kappa") && !(s.at("kappa").is_string() && s.at("kappa") == "auto"))
            cfg.schedule.kappa = as_double(s.at("kappa"), "schedule.kappa");
        if (s.contains("epsilon") && !(s.at("epsilon").is_string() && s.at("epsilon") == "auto"))
            cfg.schedule.epsilon = as_double(s.at("epsilon"), "schedule.epsilon");
        if (s.contains("C0")) cfg.schedule.C0 = as_double(s.at("C0"), "schedule.C0");
        if (s.contains("i_max"))
            cfg.schedule.i_max = static_cast<int>(as_int(s.at("i_max"), "schedule.i_max"));
        if (s.contains("horizon_cap"))
            cfg.schedule.horizon_cap =
                static_cast<std::uint64_t>(as_int(s.at("horizon_cap"), "schedule.horizon_cap"));
    }

    if (root.contains("walkers")) {
        const ordered_json& w = root.at("walkers");
        reject_unknown_keys(w, {"d", "p", "starts"}, "walkers");
        if (w.contains("d")) cfg.d = static_cast<int>(as_int(w.at("d"), "walkers.d"));
        if (w.contains("p")) cfg.p = static_cast<int>(as_int(w.at("p"), "walkers.p"));
        if (w.contains("starts")) {
            const ordered_json& arr = w.at("starts");
            if (!arr.is_array()) throw ConfigError("walkers.starts must be an array");
            cfg.starts.clear();
            for (const auto& v : arr) cfg.starts.push_back(as_int(v, "walkers.starts entry"));
        }
    }

    if (root.contains("experiment")) {
        const ordered_json& e = root.at("experiment");
        reject_unknown_keys(e,
                            {"horizon", "replicas", "environments", "n_grid", "i_list", "x_start",
                             "envelope_constant", "mode"},
                            "experiment");
        if (e.contains("horizon")) cfg.horizon = as_int(e.at("horizon"), "experiment.horizon");
        if (e.contains("replicas"))
            cfg.replicas = static_cast<int>(as_int(e.at("replicas"), "experiment.replicas"));
        if (e.contains("environments"))
            cfg.environments =
                static_cast<int>(as_int(e.at("environments"), "experiment.environments"));
        if (e.contains("n_grid")) {
            const ordered_json& arr = e.at("n_grid");
            if (!arr.is_array()) throw ConfigError("experiment.n_grid must be an array");
            cfg.n_grid.clear();
            for (const auto& v : arr) cfg.n_grid.push_back(as_int(v, "n_grid entry"));
        }
        if (e.contains("i_list")) {
            const ordered_json& arr = e.at("i_list");
            if (!arr.is_array()) throw ConfigError("experiment.i_list must be an array");
            cfg.i_list.clear();
            for (const auto& v : arr)
                cfg.i_list.push_back(static_cast<int>(as_int(v, "i_list entry")));
        }
        if (e.contains("x_start")) cfg.x_start = as_int(e.at("x_start"), "experiment.x_start");
        if (e.contains("envelope_constant"))
            cfg.envelope_constant = as_double(e.at("envelope_constant"), "envelope_constant");
        if (e.contains("mode")) cfg.mode = as_string(e.at("mode"), "experiment.mode");
    }

    if (root.contains("regime")) {
        const ordered_json& r = root.at("regime");
        reject_unknown_keys(r, {"law_b"}, "regime");
        if (r.contains("law_b")) out.law_b = law_from_json(r.at("law_b"));
    }
    return out;
}

inline LoadedConfig load_config_file(const std::string& path) {
    return load_config(parse_toml(io::read_file(path)));
}

} // namespace rwre::config
