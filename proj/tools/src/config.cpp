#include "rbto_cli/config.hpp"

#include "rbto/error.hpp"
#include "rbto/random_field.hpp"
#include "rbto/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>

namespace rbto::cli {

using nlohmann::json;

namespace {

enum class Kind { Int, UInt, Double, DoubleList, String, Bool };

struct KeySpec {
    const char* name;
    Kind kind;
};

const std::vector<KeySpec>& key_specs() {
    static const std::vector<KeySpec> specs{
        {"problem", Kind::String},       {"nx", Kind::Int},
        {"ny", Kind::Int},               {"u_max", Kind::Double},
        {"beta", Kind::DoubleList},      {"a", Kind::Double},
        {"b", Kind::Double},             {"l1", Kind::Double},
        {"l2", Kind::Double},            {"kl_terms", Kind::Int},
        {"corr_length_mode", Kind::String}, {"kl_rescale_pointwise_variance", Kind::Bool},
        {"simp_p", Kind::Double},        {"rmin", Kind::Double},
        {"dto_tol", Kind::Double},       {"sora_tol", Kind::Double},
        {"sora_max", Kind::Int},         {"pce_p", Kind::Int},
        {"colloc_count", Kind::Int},     {"mcs_n", Kind::Int},
        {"mcs_source", Kind::String},    {"seed", Kind::UInt},
        {"output", Kind::String},        {"design_csv", Kind::String},
        {"warm_start", Kind::Bool},
    };
    return specs;
}

const KeySpec& spec_of(const std::string& key) {
    for (const auto& s : key_specs())
        if (key == s.name) return s;
    throw Error(ErrorCode::Config, "unknown config key '" + key + "'");
}

[[noreturn]] void type_error(const std::string& key, const char* what) {
    throw Error(ErrorCode::Config, "config key '" + key + "' must be " + what);
}

int get_int(const std::string& key, const json& v) {
    if (!v.is_number_integer()) type_error(key, "an integer");
    const auto x = v.get<std::int64_t>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
        throw Error(ErrorCode::Config, "config key '" + key + "' is out of range");
    return static_cast<int>(x);
}

double get_double(const std::string& key, const json& v) {
    if (!v.is_number()) type_error(key, "a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) type_error(key, "finite");
    return x;
}

std::string get_string(const std::string& key, const json& v) {
    if (!v.is_string()) type_error(key, "a string");
    return v.get<std::string>();
}

bool get_bool(const std::string& key, const json& v) {
    if (!v.is_boolean()) type_error(key, "true or false");
    return v.get<bool>();
}

void require(bool ok, const std::string& message) {
    if (!ok) throw Error(ErrorCode::Config, message);
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

void require_positive(const std::string& key, double v) {
    require(v > 0.0, key + " = " + num(v) + " is out of range: must be > 0");
}

} // namespace

std::string to_string(Mode mode) {
    switch (mode) {
    case Mode::Dto: return "dto";
    case Mode::Rbto: return "rbto";
    case Mode::Verify: return "verify";
    }
    return "?";
}

Mode mode_from_string(const std::string& name) {
    if (name == "dto") return Mode::Dto;
    if (name == "rbto") return Mode::Rbto;
    if (name == "verify") return Mode::Verify;
    throw Error(ErrorCode::Config, "unknown mode '" + name + "' (expected dto, rbto or verify)");
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& s : key_specs()) k.emplace_back(s.name);
        return k;
    }();
    return keys;
}

std::string kebab(const std::string& key) {
    std::string k = key;
    std::replace(k.begin(), k.end(), '_', '-');
    return k;
}

json RunConfig::to_json() const {
    return json{
        {"problem", problem},
        {"nx", nx},
        {"ny", ny},
        {"u_max", u_max},
        {"beta", beta},
        {"a", a},
        {"b", b},
        {"l1", l1},
        {"l2", l2},
        {"kl_terms", kl_terms},
        {"corr_length_mode", corr_length_mode},
        {"kl_rescale_pointwise_variance", kl_rescale_pointwise_variance},
        {"simp_p", simp_p},
        {"rmin", rmin},
        {"dto_tol", dto_tol},
        {"sora_tol", sora_tol},
        {"sora_max", sora_max},
        {"pce_p", pce_p},
        {"colloc_count", colloc_count},
        {"mcs_n", mcs_n},
        {"mcs_source", mcs_source},
        {"seed", seed},
        {"output", output},
        {"design_csv", design_csv},
        {"warm_start", warm_start},
    };
}

RunConfig resolve_config(const json& user) {
    require(user.is_object(), "config must be a JSON object");
    for (const auto& [key, value] : user.items()) (void)spec_of(key);

    RunConfig c;
    if (user.contains("problem")) c.problem = get_string("problem", user.at("problem"));
    if (c.problem == "mbb") {
        c.nx = 60;
        c.ny = 20;
        c.u_max = 170.0;
    } else if (c.problem == "lbeam") {
        c.nx = 60;
        c.ny = 60;
        c.u_max = 100.0;
    } else if (c.problem == "custom") {
        c.nx = 40;
        c.ny = 20;
        require(user.contains("u_max"), "problem=custom requires u_max");
    } else {
        throw Error(ErrorCode::Config, "unknown problem '" + c.problem + "' (expected mbb, lbeam or custom)");
    }
    const bool custom = c.problem == "custom";

    auto geometry = [&](const std::string& key, auto& field, auto value) {
        if (!custom && value != field)
            throw Error(ErrorCode::Config, "config key '" + key + "' is fixed by problem=" + c.problem +
                                               "; use problem=custom to change it");
        field = value;
    };

    for (const auto& [key, v] : user.items()) {
        if (key == "problem") continue;
        if (key == "nx") geometry(key, c.nx, get_int(key, v));
        else if (key == "ny") geometry(key, c.ny, get_int(key, v));
        else if (key == "u_max") geometry(key, c.u_max, get_double(key, v));
        else if (key == "beta") {
            c.beta.clear();
            if (v.is_array()) {
                for (std::size_t i = 0; i < v.size(); ++i)
                    c.beta.push_back(get_double("beta[" + std::to_string(i) + "]", v[i]));
            } else {
                c.beta.push_back(get_double(key, v));
            }
        } else if (key == "a") c.a = get_double(key, v);
        else if (key == "b") c.b = get_double(key, v);
        else if (key == "l1") c.l1 = get_double(key, v);
        else if (key == "l2") c.l2 = get_double(key, v);
        else if (key == "kl_terms") c.kl_terms = get_int(key, v);
        else if (key == "corr_length_mode") c.corr_length_mode = get_string(key, v);
        else if (key == "kl_rescale_pointwise_variance") c.kl_rescale_pointwise_variance = get_bool(key, v);
        else if (key == "simp_p") c.simp_p = get_double(key, v);
        else if (key == "rmin") c.rmin = get_double(key, v);
        else if (key == "dto_tol") c.dto_tol = get_double(key, v);
        else if (key == "sora_tol") c.sora_tol = get_double(key, v);
        else if (key == "sora_max") c.sora_max = get_int(key, v);
        else if (key == "pce_p") c.pce_p = get_int(key, v);
        else if (key == "colloc_count") c.colloc_count = get_int(key, v);
        else if (key == "mcs_n") c.mcs_n = get_int(key, v);
        else if (key == "mcs_source") c.mcs_source = get_string(key, v);
        else if (key == "seed") {
            if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
                type_error(key, "a non-negative integer");
            c.seed = v.get<std::uint64_t>();
        } else if (key == "output") c.output = get_string(key, v);
        else if (key == "design_csv") c.design_csv = get_string(key, v);
        else if (key == "warm_start") c.warm_start = get_bool(key, v);
    }

    require(c.nx >= 1 && c.ny >= 1, "nx and ny must be >= 1");
    if (c.problem == "lbeam") require(c.nx == c.ny, "lbeam needs nx == ny");
    require_positive("u_max", c.u_max);
    require(!c.beta.empty(), "beta list is empty");
    for (std::size_t i = 0; i < c.beta.size(); ++i)
        require(c.beta[i] >= 0.0, "beta[" + std::to_string(i) + "] = " + num(c.beta[i]) +
                                      " is out of range: must be >= 0");
    require_positive("a", c.a);
    require(c.b > c.a, "b = " + num(c.b) + " is out of range: must be > a = " + num(c.a));
    require_positive("l1", c.l1);
    require_positive("l2", c.l2);
    require(c.kl_terms >= 1, "kl_terms must be >= 1");
    (void)corr_length_mode_from_string(c.corr_length_mode);
    require(c.simp_p >= 1.0, "simp_p = " + num(c.simp_p) + " is out of range: must be >= 1");
    require_positive("rmin", c.rmin);
    require_positive("dto_tol", c.dto_tol);
    require_positive("sora_tol", c.sora_tol);
    require(c.sora_max >= 1, "sora_max must be >= 1");
    require(c.pce_p >= 1, "pce_p must be >= 1");
    require(c.colloc_count >= 1, "colloc_count must be >= 1");
    require(c.mcs_n >= 1, "mcs_n must be >= 1");
    (void)mcs_source_from_string(c.mcs_source);
    return c;
}

json load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot read config file " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::Config, "malformed config file " + path.string() + ": " + e.what());
    }
}

json parse_flag_value(const std::string& key, const std::string& text) {
    const KeySpec& s = spec_of(key);
    const std::string flag = "--" + kebab(key);
    auto as_double = [&](const std::string& t) {
        char* end = nullptr;
        const double v = std::strtod(t.c_str(), &end);
        if (t.empty() || *end != '\0') throw Error(ErrorCode::Config, flag + ": '" + t + "' is not a number");
        return v;
    };
    switch (s.kind) {
    case Kind::Int:
    case Kind::UInt: {
        char* end = nullptr;
        const long long v = std::strtoll(text.c_str(), &end, 10);
        if (text.empty() || *end != '\0') throw Error(ErrorCode::Config, flag + ": '" + text + "' is not an integer");
        return json(v);
    }
    case Kind::Double: return json(as_double(text));
    case Kind::DoubleList: {
        json list = json::array();
        std::size_t start = 0;
        while (true) {
            const auto comma = text.find(',', start);
            list.push_back(as_double(text.substr(start, comma - start)));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        return list;
    }
    case Kind::String: return json(text);
    case Kind::Bool:
        if (text == "true" || text == "1" || text == "yes") return json(true);
        if (text == "false" || text == "0" || text == "no") return json(false);
        throw Error(ErrorCode::Config, flag + ": '" + text + "' is not a boolean");
    }
    return json();
}

std::string config_hash(const RunConfig& config, Mode mode) {
    json j = config.to_json();
    j.erase("output");
    j["mode"] = to_string(mode);
    const std::string text = j.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::filesystem::path output_root(const RunConfig& config) {
    if (!config.output.empty()) return config.output;
    if (const char* env = std::getenv("RBTO_OUTPUT_ROOT"); env && *env) return env;
    return "rbto-out";
}

std::filesystem::path run_directory(const RunConfig& config, Mode mode) {
    return output_root(config) / (to_string(mode) + "-" + config_hash(config, mode));
}

} // namespace rbto::cli
