#include "optexec/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "optexec/errors.hpp"

namespace optexec {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<KeyValue> parse_key_values(std::istream& in, const std::string& source) {
    std::vector<KeyValue> out;
    std::set<std::string> seen;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        std::string_view view = line;
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(source + ":" + std::to_string(number) + ": expected 'key = value'");
        }
        KeyValue kv{std::string(trim(view.substr(0, eq))), std::string(trim(view.substr(eq + 1))), number};
        if (kv.key.empty()) throw ConfigError(source + ":" + std::to_string(number) + ": empty key");
        if (!seen.insert(kv.key).second) {
            throw ConfigError(source + ":" + std::to_string(number) + ": duplicate key '" + kv.key + "'");
        }
        out.push_back(std::move(kv));
    }
    return out;
}

std::vector<KeyValue> read_key_value_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    return parse_key_values(in, path);
}

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

double parse_double(std::string_view key, std::string_view text) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError("invalid number for '" + std::string(key) + "': '" + std::string(text) + "'");
    }
    return value;
}

const std::vector<std::string>& param_keys() {
    static const std::vector<std::string> keys{
        "x0",     "T",           "delta_x",     "delta_t",       "delta_Xi", "s",     "theta1", "theta2",
        "lambda_bar1", "lambda_bar2", "recovery_kind", "lambda_L", "l_max", "sigma",  "p0"};
    return keys;
}

namespace {

double* numeric_field(ModelParams& p, std::string_view key) {
    if (key == "x0") return &p.x0;
    if (key == "T") return &p.T;
    if (key == "delta_x") return &p.delta_x;
    if (key == "delta_t") return &p.delta_t;
    if (key == "delta_Xi") return &p.delta_Xi;
    if (key == "s") return &p.s;
    if (key == "theta1") return &p.theta1;
    if (key == "theta2") return &p.theta2;
    if (key == "lambda_bar1") return &p.lambda_bar1;
    if (key == "lambda_bar2") return &p.lambda_bar2;
    if (key == "lambda_L") return &p.lambda_L;
    if (key == "l_max") return &p.l_max;
    if (key == "sigma") return &p.sigma;
    if (key == "p0") return &p.p0;
    return nullptr;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> params_to_key_values(const ModelParams& params) {
    std::vector<std::pair<std::string, std::string>> out;
    ModelParams copy = params;
    for (const auto& key : param_keys()) {
        if (key == "recovery_kind") {
            out.emplace_back(key, std::string(to_string(params.recovery_kind)));
        } else {
            out.emplace_back(key, format_double(*numeric_field(copy, key)));
        }
    }
    return out;
}

bool set_param(ModelParams& params, std::string_view key, std::string_view value) {
    if (key == "recovery_kind") {
        params.recovery_kind = parse_recovery_kind(value);
        return true;
    }
    double* field = numeric_field(params, key);
    if (!field) return false;
    *field = parse_double(key, value);
    return true;
}

ModelParams load_params(const std::string& path) {
    ModelParams params;
    for (const auto& kv : read_key_value_file(path)) {
        if (!set_param(params, kv.key, kv.value)) {
            throw ConfigError(path + ":" + std::to_string(kv.line) + ": unknown key '" + kv.key + "'");
        }
    }
    return params;
}

void write_params(std::ostream& out, const ModelParams& params) {
    for (const auto& [key, value] : params_to_key_values(params)) out << key << " = " << value << "\n";
}

}  // namespace optexec
