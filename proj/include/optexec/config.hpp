#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "optexec/model.hpp"

namespace optexec {

/// One `key = value` line of a flat config file.
struct KeyValue {
    std::string key;
    std::string value;
    int line = 0;
};

/// Parses flat `key = value` text. Blank lines and `#` comments are skipped.
/// Duplicate keys and malformed lines throw ConfigError.
std::vector<KeyValue> parse_key_values(std::istream& in, const std::string& source = "<input>");
std::vector<KeyValue> read_key_value_file(const std::string& path);

/// Shortest round-trip representation (%.17g).
std::string format_double(double value);
double parse_double(std::string_view key, std::string_view text);

/// Model parameter keys in canonical order.
const std::vector<std::string>& param_keys();

/// Canonical (key, text) pairs; the text form round-trips bit-exactly.
std::vector<std::pair<std::string, std::string>> params_to_key_values(const ModelParams& params);

/// Returns false for keys that are not model parameters.
bool set_param(ModelParams& params, std::string_view key, std::string_view value);

/// Reads a parameters-only file; unknown keys are an error.
ModelParams load_params(const std::string& path);

void write_params(std::ostream& out, const ModelParams& params);

}  // namespace optexec
