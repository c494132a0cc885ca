#include "optexec/artifact.hpp"

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <unistd.h>

#include "optexec/config.hpp"
#include "optexec/errors.hpp"

namespace optexec {

namespace {

constexpr const char* kMagic = "optexec-solve-artifact";

class ByteWriter {
public:
    void u16(std::uint16_t v) {
        bytes_.push_back(static_cast<char>(v & 0xFFu));
        bytes_.push_back(static_cast<char>(v >> 8));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
    }
    void f64(double v) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((bits >> (8 * i)) & 0xFFu));
    }
    const std::string& bytes() const { return bytes_; }

private:
    std::string bytes_;
};

class ByteReader {
public:
    ByteReader(const std::string& bytes, std::size_t pos) : bytes_(bytes), pos_(pos) {}
    std::uint64_t raw(int n) {
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    std::uint16_t u16() { return static_cast<std::uint16_t>(raw(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(raw(4)); }
    double f64() { return std::bit_cast<double>(raw(8)); }

private:
    const std::string& bytes_;
    std::size_t pos_;
};

std::string scaling_name(HScaling s) { return s == HScaling::Global ? "global" : "per_row"; }

HScaling parse_scaling(const std::string& s) {
    if (s == "global") return HScaling::Global;
    if (s == "per_row") return HScaling::PerRow;
    throw IoError("artifact: unknown h_scaling '" + s + "'");
}

using Section = std::map<std::string, std::string>;

const std::string& field(const std::map<std::string, Section>& sections, const std::string& section,
                         const std::string& key) {
    const auto s = sections.find(section);
    if (s == sections.end()) throw IoError("artifact: missing [" + section + "] section");
    const auto it = s->second.find(key);
    if (it == s->second.end()) throw IoError("artifact: missing key '" + key + "' in [" + section + "]");
    return it->second;
}

long long to_int(const std::string& text, const std::string& key) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw IoError("artifact: invalid integer for '" + key + "'");
    }
}

double to_double(const std::string& text, const std::string& key) {
    try {
        return parse_double(key, text);
    } catch (const ConfigError&) {
        throw IoError("artifact: invalid number for '" + key + "'");
    }
}

}  // namespace

SolveArtifact make_artifact(const Model& model, const SolverOptions& options, SolveResult result) {
    SolveArtifact a;
    a.params = model.params();
    a.solver = options;
    a.grid = std::move(result.grid);
    a.policy = std::move(result.policy);
    a.phi0 = std::move(result.phi0);
    a.iterations = std::move(result.diagnostics.iterations);
    a.residuals = std::move(result.diagnostics.residuals);
    return a;
}

void save_artifact(const SolveArtifact& a, const std::string& path) {
    std::ostringstream header;
    header << kMagic << "\n";
    header << "format_version = " << a.format_version << "\n";
    header << "[params]\n";
    write_params(header, a.params);
    header << "[grid]\n";
    header << "n_t = " << a.grid.n_t << "\n";
    header << "n_x = " << a.grid.n_x << "\n";
    header << "n_xi = " << a.grid.n_xi << "\n";
    header << "xi_max = " << format_double(a.grid.xi_max) << "\n";
    header << "[solver]\n";
    header << "tol_fp = " << format_double(a.solver.tol_fp) << "\n";
    header << "max_iter = " << a.solver.max_iter << "\n";
    header << "intensity_cap = " << format_double(a.solver.intensity_cap) << "\n";
    header << "h_factor = " << format_double(a.solver.h_factor) << "\n";
    header << "h_scaling = " << scaling_name(a.solver.h_scaling) << "\n";
    header << "tie_tol = " << format_double(a.solver.tie_tol) << "\n";
    header << "time_stride = " << a.solver.time_stride << "\n";
    header << "[diagnostics]\n";
    int max_it = 0;
    long long total_it = 0;
    double max_res = 0.0;
    for (int it : a.iterations) {
        max_it = std::max(max_it, it);
        total_it += it;
    }
    for (double r : a.residuals) max_res = std::max(max_res, r);
    header << "max_iterations = " << max_it << "\n";
    header << "total_iterations = " << total_it << "\n";
    header << "max_residual = " << format_double(max_res) << "\n";
    header << "[payload]\n";
    header << "byte_order = little\n";
    header << "policy = uint16 " << a.policy.raw().size() << "  # stored step, i_x, i_xi; kind << 14 | units\n";
    header << "phi0 = float64 " << a.phi0.values().size() << "  # i_x, i_xi\n";
    header << "iterations = uint32 " << a.iterations.size() << "\n";
    header << "residuals = float64 " << a.residuals.size() << "\n";
    header << "end_header\n";

    ByteWriter payload;
    for (auto v : a.policy.raw()) payload.u16(v);
    for (double v : a.phi0.values()) payload.f64(v);
    for (int v : a.iterations) payload.u32(static_cast<std::uint32_t>(v));
    for (double v : a.residuals) payload.f64(v);

    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write artifact '" + tmp.string() + "'");
        const std::string h = header.str();
        out.write(h.data(), static_cast<std::streamsize>(h.size()));
        out.write(payload.bytes().data(), static_cast<std::streamsize>(payload.bytes().size()));
        out.flush();
        if (!out) throw IoError("write failed for artifact '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move artifact into place at '" + path + "'");
    }
}

SolveArtifact load_artifact(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open artifact '" + path + "'");
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::map<std::string, Section> sections;
    std::string current = "";
    std::size_t pos = 0;
    bool first = true;
    bool ended = false;
    while (pos < bytes.size()) {
        const auto nl = bytes.find('\n', pos);
        if (nl == std::string::npos) break;
        std::string line = bytes.substr(pos, nl - pos);
        pos = nl + 1;
        if (first) {
            if (line != kMagic) throw IoError("'" + path + "' is not a solve artifact");
            first = false;
            continue;
        }
        if (line == "end_header") {
            ended = true;
            break;
        }
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\r')) line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            current = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) throw IoError("artifact: malformed header line '" + line + "'");
        sections[current][line.substr(0, eq)] = line.substr(eq + 3);
    }
    if (first || !ended) throw IoError("artifact '" + path + "': truncated header");

    SolveArtifact a;
    a.format_version = static_cast<int>(to_int(field(sections, "", "format_version"), "format_version"));
    if (a.format_version != kArtifactFormatVersion) {
        throw IoError("artifact '" + path + "' has format version " + std::to_string(a.format_version) +
                      "; this build reads version " + std::to_string(kArtifactFormatVersion) +
                      ". Re-run `optexec solve` with the same config to regenerate it.");
    }

    const auto& params_section = sections["params"];
    for (const auto& key : param_keys()) {
        const auto it = params_section.find(key);
        if (it == params_section.end()) throw IoError("artifact: missing parameter '" + key + "'");
        try {
            set_param(a.params, key, it->second);
        } catch (const ConfigError& e) {
            throw IoError(std::string("artifact: ") + e.what());
        }
    }
    for (const auto& [key, value] : params_section) {
        ModelParams scratch;
        if (!set_param(scratch, key, value)) throw IoError("artifact: unknown parameter '" + key + "'");
    }

    a.solver.tol_fp = to_double(field(sections, "solver", "tol_fp"), "tol_fp");
    a.solver.max_iter = static_cast<int>(to_int(field(sections, "solver", "max_iter"), "max_iter"));
    a.solver.intensity_cap = to_double(field(sections, "solver", "intensity_cap"), "intensity_cap");
    a.solver.h_factor = to_double(field(sections, "solver", "h_factor"), "h_factor");
    a.solver.h_scaling = parse_scaling(field(sections, "solver", "h_scaling"));
    a.solver.tie_tol = to_double(field(sections, "solver", "tie_tol"), "tie_tol");
    a.solver.time_stride = static_cast<int>(to_int(field(sections, "solver", "time_stride"), "time_stride"));

    try {
        a.grid = build_grid(Model(a.params));
    } catch (const ConfigError& e) {
        throw IoError(std::string("artifact: stored parameters are invalid: ") + e.what());
    }
    const auto n_t = to_int(field(sections, "grid", "n_t"), "n_t");
    const auto n_x = to_int(field(sections, "grid", "n_x"), "n_x");
    const auto n_xi = to_int(field(sections, "grid", "n_xi"), "n_xi");
    if (n_t != a.grid.n_t || n_x != a.grid.n_x || n_xi != a.grid.n_xi) {
        throw IoError("artifact: grid echo does not match the stored parameters");
    }
    if (a.solver.time_stride < 1) throw IoError("artifact: invalid time_stride");

    a.policy = PolicyGrid(a.grid.n_t, a.grid.n_x, a.grid.n_xi, a.solver.time_stride);
    a.phi0 = ValueSurface(a.grid.n_x, a.grid.n_xi, 0);
    a.iterations.resize(static_cast<std::size_t>(a.grid.n_t));
    a.residuals.resize(static_cast<std::size_t>(a.grid.n_t));

    const std::size_t expected = a.policy.raw().size() * 2 + a.phi0.values().size() * 8 + a.iterations.size() * 4 +
                                 a.residuals.size() * 8;
    const std::size_t found = bytes.size() - pos;
    if (found != expected) {
        throw IoError("artifact '" + path + "': corrupt payload (expected " + std::to_string(expected) +
                      " bytes for the declared grid, found " + std::to_string(found) + ")");
    }
    ByteReader r(bytes, pos);
    for (auto& v : a.policy.raw()) v = r.u16();
    for (auto& v : a.phi0.values()) v = r.f64();
    for (auto& v : a.iterations) v = static_cast<int>(r.u32());
    for (auto& v : a.residuals) v = r.f64();
    return a;
}

void check_params_match(const SolveArtifact& artifact, const ModelParams& params) {
    const auto stored = params_to_key_values(artifact.params);
    const auto wanted = params_to_key_values(params);
    for (std::size_t i = 0; i < stored.size(); ++i) {
        if (stored[i].second != wanted[i].second) {
            throw ParamsMismatchError(stored[i].first, "artifact parameter '" + stored[i].first + "' is " +
                                                           stored[i].second + " but the config has " +
                                                           wanted[i].second);
        }
    }
}

}  // namespace optexec
