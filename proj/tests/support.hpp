#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "optexec/model.hpp"

namespace testing_support {

/// Reference market: 50 shares, linear impact 2, unit recovery amplitude.
inline optexec::ModelParams reference(optexec::RecoveryKind kind = optexec::RecoveryKind::Weak, double T = 1.0) {
    optexec::ModelParams p;
    p.recovery_kind = kind;
    p.T = T;
    return p;
}

/// A few shares on a short horizon; small enough for the reference recursion.
inline optexec::ModelParams tiny(optexec::RecoveryKind kind, double lambda_L = 0.0, double l_max = 0.0) {
    optexec::ModelParams p;
    p.x0 = 5;
    p.T = 0.5;
    p.delta_t = 0.01;
    p.recovery_kind = kind;
    p.lambda_bar2 = 0.2;
    p.lambda_L = lambda_L;
    p.l_max = l_max;
    return p;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("optexec_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Hand-rolled generator for property tests; fixed seed per test.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin() { return integer(0, 1) == 1; }

private:
    std::mt19937_64 rng_;
};

}  // namespace testing_support
