#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lmsvar/ensemble.hpp"

namespace lmsvar {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parsed experiment file. `impulse_source` keeps the original
/// `impulse_response` value so the config can be written back out.
struct ExperimentConfig {
    ExperimentSpec spec;
    std::string impulse_source;
    double confidence = 0.997;
};

/// Parses `key = value` lines. Relative impulse-response paths resolve
/// against `base_dir`.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& config);

/// One coefficient per line; blank lines and '#' comments are skipped.
std::vector<double> load_impulse_response(const std::filesystem::path& path);

/// h[k] = (-1)^k exp(-k / decay), scaled to unit Euclidean norm.
std::vector<double> synthetic_echo_path(std::size_t n_taps, double decay);

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double value);

} // namespace lmsvar
