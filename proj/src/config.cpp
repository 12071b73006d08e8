#include "lmsvar/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace lmsvar {

namespace {

constexpr std::array kKnownKeys = {
    "algorithm",      "n_taps",           "mu",         "beta",       "ar1_a",
    "input_variance", "noise_kind",       "noise_variance", "impulse_response", "iterations",
    "burn_in_fraction", "confidence",
};

constexpr std::string_view kSyntheticPrefix = "synthetic:";

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string_view strip_comment(std::string_view line) {
    const auto hash = line.find('#');
    return hash == std::string_view::npos ? line : line.substr(0, hash);
}

double parse_real(std::string_view text, std::string_view what) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw ConfigError(std::string(what) + ": expected a finite real, got '" + std::string(text) + "'");
    }
    return value;
}

std::size_t parse_count(std::string_view text, std::string_view what) {
    std::size_t value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError(std::string(what) + ": expected a nonnegative integer, got '" + std::string(text) +
                          "'");
    }
    return value;
}

} // namespace

std::string format_double(double value) {
    std::array<char, 64> buffer{};
    auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
    return std::string(buffer.data(), ptr);
}

std::vector<double> synthetic_echo_path(std::size_t n_taps, double decay) {
    if (n_taps == 0) {
        throw std::invalid_argument("synthetic echo path needs at least one tap");
    }
    if (!(decay > 0.0) || !std::isfinite(decay)) {
        throw std::invalid_argument("synthetic echo path decay must be positive");
    }
    std::vector<double> h(n_taps);
    double norm2 = 0.0;
    for (std::size_t k = 0; k < n_taps; ++k) {
        const double magnitude = std::exp(-static_cast<double>(k) / decay);
        h[k] = (k % 2 == 0) ? magnitude : -magnitude;
        norm2 += magnitude * magnitude;
    }
    const double inv_norm = 1.0 / std::sqrt(norm2);
    for (auto& c : h) {
        c *= inv_norm;
    }
    return h;
}

std::vector<double> load_impulse_response(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open impulse response file " + path.string());
    }
    std::vector<double> h;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto text = trim(strip_comment(line));
        if (text.empty()) {
            continue;
        }
        try {
            h.push_back(parse_real(text, "coefficient"));
        } catch (const ConfigError& e) {
            throw ConfigError(path.string() + ":" + std::to_string(line_number) + ": " + e.what());
        }
    }
    if (h.empty()) {
        throw ConfigError("impulse response file " + path.string() + " has no coefficients");
    }
    return h;
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    std::map<std::string, std::string, std::less<>> values;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto body = trim(strip_comment(line));
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_number) + ": expected 'key = value'");
        }
        const std::string key(trim(body.substr(0, eq)));
        const std::string value(trim(body.substr(eq + 1)));
        if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end()) {
            throw ConfigError("line " + std::to_string(line_number) + ": unknown key '" + key + "'");
        }
        if (value.empty()) {
            throw ConfigError("line " + std::to_string(line_number) + ": empty value for '" + key + "'");
        }
        if (!values.emplace(key, value).second) {
            throw ConfigError("line " + std::to_string(line_number) + ": duplicate key '" + key + "'");
        }
    }

    auto required = [&](std::string_view key) -> const std::string& {
        const auto it = values.find(key);
        if (it == values.end()) {
            throw ConfigError("missing required key '" + std::string(key) + "'");
        }
        return it->second;
    };
    auto optional = [&](std::string_view key) -> const std::string* {
        const auto it = values.find(key);
        return it == values.end() ? nullptr : &it->second;
    };

    ExperimentConfig config;
    ExperimentSpec& spec = config.spec;

    spec.filter.n_taps = parse_count(required("n_taps"), "n_taps");
    spec.signal.ar1_coefficient = parse_real(required("ar1_a"), "ar1_a");
    spec.signal.input_variance = parse_real(required("input_variance"), "input_variance");

    const auto& kind_name = required("noise_kind");
    const auto kind = parse_noise_kind(kind_name);
    if (!kind) {
        throw ConfigError("noise_kind: unknown kind '" + kind_name + "'");
    }
    spec.plant.noise.kind = *kind;
    spec.plant.noise.variance = parse_real(required("noise_variance"), "noise_variance");
    spec.iterations = parse_count(required("iterations"), "iterations");
    if (const auto* v = optional("burn_in_fraction")) {
        spec.burn_in_fraction = parse_real(*v, "burn_in_fraction");
    }
    if (const auto* v = optional("confidence")) {
        config.confidence = parse_real(*v, "confidence");
        if (!(config.confidence > 0.0 && config.confidence < 1.0)) {
            throw ConfigError("confidence must lie in (0, 1)");
        }
    }

    try {
        spec.signal.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (spec.filter.n_taps == 0) {
        throw ConfigError("n_taps must be at least 1");
    }

    const auto& algorithm = required("algorithm");
    if (algorithm == "lms") {
        if (optional("beta")) {
            throw ConfigError("'beta' is only valid with algorithm = nlms");
        }
        const auto& mu = required("mu");
        const double step = mu == "auto" ? paper_step_size(spec.filter.n_taps, spec.signal.input_variance)
                                         : parse_real(mu, "mu");
        spec.filter.algorithm = Lms{step};
    } else if (algorithm == "nlms") {
        if (optional("mu")) {
            throw ConfigError("'mu' is only valid with algorithm = lms");
        }
        spec.filter.algorithm =
            Nlms{parse_real(required("beta"), "beta"),
                 default_nlms_regularizer(spec.filter.n_taps, spec.signal.input_variance)};
    } else {
        throw ConfigError("algorithm: expected 'lms' or 'nlms', got '" + algorithm + "'");
    }

    config.impulse_source = required("impulse_response");
    const std::string_view source = config.impulse_source;
    if (source.starts_with(kSyntheticPrefix)) {
        const double decay = parse_real(source.substr(kSyntheticPrefix.size()), "impulse_response decay");
        try {
            spec.plant.impulse_response = synthetic_echo_path(spec.filter.n_taps, decay);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    } else {
        std::filesystem::path path(config.impulse_source);
        if (path.is_relative() && !base_dir.empty()) {
            path = base_dir / path;
        }
        spec.plant.impulse_response = load_impulse_response(path);
        if (spec.plant.impulse_response.size() != spec.filter.n_taps) {
            throw ConfigError("impulse response " + path.string() + " has " +
                              std::to_string(spec.plant.impulse_response.size()) + " taps but n_taps is " +
                              std::to_string(spec.filter.n_taps));
        }
    }

    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.parent_path());
}

std::string serialize_config(const ExperimentConfig& config) {
    const auto& spec = config.spec;
    std::ostringstream out;
    if (spec.filter.is_nlms()) {
        out << "algorithm = nlms\n";
        out << "n_taps = " << spec.filter.n_taps << '\n';
        out << "beta = " << format_double(spec.filter.step()) << '\n';
    } else {
        out << "algorithm = lms\n";
        out << "n_taps = " << spec.filter.n_taps << '\n';
        out << "mu = " << format_double(spec.filter.step()) << '\n';
    }
    out << "ar1_a = " << format_double(spec.signal.ar1_coefficient) << '\n';
    out << "input_variance = " << format_double(spec.signal.input_variance) << '\n';
    out << "noise_kind = " << to_string(spec.plant.noise.kind) << '\n';
    out << "noise_variance = " << format_double(spec.plant.noise.variance) << '\n';
    out << "impulse_response = " << config.impulse_source << '\n';
    out << "iterations = " << spec.iterations << '\n';
    out << "burn_in_fraction = " << format_double(spec.burn_in_fraction) << '\n';
    out << "confidence = " << format_double(config.confidence) << '\n';
    return out.str();
}

} // namespace lmsvar
