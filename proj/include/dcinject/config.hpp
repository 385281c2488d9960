#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcinject/flsim.hpp"
#include "dcinject/trigger.hpp"

namespace dcinject {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat key-value run configuration with dotted keys (e.g. trigger.delta),
/// loadable from a text file and overridable with key=value pairs. Every
/// field is validated up front; unknown keys are errors.
struct RunConfig {
    std::uint64_t seed = 1;
    std::string out = "out";

    // dataset source: either explicit files or synthesized
    std::string data_path;
    std::string data_test_path;
    int n_per_class = 200;
    int n_test_per_class = 50;
    int n_classes = 4;
    int height = 16;
    int width = 16;
    int channels = 1;

    double part_alpha = 0.5;
    int hidden_dim = 64;

    int n_clients = 20;
    double malicious_fraction = 0.1;
    int rounds = 50;
    double sample_fraction = 0.5;
    int local_steps = 15;
    double lr = 0.1;
    int batch_size = 32;
    Personalization personalization = Personalization::fedbn;

    TriggerKind trigger_kind = TriggerKind::dcinject;
    double delta = 0.5;
    std::optional<double> epsilon;  // unset = auto: 0.05 * sqrt(H*W)
    double rho = 0.125;
    bool use_mfreq = true;
    bool use_whvs = true;
    bool use_scale = true;
    int target_label = 0;
    double poison_ratio = 0.5;
    int patch_side = 3;
    double patch_value = 1.0;

    bool ablate_components = true;
    bool ablate_alpha_sweep = true;
    int ablate_n_seeds = 1;

    void validate() const;

    /// Effective noise scale for a given image size.
    double resolved_epsilon(int h, int w) const;

    /// Trigger and federation configs with seeds derived from the run seed.
    TriggerConfig trigger_config(int h, int w) const;
    FederationConfig federation_config(int h, int w) const;

    std::uint64_t partition_seed() const;
    std::uint64_t synth_seed() const;

    /// Deterministic key=value listing of the resolved config (epsilon
    /// resolved against the given image size when provided).
    std::string echo(std::optional<std::pair<int, int>> image_size = std::nullopt) const;
};

/// Parse "key = value" lines; '#' starts a comment, blank lines ignored.
std::map<std::string, std::string> parse_kv_text(const std::string& text);

RunConfig config_from_map(const std::map<std::string, std::string>& kv);

/// File (optional) + repeatable key=value overrides + flag overrides.
RunConfig load_run_config(const std::optional<std::string>& file_path,
                          const std::vector<std::string>& overrides,
                          std::optional<std::uint64_t> seed_flag,
                          const std::optional<std::string>& out_flag);

/// Shortest round-trip decimal formatting, stable across runs.
std::string format_double(double v);

/// FNV-1a 64-bit over a string, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace dcinject
