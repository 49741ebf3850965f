#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rbto::cli {

enum class Mode { Dto, Rbto, Verify };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

/// Fully resolved run configuration. Keys of the JSON form are the field
/// names below.
struct RunConfig {
    std::string problem = "mbb"; // mbb | lbeam | custom
    int nx = 60;
    int ny = 20;
    double u_max = 170.0;
    std::vector<double> beta{2.0};
    double a = 1.0;
    double b = 1.1;
    double l1 = 0.6;
    double l2 = 0.6;
    int kl_terms = 2;
    std::string corr_length_mode = "absolute";
    bool kl_rescale_pointwise_variance = false;
    double simp_p = 3.0;
    double rmin = 1.5;
    double dto_tol = 1e-3;
    double sora_tol = 1e-3;
    int sora_max = 20;
    int pce_p = 3;
    int colloc_count = 17;
    int mcs_n = 50000;
    std::string mcs_source = "full-fea";
    std::uint64_t seed = 0;
    std::string output;     // output root; empty means RBTO_OUTPUT_ROOT or ./rbto-out
    std::string design_csv; // verify: density CSV to check instead of optimizing
    bool warm_start = true;

    nlohmann::json to_json() const;
};

/// Names accepted in config files (and, in kebab-case, as flags).
const std::vector<std::string>& config_keys();

/// Defaults plus preset geometry, overridden by `user`. Unknown keys, wrong
/// types and out-of-range values throw rbto::Error with ErrorCode::Config.
RunConfig resolve_config(const nlohmann::json& user);

nlohmann::json load_config_file(const std::filesystem::path& path);

/// Converts a flag string to the JSON type of `key`.
nlohmann::json parse_flag_value(const std::string& key, const std::string& text);

std::string kebab(const std::string& key);

/// Content hash of the config (without the output root) and mode, as 16 hex digits.
std::string config_hash(const RunConfig& config, Mode mode);

std::filesystem::path output_root(const RunConfig& config);
std::filesystem::path run_directory(const RunConfig& config, Mode mode);

} // namespace rbto::cli
