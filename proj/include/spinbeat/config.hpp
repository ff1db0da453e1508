#pragma once

#include "spinbeat/cce.hpp"
#include "spinbeat/lattice.hpp"
#include "spinbeat/tfa.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spinbeat {

/// Raised for malformed, unknown, missing or out-of-range configuration keys.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& message)
        : Error(key + ": " + message), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

struct Band {
    std::string name;
    double lo = 0.0;
    double hi = 0.0;
};

/// Zero-, single- and double-quantum bands in units of A_bar.
std::vector<Band> default_bands();

struct RunConfig {
    // bath
    std::optional<std::filesystem::path> realization_file;
    LatticeSpec lattice;
    std::string species_name = "si29";
    Vec3 hf_axis = Vec3::UnitZ();
    std::string hf_axis_text = "[001]";

    // dynamics
    int cce_order = 2;
    double cutoff_a0 = 2.7;
    TermMask mask;
    bool secular = false;
    EffectiveParams effective;
    TimeGrid grid;

    // analysis
    CwtOptions cwt;
    double sst_gamma = 1e-4;
    int zero_pad = 1;
    bool long_form = true;

    // driver
    std::filesystem::path output_dir = "spinbeat_out";
    std::vector<int> compare_orders;
    double deviation_lo = 0.0;
    double deviation_hi = -1.0;  ///< negative means the end of the grid
    std::vector<std::string> sweep_axes;

    double cutoff() const;
};

/// Parses `key = value` lines; `#` starts a comment. Unknown keys, bad
/// values and missing required keys raise ConfigError naming the key.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Miller direction such as "[111]", "[1-10]" or "[2 2 -1]", or two angles
/// in degrees "theta,phi". Returns a unit vector.
Vec3 parse_axis(const std::string& text);

/// Echo of the resolved configuration as `key = value` lines.
std::string describe_config(const RunConfig& config);

}  // namespace spinbeat
