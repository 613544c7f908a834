#pragma once

#include "driftrec/inverse.hpp"
#include "driftrec/noise.hpp"
#include "driftrec/scenario.hpp"
#include "driftrec/validation.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace drift_cli {

using nlohmann::ordered_json;

struct GridSize {
    std::size_t nx = 60;
    std::size_t ny = 60;
};

struct DriftConfig {
    std::string variant = "smooth";  // smooth | piecewise | character | mask
    driftrec::PiecewiseConstantDrift box;
    double background = 1.0;
    double increment = 0.4;
    std::string mask_path;
};

struct MmsConfig {
    std::string study = "space";  // space | time
    std::optional<double> beta;   // default depends on the study
    std::vector<driftrec::Resolution> resolutions;  // empty: the study's defaults
};

/// Everything a run needs. Defaults reproduce the reference setup.
struct RunConfig {
    GridSize grid{60, 60};
    GridSize fine_grid{100, 100};
    bool inverse_crime = false;  // generate data on the inversion grid
    double final_time = 1.0;
    std::size_t steps = 100;
    double cp = 5.0;
    double beta = 1.0;
    DriftConfig drift;
    bool drift_given = false;  // false: the true drift is unknown to invert
    driftrec::NoiseConfig noise;
    driftrec::DenoiseConfig denoise{true};
    bool denoise_auto = true;  // strength not given: derive it from the noise level
    driftrec::InverseConfig iteration;
    MmsConfig mms;
};

/// Parses a JSON document; unknown keys and wrong types raise ConfigError
/// naming the offending key.
RunConfig parse_config(const ordered_json& doc);
/// Relative mask paths are resolved against the config file's directory.
RunConfig load_config(const std::string& path);

/// Fully resolved configuration, suitable for replay.
ordered_json to_json(const RunConfig& cfg);

driftrec::Grid2D inversion_grid(const RunConfig& cfg);
driftrec::Grid2D data_grid(const RunConfig& cfg);

/// Drift for a given grid; mask files and the built-in character mask are
/// sampled on the grid that first needs them.
driftrec::DriftSpec make_drift(const DriftConfig& cfg, const driftrec::Grid2D& grid);

/// Reference problem on `grid` with the configured C_p, T, nt and beta.
driftrec::ProblemSpec make_problem(const RunConfig& cfg, const driftrec::Grid2D& grid,
                                   const driftrec::DriftSpec& drift);

/// Denoise settings for a given noise level (auto strength when none is set).
driftrec::DenoiseConfig denoise_for(const RunConfig& cfg, double delta);

}  // namespace drift_cli
