#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "arcvol/averaging.hpp"
#include "arcvol/calibration.hpp"
#include "arcvol/errors.hpp"
#include "arcvol/mc_oracle.hpp"
#include "arcvol/params.hpp"
#include "arcvol/pricer.hpp"

namespace arcvol {

/// Everything a CLI run needs, read from a flat `key = value` file.
struct RunConfig {
    RawModelParams model;
    OptionSpec option;
    SimConfig sim;
    PricerOptions pricer;
    VolFunction::Kind vol_kind = VolFunction::Kind::SeparableExponential;
    std::filesystem::path vol_table;
    std::vector<double> sweep_epsilons;
    std::filesystem::path chain;
    CalibOptions calib;

    VolFunction vol_function() const;
};

/// Parses `key = value` lines; '#' starts a comment. Unknown keys, repeated
/// keys and unparsable values throw Error(ConfigError or ParseError). Relative
/// file paths resolve against `base_dir`.
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Names of every accepted key, in documentation order.
const std::vector<std::string>& config_keys();

/// 0 success, 2 config/validation, 3 numerical singularity, 4 insufficient data.
int exit_code_for(ErrorCode code);

struct CommandIo {
    std::optional<std::filesystem::path> out_path;
    std::optional<std::filesystem::path> paths_dump;
};

int cmd_price(const RunConfig& cfg, std::ostream& out, const CommandIo& io = {});
int cmd_simulate(const RunConfig& cfg, std::ostream& out, const CommandIo& io = {});
int cmd_calibrate(const RunConfig& cfg, std::ostream& out, std::ostream& err, const CommandIo& io = {});
int cmd_diagnose(const RunConfig& cfg, std::ostream& out, const CommandIo& io = {});

}  // namespace arcvol
