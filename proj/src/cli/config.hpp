#pragma once

// JSON run configuration. Times are in seconds; flags given on the command
// line replace the corresponding file values.

#include "splitflow/model.hpp"
#include "splitflow/net/shaper.hpp"
#include "splitflow/opt/experiment.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace splitflow::cli {

struct GridSpec {
    std::optional<double> step;
    std::vector<double> values;  ///< used when step is empty

    /// "0.1" is a step; "0,0.25,1" is an explicit list.
    static GridSpec parse(const std::string& text);
    std::vector<double> resolve() const;
};

struct NetSettings {
    std::string channel_a = "6:0.5:8388608";
    std::string channel_b = "4:3:67108864";
    std::uint64_t payload = 1 << 20;
    std::size_t trials = 50;
    std::size_t chunk = 64 * 1024;
    std::int64_t timeout_ms = 60'000;
    bool randomize = true;
};

struct OptSettings {
    std::size_t n = 2000;
    std::size_t d = 5;
    double noise = 0.1;
    std::size_t trials = 40;
    std::string jitter_a = "3:0.3";
    std::string jitter_b = "2:3";
};

struct RunConfig {
    std::vector<ChannelProfile> channels;
    std::optional<GridSpec> grid;
    std::optional<std::string> objective;
    QuadratureSettings quad;
    std::size_t trials = 100'000;
    std::uint64_t seed = 0;
    NetSettings net;
    OptSettings opt;
};

/// Throws DomainError for unknown keys or bad values, IoError when the file
/// cannot be read.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);

/// "mu:sigma"
ChannelProfile parse_channel(const std::string& text);

std::vector<double> parse_number_list(const std::string& text);

}  // namespace splitflow::cli
