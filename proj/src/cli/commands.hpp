#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gpvol::cli {

/// Unreadable input file or unusable output directory; maps to exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SynthOptions {
    std::string spec;
    std::string out;
};

struct PrepareOptions {
    std::string quotes;
    std::string scheme = "ts";
    std::size_t k = 10;
    bool filter = true;
    int min_days = 10;
    double min_quote = 0.125;
    double moneyness_low = 0.90;
    double moneyness_high = 1.15;
    std::string out;
};

struct TrainOptions {
    std::string partition;
    std::optional<std::string> config;
    std::string policy = "static";
    std::optional<std::string> sample;
    std::string kind = "call";
    std::size_t seeds = 10;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> execution;
    std::string out;
};

struct HedgeOptions {
    std::string quotes;
    std::optional<std::string> model;
    bool bs_only = false;
    bool no_baseline = false;
    std::vector<std::string> strategies{"delta", "gamma", "vega"};
    std::vector<int> frequencies{1, 7};
    std::optional<std::string> contracts;
    std::optional<std::string> kind;
    std::string spacing = "trading";
    bool filter = false;
    bool long_format = false;
    bool serial = false;
    std::string out;
};

struct ReportOptions {
    std::optional<std::string> summary;
    std::optional<std::string> hedge_long;
    std::optional<std::string> out;
};

struct Invocation {
    std::string command;
    std::vector<std::string> argv;
};

int cmd_synth(const SynthOptions& o, const Invocation& inv, std::ostream& out);
int cmd_prepare(const PrepareOptions& o, const Invocation& inv, std::ostream& out);
int cmd_train(const TrainOptions& o, const Invocation& inv, std::ostream& out);
int cmd_hedge(const HedgeOptions& o, const Invocation& inv, std::ostream& out);
int cmd_report(const ReportOptions& o, std::ostream& out);

/// Writes `<dir>/manifest.txt`: command line, inputs, seeds, artifacts and
/// timestamps (SOURCE_DATE_EPOCH when set).
struct Manifest {
    std::string command;
    std::vector<std::string> argv;
    std::optional<std::string> config;
    std::vector<std::string> inputs;
    std::vector<std::uint64_t> seeds;
    std::string output_dir;
    std::vector<std::string> artifacts;
    std::string started_at;
};

std::string timestamp_now();
void write_manifest(const Manifest& m);

std::string read_input(const std::string& path);
void prepare_output_dir(const std::string& dir);

}  // namespace gpvol::cli
