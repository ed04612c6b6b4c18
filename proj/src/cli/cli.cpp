#include "gpvol/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <ostream>

#include "commands.hpp"
#include "gpvol/csv.hpp"
#include "gpvol/errors.hpp"

namespace gpvol::cli {

std::string format_model_file(const ModelFile& model) {
    std::string out = "# binding=";
    out += model.binding == TerminalBinding::Call ? "call" : "put";
    out += '\n';
    out += format(model.tree, model.binding);
    out += '\n';
    return out;
}

ModelFile parse_model_file(std::string_view text) {
    ModelFile model;
    std::string expr;
    bool have_binding = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
        if (line.empty()) continue;
        if (line.front() == '#') {
            const std::size_t at = line.find("binding=");
            if (at != std::string_view::npos) {
                const std::string_view value = line.substr(at + 8);
                if (value == "call") model.binding = TerminalBinding::Call;
                else if (value == "put") model.binding = TerminalBinding::Put;
                else throw ParseError("model file: binding must be call or put");
                have_binding = true;
            }
            continue;
        }
        expr += std::string(line);
        expr += ' ';
    }
    if (!have_binding) throw ParseError("model file: missing '# binding=call|put' header");
    if (expr.empty()) throw ParseError("model file: no expression");
    model.tree = parse(expr);
    return model;
}

ModelFile load_model(const std::string& spec) {
    if (spec == "builtin-call") return {builtin_call_model(), TerminalBinding::Call};
    if (spec == "builtin-put") return {builtin_put_model(), TerminalBinding::Put};
    return parse_model_file(read_input(spec));
}

std::string read_input(const std::string& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) throw InputError("input file not found: " + path);
    return read_file(path);
}

void prepare_output_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw InputError("cannot create output directory: " + dir);
}

std::string timestamp_now() {
    std::time_t t = 0;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
        t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    } else {
        t = std::time(nullptr);
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace {

std::string join(const std::vector<std::string>& items, char sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += sep;
        out += items[i];
    }
    return out;
}

}  // namespace

void write_manifest(const Manifest& m) {
    kv::Map map;
    map["command"] = m.command;
    map["argv"] = join(m.argv, ' ');
    map["config"] = m.config.value_or("");
    map["inputs"] = join(m.inputs, ',');
    std::vector<std::string> seeds;
    for (auto s : m.seeds) seeds.push_back(std::to_string(s));
    map["seeds"] = join(seeds, ',');
    map["output_dir"] = m.output_dir;
    std::vector<std::string> artifacts = m.artifacts;
    std::sort(artifacts.begin(), artifacts.end());
    map["artifacts"] = join(artifacts, ',');
    map["started_at"] = m.started_at;
    map["finished_at"] = timestamp_now();
    write_file((std::filesystem::path(m.output_dir) / "manifest.txt").string(), kv::write(map));
}

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(',', start), text.size());
        if (end > start) out.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return out;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Genetic-programming implied volatility models and hedging backtests", "gpvol"};
    app.require_subcommand(1);

    std::vector<std::string> raw_args(argv + 1, argv + argc);

    SynthOptions synth;
    auto* s = app.add_subcommand("synth", "Generate a synthetic quotes CSV from a market spec");
    s->add_option("--spec", synth.spec, "Market spec (key=value)")->required();
    s->add_option("--out", synth.out, "Output directory")->required();

    PrepareOptions prep;
    auto* p = app.add_subcommand("prepare", "Filter quotes and split them into training/test samples");
    p->add_option("--quotes", prep.quotes, "Quotes CSV")->required();
    p->add_option("--scheme", prep.scheme, "ts | mtm | global")->capture_default_str();
    p->add_option("--k", prep.k, "Number of time-series samples")->capture_default_str();
    p->add_flag("!--no-filter", prep.filter, "Skip the exclusion filters");
    p->add_option("--min-days", prep.min_days)->capture_default_str();
    p->add_option("--min-quote", prep.min_quote)->capture_default_str();
    p->add_option("--moneyness-low", prep.moneyness_low)->capture_default_str();
    p->add_option("--moneyness-high", prep.moneyness_high)->capture_default_str();
    p->add_option("--out", prep.out, "Output directory")->required();

    TrainOptions train;
    std::optional<std::uint64_t> seed_override;
    auto* t = app.add_subcommand("train", "Evolve volatility models on a prepared partition");
    t->add_option("--partition", train.partition, "Directory written by prepare")->required();
    t->add_option("--config", train.config, "GP config (key=value)");
    t->add_option("--policy", train.policy, "static | rss | sss | asss | arss")->capture_default_str();
    t->add_option("--sample", train.sample, "Static policy: train on this sample only");
    t->add_option("--kind", train.kind, "call | put")->capture_default_str();
    t->add_option("--seeds", train.seeds, "Number of seeds (config seed + 0..n-1)")->capture_default_str();
    t->add_option("--seed", seed_override, "Base seed (overrides the config)");
    t->add_option("--execution", train.execution, "serial | parallel");
    t->add_option("--out", train.out, "Output directory")->required();

    HedgeOptions hedge;
    std::string strategies = "delta,gamma,vega";
    std::string freqs = "1,7";
    auto* h = app.add_subcommand("hedge", "Backtest delta, delta-gamma and delta-vega hedges");
    h->add_option("--quotes", hedge.quotes, "Quotes CSV")->required();
    auto* model_opt = h->add_option("--model", hedge.model, "Model file, builtin-call or builtin-put");
    auto* bs_opt = h->add_flag("--bs", hedge.bs_only, "Black-Scholes implied vol only");
    model_opt->excludes(bs_opt);
    h->add_flag("--no-baseline", hedge.no_baseline, "Omit the BS rows when a model is given");
    h->add_option("--strategy", strategies, "Comma list of delta, gamma, vega")->capture_default_str();
    h->add_option("--freq", freqs, "Comma list of rebalancing intervals in days")->capture_default_str();
    h->add_option("--contracts", hedge.contracts, "CSV with kind,strike,expiry_date");
    h->add_option("--kind", hedge.kind, "call | put | all");
    h->add_option("--spacing", hedge.spacing, "trading | calendar")->capture_default_str();
    h->add_flag("--filter", hedge.filter, "Apply the exclusion filters to the quotes first");
    h->add_flag("--long", hedge.long_format, "Also write the long-format report");
    h->add_flag("--serial", hedge.serial, "Simulate paths serially");
    h->add_option("--out", hedge.out, "Output directory")->required();

    ReportOptions report;
    auto* r = app.add_subcommand("report", "Format training summaries or hedge reports");
    r->add_option("--summary", report.summary, "summary.csv written by train");
    r->add_option("--hedge-long", report.hedge_long, "report_long.csv written by hedge --long");
    r->add_option("--out", report.out, "Output file (default: stdout)");

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp&) {
            out << app.help();
            return kExitOk;
        } catch (const CLI::CallForAllHelp&) {
            out << app.help("", CLI::AppFormatMode::All);
            return kExitOk;
        } catch (const CLI::ParseError& e) {
            err << "gpvol: " << e.what() << "\n";
            return kExitUsage;
        }

        if (seed_override) train.seed = seed_override;
        hedge.strategies = split_list(strategies);
        hedge.frequencies.clear();
        for (const auto& f : split_list(freqs)) {
            try {
                std::size_t used = 0;
                const int v = std::stoi(f, &used);
                if (used != f.size()) throw std::invalid_argument(f);
                hedge.frequencies.push_back(v);
            } catch (const std::logic_error&) {
                throw ConfigError("--freq: invalid interval '" + f + "'");
            }
        }

        if (s->parsed()) return cmd_synth(synth, {"synth", raw_args}, out);
        if (p->parsed()) return cmd_prepare(prep, {"prepare", raw_args}, out);
        if (t->parsed()) return cmd_train(train, {"train", raw_args}, out);
        if (h->parsed()) return cmd_hedge(hedge, {"hedge", raw_args}, out);
        if (r->parsed()) return cmd_report(report, out);
        return kExitUsage;
    } catch (const InputError& e) {
        err << "gpvol: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "gpvol: parse error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ValidationError& e) {
        err << "gpvol: invalid input: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "gpvol: configuration error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DegenerateHedgeError& e) {
        err << "gpvol: degenerate hedge: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NoRootError& e) {
        err << "gpvol: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "gpvol: internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("gpvol");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace gpvol::cli
