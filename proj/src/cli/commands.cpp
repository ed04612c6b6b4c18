#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <map>
#include <ostream>

#include "gpvol/cli.hpp"
#include "gpvol/csv.hpp"
#include "gpvol/errors.hpp"
#include "gpvol/evolution.hpp"
#include "gpvol/hedging.hpp"
#include "gpvol/quotes.hpp"
#include "gpvol/synthmarket.hpp"

namespace gpvol::cli {

namespace fs = std::filesystem;

namespace {

std::string in_dir(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::vector<OptionQuote> load_quotes(const std::string& path) {
    try {
        return parse_quotes(read_input(path));
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

std::string role_name(bool test) { return test ? "test" : "train"; }

}  // namespace

int cmd_synth(const SynthOptions& o, const Invocation& inv, std::ostream& out) {
    const std::string started = timestamp_now();
    const MarketSpec spec = parse_market_spec(read_input(o.spec));
    const std::vector<OptionQuote> quotes = generate_quotes(spec);
    prepare_output_dir(o.out);
    write_file(in_dir(o.out, "quotes.csv"), write_quotes(quotes));
    write_manifest({inv.command, inv.argv, o.spec, {o.spec}, {spec.seed}, o.out, {"quotes.csv"}, started});
    out << "wrote " << quotes.size() << " quotes to " << in_dir(o.out, "quotes.csv") << "\n";
    return kExitOk;
}

int cmd_prepare(const PrepareOptions& o, const Invocation& inv, std::ostream& out) {
    const std::string started = timestamp_now();
    const Scheme scheme = scheme_from_string(o.scheme);
    if (o.k < 2) throw ConfigError("--k must be at least 2");
    std::vector<OptionQuote> quotes = load_quotes(o.quotes);

    FilterCounts counts;
    counts.input = quotes.size();
    counts.kept = quotes.size();
    if (o.filter) {
        const FilterConfig cfg{o.min_days, o.min_quote, o.moneyness_low, o.moneyness_high};
        quotes = apply_filters(quotes, cfg, &counts);
    }
    const Partition partition = build_partition(quotes, scheme, o.k);

    prepare_output_dir(o.out);
    std::vector<std::string> artifacts;
    std::string index = "scheme,name,role,rows,file\n";
    auto emit = [&](const std::vector<NamedSet<OptionQuote>>& sets, bool test) {
        for (const auto& set : sets) {
            const std::string file = set.name + ".csv";
            write_file(in_dir(o.out, file), write_quotes(set.items));
            artifacts.push_back(file);
            index += std::string(to_string(scheme)) + "," + set.name + "," + role_name(test) + "," +
                     std::to_string(set.items.size()) + "," + file + "\n";
        }
    };
    emit(partition.samples, false);
    emit(partition.test_sets, true);
    write_file(in_dir(o.out, "partition.csv"), index);
    artifacts.push_back("partition.csv");

    std::string drops = "stage,count\n";
    drops += "input," + std::to_string(counts.input) + "\n";
    drops += "short_maturity," + std::to_string(counts.short_maturity) + "\n";
    drops += "low_quote," + std::to_string(counts.low_quote) + "\n";
    drops += "deep_moneyness," + std::to_string(counts.deep_moneyness) + "\n";
    drops += "arbitrage," + std::to_string(counts.arbitrage) + "\n";
    drops += "kept," + std::to_string(counts.kept) + "\n";
    write_file(in_dir(o.out, "drops.csv"), drops);
    artifacts.push_back("drops.csv");

    write_manifest({inv.command, inv.argv, std::nullopt, {o.quotes}, {}, o.out, artifacts, started});
    out << "kept " << counts.kept << " of " << counts.input << " quotes; " << partition.samples.size()
        << " training samples, " << partition.test_sets.size() << " test sets in " << o.out << "\n";
    return kExitOk;
}

namespace {

Partition load_partition(const std::string& dir) {
    const std::string index_path = in_dir(dir, "partition.csv");
    const csv::Table table = csv::parse(read_input(index_path));
    const auto scheme_col = table.column("scheme");
    const auto name_col = table.column("name");
    const auto role_col = table.column("role");
    const auto file_col = table.column("file");
    if (!scheme_col || !name_col || !role_col || !file_col) {
        throw ParseError(index_path + ": expected columns scheme,name,role,rows,file");
    }
    Partition partition;
    bool first = true;
    for (const auto& row : table.rows) {
        if (row.size() < table.header.size()) throw ParseError(index_path + ": short row");
        const Scheme scheme = scheme_from_string(row[*scheme_col]);
        if (first) partition.scheme = scheme;
        else if (scheme != partition.scheme) throw ValidationError(index_path + ": mixed schemes");
        first = false;
        NamedSet<OptionQuote> set{row[*name_col], load_quotes(in_dir(dir, row[*file_col]))};
        if (row[*role_col] == "train") partition.samples.push_back(std::move(set));
        else if (row[*role_col] == "test") partition.test_sets.push_back(std::move(set));
        else throw ParseError(index_path + ": role must be train or test");
    }
    if (partition.samples.empty()) throw ValidationError(index_path + ": no training samples");
    return partition;
}

Partition filter_kind(const Partition& p, OptionKind kind) {
    Partition out;
    out.scheme = p.scheme;
    auto keep = [&](const std::vector<NamedSet<OptionQuote>>& sets, std::vector<NamedSet<OptionQuote>>& dst) {
        for (const auto& s : sets) {
            NamedSet<OptionQuote> f{s.name, {}};
            for (const auto& q : s.items) {
                if (q.kind == kind) f.items.push_back(q);
            }
            dst.push_back(std::move(f));
        }
    };
    keep(p.samples, out.samples);
    keep(p.test_sets, out.test_sets);
    return out;
}

std::string family_suffix(Policy p) {
    switch (p) {
        case Policy::Rss: return "R";
        case Policy::Sss: return "S";
        case Policy::Asss: return "AS";
        case Policy::Arss: return "AR";
        case Policy::Static: break;
    }
    return "";
}

std::string scheme_letter(Scheme s) {
    switch (s) {
        case Scheme::TS: return "S";
        case Scheme::MTM: return "C";
        case Scheme::Global: return "G";
    }
    return "?";
}

/// S3 -> M3S3, C4L -> M4C4.
std::string static_family(const std::string& sample) {
    if (sample.size() >= 2 && sample.front() == 'S') return "M" + sample.substr(1) + sample;
    if (sample.size() >= 3 && sample.front() == 'C' && sample.back() == 'L') {
        const std::string c = sample.substr(1, sample.size() - 2);
        return "M" + c + "C" + c;
    }
    return "M_" + sample;
}

struct SummaryRow {
    std::string family;
    std::uint64_t seed = 0;
    MseTotal total;
    double train_mse = 0.0;
    std::string final_sample;
    std::string model_file;
};

}  // namespace

int cmd_train(const TrainOptions& o, const Invocation& inv, std::ostream& out) {
    const std::string started = timestamp_now();
    GPConfig cfg = o.config ? parse_config(read_input(*o.config)) : GPConfig{};
    if (o.seed) cfg.seed = *o.seed;
    if (o.execution) {
        if (*o.execution == "serial") cfg.execution = Execution::Serial;
        else if (*o.execution == "parallel") cfg.execution = Execution::Parallel;
        else throw ConfigError("--execution must be serial or parallel");
    }
    cfg.validate();
    if (o.seeds == 0) throw ConfigError("--seeds must be positive");
    const Policy policy = policy_from_string(o.policy);
    const OptionKind kind = option_kind_from_string(o.kind);
    const TerminalBinding binding = kind == OptionKind::Call ? TerminalBinding::Call : TerminalBinding::Put;

    const Partition quotes_partition = filter_kind(load_partition(o.partition), kind);
    const RecordPartitionConversion conv = to_records(quotes_partition);
    const RecordPartition& partition = conv.partition;
    for (const auto& s : partition.samples) {
        if (s.items.empty()) {
            throw ValidationError("training sample " + s.name + " has no " + std::string(to_string(kind)) +
                                  " records");
        }
    }
    const std::vector<Record> enlarged = enlarged_sample(partition);

    struct Family {
        std::string name;
        ScheduleOptions schedule;
    };
    std::vector<Family> families;
    const std::size_t k = partition.samples.size();
    if (policy == Policy::Static) {
        if (o.sample && partition.find(*o.sample) == nullptr) {
            throw ConfigError("--sample " + *o.sample + " is not a sample of this partition");
        }
        for (std::size_t i = 0; i < k; ++i) {
            if (o.sample && partition.samples[i].name != *o.sample) continue;
            ScheduleOptions sched;
            sched.policy = Policy::Static;
            sched.static_sample = i;
            sched.k = k;
            sched.generations_per_sample = cfg.generations_per_sample;
            families.push_back({static_family(partition.samples[i].name), sched});
        }
        if (families.empty()) throw ConfigError("--sample must name a training sample");
    } else {
        if (o.sample) throw ConfigError("--sample applies to the static policy only");
        ScheduleOptions sched;
        sched.policy = policy;
        sched.k = k;
        sched.generations_per_sample = cfg.generations_per_sample;
        sched.asss_constant = cfg.asss_constant;
        sched.reorder_each_activation = cfg.reorder_each_activation;
        families.push_back({"M" + scheme_letter(partition.scheme) + family_suffix(policy), sched});
    }

    prepare_output_dir(o.out);
    std::vector<std::string> artifacts;
    std::vector<std::uint64_t> seeds;
    for (std::size_t j = 0; j < o.seeds; ++j) seeds.push_back(cfg.seed + j);

    std::vector<SummaryRow> rows;
    for (const Family& fam : families) {
        for (std::uint64_t seed : seeds) {
            GPConfig run_cfg = cfg;
            run_cfg.seed = seed;
            const RunResult res = run(run_cfg, fam.schedule, partition.samples, enlarged);
            const std::string stem = fam.name + "_seed" + std::to_string(seed);
            write_file(in_dir(o.out, stem + ".expr"), format_model_file({res.best.tree, binding}));
            write_file(in_dir(o.out, stem + "_log.csv"), format_run_log(res, partition.samples, policy));
            artifacts.push_back(stem + ".expr");
            artifacts.push_back(stem + "_log.csv");
            rows.push_back({fam.name, seed, res.total, res.best.fitness, partition.samples[res.final_sample].name,
                            stem + ".expr"});
            out << stem << ": mse_total=" << csv::format_number(res.total.mse) << "\n";
        }
    }

    std::stable_sort(rows.begin(), rows.end(),
                     [](const SummaryRow& a, const SummaryRow& b) { return a.total.mse < b.total.mse; });
    std::string summary = "rank,family,seed,policy,kind,mse_total,stddev,train_mse,final_sample,model\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const SummaryRow& r = rows[i];
        summary += std::to_string(i + 1) + "," + r.family + "," + std::to_string(r.seed) + "," +
                   std::string(to_string(policy)) + "," + std::string(to_string(kind)) + "," +
                   csv::format_number(r.total.mse) + "," + csv::format_number(r.total.stddev) + "," +
                   csv::format_number(r.train_mse) + "," + r.final_sample + "," + r.model_file + "\n";
    }
    write_file(in_dir(o.out, "summary.csv"), summary);
    write_file(in_dir(o.out, "best.expr"), read_file(in_dir(o.out, rows.front().model_file)));
    write_file(in_dir(o.out, "config.txt"), write_config(cfg));
    artifacts.insert(artifacts.end(), {"summary.csv", "best.expr", "config.txt"});

    std::vector<std::string> inputs{in_dir(o.partition, "partition.csv")};
    write_manifest({inv.command, inv.argv, o.config, inputs, seeds, o.out, artifacts, started});
    if (conv.dropped > 0) out << conv.dropped << " quotes without an implied volatility were skipped\n";
    out << "best: " << rows.front().model_file << " (mse_total=" << csv::format_number(rows.front().total.mse)
        << ")\n";
    return kExitOk;
}

namespace {

std::vector<ContractId> load_contracts(const std::string& path) {
    const csv::Table table = csv::parse(read_input(path));
    const auto kind = table.column("kind");
    const auto strike = table.column("strike");
    const auto expiry = table.column("expiry_date");
    if (!kind || !strike || !expiry) throw ParseError(path + ": expected columns kind,strike,expiry_date");
    std::vector<ContractId> out;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const std::string where = path + ": row " + std::to_string(i + 2);
        if (row.size() < table.header.size()) throw ParseError(where + ": missing cells");
        ContractId c;
        try {
            c.kind = option_kind_from_string(row[*kind]);
            c.expiry = parse_date(row[*expiry]);
        } catch (const std::exception& e) {
            throw ParseError(where + ": " + e.what());
        }
        const std::string& s = row[*strike];
        const auto res = std::from_chars(s.data(), s.data() + s.size(), c.strike);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ParseError(where + ": invalid strike");
        out.push_back(c);
    }
    return out;
}

}  // namespace

int cmd_hedge(const HedgeOptions& o, const Invocation& inv, std::ostream& out) {
    const std::string started = timestamp_now();
    if (!o.model && !o.bs_only) throw ConfigError("hedge needs --model or --bs");
    if (o.bs_only && o.no_baseline) throw ConfigError("--no-baseline cannot be combined with --bs");

    std::optional<VolSource> gp;
    std::optional<OptionKind> kind;
    if (o.model) {
        const ModelFile model = load_model(*o.model);
        gp = VolSource::gp_model(model.tree);
        kind = model.binding == TerminalBinding::Call ? OptionKind::Call : OptionKind::Put;
    }
    if (o.kind) {
        if (*o.kind == "all") kind.reset();
        else kind = option_kind_from_string(*o.kind);
    }

    gpvol::ReportOptions ro;
    ro.strategies.clear();
    for (const auto& s : o.strategies) ro.strategies.push_back(strategy_from_string(s));
    ro.frequencies = o.frequencies;
    ro.baseline = !o.no_baseline;

    Spacing spacing;
    if (o.spacing == "trading") spacing = Spacing::Trading;
    else if (o.spacing == "calendar") spacing = Spacing::Calendar;
    else throw ConfigError("--spacing must be trading or calendar");

    std::vector<OptionQuote> quotes = load_quotes(o.quotes);
    if (o.filter) quotes = apply_filters(quotes);
    if (kind) {
        std::erase_if(quotes, [&](const OptionQuote& q) { return q.kind != *kind; });
    }
    std::vector<ContractId> contracts;
    if (o.contracts) contracts = load_contracts(*o.contracts);
    const PathSelection selection = build_hedge_paths(quotes, contracts, spacing);
    if (selection.paths.empty()) throw ValidationError("no hedgeable contracts in " + o.quotes);

    const HedgeReport report =
        build_report(selection.paths, gp, ro, o.serial ? Execution::Serial : Execution::Parallel);

    prepare_output_dir(o.out);
    std::vector<std::string> artifacts{"report.csv", "notes.txt"};
    write_file(in_dir(o.out, "report.csv"), format_report_wide(report));
    std::string notes;
    for (const auto& s : selection.skipped) notes += "skipped contract " + s + "\n";
    for (const auto& n : report.notes) notes += n + "\n";
    write_file(in_dir(o.out, "notes.txt"), notes);
    if (!report.win_rates.empty()) {
        write_file(in_dir(o.out, "win_rates.csv"), format_win_rates(report));
        artifacts.push_back("win_rates.csv");
    }
    if (o.long_format) {
        write_file(in_dir(o.out, "report_long.csv"), format_report_long(report));
        artifacts.push_back("report_long.csv");
    }
    std::vector<std::string> inputs{o.quotes};
    if (o.model && fs::is_regular_file(*o.model)) inputs.push_back(*o.model);
    if (o.contracts) inputs.push_back(*o.contracts);
    write_manifest({inv.command, inv.argv, std::nullopt, inputs, {}, o.out, artifacts, started});

    out << selection.paths.size() << " paths, " << report.cells.size() << " report cells";
    for (const auto& w : report.win_rates) {
        out << "; " << to_string(w.kind) << " GP win rate " << csv::format_number(w.rate()) << " (" << w.gp_wins
            << "/" << w.cases << ")";
    }
    out << "\n";
    return kExitOk;
}

namespace {

std::string summary_table(const std::string& path) {
    const csv::Table table = csv::parse(read_input(path));
    const auto fam = table.column("family");
    const auto seed = table.column("seed");
    const auto mse = table.column("mse_total");
    const auto sd = table.column("stddev");
    if (!fam || !seed || !mse || !sd) throw ParseError(path + ": not a train summary");

    struct Best {
        std::string seed;
        std::string mse;
        std::string sd;
        double value;
    };
    std::vector<std::string> order;
    std::map<std::string, Best> best;
    for (const auto& row : table.rows) {
        if (row.size() < table.header.size()) throw ParseError(path + ": short row");
        double v = 0.0;
        const std::string& m = row[*mse];
        const auto res = std::from_chars(m.data(), m.data() + m.size(), v);
        if (res.ec != std::errc()) throw ParseError(path + ": invalid mse_total '" + m + "'");
        auto it = best.find(row[*fam]);
        if (it == best.end()) {
            order.push_back(row[*fam]);
            best.emplace(row[*fam], Best{row[*seed], m, row[*sd], v});
        } else if (v < it->second.value) {
            it->second = Best{row[*seed], m, row[*sd], v};
        }
    }
    std::sort(order.begin(), order.end());
    std::string out = "model,seed,mse_total,stddev,cell\n";
    for (const auto& f : order) {
        const Best& b = best.at(f);
        out += f + "," + b.seed + "," + b.mse + "," + b.sd + "," + b.mse + " (" + b.sd + ")\n";
    }
    return out;
}

}  // namespace

int cmd_report(const ReportOptions& o, std::ostream& out) {
    if (o.summary.has_value() == o.hedge_long.has_value()) {
        throw ConfigError("report needs exactly one of --summary or --hedge-long");
    }
    std::string text;
    if (o.summary) {
        text = summary_table(*o.summary);
    } else {
        HedgeReport report;
        report.cells = parse_report_long(read_input(*o.hedge_long));
        for (const auto& c : report.cells) {
            if (std::find(report.frequencies.begin(), report.frequencies.end(), c.frequency) ==
                report.frequencies.end()) {
                report.frequencies.push_back(c.frequency);
            }
        }
        std::sort(report.frequencies.begin(), report.frequencies.end());
        report.win_rates = win_rates(report.cells);
        text = format_report_wide(report);
    }
    if (o.out) write_file(*o.out, text);
    else out << text;
    return kExitOk;
}

}  // namespace gpvol::cli
