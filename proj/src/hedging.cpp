#include "gpvol/hedging.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <tuple>
#include <variant>

#include "gpvol/csv.hpp"
#include "gpvol/errors.hpp"

namespace gpvol {

HedgeFactors hedge_factors(const VolSource& src, double spot, double strike, double rate, double tau,
                           OptionKind kind, double market_price) {
    double sigma;
    if (src.kind == VolSource::Kind::BsImplied) {
        sigma = bs::implied_vol(market_price, spot, strike, rate, tau, kind);
    } else {
        sigma = std::max(eval(src.tree, {market_price / strike, spot / strike, tau}), kGpVolFloor);
    }
    const bs::Greeks g = bs::greeks({spot, strike, rate, tau, sigma, kind});
    return {g.delta, g.gamma, g.vega, sigma};
}

double HedgePath::tau_at(std::size_t i) const { return days_between(points[i].date, expiry) / kDaysPerYear; }

QuoteClass HedgePath::quote_class() const {
    return {classify_moneyness(points.front().spot / strike),
            classify_maturity(days_between(points.front().date, expiry))};
}

void validate(const HedgePath& path) {
    const std::string where = "hedge path '" + path.id + "': ";
    if (path.points.empty()) throw ValidationError(where + "no dates");
    if (!(path.strike > 0.0) || !(path.companion_strike > 0.0)) throw ValidationError(where + "strike must be positive");
    for (std::size_t i = 0; i < path.points.size(); ++i) {
        const HedgePoint& p = path.points[i];
        if (i > 0 && !(path.points[i - 1].date < p.date)) {
            throw ValidationError(where + "dates not strictly increasing at " + format_date(p.date));
        }
        if (p.date > path.expiry) throw ValidationError(where + format_date(p.date) + " is past expiry");
        if (!(p.spot > 0.0)) throw ValidationError(where + "non-positive spot on " + format_date(p.date));
        if (!(p.value >= 0.0) || !(p.companion_value >= 0.0)) {
            throw ValidationError(where + "negative option price on " + format_date(p.date));
        }
        if (!(p.rate >= 0.0)) throw ValidationError(where + "negative rate on " + format_date(p.date));
    }
}

std::size_t stride_for(const HedgePath& path, int days) {
    if (days < 1) throw ConfigError("rebalancing frequency must be at least one day");
    const int steps = path.spacing == Spacing::Calendar ? days : (days * 5 + 3) / 7;
    return static_cast<std::size_t>(std::max(steps, 1));
}

HedgePath subsample(const HedgePath& path, std::size_t stride) {
    HedgePath out = path;
    out.points.clear();
    for (std::size_t i = 0; i < path.points.size(); i += stride) out.points.push_back(path.points[i]);
    if ((path.points.size() - 1) % stride != 0) out.points.push_back(path.points.back());
    return out;
}

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::Delta: return "delta";
        case Strategy::DeltaGamma: return "gamma";
        case Strategy::DeltaVega: return "vega";
    }
    return "?";
}

Strategy strategy_from_string(std::string_view text) {
    if (text == "delta") return Strategy::Delta;
    if (text == "gamma" || text == "delta_gamma") return Strategy::DeltaGamma;
    if (text == "vega" || text == "delta_vega") return Strategy::DeltaVega;
    throw ConfigError("unknown hedging strategy '" + std::string(text) + "' (expected delta|gamma|vega)");
}

namespace {

double year_fraction(const Date& a, const Date& b) { return days_between(a, b) / kDaysPerYear; }

HedgeFactors factors_at(const HedgePath& path, std::size_t i, const VolSource& src, bool companion) {
    const HedgePoint& p = path.points[i];
    return hedge_factors(src, p.spot, companion ? path.companion_strike : path.strike, p.rate, path.tau_at(i),
                         path.kind, companion ? p.companion_value : p.value);
}

}  // namespace

HedgeOutcome run_delta(const HedgePath& path, const VolSource& src) {
    validate(path);
    const auto& pts = path.points;
    HedgeOutcome out;
    out.dates = pts.size();

    double units = 0.0;
    double beta = 0.0;
    if (pts.size() == 1) return out;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const HedgeFactors f = factors_at(path, i, src, false);
        const double next_units = -f.delta;
        if (i == 0) {
            beta = -(pts[0].value + pts[0].spot * next_units);
            out.initial = pts[0].value + next_units * pts[0].spot + beta;
        } else {
            const double dt = year_fraction(pts[i - 1].date, pts[i].date);
            beta = std::exp(pts[i - 1].rate * dt) * beta - pts[i].spot * (next_units - units);
        }
        units = next_units;
        out.underlying_units.push_back(units);
        out.delta_residual.push_back(f.delta + units);
    }
    const std::size_t n = pts.size() - 1;
    beta *= std::exp(pts[n - 1].rate * year_fraction(pts[n - 1].date, pts[n].date));
    out.terminal = pts[n].value + units * pts[n].spot + beta;
    return out;
}

namespace {

HedgeOutcome run_two_instrument(const HedgePath& path, const VolSource& src, bool use_vega) {
    validate(path);
    const auto& pts = path.points;
    HedgeOutcome out;
    out.dates = pts.size();
    if (pts.size() == 1) return out;

    double x = 0.0;
    double y = 0.0;
    double account = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const HedgeFactors f = factors_at(path, i, src, false);
        const HedgeFactors f1 = factors_at(path, i, src, true);
        const double own = use_vega ? f.vega : f.gamma;
        const double other = use_vega ? f1.vega : f1.gamma;
        if (!(std::abs(other) >= kDegenerateThreshold)) {
            throw DegenerateHedgeError("hedge path '" + path.id + "': companion " + (use_vega ? "vega" : "gamma") +
                                       " below threshold on " + format_date(pts[i].date));
        }
        const double next_y = -own / other;
        const double next_x = -f.delta - next_y * f1.delta;
        if (i == 0) {
            account = -(pts[0].value + next_x * pts[0].spot + next_y * pts[0].companion_value);
            out.initial = pts[0].value + next_x * pts[0].spot + next_y * pts[0].companion_value + account;
        } else {
            const double dt = year_fraction(pts[i - 1].date, pts[i].date);
            account = std::exp(pts[i - 1].rate * dt) * account - (next_x - x) * pts[i].spot -
                      (next_y - y) * pts[i].companion_value;
        }
        x = next_x;
        y = next_y;
        out.underlying_units.push_back(x);
        out.companion_units.push_back(y);
        out.delta_residual.push_back(f.delta + x + y * f1.delta);
        out.second_residual.push_back(own + y * other);
    }
    const std::size_t n = pts.size() - 1;
    account *= std::exp(pts[n - 1].rate * year_fraction(pts[n - 1].date, pts[n].date));
    out.terminal = pts[n].value + x * pts[n].spot + y * pts[n].companion_value + account;
    return out;
}

}  // namespace

HedgeOutcome run_delta_gamma(const HedgePath& path, const VolSource& src) {
    return run_two_instrument(path, src, false);
}

HedgeOutcome run_delta_vega(const HedgePath& path, const VolSource& src) {
    return run_two_instrument(path, src, true);
}

HedgeOutcome run_strategy(const HedgePath& path, Strategy s, const VolSource& src) {
    switch (s) {
        case Strategy::Delta: return run_delta(path, src);
        case Strategy::DeltaGamma: return run_delta_gamma(path, src);
        case Strategy::DeltaVega: return run_delta_vega(path, src);
    }
    return run_delta(path, src);
}

std::optional<double> option_error(const ErrorSample& s) {
    if (s.initial_price == 0.0 || s.dates == 0) return std::nullopt;
    return std::exp(-s.rate * s.maturity) * s.abs_error / (static_cast<double>(s.dates) * s.initial_price);
}

TrackingError tracking_error(std::span<const ErrorSample> samples) {
    TrackingError out;
    double sum = 0.0;
    for (const ErrorSample& s : samples) {
        if (const auto e = option_error(s)) {
            sum += *e;
            ++out.count;
        } else {
            ++out.excluded;
        }
    }
    if (out.count > 0) out.mean = sum / static_cast<double>(out.count);
    return out;
}

namespace {

struct Job {
    std::size_t path;
    std::size_t strategy;
    std::size_t model;
    std::size_t frequency;
};

using JobResult = std::variant<ErrorSample, std::string>;

JobResult run_job(const HedgePath& path, Strategy strategy, const VolSource& src, int frequency) {
    try {
        const HedgePath sampled = subsample(path, stride_for(path, frequency));
        const HedgeOutcome o = run_strategy(sampled, strategy, src);
        return ErrorSample{o.abs_error(), o.dates, sampled.points.front().value, sampled.points.front().rate,
                           sampled.tau_at(0)};
    } catch (const std::exception& e) {
        return std::string(e.what());
    }
}

std::string cell_label(OptionKind kind, const QuoteClass& c, Strategy s, std::string_view model, int freq) {
    return std::string(to_string(kind)) + " " + std::string(to_string(c.moneyness)) + "/" +
           std::string(to_string(c.maturity)) + " " + std::string(to_string(s)) + " " + std::string(model) + " " +
           std::to_string(freq) + "d";
}

}  // namespace

HedgeReport build_report(std::span<const HedgePath> paths, const std::optional<VolSource>& gp,
                         const ReportOptions& options, Execution exec) {
    std::vector<std::string> model_names;
    std::vector<VolSource> sources;
    if (options.baseline) {
        model_names.push_back("BS");
        sources.push_back(VolSource::bs_implied());
    }
    if (gp) {
        model_names.push_back("GP");
        sources.push_back(*gp);
    }
    if (sources.empty()) throw ConfigError("hedge report needs at least one model");
    if (options.strategies.empty() || options.frequencies.empty()) {
        throw ConfigError("hedge report needs at least one strategy and one frequency");
    }
    for (int f : options.frequencies) {
        if (f < 1) throw ConfigError("rebalancing frequency must be at least one day");
    }

    HedgeReport report;
    report.frequencies = options.frequencies;

    std::vector<bool> usable(paths.size(), true);
    for (std::size_t p = 0; p < paths.size(); ++p) {
        try {
            validate(paths[p]);
        } catch (const ValidationError& e) {
            usable[p] = false;
            report.notes.push_back(std::string("skipped: ") + e.what());
        }
    }

    std::vector<Job> jobs;
    for (std::size_t p = 0; p < paths.size(); ++p) {
        if (!usable[p]) continue;
        for (std::size_t s = 0; s < options.strategies.size(); ++s)
            for (std::size_t m = 0; m < sources.size(); ++m)
                for (std::size_t f = 0; f < options.frequencies.size(); ++f) jobs.push_back({p, s, m, f});
    }

    std::vector<JobResult> results(jobs.size());
    const auto count = static_cast<long>(jobs.size());
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (long j = 0; j < count; ++j) {
            const Job& job = jobs[static_cast<std::size_t>(j)];
            results[static_cast<std::size_t>(j)] = run_job(paths[job.path], options.strategies[job.strategy],
                                                           sources[job.model], options.frequencies[job.frequency]);
        }
    } else {
        for (long j = 0; j < count; ++j) {
            const Job& job = jobs[static_cast<std::size_t>(j)];
            results[static_cast<std::size_t>(j)] = run_job(paths[job.path], options.strategies[job.strategy],
                                                           sources[job.model], options.frequencies[job.frequency]);
        }
    }

    // (kind, class, strategy, model, frequency) -> samples
    using Key = std::tuple<int, std::size_t, std::size_t, std::size_t, std::size_t>;
    std::map<Key, std::vector<ErrorSample>> groups;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        const Job& job = jobs[j];
        const HedgePath& path = paths[job.path];
        if (const auto* msg = std::get_if<std::string>(&results[j])) {
            report.notes.push_back("excluded (" + std::string(to_string(options.strategies[job.strategy])) + ", " +
                                   model_names[job.model] + ", " +
                                   std::to_string(options.frequencies[job.frequency]) + "d): " + *msg);
            continue;
        }
        const Key key{static_cast<int>(path.kind), class_index(path.quote_class()), job.strategy, job.model,
                      job.frequency};
        groups[key].push_back(std::get<ErrorSample>(results[j]));
    }

    std::set<std::pair<int, std::size_t>> present;
    for (const auto& [key, samples] : groups) {
        const auto [kind, cls, s, m, f] = key;
        const TrackingError te = tracking_error(samples);
        const auto okind = static_cast<OptionKind>(kind);
        const QuoteClass qc = class_from_index(cls);
        if (te.excluded > 0) {
            report.notes.push_back(std::to_string(te.excluded) + " option(s) with zero initial price excluded from " +
                                   cell_label(okind, qc, options.strategies[s], model_names[m],
                                              options.frequencies[f]));
        }
        if (te.count == 0) continue;
        report.cells.push_back({okind, qc, options.strategies[s], model_names[m], options.frequencies[f], te.mean,
                                te.count});
        present.insert({kind, cls});
    }

    for (OptionKind kind : {OptionKind::Call, OptionKind::Put}) {
        bool any = false;
        for (std::size_t c = 0; c < kClassCount; ++c) any = any || present.count({static_cast<int>(kind), c}) > 0;
        if (!any) continue;
        for (std::size_t c = 0; c < kClassCount; ++c) {
            if (present.count({static_cast<int>(kind), c}) > 0) continue;
            const QuoteClass qc = class_from_index(c);
            report.notes.push_back("no " + std::string(to_string(kind)) + " paths in class " +
                                   std::string(to_string(qc.moneyness)) + "/" + std::string(to_string(qc.maturity)) +
                                   "; rows omitted");
        }
    }

    if (gp && options.baseline) report.win_rates = win_rates(report.cells);
    return report;
}

std::vector<WinRate> win_rates(std::span<const ReportCell> cells) {
    std::vector<WinRate> out;
    for (OptionKind kind : {OptionKind::Call, OptionKind::Put}) {
        WinRate wr{kind, 0, 0};
        for (const ReportCell& gc : cells) {
            if (gc.kind != kind || gc.model != "GP") continue;
            for (const ReportCell& bc : cells) {
                if (bc.kind == kind && bc.model == "BS" && bc.cls == gc.cls && bc.strategy == gc.strategy &&
                    bc.frequency == gc.frequency) {
                    ++wr.cases;
                    if (gc.error < bc.error) ++wr.gp_wins;
                }
            }
        }
        if (wr.cases > 0) out.push_back(wr);
    }
    return out;
}

namespace {

std::string moneyness_label(MoneynessClass m) {
    switch (m) {
        case MoneynessClass::OTM: return "<0.98";
        case MoneynessClass::ATM: return "0.98-1.03";
        case MoneynessClass::ITM: return ">=1.03";
    }
    return "?";
}

std::string maturity_label(MaturityClass t) {
    switch (t) {
        case MaturityClass::ST: return "<60";
        case MaturityClass::MT: return "60-180";
        case MaturityClass::LT: return ">180";
    }
    return "?";
}

const ReportCell* find_cell(const HedgeReport& r, OptionKind kind, MoneynessClass m, MaturityClass t, Strategy s,
                            const std::string& model, int freq) {
    for (const ReportCell& c : r.cells) {
        if (c.kind == kind && c.cls.moneyness == m && c.cls.maturity == t && c.strategy == s && c.model == model &&
            c.frequency == freq) {
            return &c;
        }
    }
    return nullptr;
}

}  // namespace

std::string format_report_wide(const HedgeReport& report) {
    constexpr MaturityClass kMaturities[] = {MaturityClass::ST, MaturityClass::MT, MaturityClass::LT};
    constexpr MoneynessClass kMoneyness[] = {MoneynessClass::OTM, MoneynessClass::ATM, MoneynessClass::ITM};
    constexpr Strategy kStrategies[] = {Strategy::Delta, Strategy::DeltaGamma, Strategy::DeltaVega};

    std::string out = "kind,moneyness,strategy,model";
    for (int f : report.frequencies) {
        for (MaturityClass t : kMaturities) out += "," + std::to_string(f) + "d_" + maturity_label(t);
    }
    out += '\n';

    for (OptionKind kind : {OptionKind::Call, OptionKind::Put}) {
        for (MoneynessClass m : kMoneyness) {
            for (Strategy s : kStrategies) {
                for (const std::string model : {"BS", "GP"}) {
                    std::string row;
                    bool any = false;
                    for (int f : report.frequencies) {
                        for (MaturityClass t : kMaturities) {
                            row += ',';
                            if (const ReportCell* c = find_cell(report, kind, m, t, s, model, f)) {
                                row += csv::format_number(c->error);
                                any = true;
                            }
                        }
                    }
                    if (!any) continue;
                    out += std::string(to_string(kind)) + "," + moneyness_label(m) + "," +
                           std::string(to_string(s)) + "," + model + row + '\n';
                }
            }
        }
        for (const WinRate& w : report.win_rates) {
            if (w.kind != kind) continue;
            out += std::string(to_string(kind)) + ",all,win_rate,GP";
            out += "," + csv::format_number(w.rate());
            for (std::size_t i = 1; i < report.frequencies.size() * 3; ++i) out += ',';
            out += '\n';
        }
    }
    return out;
}

std::string format_report_long(const HedgeReport& report) {
    std::string out = "kind,moneyness,maturity,strategy,model,frequency,error,count\n";
    for (const ReportCell& c : report.cells) {
        out += std::string(to_string(c.kind)) + "," + std::string(to_string(c.cls.moneyness)) + "," +
               std::string(to_string(c.cls.maturity)) + "," + std::string(to_string(c.strategy)) + "," + c.model +
               "," + std::to_string(c.frequency) + "," + csv::format_number(c.error) + "," +
               std::to_string(c.count) + "\n";
    }
    return out;
}

std::string format_win_rates(const HedgeReport& report) {
    std::string out = "kind,cases,gp_wins,win_rate\n";
    for (const WinRate& w : report.win_rates) {
        out += std::string(to_string(w.kind)) + "," + std::to_string(w.cases) + "," + std::to_string(w.gp_wins) +
               "," + csv::format_number(w.rate()) + "\n";
    }
    return out;
}

namespace {

MoneynessClass moneyness_from_string(std::string_view s) {
    for (MoneynessClass m : {MoneynessClass::OTM, MoneynessClass::ATM, MoneynessClass::ITM}) {
        if (s == to_string(m)) return m;
    }
    throw ParseError("unknown moneyness class '" + std::string(s) + "'");
}

MaturityClass maturity_from_string(std::string_view s) {
    for (MaturityClass t : {MaturityClass::ST, MaturityClass::MT, MaturityClass::LT}) {
        if (s == to_string(t)) return t;
    }
    throw ParseError("unknown maturity class '" + std::string(s) + "'");
}

template <typename T>
T parse_number(const std::string& text, std::size_t row, const char* column) {
    T v{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw ParseError("row " + std::to_string(row) + ", column '" + column + "': invalid number '" + text + "'");
    }
    return v;
}

std::size_t require_column(const csv::Table& table, std::string_view name) {
    if (const auto c = table.column(name)) return *c;
    throw ParseError("missing column '" + std::string(name) + "'");
}

}  // namespace

std::vector<ReportCell> parse_report_long(std::string_view text) {
    const csv::Table table = csv::parse(text);
    const std::size_t kind = require_column(table, "kind");
    const std::size_t mon = require_column(table, "moneyness");
    const std::size_t mat = require_column(table, "maturity");
    const std::size_t strat = require_column(table, "strategy");
    const std::size_t model = require_column(table, "model");
    const std::size_t freq = require_column(table, "frequency");
    const std::size_t err = require_column(table, "error");
    const std::size_t cnt = require_column(table, "count");
    std::vector<ReportCell> cells;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const std::size_t line = i + 2;
        ReportCell c;
        try {
            c.kind = option_kind_from_string(row.at(kind));
            c.cls = {moneyness_from_string(row.at(mon)), maturity_from_string(row.at(mat))};
            c.strategy = strategy_from_string(row.at(strat));
        } catch (const std::exception& e) {
            throw ParseError("row " + std::to_string(line) + ": " + e.what());
        }
        c.model = row.at(model);
        c.frequency = parse_number<int>(row.at(freq), line, "frequency");
        c.error = parse_number<double>(row.at(err), line, "error");
        c.count = parse_number<std::size_t>(row.at(cnt), line, "count");
        cells.push_back(std::move(c));
    }
    return cells;
}

PathSelection build_hedge_paths(const std::vector<OptionQuote>& quotes, std::span<const ContractId> contracts,
                                Spacing spacing) {
    PathSelection out;
    if (quotes.empty()) return out;

    // (kind, expiry, strike) -> date -> quote
    using Series = std::map<std::chrono::sys_days, const OptionQuote*>;
    std::map<std::tuple<int, std::chrono::sys_days, double>, Series> panel;
    std::chrono::sys_days first = std::chrono::sys_days(quotes.front().quote_date);
    for (const OptionQuote& q : quotes) {
        panel[{static_cast<int>(q.kind), std::chrono::sys_days(q.expiry_date), q.strike}][std::chrono::sys_days(
            q.quote_date)] = &q;
        first = std::min(first, std::chrono::sys_days(q.quote_date));
    }

    std::vector<ContractId> targets(contracts.begin(), contracts.end());
    if (targets.empty()) {
        for (const auto& [key, series] : panel) {
            if (series.begin()->first == first) {
                targets.push_back({static_cast<OptionKind>(std::get<0>(key)), std::get<2>(key),
                                   Date(std::get<1>(key))});
            }
        }
    }

    for (const ContractId& c : targets) {
        const std::string id = std::string(to_string(c.kind)) + "_" + csv::format_number(c.strike) + "_" +
                               format_date(c.expiry);
        const auto expiry = std::chrono::sys_days(c.expiry);
        const auto it = panel.find({static_cast<int>(c.kind), expiry, c.strike});
        if (it == panel.end()) {
            out.skipped.push_back(id + ": no quotes");
            continue;
        }
        const double* best = nullptr;
        double best_gap = 0.0;
        for (const auto& [key, series] : panel) {
            if (std::get<0>(key) != static_cast<int>(c.kind) || std::get<1>(key) != expiry) continue;
            const double k1 = std::get<2>(key);
            if (k1 == c.strike) continue;
            const double gap = std::abs(k1 - c.strike);
            if (best == nullptr || gap < best_gap) {
                best = &std::get<2>(key);
                best_gap = gap;
            }
        }
        if (best == nullptr) {
            out.skipped.push_back(id + ": no companion strike with the same expiry");
            continue;
        }
        const Series& own = it->second;
        const Series& companion = panel.at({static_cast<int>(c.kind), expiry, *best});

        HedgePath path;
        path.id = id;
        path.kind = c.kind;
        path.strike = c.strike;
        path.companion_strike = *best;
        path.expiry = c.expiry;
        path.spacing = spacing;
        for (const auto& [day, q] : own) {
            const auto cq = companion.find(day);
            if (cq == companion.end() || day > expiry) continue;
            path.points.push_back({q->quote_date, q->underlying, q->rate, mid_price(*q), mid_price(*cq->second)});
        }
        if (path.points.size() < 2) {
            out.skipped.push_back(id + ": fewer than two dates quoted together with the companion");
            continue;
        }
        out.paths.push_back(std::move(path));
    }
    return out;
}

}  // namespace gpvol
