#include <charconv>
#include "elab/pipeline.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "elab/competition.hpp"
#include "elab/error.hpp"

namespace elab {

std::string format_number(double x) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

CvrTable simulate(const ExperimentConfig& config, unsigned threads) {
    if (!config.seed) throw ConfigError("required for simulation", "seed");
    if (!config.has_electorate) throw ConfigError("required for simulation", "electorate");
    if (config.races.empty()) throw ConfigError("at least one race is required for simulation", "races");
    const Electorate electorate = generate_electorate(config.electorate, threads);
    const ElectionInputs inputs{config.electorate, electorate, config.races, config.loss,
                                config.choice,     config.responses, *config.seed};
    return simulate_election(inputs, threads);
}

RaceSplit split_races(const ExperimentConfig& config, const CvrTable& table) {
    std::map<std::string, const RaceSpec*> known;
    for (const auto& r : config.races) known[r.race_id] = &r;
    RaceSplit split;
    for (std::size_t j = 0; j < table.race_ids.size(); ++j) {
        bool two_party = false;
        if (const auto it = known.find(table.race_ids[j]); it != known.end()) {
            two_party = !it->second->same_party();
        } else {
            bool dem = false, rep = false;
            for (const auto& rec : table.records) {
                dem = dem || rec.choices[j] == Vote::D;
                rep = rep || rec.choices[j] == Vote::R;
                if (dem && rep) break;
            }
            two_party = dem && rep;
        }
        (two_party ? split.two_party : split.same_party).push_back(j);
    }
    return split;
}

Case1Result analyze_case1(const Tabulation& tab, std::span<const std::size_t> races) {
    if (races.empty()) throw AnalysisError("Case 1 needs at least one same-party race");
    Case1Result out;
    out.abstention_by_group = group_averages(tab, races, GroupMeasure::Abstention);
    std::vector<double> k, rate;
    for (std::size_t g = 0; g < out.abstention_by_group.size(); ++g) {
        if (out.abstention_by_group[g]) {
            k.push_back(static_cast<double>(g));
            rate.push_back(*out.abstention_by_group[g]);
        }
    }
    if (k.size() < 3) throw AnalysisError("Case 1 needs at least 3 populated groups");
    out.spearman = spearman(k, rate);
    return out;
}

namespace {

GroupStats pooled(const Tabulation& tab, std::span<const int> groups, std::size_t race) {
    GroupStats s;
    s.race = race;
    s.race_id = tab.race_ids()[race];
    s.group = groups.empty() ? 0 : groups.front();
    for (int g : groups) {
        if (const auto* c = tab.find(g, race)) {
            s.n_total += c->n_total;
            s.n_dem += c->n_dem;
            s.n_rep += c->n_rep;
            s.n_abstain += c->n_abstain;
            s.n_other += c->n_other;
        }
    }
    return s;
}

}  // namespace

Case2Result analyze_case2(const Tabulation& tab, std::span<const std::size_t> races, double moderate_tolerance) {
    if (races.empty()) throw AnalysisError("Case 2 needs at least one two-party race");
    const auto pol = race_polarization(tab, races);
    Case2Result out;
    std::vector<std::size_t> kept;
    std::vector<double> kept_pol;
    for (std::size_t i = 0; i < races.size(); ++i) {
        if (pol[i]) {
            kept.push_back(races[i]);
            kept_pol.push_back(*pol[i]);
        } else {
            out.excluded.push_back(tab.race_ids()[races[i]]);
        }
    }
    if (kept.empty()) {
        throw AnalysisError("polarization is undefined in every two-party race: group 0 or group " +
                            std::to_string(tab.n_measures()) + " is empty");
    }
    out.moderates = moderate_groups(tab, kept, moderate_tolerance);
    for (std::size_t i = 0; i < kept.size(); ++i) {
        const GroupStats s = pooled(tab, out.moderates, kept[i]);
        if (s.n_total == 0) {
            out.excluded.push_back(tab.race_ids()[kept[i]]);
            continue;
        }
        out.races.push_back(kept[i]);
        out.pol.push_back(kept_pol[i]);
        out.moderate_abstention.push_back(abstention_rate(s));
        out.moderate_predictability.push_back(predictability(s));
    }
    if (out.races.empty()) throw AnalysisError("moderate groups are empty in every polarized race");

    out.group_abstention = group_averages(tab, out.races, GroupMeasure::Abstention);
    out.group_predictability = group_averages(tab, out.races, GroupMeasure::Predictability);
    std::vector<double> x, y;
    for (std::size_t g = 0; g < out.group_abstention.size(); ++g) {
        if (out.group_abstention[g] && out.group_predictability[g]) {
            x.push_back(*out.group_abstention[g]);
            y.push_back(*out.group_predictability[g]);
        }
    }
    try {
        out.coupling = indifference_correlation(x, y);
    } catch (const AnalysisError&) {
        out.coupling = Correlation{std::nan(""), std::nan(""), x.size()};
    }
    return out;
}

std::vector<NamedRegression> fit_case2(const CvrTable& table, const Case2Result& case2,
                                       std::optional<double> threshold) {
    const double t = threshold ? *threshold : mean_threshold(case2.pol);
    std::vector<NamedRegression> out;
    const auto [a_lo, a_hi] = piecewise_polarization(case2.moderate_abstention, case2.pol, t);
    out.push_back({"abstention_piecewise_low", a_lo});
    out.push_back({"abstention_piecewise_high", a_hi});
    const auto [p_lo, p_hi] = piecewise_polarization(case2.moderate_predictability, case2.pol, t);
    out.push_back({"predictability_piecewise_low", p_lo});
    out.push_back({"predictability_piecewise_high", p_hi});
    out.push_back({"abstention_quadratic", quadratic_polarization(case2.moderate_abstention, case2.pol,
                                                                  FixedEffects::None)});
    out.push_back({"predictability_quadratic", quadratic_polarization(case2.moderate_predictability, case2.pol,
                                                                      FixedEffects::None)});

    // Individual abstention of moderate voters, one observation per (voter, race).
    std::vector<double> y, x;
    std::vector<std::uint64_t> units;
    std::vector<std::size_t> per_voter;
    for (const auto& rec : table.records) {
        if (std::any_of(rec.measures.begin(), rec.measures.end(), [](Stance s) { return s == Stance::Missing; })) {
            continue;
        }
        const int k = voter_group(rec.measures);
        if (std::find(case2.moderates.begin(), case2.moderates.end(), k) == case2.moderates.end()) continue;
        const std::size_t first = y.size();
        for (std::size_t i = 0; i < case2.races.size(); ++i) {
            const Vote v = rec.choices[case2.races[i]];
            if (v == Vote::Missing) continue;
            y.push_back(v == Vote::A ? 1.0 : 0.0);
            x.push_back(case2.pol[i]);
            units.push_back(rec.voter_id);
        }
        if (y.size() - first < 2) {
            y.resize(first);
            x.resize(first);
            units.resize(first);
        }
    }
    RegressionResult fe = quadratic_polarization(y, x, FixedEffects::Voter, units);
    out.push_back({"abstention_quadratic_voter_fe", std::move(fe)});
    return out;
}

namespace {

// Holds `<dir>/.electorate-lab.lock` for the lifetime of a run.
class OutputLock {
public:
    explicit OutputLock(const std::filesystem::path& dir) : path_(dir / ".electorate-lab.lock") {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw ConfigError("cannot create output directory " + dir.string(), "output_dir");
        file_ = std::fopen(path_.c_str(), "wx");
        if (!file_) throw ConfigError("output directory is locked by another run: " + path_.string(), "output_dir");
    }
    ~OutputLock() {
        std::fclose(file_);
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    OutputLock(const OutputLock&) = delete;
    OutputLock& operator=(const OutputLock&) = delete;

private:
    std::filesystem::path path_;
    std::FILE* file_ = nullptr;
};

class Csv {
public:
    explicit Csv(std::initializer_list<std::string_view> header) { row(header); }

    template <typename... Fields>
    void add(const Fields&... fields) {
        bool first = true;
        ((text_ += first ? "" : ",", text_ += field(fields), first = false), ...);
        text_ += '\n';
    }

    void write(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << text_;
        if (!out) throw DataError("cannot write " + path.string());
    }

private:
    void row(std::initializer_list<std::string_view> cells) {
        bool first = true;
        for (auto c : cells) {
            if (!first) text_ += ',';
            text_ += c;
            first = false;
        }
        text_ += '\n';
    }
    static std::string field(double x) { return format_number(x); }
    static std::string field(const std::optional<double>& x) { return x ? format_number(*x) : std::string(); }
    static std::string field(std::string_view s) { return std::string(s); }
    static std::string field(const std::string& s) { return s; }
    static std::string field(const char* s) { return s; }
    template <typename T>
        requires std::is_integral_v<T>
    static std::string field(T x) { return std::to_string(x); }

    std::string text_;
};

std::string join_groups(std::span<const int> groups) {
    std::string s;
    for (int g : groups) {
        if (!s.empty()) s += ';';
        s += std::to_string(g);
    }
    return s;
}

CvrTable load_or_simulate(const ExperimentConfig& cfg, unsigned threads, std::ostream& err) {
    const auto path = cfg.cvr_file();
    if (std::filesystem::exists(path)) return read_cvr(path);
    if (cfg.has_electorate) {
        err << "no CVR at " << path.string() << "; simulating in memory\n";
        return simulate(cfg, threads);
    }
    throw ConfigError("no CVR file at " + path.string() + " and no electorate to simulate", "cvr_path");
}

void write_measures(const std::filesystem::path& dir, const Tabulation& tab) {
    std::vector<std::size_t> all(tab.race_ids().size());
    for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
    const auto pol = race_polarization(tab, all);
    Csv csv({"group", "race_id", "n_total", "n_dem", "n_rep", "n_abstain", "abstention_rate", "predictability",
             "pol"});
    for (const auto& s : tab.nonempty()) {
        csv.add(s.group, s.race_id, s.n_total, s.n_dem, s.n_rep, s.n_abstain, abstention_rate(s), predictability(s),
                pol[s.race]);
    }
    csv.write(dir / "measures.csv");
}

int cmd_simulate(const ExperimentConfig& cfg, unsigned threads, std::ostream& out) {
    const CvrTable table = simulate(cfg, threads);
    const auto path = cfg.cvr_file();
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    write_cvr(path, table);
    out << "wrote " << table.records.size() << " ballots to " << path.string() << '\n';
    return 0;
}

int cmd_analyze(const ExperimentConfig& cfg, unsigned threads, std::ostream& out, std::ostream& err) {
    const CvrTable table = load_or_simulate(cfg, threads, err);
    const Tabulation tab = tabulate(table, threads);
    const RaceSplit split = split_races(cfg, table);
    if (tab.skipped_voters) err << tab.skipped_voters << " ballots skipped for missing measure responses\n";
    write_measures(cfg.output_dir, tab);

    Csv summary({"key", "value"});
    if (cfg.analysis.case1) {
        if (split.same_party.empty()) {
            err << "no same-party races; Case 1 skipped\n";
        } else {
            const Case1Result c1 = analyze_case1(tab, split.same_party);
            Csv csv({"group", "abstention_rate"});
            for (std::size_t k = 0; k < c1.abstention_by_group.size(); ++k) {
                csv.add(k, c1.abstention_by_group[k]);
            }
            csv.write(cfg.output_dir / "case1_by_group.csv");
            summary.add("case1_spearman", c1.spearman);
            out << "Case 1: spearman(abstention, k) = " << format_number(c1.spearman) << '\n';
        }
    }
    if (cfg.analysis.case2) {
        const Case2Result c2 = analyze_case2(tab, split.two_party, cfg.analysis.moderate_tolerance);
        for (const auto& id : c2.excluded) err << "race " << id << " excluded: polarization undefined\n";
        Csv by_race({"race_id", "pol", "moderate_abstention", "moderate_predictability"});
        for (std::size_t i = 0; i < c2.races.size(); ++i) {
            by_race.add(tab.race_ids()[c2.races[i]], c2.pol[i], c2.moderate_abstention[i],
                        c2.moderate_predictability[i]);
        }
        by_race.write(cfg.output_dir / "case2_by_race.csv");
        Csv by_group({"group", "abstention_rate", "predictability"});
        for (std::size_t k = 0; k < c2.group_abstention.size(); ++k) {
            by_group.add(k, c2.group_abstention[k], c2.group_predictability[k]);
        }
        by_group.write(cfg.output_dir / "case2_by_group.csv");
        Csv corr({"measure_x", "measure_y", "r", "p_value", "n"});
        corr.add("abstention", "predictability", c2.coupling.r, c2.coupling.p_value, c2.coupling.n);
        corr.write(cfg.output_dir / "correlations.csv");
        summary.add("moderate_groups", join_groups(c2.moderates));
        summary.add("coupling_r", c2.coupling.r);
        summary.add("polarized_races", c2.races.size());
        out << "Case 2: moderate groups " << join_groups(c2.moderates) << ", abstention/predictability r = "
            << format_number(c2.coupling.r) << '\n';
    }
    summary.write(cfg.output_dir / "summary.csv");
    return 0;
}

int cmd_fit(const ExperimentConfig& cfg, unsigned threads, std::ostream& out, std::ostream& err) {
    const CvrTable table = load_or_simulate(cfg, threads, err);
    const Tabulation tab = tabulate(table, threads);
    const Case2Result c2 = analyze_case2(tab, split_races(cfg, table).two_party, cfg.analysis.moderate_tolerance);
    const auto fits = fit_case2(table, c2, cfg.analysis.threshold);
    Csv csv({"model", "term", "coefficient", "se", "n_obs", "r2"});
    for (const auto& f : fits) {
        for (std::size_t i = 0; i < f.result.names.size(); ++i) {
            csv.add(f.model, f.result.names[i], f.result.coefficients[i], f.result.standard_errors[i], f.result.n_obs,
                    f.result.r_squared);
        }
    }
    csv.write(cfg.output_dir / "regressions.csv");
    out << "wrote " << fits.size() << " models to " << (cfg.output_dir / "regressions.csv").string() << '\n';
    return 0;
}

int cmd_predict(const ExperimentConfig& cfg, std::ostream& out) {
    Csv csv({"family", "beta", "setting", "dimensionality", "label"});
    for (const auto& row : trend_table()) {
        csv.add(to_string(row.family), row.beta, to_string(row.setting), to_string(row.dim), to_string(row.label));
    }
    csv.write(cfg.output_dir / "trend_table.csv");
    out << "wrote " << (cfg.output_dir / "trend_table.csv").string() << '\n';
    return 0;
}

std::size_t nearest(std::span<const double> grid, double x) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (std::fabs(grid[i] - x) < std::fabs(grid[best] - x)) best = i;
    }
    return best;
}

int cmd_equilibrium(const ExperimentConfig& cfg, unsigned threads, std::ostream& out) {
    const auto& q = cfg.equilibrium;
    const VoterDensity density = q.density();
    const auto grid = default_platform_grid(density, q.platforms);
    const PlatformGame game(density, grid, cfg.loss, cfg.choice, threads);

    Csv matrix({"p1", "p2", "share1", "share2", "winner"});
    for (std::size_t i = 0; i < game.size(); ++i) {
        for (std::size_t j = 0; j < game.size(); ++j) {
            const auto& o = game.outcome(i, j);
            matrix.add(grid[i], grid[j], o.share1, o.share2, to_string(o.winner));
        }
    }
    matrix.write(cfg.output_dir / "contest_matrix.csv");

    Csv eq({"p1", "p2", "share1", "share2", "winner"});
    for (const auto& [p1, p2] : pure_equilibria(game)) {
        const auto& o = game.outcome(game.index_of(p1), game.index_of(p2));
        eq.add(p1, p2, o.share1, o.share2, to_string(o.winner));
    }
    eq.write(cfg.output_dir / "equilibria.csv");

    Csv report({"key", "value"});
    const auto cw = condorcet_winner(game);
    report.add("condorcet_winner", cw ? format_number(*cw) : std::string("none"));
    const double s1 = q.start ? q.start->first : density.median();
    const double s2 = q.start ? q.start->second : density.median();
    const auto dyn = best_response_dynamics(game, {grid[nearest(grid, s1)], grid[nearest(grid, s2)]}, q.max_iters);
    if (const auto* c = std::get_if<Converged>(&dyn)) {
        report.add("dynamics", "Converged");
        report.add("dynamics_p1", c->p1);
        report.add("dynamics_p2", c->p2);
        report.add("dynamics_iterations", c->iterations);
    } else if (const auto* cy = std::get_if<Cycle>(&dyn)) {
        report.add("dynamics", "Cycle");
        std::string ps;
        for (double p : cy->platforms) ps += (ps.empty() ? "" : ";") + format_number(p);
        report.add("cycle_platforms", ps);
        if (cy->witness) {
            report.add("witness_x_left", cy->witness->x_left);
            report.add("witness_x_left_prime", cy->witness->x_left_prime);
            report.add("witness_x_right", cy->witness->x_right);
        }
    } else {
        const auto& cap = std::get<IterationCap>(dyn);
        report.add("dynamics", "IterationCap");
        report.add("dynamics_p1", cap.p1);
        report.add("dynamics_p2", cap.p2);
    }
    report.write(cfg.output_dir / "equilibrium_report.csv");
    out << "Condorcet winner: " << (cw ? format_number(*cw) : std::string("none")) << '\n';
    return 0;
}

std::vector<FormPoint> read_points(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    std::vector<FormPoint> points;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            if (line != "proxy,indifference") throw DataError("header must be proxy,indifference", 1);
            continue;
        }
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw DataError("expected two fields", line_no);
        char* end = nullptr;
        const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
        const double x = std::strtod(a.c_str(), &end);
        if (a.empty() || *end) throw DataError("bad number '" + a + "'", line_no);
        const double y = std::strtod(b.c_str(), &end);
        if (b.empty() || *end) throw DataError("bad number '" + b + "'", line_no);
        points.push_back({x, y});
    }
    return points;
}

int cmd_classify(const ExperimentConfig& cfg, unsigned threads, std::ostream& out, std::ostream& err) {
    std::vector<FormPoint> points;
    if (cfg.classify.points_path) {
        points = read_points(*cfg.classify.points_path);
    } else {
        const CvrTable table = load_or_simulate(cfg, threads, err);
        const Tabulation tab = tabulate(table, threads);
        const Case2Result c2 =
            analyze_case2(tab, split_races(cfg, table).two_party, cfg.analysis.moderate_tolerance);
        for (std::size_t i = 0; i < c2.races.size(); ++i) points.push_back({c2.pol[i], c2.moderate_abstention[i]});
    }
    ClassifyOptions opt;
    opt.dim = cfg.classify.dim;
    const Classification c = classify_form(points, opt);
    std::string families;
    for (const auto& f : c.families) {
        if (!families.empty()) families += ';';
        families += std::string(to_string(f.family)) + (f.note.empty() ? "" : " (" + f.note + ")");
    }
    Csv csv({"label", "families", "low_slope", "low_se", "high_slope", "high_se", "pol2", "pol2_se", "n_points"});
    csv.add(to_string(c.label), families, c.low.coef("proxy"), c.low.se("proxy"), c.high.coef("proxy"),
            c.high.se("proxy"), c.quadratic.coef("pol2"), c.quadratic.se("pol2"), points.size());
    csv.write(cfg.output_dir / "classification.csv");
    out << to_string(c.label) << ": " << families << '\n';
    return 0;
}

unsigned default_threads() {
    if (const char* env = std::getenv("ELECTORATE_LAB_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (*env && !*end && n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Spatial voting simulations and indifference measures", "electorate-lab"};
    app.fallthrough();
    app.require_subcommand(1, 1);

    std::string config_path;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    unsigned threads = 0;
    app.add_option("--config", config_path, "JSON experiment config");
    app.add_option("--set", sets, "Override a config entry, e.g. loss.family=ReverseS")->take_all();
    app.add_option("--seed", seed, "Override the config seed");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--threads", threads, "Worker threads (default: ELECTORATE_LAB_THREADS or all cores)");

    const std::pair<const char*, const char*> commands[] = {
        {"simulate", "Simulate an election and write the CVR file"},
        {"analyze", "Group measures, Case 1 and Case 2 tables, correlations"},
        {"fit", "Piecewise and quadratic polarization regressions"},
        {"predict", "Trend predictions for every loss family"},
        {"equilibrium", "Platform game: contests, Condorcet winner, dynamics"},
        {"classify", "Label an indifference trend and list consistent loss families"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    if (threads == 0) threads = default_threads();

    try {
        std::vector<std::string> overrides = sets;
        if (seed) overrides.push_back("seed=" + std::to_string(*seed));
        ExperimentConfig cfg = load_config(config_path, overrides);
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        OutputLock lock(cfg.output_dir);
        if (command == "simulate") return cmd_simulate(cfg, threads, out);
        if (command == "analyze") return cmd_analyze(cfg, threads, out, err);
        if (command == "fit") return cmd_fit(cfg, threads, out, err);
        if (command == "predict") return cmd_predict(cfg, out);
        if (command == "equilibrium") return cmd_equilibrium(cfg, threads, out);
        if (command == "classify") return cmd_classify(cfg, threads, out, err);
        return 1;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 1;
    } catch (const DomainError& e) {
        err << "config error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return 2;
    } catch (const AnalysisError& e) {
        err << "analysis error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace elab
