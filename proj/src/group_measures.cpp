#include "elab/group_measures.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <boost/math/distributions/students_t.hpp>

#include "elab/error.hpp"
#include "parallel.hpp"

namespace elab {

Tabulation::Tabulation(std::size_t n_measures, std::vector<std::string> race_ids)
    : n_measures_(n_measures), race_ids_(std::move(race_ids)), cells_(race_ids_.size() * (n_measures + 1)) {
    for (std::size_t j = 0; j < race_ids_.size(); ++j) {
        for (std::size_t k = 0; k <= n_measures_; ++k) {
            auto& c = cells_[j * n_groups() + k];
            c.group = static_cast<int>(k);
            c.race = j;
            c.race_id = race_ids_[j];
        }
    }
}

const GroupStats* Tabulation::find(int group, std::size_t race) const {
    if (group < 0 || static_cast<std::size_t>(group) > n_measures_ || race >= race_ids_.size()) return nullptr;
    const auto& c = cells_[race * n_groups() + static_cast<std::size_t>(group)];
    return c.n_total > 0 ? &c : nullptr;
}

GroupStats& Tabulation::cell(int group, std::size_t race) {
    return cells_.at(race * n_groups() + static_cast<std::size_t>(group));
}

std::vector<GroupStats> Tabulation::nonempty() const {
    std::vector<GroupStats> out;
    for (const auto& c : cells_) {
        if (c.n_total > 0) out.push_back(c);
    }
    return out;
}

namespace {

// Per-(race, group) counters: total, dem, rep, abstain, other.
struct Counts {
    std::vector<std::uint64_t> v;
    std::uint64_t skipped = 0;
};

}  // namespace

Tabulation tabulate(const CvrTable& table, unsigned threads) {
    table.validate();
    Tabulation tab(table.n_measures, table.race_ids);
    const std::size_t groups = tab.n_groups();
    const std::size_t races = table.race_ids.size();
    const std::size_t n = table.records.size();

    threads = std::max(1u, threads);
    std::vector<Counts> partial(threads);
    const std::size_t chunk = (n + threads - 1) / threads;
    detail::parallel_for(threads, threads, [&](std::size_t tb, std::size_t te) {
        for (std::size_t t = tb; t < te; ++t) {
            Counts& c = partial[t];
            c.v.assign(races * groups * 5, 0);
            const std::size_t begin = std::min(n, t * chunk);
            const std::size_t end = std::min(n, begin + chunk);
            for (std::size_t i = begin; i < end; ++i) {
                const auto& rec = table.records[i];
                if (std::find(rec.measures.begin(), rec.measures.end(), Stance::Missing) != rec.measures.end()) {
                    ++c.skipped;
                    continue;
                }
                const auto k = static_cast<std::size_t>(voter_group(rec.measures));
                for (std::size_t j = 0; j < races; ++j) {
                    const Vote vote = rec.choices[j];
                    if (vote == Vote::Missing) continue;
                    std::uint64_t* cell = &c.v[(j * groups + k) * 5];
                    ++cell[0];
                    switch (vote) {
                        case Vote::D: ++cell[1]; break;
                        case Vote::R: ++cell[2]; break;
                        case Vote::A: ++cell[3]; break;
                        case Vote::O: ++cell[4]; break;
                        case Vote::Missing: break;
                    }
                }
            }
        }
    });

    for (const auto& c : partial) {
        tab.skipped_voters += c.skipped;
        if (c.v.empty()) continue;
        for (std::size_t j = 0; j < races; ++j) {
            for (std::size_t k = 0; k < groups; ++k) {
                const std::uint64_t* src = &c.v[(j * groups + k) * 5];
                GroupStats& dst = tab.cell(static_cast<int>(k), j);
                dst.n_total += src[0];
                dst.n_dem += src[1];
                dst.n_rep += src[2];
                dst.n_abstain += src[3];
                dst.n_other += src[4];
            }
        }
    }
    return tab;
}

namespace {

double share(std::uint64_t part, const GroupStats& stats) {
    if (stats.n_total == 0) {
        throw AnalysisError("empty cell: group " + std::to_string(stats.group) + " in race " + stats.race_id);
    }
    return static_cast<double>(part) / static_cast<double>(stats.n_total);
}

}  // namespace

double abstention_rate(const GroupStats& stats) { return share(stats.n_abstain, stats); }
double dem_share(const GroupStats& stats) { return share(stats.n_dem, stats); }
double rep_share(const GroupStats& stats) { return share(stats.n_rep, stats); }

double predictability(const GroupStats& stats) { return std::fabs(dem_share(stats) - rep_share(stats)); }

double across_race_average(std::span<const std::optional<double>> values) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& v : values) {
        if (!v) continue;
        sum += *v;
        ++count;
    }
    if (count == 0) throw AnalysisError("across-race average over no defined values");
    return sum / static_cast<double>(count);
}

double polarization(const GroupStats& group0, const GroupStats& group_n) {
    return dem_share(group0) * rep_share(group_n);
}

std::vector<std::optional<double>> race_polarization(const Tabulation& tab, std::span<const std::size_t> races) {
    std::vector<std::optional<double>> out;
    const int n = static_cast<int>(tab.n_measures());
    for (std::size_t j : races) {
        const GroupStats* g0 = tab.find(0, j);
        const GroupStats* gn = tab.find(n, j);
        if (g0 && gn) out.emplace_back(polarization(*g0, *gn));
        else out.emplace_back(std::nullopt);
    }
    return out;
}

std::vector<std::optional<double>> group_averages(const Tabulation& tab, std::span<const std::size_t> races,
                                                  GroupMeasure measure) {
    std::vector<std::optional<double>> out(tab.n_groups());
    std::vector<std::optional<double>> per_race;
    for (std::size_t k = 0; k < tab.n_groups(); ++k) {
        per_race.clear();
        for (std::size_t j : races) {
            const GroupStats* c = tab.find(static_cast<int>(k), j);
            if (!c) {
                per_race.emplace_back(std::nullopt);
                continue;
            }
            switch (measure) {
                case GroupMeasure::Abstention: per_race.emplace_back(abstention_rate(*c)); break;
                case GroupMeasure::Predictability: per_race.emplace_back(predictability(*c)); break;
                case GroupMeasure::DemShare: per_race.emplace_back(dem_share(*c)); break;
            }
        }
        if (std::any_of(per_race.begin(), per_race.end(), [](const auto& v) { return v.has_value(); })) {
            out[k] = across_race_average(per_race);
        }
    }
    return out;
}

std::vector<int> moderate_groups(const Tabulation& tab, std::span<const std::size_t> races, double tolerance) {
    const auto avg = group_averages(tab, races, GroupMeasure::Predictability);
    std::vector<std::pair<double, int>> ranked;
    for (std::size_t k = 0; k < avg.size(); ++k) {
        if (avg[k]) ranked.emplace_back(*avg[k], static_cast<int>(k));
    }
    if (ranked.empty()) throw AnalysisError("no populated groups in the two-party races");
    std::sort(ranked.begin(), ranked.end());
    std::vector<int> out{ranked[0].second};
    if (ranked.size() > 1 && ranked[1].first - ranked[0].first <= tolerance) out.push_back(ranked[1].second);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::optional<double>> flip_effect(const CvrTable& table, std::size_t measure, FlipOutcome outcome,
                                               std::span<const std::size_t> races) {
    table.validate();
    const std::size_t n = table.n_measures;
    if (measure >= n) throw DomainError("flip_effect: measure index out of range");

    // subgroup -> per-race (total, hits)
    std::unordered_map<std::uint32_t, std::vector<std::pair<std::uint64_t, std::uint64_t>>> cells;
    for (const auto& rec : table.records) {
        if (std::find(rec.measures.begin(), rec.measures.end(), Stance::Missing) != rec.measures.end()) continue;
        auto& counts = cells[subgroup_id(rec.measures)];
        counts.resize(races.size());
        for (std::size_t r = 0; r < races.size(); ++r) {
            const Vote v = rec.choices.at(races[r]);
            if (v == Vote::Missing) continue;
            ++counts[r].first;
            const bool hit = outcome == FlipOutcome::DemShare ? v == Vote::D : v == Vote::A;
            if (hit) ++counts[r].second;
        }
    }

    auto subgroup_outcome = [&](std::uint32_t sg) -> std::optional<double> {
        const auto it = cells.find(sg);
        if (it == cells.end()) return std::nullopt;
        std::vector<std::optional<double>> per_race;
        for (const auto& [total, hits] : it->second) {
            if (total > 0) per_race.emplace_back(static_cast<double>(hits) / static_cast<double>(total));
        }
        if (per_race.empty()) return std::nullopt;
        return across_race_average(per_race);
    };

    const std::uint32_t bit = 1u << (n - 1 - measure);
    std::vector<double> sums(n, 0.0);
    std::vector<std::size_t> pairs(n, 0);
    std::vector<std::uint32_t> minus_ids;
    for (const auto& [sg, _] : cells) {
        if ((sg & bit) == 0) minus_ids.push_back(sg);
    }
    std::sort(minus_ids.begin(), minus_ids.end());
    for (std::uint32_t sg : minus_ids) {
        const auto lo = subgroup_outcome(sg);
        const auto hi = subgroup_outcome(sg | bit);
        if (!lo || !hi) continue;
        const auto k = static_cast<std::size_t>(std::popcount(sg));
        sums[k] += *lo - *hi;
        ++pairs[k];
    }

    std::vector<std::optional<double>> out(n);
    bool any = false;
    for (std::size_t k = 0; k < n; ++k) {
        if (pairs[k] > 0) {
            out[k] = sums[k] / static_cast<double>(pairs[k]);
            any = true;
        }
    }
    if (!any) throw AnalysisError("flip_effect: no subgroup pair has both sides populated");
    return out;
}

Correlation indifference_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DomainError("correlation requires paired series");
    const std::size_t n = x.size();
    if (n < 3) throw AnalysisError("correlation requires at least 3 paired observations");
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw AnalysisError("correlation of a degenerate (zero-variance) series");

    Correlation c;
    c.n = n;
    c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    const double df = static_cast<double>(n - 2);
    if (1.0 - std::fabs(c.r) < 1e-15) {
        c.p_value = 0.0;
    } else {
        const double t = c.r * std::sqrt(df / (1.0 - c.r * c.r));
        boost::math::students_t dist(df);
        c.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
    }
    return c;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t m = i; m <= j; ++m) ranks[order[m]] = rank;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    return indifference_correlation(rx, ry).r;
}

}  // namespace elab
