#include "elab/regression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "elab/error.hpp"

namespace elab {

std::string_view to_string(FixedEffects fe) {
    switch (fe) {
        case FixedEffects::None: return "None";
        case FixedEffects::Voter: return "Voter";
        case FixedEffects::Race: return "Race";
    }
    return "?";
}

std::string_view to_string(TrendLabel label) {
    switch (label) {
        case TrendLabel::Constant: return "Constant";
        case TrendLabel::Decreasing: return "Decreasing";
        case TrendLabel::Increasing: return "Increasing";
        case TrendLabel::UShaped: return "UShaped";
    }
    return "?";
}

std::string_view to_string(CaseSetting setting) { return setting == CaseSetting::Case1 ? "Case1" : "Case2"; }
std::string_view to_string(Dimensionality dim) { return dim == Dimensionality::Uni ? "Uni" : "Multi"; }

namespace {

std::size_t term_index(const RegressionResult& r, std::string_view name) {
    const auto it = std::find(r.names.begin(), r.names.end(), name);
    if (it == r.names.end()) throw DomainError("no term named '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - r.names.begin());
}

}  // namespace

double RegressionResult::coef(std::string_view name) const { return coefficients[term_index(*this, name)]; }
double RegressionResult::se(std::string_view name) const { return standard_errors[term_index(*this, name)]; }

RegressionResult ols(std::span<const double> y, const Design& design, const OlsOptions& options) {
    const auto n = static_cast<Eigen::Index>(y.size());
    const Eigen::Index p = design.x.cols();
    if (design.x.rows() != n) throw DomainError("design rows differ from the number of observations");
    if (static_cast<std::size_t>(p) != design.names.size()) throw DomainError("one name per design column required");
    if (p == 0) throw AnalysisError("empty design");
    if (n <= p + static_cast<Eigen::Index>(options.absorbed_dof)) {
        throw AnalysisError("too few observations: " + std::to_string(n) + " for " + std::to_string(p) +
                            " parameters");
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.x);
    qr.setThreshold(options.rank_tolerance);
    if (qr.rank() < p) {
        // Each dropped column plus the kept columns it is spanned by.
        const auto& perm = qr.colsPermutation().indices();
        const Eigen::Index rank = qr.rank();
        Eigen::MatrixXd kept(n, rank);
        for (Eigen::Index i = 0; i < rank; ++i) kept.col(i) = design.x.col(perm[i]);
        std::vector<bool> named(static_cast<std::size_t>(p), false);
        for (Eigen::Index i = rank; i < p; ++i) {
            named[static_cast<std::size_t>(perm[i])] = true;
            if (rank == 0) continue;
            const Eigen::VectorXd w = kept.colPivHouseholderQr().solve(design.x.col(perm[i]));
            const double big = w.cwiseAbs().maxCoeff();
            for (Eigen::Index k = 0; k < rank; ++k) {
                if (std::fabs(w(k)) > 1e-8 * big) named[static_cast<std::size_t>(perm[k])] = true;
            }
        }
        std::string cols;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (!named[static_cast<std::size_t>(j)]) continue;
            if (!cols.empty()) cols += ", ";
            cols += design.names[static_cast<std::size_t>(j)];
        }
        throw AnalysisError("rank-deficient design; collinear columns: " + cols);
    }

    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
    const Eigen::VectorXd beta = qr.solve(yv);
    const Eigen::VectorXd resid = yv - design.x * beta;
    const double ssr = resid.squaredNorm();
    const double center = options.centered_r2 ? yv.mean() : 0.0;
    const double sst = (yv.array() - center).square().sum();

    const double dof = static_cast<double>(n - p) - static_cast<double>(options.absorbed_dof);
    const double sigma2 = ssr / dof;
    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::MatrixXd cov_perm = r_inv * r_inv.transpose();
    const auto& perm = qr.colsPermutation();
    const Eigen::MatrixXd cov = perm * cov_perm * perm.transpose();

    RegressionResult out;
    out.names = design.names;
    out.n_obs = static_cast<std::size_t>(n);
    out.coefficients.assign(beta.data(), beta.data() + p);
    out.standard_errors.resize(static_cast<std::size_t>(p));
    for (Eigen::Index i = 0; i < p; ++i) {
        out.standard_errors[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, sigma2 * cov(i, i)));
    }
    out.r_squared = sst > 0.0 ? std::clamp(1.0 - ssr / sst, 0.0, 1.0) : 0.0;
    return out;
}

namespace {

RegressionResult linear_fit(std::span<const double> y, std::span<const double> x, const char* x_name) {
    Design d;
    d.names = {"const", x_name};
    d.x.resize(static_cast<Eigen::Index>(y.size()), 2);
    for (std::size_t i = 0; i < y.size(); ++i) {
        d.x(static_cast<Eigen::Index>(i), 0) = 1.0;
        d.x(static_cast<Eigen::Index>(i), 1) = x[i];
    }
    return ols(y, d);
}

}  // namespace

std::pair<RegressionResult, RegressionResult> piecewise_polarization(std::span<const double> y,
                                                                     std::span<const double> pol, double threshold) {
    if (y.size() != pol.size()) throw DomainError("outcome and polarization lengths differ");
    std::vector<double> y_lo, x_lo, y_hi, x_hi;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (pol[i] <= threshold) {
            y_lo.push_back(y[i]);
            x_lo.push_back(pol[i]);
        } else {
            y_hi.push_back(y[i]);
            x_hi.push_back(pol[i]);
        }
    }
    if (y_lo.empty()) throw AnalysisError("piecewise regression: low-polarization side is empty");
    if (y_hi.empty()) throw AnalysisError("piecewise regression: high-polarization side is empty");
    return {linear_fit(y_lo, x_lo, "pol"), linear_fit(y_hi, x_hi, "pol")};
}

double mean_threshold(std::span<const double> pol) {
    if (pol.empty()) throw AnalysisError("threshold of an empty polarization series");
    return std::accumulate(pol.begin(), pol.end(), 0.0) / static_cast<double>(pol.size());
}

RegressionResult quadratic_polarization(std::span<const double> y, std::span<const double> pol, FixedEffects fe,
                                        std::span<const std::uint64_t> units) {
    if (y.size() != pol.size()) throw DomainError("outcome and polarization lengths differ");
    {
        std::vector<double> distinct(pol.begin(), pol.end());
        std::sort(distinct.begin(), distinct.end());
        if (std::unique(distinct.begin(), distinct.end()) - distinct.begin() < 3) {
            throw AnalysisError("quadratic regression needs at least 3 distinct polarization values");
        }
    }
    const auto n = static_cast<Eigen::Index>(y.size());

    if (fe == FixedEffects::None) {
        Design d;
        d.names = {"const", "pol", "pol2"};
        d.x.resize(n, 3);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double x = pol[static_cast<std::size_t>(i)];
            d.x(i, 0) = 1.0;
            d.x(i, 1) = x;
            d.x(i, 2) = x * x;
        }
        return ols(y, d);
    }
    if (fe != FixedEffects::Voter) throw DomainError("quadratic_polarization supports None or Voter fixed effects");
    if (units.size() != y.size()) throw DomainError("one unit id per observation required for Voter fixed effects");

    struct Sums {
        std::size_t count = 0;
        double y = 0.0, x = 0.0, x2 = 0.0;
    };
    std::unordered_map<std::uint64_t, Sums> by_unit;
    for (std::size_t i = 0; i < y.size(); ++i) {
        auto& s = by_unit[units[i]];
        ++s.count;
        s.y += y[i];
        s.x += pol[i];
        s.x2 += pol[i] * pol[i];
    }
    for (const auto& [unit, s] : by_unit) {
        if (s.count < 2) {
            throw AnalysisError("unit " + std::to_string(unit) + " has a single observation; no within variation");
        }
    }

    std::vector<double> y_dm(y.size());
    Design d;
    d.names = {"pol", "pol2"};
    d.x.resize(n, 2);
    for (std::size_t i = 0; i < y.size(); ++i) {
        const auto& s = by_unit[units[i]];
        const double c = static_cast<double>(s.count);
        y_dm[i] = y[i] - s.y / c;
        d.x(static_cast<Eigen::Index>(i), 0) = pol[i] - s.x / c;
        d.x(static_cast<Eigen::Index>(i), 1) = pol[i] * pol[i] - s.x2 / c;
    }
    OlsOptions opt;
    opt.absorbed_dof = by_unit.size();
    opt.centered_r2 = false;
    RegressionResult r;
    try {
        r = ols(y_dm, d, opt);
    } catch (const AnalysisError& e) {
        throw AnalysisError(std::string("insufficient within-unit variation: ") + e.what());
    }
    r.fe_absorbed = FixedEffects::Voter;
    return r;
}

TrendLabel predict_trend(LossFamily family, CaseSetting /*setting*/, Dimensionality dim, std::optional<double> beta) {
    // Both settings move the voter away from both candidates, so they share predictions.
    if (dim == Dimensionality::Uni) {
        switch (family) {
            case LossFamily::Linear: return TrendLabel::Constant;
            case LossFamily::Concave: return TrendLabel::Decreasing;
            case LossFamily::Convex: return TrendLabel::Increasing;
            case LossFamily::ReverseS: return TrendLabel::UShaped;
        }
    }
    switch (family) {
        case LossFamily::Linear:
        case LossFamily::Convex:
            return TrendLabel::Increasing;
        case LossFamily::ReverseS:
            return TrendLabel::UShaped;
        case LossFamily::Concave: {
            if (!beta) throw DomainError("multi-dimensional Concave prediction requires beta");
            if (!(*beta > 1.0)) throw DomainError("Concave requires beta > 1");
            // Orthogonal shifts shrink the distance gap; the net utility gap
            // grows iff beta > 2.
            if (std::fabs(*beta - 2.0) <= 1e-12) return TrendLabel::Constant;
            return *beta > 2.0 ? TrendLabel::Decreasing : TrendLabel::Increasing;
        }
    }
    return TrendLabel::Constant;
}

std::vector<TrendRow> trend_table() {
    struct Entry {
        LossFamily family;
        std::optional<double> beta;
    };
    const Entry entries[] = {
        {LossFamily::Linear, 1.0},  {LossFamily::Concave, 1.5}, {LossFamily::Concave, 2.0},
        {LossFamily::Concave, 3.0}, {LossFamily::Convex, 0.5},  {LossFamily::ReverseS, std::nullopt},
    };
    std::vector<TrendRow> rows;
    for (auto setting : {CaseSetting::Case1, CaseSetting::Case2}) {
        for (auto dim : {Dimensionality::Uni, Dimensionality::Multi}) {
            for (const auto& e : entries) {
                rows.push_back({e.family, e.beta, setting, dim, predict_trend(e.family, setting, dim, e.beta)});
            }
        }
    }
    return rows;
}

std::vector<FamilyMatch> consistent_families(TrendLabel label, Dimensionality dim) {
    const bool uni = dim == Dimensionality::Uni;
    switch (label) {
        case TrendLabel::Constant:
            if (uni) return {{LossFamily::Linear, ""}};
            return {{LossFamily::Concave, "beta == 2"}};
        case TrendLabel::Decreasing:
            if (uni) return {{LossFamily::Concave, ""}, {LossFamily::ReverseS, "below the inflection"}};
            return {{LossFamily::Concave, "beta > 2"}, {LossFamily::ReverseS, "below the inflection"}};
        case TrendLabel::Increasing:
            if (uni) return {{LossFamily::Convex, ""}, {LossFamily::ReverseS, "above the inflection"}};
            return {{LossFamily::Linear, ""},
                    {LossFamily::Concave, "1 < beta < 2"},
                    {LossFamily::Convex, ""},
                    {LossFamily::ReverseS, "above the inflection"}};
        case TrendLabel::UShaped:
            return {{LossFamily::ReverseS, ""}};
    }
    return {};
}

bool Classification::contains(LossFamily family) const {
    return std::any_of(families.begin(), families.end(), [&](const FamilyMatch& m) { return m.family == family; });
}

namespace {

int slope_sign(double value, double se, double floor, double multiple) {
    const double tol = std::max(multiple * se, floor);
    if (value > tol) return 1;
    if (value < -tol) return -1;
    return 0;
}

}  // namespace

Classification classify_form(std::span<const FormPoint> points, const ClassifyOptions& options) {
    if (points.size() < 5) throw AnalysisError("classify_form needs at least 5 points");
    std::vector<FormPoint> sorted(points.begin(), points.end());
    for (const auto& p : sorted) {
        if (!std::isfinite(p.proxy) || !std::isfinite(p.indifference)) {
            throw AnalysisError("classify_form: non-finite point");
        }
    }
    std::sort(sorted.begin(), sorted.end(), [](const FormPoint& a, const FormPoint& b) { return a.proxy < b.proxy; });

    std::vector<double> proxies;
    for (const auto& p : sorted) proxies.push_back(p.proxy);
    std::vector<double> distinct = proxies;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 3) throw AnalysisError("classify_form needs at least 3 distinct proxy values");

    const std::size_t m = proxies.size();
    const double median = m % 2 ? proxies[m / 2] : 0.5 * (proxies[m / 2 - 1] + proxies[m / 2]);

    // The median point belongs to both halves so that each side keeps enough
    // observations for a slope and its standard error.
    std::vector<double> y_lo, x_lo, y_hi, x_hi, y_all, x_all;
    for (const auto& p : sorted) {
        if (p.proxy <= median) {
            y_lo.push_back(p.indifference);
            x_lo.push_back(p.proxy);
        }
        if (p.proxy >= median) {
            y_hi.push_back(p.indifference);
            x_hi.push_back(p.proxy);
        }
        y_all.push_back(p.indifference);
        x_all.push_back(p.proxy);
    }
    auto distinct_count = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
    };
    if (y_lo.size() < 3 || y_hi.size() < 3 || distinct_count(x_lo) < 2 || distinct_count(x_hi) < 2) {
        throw AnalysisError("classify_form: proxies too concentrated to split at the median");
    }

    Classification c;
    c.low = linear_fit(y_lo, x_lo, "proxy");
    c.high = linear_fit(y_hi, x_hi, "proxy");
    c.quadratic = quadratic_polarization(y_all, x_all, FixedEffects::None);

    double y_scale = 1.0;
    for (double v : y_all) y_scale = std::max(y_scale, std::fabs(v));
    const double x_range = std::max(distinct.back() - distinct.front(), 1e-300);
    const double slope_floor = 1e-9 * y_scale / x_range;
    const double quad_floor = slope_floor / x_range;
    const double k = options.se_multiple;

    const int lo = slope_sign(c.low.coef("proxy"), c.low.se("proxy"), slope_floor, k);
    const int hi = slope_sign(c.high.coef("proxy"), c.high.se("proxy"), slope_floor, k);
    const int quad = slope_sign(c.quadratic.coef("pol2"), c.quadratic.se("pol2"), quad_floor, options.quad_se_multiple);
    const double ku = std::max(k, options.u_se_multiple);
    const bool u_slopes = slope_sign(c.low.coef("proxy"), c.low.se("proxy"), slope_floor, ku) < 0 &&
                          slope_sign(c.high.coef("proxy"), c.high.se("proxy"), slope_floor, ku) > 0;

    if (lo == 0 && hi == 0) {
        c.label = TrendLabel::Constant;
    } else if (u_slopes && quad > 0) {
        c.label = TrendLabel::UShaped;
    } else if (lo < 0 && hi < 0) {
        c.label = TrendLabel::Decreasing;
    } else if (lo > 0 && hi > 0) {
        c.label = TrendLabel::Increasing;
    } else {
        // One flat half, or opposite signs without a significant U: the
        // overall slope decides.
        const RegressionResult all = linear_fit(y_all, x_all, "proxy");
        const int overall = slope_sign(all.coef("proxy"), all.se("proxy"), slope_floor, k);
        c.label = overall > 0 ? TrendLabel::Increasing : overall < 0 ? TrendLabel::Decreasing : TrendLabel::Constant;
    }
    c.families = consistent_families(c.label, options.dim);
    return c;
}

}  // namespace elab
