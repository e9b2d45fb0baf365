#include "elab/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "elab/error.hpp"

namespace elab {

using nlohmann::json;

namespace {

// A JSON object being read under a dotted key prefix. Every key must be
// consumed; leftovers are reported as unknown.
class Section {
public:
    Section(const json& node, std::string prefix) : node_(node), prefix_(std::move(prefix)) {
        if (!node_.is_object()) throw ConfigError("expected an object", prefix_.empty() ? "<root>" : prefix_);
    }

    std::string key(std::string_view name) const { return prefix_.empty() ? std::string(name) : prefix_ + "." + std::string(name); }

    bool has(std::string_view name) const { return node_.contains(std::string(name)); }

    const json* find(std::string_view name) {
        used_.insert(std::string(name));
        const auto it = node_.find(std::string(name));
        return it == node_.end() || it->is_null() ? nullptr : &*it;
    }

    template <typename T>
    T get(std::string_view name, T fallback) {
        const json* v = find(name);
        if (!v) return fallback;
        return convert<T>(*v, key(name));
    }

    template <typename T>
    T require(std::string_view name) {
        const json* v = find(name);
        if (!v) throw ConfigError("required", key(name));
        return convert<T>(*v, key(name));
    }

    void finish() const {
        for (const auto& [k, v] : node_.items()) {
            if (!used_.count(k)) throw ConfigError("unknown key", key(k));
        }
    }

    template <typename T>
    static T convert(const json& v, const std::string& key) {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ConfigError("expected true or false", key);
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError("expected a string", key);
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned())) {
                throw ConfigError("expected a nonnegative integer", key);
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw ConfigError("expected a number", key);
        }
        return v.get<T>();
    }

private:
    const json& node_;
    std::string prefix_;
    std::set<std::string> used_;
};

// Re-raises ConfigErrors from a validator under a different key prefix.
template <typename Fn>
void rekeyed(const std::string& from, const std::string& to, Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError& e) {
        if (to == from || e.key().rfind(from, 0) != 0) throw;
        const std::string key = to + e.key().substr(from.size());
        std::string msg = e.what();
        msg = msg.substr(std::min(msg.size(), e.key().size() + 2));
        throw ConfigError(msg, key);
    }
}

Position read_position(const json& v, const std::string& key) {
    try {
        if (v.is_number()) return Position{v.get<double>()};
        if (v.is_array()) {
            std::vector<double> coords;
            for (const auto& c : v) {
                if (!c.is_number()) throw ConfigError("coordinates must be numbers", key);
                coords.push_back(c.get<double>());
            }
            return Position(std::move(coords));
        }
    } catch (const DomainError& e) {
        throw ConfigError(e.what(), key);
    }
    throw ConfigError("expected a number or an array of numbers", key);
}

template <typename Parse>
auto parse_enum(Section& s, std::string_view name, Parse parse, decltype(parse(std::string_view{})) fallback) {
    const json* v = s.find(name);
    if (!v) return fallback;
    const auto text = Section::convert<std::string>(*v, s.key(name));
    try {
        return parse(text);
    } catch (const ConfigError&) {
        throw ConfigError("unknown value '" + text + "'", s.key(name));
    }
}

LossSpec read_loss(const json& node, const std::string& prefix) {
    Section s(node, prefix);
    LossSpec loss;
    loss.family = parse_enum(s, "family", parse_loss_family, loss.family);
    loss.alpha = s.get("alpha", loss.alpha);
    loss.beta = s.get("beta", loss.family == LossFamily::Concave ? 2.0
                                  : loss.family == LossFamily::Convex ? 0.5
                                                                      : 1.0);
    loss.omega = s.get("omega", loss.omega);
    s.finish();
    rekeyed("loss", prefix, [&] { loss.validate(); });
    return loss;
}

ChoiceModel read_choice(const json& node, const std::string& prefix) {
    Section s(node, prefix);
    ChoiceModel m;
    m.mode = parse_enum(s, "mode", parse_decision_mode, m.mode);
    m.cost = s.get("cost", m.cost);
    m.noise = parse_enum(s, "noise", parse_noise_kind, m.noise);
    m.noise_scale = s.get("scale", m.noise_scale);
    m.abstention = parse_enum(s, "abstention", parse_abstention_kind, m.abstention);
    m.alienation.threshold = s.get("alienation_threshold", m.alienation.threshold);
    m.alienation.slope = s.get("alienation_slope", m.alienation.slope);
    m.expressive_a = s.get("expressive_a", m.expressive_a);
    s.finish();
    rekeyed("choice", prefix, [&] { m.validate(); });
    return m;
}

std::vector<double> read_numbers(const json& v, const std::string& key) {
    if (!v.is_array()) throw ConfigError("expected an array of numbers", key);
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError("expected an array of numbers", key);
        out.push_back(x.get<double>());
    }
    return out;
}

IdealDistribution read_ideal(const json& node) {
    Section s(node, "electorate.ideal_distribution");
    const auto kind = s.get<std::string>("kind", "Uniform");
    IdealDistribution out;
    if (kind == "Uniform") {
        out = UniformIdeal{s.get("lo", 0.0), s.get("hi", 1.0)};
    } else if (kind == "Normal") {
        out = NormalIdeal{s.get("mean", 0.0), s.get("sd", 1.0)};
    } else if (kind == "BimodalMixture") {
        out = BimodalIdeal{s.get("mean1", 0.0), s.get("sd1", 1.0), s.get("mean2", 1.0), s.get("sd2", 1.0),
                           s.get("weight", 0.5)};
    } else if (kind == "Histogram") {
        HistogramIdeal h;
        h.edges = read_numbers(s.require<json>("edges"), s.key("edges"));
        h.weights = read_numbers(s.require<json>("weights"), s.key("weights"));
        out = std::move(h);
    } else {
        throw ConfigError("unknown distribution '" + kind + "'", s.key("kind"));
    }
    s.finish();
    return out;
}

ElectorateSpec read_electorate(const json& node, std::uint64_t seed) {
    Section s(node, "electorate");
    ElectorateSpec e;
    e.seed = seed;
    e.n_voters = s.get<std::size_t>("n_voters", e.n_voters);
    e.dimension = s.get<std::size_t>("dimension", e.dimension);
    if (const json* v = s.find("ideal_distribution")) e.ideal_distribution = read_ideal(*v);
    e.n_measures = s.get<std::size_t>("n_measures", e.n_measures);
    const auto axis = [&](double x) {
        return Position(std::vector<double>(std::max<std::size_t>(e.dimension, 1), x));
    };
    e.dem_position = axis(0.0);
    e.rep_position = axis(1.0);
    if (const json* v = s.find("dem_position")) e.dem_position = read_position(*v, s.key("dem_position"));
    if (const json* v = s.find("rep_position")) e.rep_position = read_position(*v, s.key("rep_position"));
    e.measure_spread = s.get("measure_spread", e.measure_spread);
    e.missing_rate = s.get("missing_rate", e.missing_rate);
    s.finish();
    e.validate();
    return e;
}

std::vector<RaceSpec> read_races(const json& node) {
    if (!node.is_array()) throw ConfigError("expected an array of races", "races");
    std::vector<RaceSpec> races;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < node.size(); ++i) {
        Section s(node[i], "races[" + std::to_string(i) + "]");
        RaceSpec r;
        r.race_id = s.require<std::string>("id");
        if (r.race_id.empty() || !ids.insert(r.race_id).second) throw ConfigError("race ids must be unique and nonempty", s.key("id"));
        const auto party = [&](std::string_view name, Party fallback) {
            const json* v = s.find(name);
            if (!v) return fallback;
            const auto text = Section::convert<std::string>(*v, s.key(name));
            if (text == "D") return Party::D;
            if (text == "R") return Party::R;
            throw ConfigError("party must be D or R", s.key(name));
        };
        if (const json* v = s.find("type")) {
            const auto text = Section::convert<std::string>(*v, s.key("type"));
            try {
                r.type = parse_race_type(text);
            } catch (const ConfigError&) {
                throw ConfigError("unknown race type '" + text + "'", s.key("type"));
            }
        }
        r.cand1_party = party("cand1_party", Party::D);
        r.cand2_party = party("cand2_party", Party::R);
        r.cand1_pos = read_position(s.require<json>("cand1_pos"), s.key("cand1_pos"));
        r.cand2_pos = read_position(s.require<json>("cand2_pos"), s.key("cand2_pos"));
        s.finish();
        races.push_back(std::move(r));
    }
    return races;
}

AnalysisFlags read_analysis(const json& node) {
    Section s(node, "analysis");
    AnalysisFlags a;
    a.case1 = s.get("case1", a.case1);
    a.case2 = s.get("case2", a.case2);
    a.equilibrium = s.get("equilibrium", a.equilibrium);
    a.classify = s.get("classify", a.classify);
    a.moderate_tolerance = s.get("moderate_tolerance", a.moderate_tolerance);
    if (const json* v = s.find("threshold")) a.threshold = Section::convert<double>(*v, s.key("threshold"));
    s.finish();
    if (!(a.moderate_tolerance >= 0.0)) throw ConfigError("must be >= 0", "analysis.moderate_tolerance");
    return a;
}

EquilibriumConfig read_equilibrium(const json& node) {
    Section s(node, "equilibrium");
    EquilibriumConfig q;
    q.lo = s.get("lo", q.lo);
    q.hi = s.get("hi", q.hi);
    q.voters = s.get<std::size_t>("voters", q.voters);
    q.platforms = s.get<std::size_t>("platforms", q.platforms);
    q.max_iters = s.get<std::size_t>("max_iters", q.max_iters);
    if (const json* v = s.find("bumps")) {
        if (!v->is_array() || v->empty()) throw ConfigError("expected a nonempty array", s.key("bumps"));
        q.bumps.clear();
        for (std::size_t i = 0; i < v->size(); ++i) {
            Section b((*v)[i], s.key("bumps[" + std::to_string(i) + "]"));
            q.bumps.push_back({b.require<double>("mean"), b.require<double>("sd"), b.get("weight", 1.0)});
            b.finish();
        }
    }
    if (const json* v = s.find("start")) {
        const auto xs = read_numbers(*v, s.key("start"));
        if (xs.size() != 2) throw ConfigError("expected [p1, p2]", s.key("start"));
        q.start = std::make_pair(xs[0], xs[1]);
    }
    s.finish();
    if (!(q.hi > q.lo)) throw ConfigError("hi must exceed lo", "equilibrium.hi");
    if (q.voters < 2) throw ConfigError("must be >= 2", "equilibrium.voters");
    if (q.platforms < 1) throw ConfigError("must be >= 1", "equilibrium.platforms");
    for (std::size_t i = 0; i < q.bumps.size(); ++i) {
        if (!(q.bumps[i].sd > 0.0) || !(q.bumps[i].weight >= 0.0)) {
            throw ConfigError("needs sd > 0 and weight >= 0", "equilibrium.bumps[" + std::to_string(i) + "]");
        }
    }
    return q;
}

void apply_override(json& root, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like KEY=VALUE", assignment);
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    json* node = &root;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError("empty path segment", key);
        if (node->is_null()) *node = json::object();
        if (node->is_array()) {
            std::size_t idx = 0;
            const auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), idx);
            if (ec != std::errc{} || p != part.data() + part.size() || idx >= node->size()) {
                throw ConfigError("bad array index '" + part + "'", key);
            }
            node = &(*node)[idx];
        } else if (node->is_object()) {
            node = &(*node)[part];
        } else {
            throw ConfigError("cannot descend into a scalar", key);
        }
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    *node = std::move(value);
}

}  // namespace

VoterDensity EquilibriumConfig::density() const { return VoterDensity::mixture(lo, hi, voters, bumps); }

ExperimentConfig parse_config(const std::string& json_text, const std::vector<std::string>& overrides,
                              const std::filesystem::path& base_dir) {
    json root = json_text.empty() ? json::object() : json::parse(json_text, nullptr, false);
    if (root.is_discarded()) throw ConfigError("config is not valid JSON", "<root>");
    if (root.is_null()) root = json::object();
    for (const auto& o : overrides) apply_override(root, o);

    Section s(root, "");
    ExperimentConfig cfg;
    if (const json* v = s.find("seed")) cfg.seed = Section::convert<std::uint64_t>(*v, "seed");
    if (const json* v = s.find("electorate")) {
        cfg.has_electorate = true;
        cfg.electorate = read_electorate(*v, cfg.seed.value_or(0));
    }
    if (const json* v = s.find("races")) cfg.races = read_races(*v);
    for (std::size_t i = 0; i < cfg.races.size() && cfg.has_electorate; ++i) {
        const auto d = cfg.electorate.dimension;
        if (cfg.races[i].cand1_pos.dimension() != d || cfg.races[i].cand2_pos.dimension() != d) {
            throw ConfigError("candidate positions must match electorate.dimension",
                              "races[" + std::to_string(i) + "]");
        }
    }
    if (const json* v = s.find("loss")) cfg.loss = read_loss(*v, "loss");
    if (const json* v = s.find("choice")) cfg.choice = read_choice(*v, "choice");
    if (const json* v = s.find("responses")) {
        Section r(*v, "responses");
        ResponseModel model{LossSpec::linear(), ChoiceModel{}};
        model.loss = cfg.loss;
        model.choice = cfg.choice;
        if (const json* l = r.find("loss")) model.loss = read_loss(*l, "responses.loss");
        if (const json* c = r.find("choice")) model.choice = read_choice(*c, "responses.choice");
        r.finish();
        cfg.responses = model;
    }
    if (const json* v = s.find("analysis")) cfg.analysis = read_analysis(*v);
    if (const json* v = s.find("equilibrium")) cfg.equilibrium = read_equilibrium(*v);
    if (const json* v = s.find("classify")) {
        Section c(*v, "classify");
        if (const json* d = c.find("dimensionality")) {
            const auto text = Section::convert<std::string>(*d, c.key("dimensionality"));
            if (text == "Uni") cfg.classify.dim = Dimensionality::Uni;
            else if (text == "Multi") cfg.classify.dim = Dimensionality::Multi;
            else throw ConfigError("expected Uni or Multi", c.key("dimensionality"));
        }
        if (const json* p = c.find("points_path")) {
            cfg.classify.points_path = base_dir / Section::convert<std::string>(*p, c.key("points_path"));
            if (!std::filesystem::exists(*cfg.classify.points_path)) {
                throw ConfigError("file not found: " + cfg.classify.points_path->string(), c.key("points_path"));
            }
        }
        c.finish();
    }
    if (const json* v = s.find("output_dir")) cfg.output_dir = base_dir / Section::convert<std::string>(*v, "output_dir");
    if (const json* v = s.find("cvr_path")) cfg.cvr_path = base_dir / Section::convert<std::string>(*v, "cvr_path");
    s.finish();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    if (path.empty()) return parse_config("", overrides);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string(), "--config");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), overrides, path.parent_path());
}

}  // namespace elab
