#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "elab/choice_model.hpp"
#include "elab/policy_space.hpp"
#include "elab/rng.hpp"
#include "elab/utility_forms.hpp"

namespace elab {

// Ideal-point distributions. These are simulation machinery only: every
// coordinate of a voter's ideal point is drawn independently from the
// one-dimensional distribution.

struct UniformIdeal {
    double lo = 0.0;
    double hi = 1.0;
};

struct NormalIdeal {
    double mean = 0.0;
    double sd = 1.0;
};

struct BimodalIdeal {
    double mean1 = 0.0;
    double sd1 = 1.0;
    double mean2 = 1.0;
    double sd2 = 1.0;
    double weight = 0.5;  ///< probability of the first component
};

struct HistogramIdeal {
    std::vector<double> edges;    ///< bin edges, strictly increasing, size = weights + 1
    std::vector<double> weights;  ///< nonnegative, positive sum
};

using IdealDistribution = std::variant<UniformIdeal, NormalIdeal, BimodalIdeal, HistogramIdeal>;

struct ElectorateSpec {
    std::uint64_t seed = 0;
    std::size_t n_voters = 1000;
    std::size_t dimension = 1;
    IdealDistribution ideal_distribution = UniformIdeal{};
    std::size_t n_measures = 10;
    Position dem_position{0.0};
    Position rep_position{1.0};
    /// Standard deviation of each measure's common offset, in units of |rep - dem|.
    double measure_spread = 0.25;
    /// Probability that a measure response is recorded as missing.
    double missing_rate = 0.0;

    void validate() const;
};

enum class Party : std::uint8_t { D, R };
enum class RaceType : std::uint8_t { Presidential, USHouse, StateSenate, StateHouse };

std::string_view to_string(Party party);
std::string_view to_string(RaceType type);
Party parse_party(std::string_view name);
RaceType parse_race_type(std::string_view name);

struct RaceSpec {
    std::string race_id;
    RaceType type = RaceType::USHouse;
    Party cand1_party = Party::D;
    Party cand2_party = Party::R;
    Position cand1_pos{0.0};
    Position cand2_pos{1.0};

    bool same_party() const noexcept { return cand1_party == cand2_party; }
};

/// A single ballot-measure response d_n.
enum class Stance : std::uint8_t { Dem = 0, Rep = 1, Missing = 2 };

/// A recorded race choice.
enum class Vote : std::uint8_t { D, R, O, A, Missing };

/// One CVR row. `choices[j]` is the choice in the j-th race of the owning table.
struct BallotRecord {
    std::uint64_t voter_id = 0;
    std::vector<Stance> measures;
    std::vector<Vote> choices;

    friend bool operator==(const BallotRecord&, const BallotRecord&) = default;
};

/// A set of ballot records sharing measure count and race columns.
struct CvrTable {
    std::size_t n_measures = 0;
    std::vector<std::string> race_ids;
    std::vector<BallotRecord> records;

    /// Throws DataError when a record disagrees with the declared columns.
    void validate() const;

    friend bool operator==(const CvrTable&, const CvrTable&) = default;
};

/// Ideal points of a generated electorate, stored row-major. Voter ids are
/// the dense indices 0 .. size()-1.
class Electorate {
public:
    Electorate(std::size_t dimension, std::vector<double> ideals);

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t size() const noexcept { return ideals_.size() / dimension_; }
    std::span<const double> ideal(std::size_t voter) const {
        return std::span<const double>(ideals_).subspan(voter * dimension_, dimension_);
    }
    Position position(std::size_t voter) const {
        auto s = ideal(voter);
        return Position(std::vector<double>(s.begin(), s.end()));
    }

private:
    std::size_t dimension_;
    std::vector<double> ideals_;
};

/// Draws n_voters ideal points, deterministic in spec.seed and independent
/// of `threads`.
Electorate generate_electorate(const ElectorateSpec& spec, unsigned threads = 1);

/// Democratic and Republican positions of each ballot measure.
struct MeasureGeometry {
    std::vector<Position> dem;
    std::vector<Position> rep;

    std::size_t size() const noexcept { return dem.size(); }
};

/// Each measure's endpoints are the party positions shifted by a common
/// per-measure offset, drawn once from the spec's seed.
MeasureGeometry build_measures(const ElectorateSpec& spec);

/// How voters answer ballot measures. Abstention is disabled: the voter
/// picks the Republican side iff its utility exceeds the Democratic side
/// (probabilistic mode: with the zero-cost Stakes probability).
struct ResponseModel {
    LossSpec loss;
    ChoiceModel choice;
};

std::vector<Stance> measure_responses(std::span<const double> ideal, const MeasureGeometry& geometry,
                                      const ResponseModel& model, StreamRng& rng);

/// Voter Group rank k: number of Republican-aligned responses.
int voter_group(std::span<const Stance> measures);

/// Voter Subgroup id: the response vector read as a binary number, d_1 most significant.
std::uint32_t subgroup_id(std::span<const Stance> measures);

struct ElectionInputs {
    const ElectorateSpec& spec;
    const Electorate& electorate;
    std::span<const RaceSpec> races;
    LossSpec loss;
    ChoiceModel choice;
    /// Measure response model; defaults to (loss, choice).
    std::optional<ResponseModel> responses;
    std::uint64_t seed = 0;
};

/// One ballot record per voter: measure responses plus a choice in every
/// race, each drawn from its own (seed, voter, race) substream.
CvrTable simulate_election(const ElectionInputs& inputs, unsigned threads = 1);

}  // namespace elab
