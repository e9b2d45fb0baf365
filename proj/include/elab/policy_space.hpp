#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace elab {

/// A point in a d-dimensional policy space: a voter's ideal point or a
/// candidate platform. Coordinates are finite; integer-valued coordinates
/// represent the discrete segments {0, 1, ..., n} of a uni-dimensional space.
class Position {
public:
    explicit Position(std::vector<double> coords);
    Position(std::initializer_list<double> coords);

    static Position scalar(double x) { return Position{x}; }

    std::size_t dimension() const noexcept { return coords_.size(); }
    double operator[](std::size_t i) const { return coords_[i]; }
    std::span<const double> coords() const noexcept { return coords_; }

    friend bool operator==(const Position&, const Position&) = default;

private:
    std::vector<double> coords_;
};

struct Interval {
    double lo;
    double hi;
};

class PolicySpace {
public:
    explicit PolicySpace(std::size_t dimension, std::optional<std::vector<Interval>> bounds = {});

    std::size_t dimension() const noexcept { return dimension_; }
    const std::optional<std::vector<Interval>>& bounds() const noexcept { return bounds_; }

    /// True when `p` has this space's dimension and lies inside the bounds, if any.
    bool contains(const Position& p) const noexcept;

private:
    std::size_t dimension_;
    std::optional<std::vector<Interval>> bounds_;
};

/// Euclidean distance. Throws DomainError on dimension mismatch.
double distance(std::span<const double> a, std::span<const double> b);
inline double distance(const Position& a, const Position& b) { return distance(a.coords(), b.coords()); }

enum class ShiftMode { Collinear, Orthogonal };

/// Distance to a candidate after the voter moves `shift` away from it:
/// along the voter-candidate line (collinear) or perpendicular to it.
double shift_away_distance(double delta0, double shift, ShiftMode mode);

/// Moves two candidates symmetrically apart from `center` along a unit `axis`.
std::pair<Position, Position> polarize(const Position& center, double half_gap, const Position& axis);

}  // namespace elab
