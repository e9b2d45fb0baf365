#include "elab/policy_space.hpp"

#include <cmath>
#include <string>

#include "elab/error.hpp"

namespace elab {

namespace {

void require_finite(std::span<const double> coords) {
    if (coords.empty()) throw DomainError("position must have at least one coordinate");
    for (double c : coords) {
        if (!std::isfinite(c)) throw DomainError("position coordinates must be finite");
    }
}

}  // namespace

Position::Position(std::vector<double> coords) : coords_(std::move(coords)) { require_finite(coords_); }

Position::Position(std::initializer_list<double> coords) : coords_(coords) { require_finite(coords_); }

PolicySpace::PolicySpace(std::size_t dimension, std::optional<std::vector<Interval>> bounds)
    : dimension_(dimension), bounds_(std::move(bounds)) {
    if (dimension_ == 0) throw DomainError("policy space dimension must be >= 1");
    if (bounds_) {
        if (bounds_->size() != dimension_) throw DomainError("one bound interval per dimension required");
        for (const auto& b : *bounds_) {
            if (!(b.lo < b.hi)) throw DomainError("bound interval requires lo < hi");
        }
    }
}

bool PolicySpace::contains(const Position& p) const noexcept {
    if (p.dimension() != dimension_) return false;
    if (!bounds_) return true;
    for (std::size_t i = 0; i < dimension_; ++i) {
        if (p[i] < (*bounds_)[i].lo || p[i] > (*bounds_)[i].hi) return false;
    }
    return true;
}

double distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DomainError("incompatible positions: dimension " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
    }
    if (a.size() == 1) return std::fabs(a[0] - b[0]);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

double shift_away_distance(double delta0, double shift, ShiftMode mode) {
    if (!(delta0 >= 0.0) || !(shift >= 0.0)) throw DomainError("shift_away_distance requires nonnegative inputs");
    switch (mode) {
        case ShiftMode::Collinear:
            return delta0 + shift;
        case ShiftMode::Orthogonal:
            return std::hypot(delta0, shift);
    }
    return delta0;
}

std::pair<Position, Position> polarize(const Position& center, double half_gap, const Position& axis) {
    if (!(half_gap >= 0.0)) throw DomainError("half_gap must be nonnegative");
    if (axis.dimension() != center.dimension()) throw DomainError("axis dimension differs from center");
    double norm2 = 0.0;
    for (double a : axis.coords()) norm2 += a * a;
    if (std::fabs(norm2 - 1.0) > 1e-9) throw DomainError("polarization axis must have unit norm");

    std::vector<double> lo(center.dimension()), hi(center.dimension());
    for (std::size_t i = 0; i < center.dimension(); ++i) {
        lo[i] = center[i] - half_gap * axis[i];
        hi[i] = center[i] + half_gap * axis[i];
    }
    return {Position(std::move(lo)), Position(std::move(hi))};
}

}  // namespace elab
