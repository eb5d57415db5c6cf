#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "rkhs/errors.hpp"

namespace rkhs {

// A point of the carrier set X, held as a dense coordinate vector.
// Coordinates must be finite; the dimension is fixed per point.
class DomainPoint {
public:
    DomainPoint() = default;

    DomainPoint(std::initializer_list<double> coords)
        : coords_(coords) { validate(); }

    explicit DomainPoint(std::vector<double> coords)
        : coords_(std::move(coords)) { validate(); }

    std::size_t dim() const noexcept { return coords_.size(); }
    double operator[](std::size_t i) const { return coords_[i]; }
    const std::vector<double>& coords() const noexcept { return coords_; }

    friend bool operator==(const DomainPoint& a, const DomainPoint& b) {
        return a.coords_ == b.coords_;
    }

private:
    void validate() const {
        if (coords_.empty())
            fail("invalid-point", "a domain point needs at least one coordinate");
        for (double c : coords_)
            if (!std::isfinite(c))
                fail("invalid-point", "domain point coordinates must be finite");
    }

    std::vector<double> coords_;
};

inline void require_same_dim(const DomainPoint& a, const DomainPoint& b) {
    if (a.dim() != b.dim())
        fail("dimension-mismatch",
             "points of dimension " + std::to_string(a.dim()) + " and " +
                 std::to_string(b.dim()) + " cannot be combined");
}

inline double squared_distance(const DomainPoint& a, const DomainPoint& b) {
    require_same_dim(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double distance(const DomainPoint& a, const DomainPoint& b) {
    return std::sqrt(squared_distance(a, b));
}

// Strict lexicographic order on coordinates; used to detect duplicates in
// O(n log n) instead of all-pairs comparison.
inline bool lex_less(const DomainPoint& a, const DomainPoint& b) {
    if (a.dim() != b.dim()) return a.dim() < b.dim();
    for (std::size_t i = 0; i < a.dim(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

// Coordinate-wise tolerance match. Serialized doubles round-trip exactly, but
// externally produced coordinates may carry last-ulp noise; node lookup in
// tabulated kernels goes through this predicate.
inline bool approx_same_point(const DomainPoint& a, const DomainPoint& b) {
    if (a.dim() != b.dim()) return false;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        const double scale = std::max({1.0, std::abs(a[i]), std::abs(b[i])});
        if (std::abs(a[i] - b[i]) > 1e-12 * scale) return false;
    }
    return true;
}

inline std::string to_string(const DomainPoint& p) {
    std::string s = "(";
    for (std::size_t i = 0; i < p.dim(); ++i) {
        if (i) s += ", ";
        s += std::to_string(p[i]);
    }
    return s + ")";
}

}  // namespace rkhs
