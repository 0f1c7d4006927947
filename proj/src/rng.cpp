#include "sismon/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sismon {

CdfSampler::CdfSampler(std::span<const double> masses) {
    if (masses.empty()) throw std::invalid_argument("CdfSampler: no categories");
    cumulative_.reserve(masses.size());
    double running = 0.0;
    for (double m : masses) {
        if (!(m >= 0.0) || !std::isfinite(m)) {
            throw std::invalid_argument("CdfSampler: masses must be finite and non-negative");
        }
        running += m;
        cumulative_.push_back(running);
    }
    if (!(running > 0.0)) throw std::invalid_argument("CdfSampler: total mass must be positive");
}

std::size_t CdfSampler::draw(RandomStream& rs) const {
    double target = rs.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    if (it == cumulative_.end()) --it;  // target == total after rounding
    return static_cast<std::size_t>(it - cumulative_.begin());
}

}  // namespace sismon
