#pragma once

#include <cstdint>

namespace grpurn {

// One-pass mean/variance accumulator with a pairwise merge (Chan et al.).
// Merging any partition of the same samples agrees with the direct pass to
// machine precision, which the replica harness relies on.
struct RunningMoments {
    std::int64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void push(double x) {
        ++count;
        const double d = x - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (x - mean);
    }

    void merge(const RunningMoments& other) {
        if (other.count == 0) return;
        if (count == 0) {
            *this = other;
            return;
        }
        const double na = static_cast<double>(count);
        const double nb = static_cast<double>(other.count);
        const double delta = other.mean - mean;
        const double n = na + nb;
        mean += delta * nb / n;
        m2 += other.m2 + delta * delta * na * nb / n;
        count += other.count;
    }

    double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
    double variance_population() const { return count > 0 ? m2 / static_cast<double>(count) : 0.0; }
};

}  // namespace grpurn
