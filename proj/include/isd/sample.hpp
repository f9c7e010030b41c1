#pragma once

#include "isd/errors.hpp"

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace isd {

// Immutable vector of observations, n >= 2, all finite.
class Sample {
public:
    explicit Sample(std::vector<double> values) : vals_(std::move(values)) {
        if (vals_.size() < 2) throw sample_too_small(vals_.size());
        for (double v : vals_)
            if (!std::isfinite(v)) throw malformed_input("non-finite observation");
    }

    const std::vector<double>& values() const { return vals_; }
    std::size_t n() const { return vals_.size(); }

private:
    std::vector<double> vals_;
};

} // namespace isd
