// trajectory.hpp: sampled reduced-variable trajectories

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace relax {

// Column 0 is always the ground-state population.
struct Trajectory {
    std::vector<double> times;
    std::vector<std::string> labels;
    std::vector<std::vector<double>> values;  // values[i] sampled at times[i]

    std::size_t size() const noexcept { return times.size(); }
    std::vector<double> column(std::size_t index) const {
        std::vector<double> c;
        c.reserve(values.size());
        for (const auto& row : values) c.push_back(row.at(index));
        return c;
    }
    std::vector<double> ground() const { return column(0); }
};

} // namespace relax
