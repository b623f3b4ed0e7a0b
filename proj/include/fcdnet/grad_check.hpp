#pragma once

#include "fcdnet/autograd.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace fcdnet {

struct GradCheckReport {
    std::string name;
    double max_rel_error = 0.0;
    std::string worst_parameter;
    std::size_t entries_checked = 0;

    bool passed(double threshold) const { return max_rel_error < threshold; }
};

struct GradCheckOptions {
    double step = 1e-4;
    // 0 checks every entry; otherwise a seeded sample of this many per parameter.
    std::size_t max_entries_per_param = 0;
    std::uint64_t seed = 0;
};

// Builds the scalar loss on a fresh tape from the parameters' current values.
using LossBuilder = std::function<Var(Tape&)>;

/// Compares the tape's analytic gradients with fourth-order central
/// differences at the given step. The error of one entry is
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8); the report holds
/// the maximum. Parameter values are restored before returning.
GradCheckReport grad_check(const std::string& name, const LossBuilder& loss, const std::vector<Parameter*>& params,
                           const GradCheckOptions& options = {});

} // namespace fcdnet
