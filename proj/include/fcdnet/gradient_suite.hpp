#pragma once

#include "fcdnet/grad_check.hpp"

#include <string>
#include <vector>

namespace fcdnet {

struct SuiteResult {
    std::string scope;
    GradCheckReport report;
    double threshold = 1e-4;

    bool passed() const { return report.passed(threshold); }
};

// numeric, ltfe, stfe, graphops, forecaster, training, model.
std::vector<std::string> gradient_scopes();

/// Finite-difference checks of every parameterized operation at small shapes.
/// `scope` is one of gradient_scopes() or "all". Each loss is a fixed random
/// weighting of the operation's output, so every output entry contributes.
std::vector<SuiteResult> run_gradient_suite(const std::string& scope = "all");

} // namespace fcdnet
