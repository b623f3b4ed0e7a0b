#include "fcdnet/grad_check.hpp"

#include "fcdnet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace fcdnet {
namespace {

double evaluate(const LossBuilder& loss) {
    Tape tape;
    const Var out = loss(tape);
    if (out.size() != 1) throw ContractError("grad_check: loss must be a scalar");
    return out.value()[0];
}

} // namespace

GradCheckReport grad_check(const std::string& name, const LossBuilder& loss, const std::vector<Parameter*>& params,
                           const GradCheckOptions& options) {
    for (Parameter* p : params) p->zero_grad();
    {
        Tape tape;
        const Var out = loss(tape);
        tape.backward(out);
    }

    GradCheckReport report;
    report.name = name;
    std::mt19937_64 rng(options.seed);
    const double h = options.step;
    for (Parameter* p : params) {
        std::vector<std::size_t> entries(p->value.size());
        std::iota(entries.begin(), entries.end(), std::size_t{0});
        if (options.max_entries_per_param > 0 && entries.size() > options.max_entries_per_param) {
            std::shuffle(entries.begin(), entries.end(), rng);
            entries.resize(options.max_entries_per_param);
        }
        for (std::size_t i : entries) {
            const double original = p->value[i];
            auto at = [&](double offset) {
                p->value[i] = original + offset;
                return evaluate(loss);
            };
            // Differences first: a loss that ignores this entry must give exactly 0.
            const double near = at(h) - at(-h);
            const double far = at(2 * h) - at(-2 * h);
            const double numeric = (8.0 * near - far) / (12.0 * h);
            p->value[i] = original;
            const double analytic = p->grad[i];
            const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
            const double err = std::abs(analytic - numeric) / denom;
            if (report.entries_checked == 0 || err > report.max_rel_error) {
                report.max_rel_error = err;
                report.worst_parameter = p->name;
            }
            ++report.entries_checked;
        }
    }
    return report;
}

} // namespace fcdnet
