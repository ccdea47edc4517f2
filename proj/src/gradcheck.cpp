#include "mxmclr/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "mxmclr/errors.hpp"

namespace mxmclr::ad {

GradCheckReport finite_diff_check(const Objective& f, std::vector<Tensor> params, double h,
                                  double tol) {
    if (h <= 0.0) throw ContractError("finite_diff_check requires h > 0");

    std::vector<Tensor> analytic;
    const double base = f(params, &analytic);
    if (!std::isfinite(base)) throw EvaluationError("objective is non-finite at the base point");
    if (analytic.size() != params.size())
        throw ContractError("objective returned wrong gradient count");

    GradCheckReport report;
    for (std::size_t t = 0; t < params.size(); ++t) {
        if (!analytic[t].same_shape(params[t]))
            throw ContractError("gradient shape mismatch for parameter " + std::to_string(t));
        for (std::size_t i = 0; i < params[t].size(); ++i) {
            const double saved = params[t].data()[i];
            params[t].data()[i] = saved + h;
            const double fp = f(params, nullptr);
            params[t].data()[i] = saved - h;
            const double fm = f(params, nullptr);
            params[t].data()[i] = saved;
            if (!std::isfinite(fp) || !std::isfinite(fm))
                throw EvaluationError("objective is non-finite at a perturbed point");

            const double numeric = (fp - fm) / (2.0 * h);
            const double exact = analytic[t].data()[i];
            const double denom = std::max({1.0, std::abs(exact), std::abs(numeric)});
            const double rel = std::abs(exact - numeric) / denom;
            ++report.coordinates;
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_tensor = t;
                report.worst_entry = i;
            }
        }
    }
    report.pass = report.max_rel_error < tol;
    return report;
}

}  // namespace mxmclr::ad
