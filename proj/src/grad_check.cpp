#include "roadbeh/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace roadbeh {

namespace {

struct EntryRef {
  std::string name;
  std::size_t index;
};

}  // namespace

GradCheckReport grad_check(const LossFunction& f, const ParamStore& params, double h, double tol) {
  ParamStore analytic = params.zeros_like();
  f(params, &analytic);

  std::vector<EntryRef> entries;
  for (const auto& [name, t] : params)
    for (std::size_t i = 0; i < t.size(); ++i) entries.push_back({name, i});

  std::vector<double> numeric(entries.size());
  const auto count = static_cast<std::ptrdiff_t>(entries.size());
#pragma omp parallel
  {
    ParamStore local = params;
#pragma omp for schedule(dynamic, 64)
    for (std::ptrdiff_t e = 0; e < count; ++e) {
      const EntryRef& ref = entries[static_cast<std::size_t>(e)];
      auto values = local.values(ref.name);
      const double original = values[ref.index];
      values[ref.index] = original + h;
      const double up = f(local, nullptr);
      values[ref.index] = original - h;
      const double down = f(local, nullptr);
      values[ref.index] = original;
      numeric[static_cast<std::size_t>(e)] = (up - down) / (2.0 * h);
    }
  }

  GradCheckReport report;
  report.tolerance = tol;
  report.entries_checked = entries.size();
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const double a = analytic.get(entries[e].name).data()[entries[e].index];
    const double n = numeric[e];
    const double denom = std::max({std::abs(a), std::abs(n), 1e-6});
    double rel = std::abs(a - n) / denom;
    if (!std::isfinite(rel)) rel = 1e300;
    if (e == 0 || rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_param = entries[e].name;
      report.worst_index = entries[e].index;
      report.analytic_at_worst = a;
      report.numeric_at_worst = n;
    }
  }
  report.passed = report.max_rel_error < tol;
  return report;
}

}  // namespace roadbeh
