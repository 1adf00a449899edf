#include "gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "error.hpp"

namespace gvpnn {

GradCheckResult finite_diff_check(ParamStore& params, const std::function<double()>& eval,
                                  const Grads& analytic, double h, int coords_per_class,
                                  std::uint64_t seed,
                                  const std::function<std::string(const std::string&)>& class_of) {
  require(h > 0.0, "finite_diff_check: h must be positive");
  require(analytic.size() == params.size(), "finite_diff_check: gradient/store size mismatch");

  // Group tensor indices by class; std::map keeps probing order deterministic.
  std::map<std::string, std::vector<int>> classes;
  for (int i = 0; i < params.size(); ++i) {
    std::string cls = class_of ? class_of(params.name(i)) : params.name(i);
    classes[cls].push_back(i);
  }

  std::mt19937_64 rng(seed);
  GradCheckResult result;
  for (const auto& [cls, tensors] : classes) {
    std::size_t total = 0;
    for (int t : tensors) total += params.at(t).size();
    if (total == 0) continue;
    const std::size_t want = std::min<std::size_t>(total, std::size_t(coords_per_class));

    // Sample distinct flat coordinates across the class.
    std::vector<std::size_t> picks;
    if (want == total) {
      picks.resize(total);
      for (std::size_t k = 0; k < total; ++k) picks[k] = k;
    } else {
      std::vector<std::size_t> all(total);
      for (std::size_t k = 0; k < total; ++k) all[k] = k;
      for (std::size_t k = 0; k < want; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, total - 1);
        std::swap(all[k], all[pick(rng)]);
      }
      picks.assign(all.begin(), all.begin() + long(want));
    }

    for (std::size_t flat : picks) {
      int tensor = tensors[0];
      std::size_t offset = flat;
      for (int t : tensors) {
        if (offset < params.at(t).size()) {
          tensor = t;
          break;
        }
        offset -= params.at(t).size();
      }
      double* slot = params.at(tensor).data() + offset;
      const double saved = *slot;
      *slot = saved + h;
      const double fp = eval();
      *slot = saved - h;
      const double fm = eval();
      *slot = saved;
      const std::string coord = params.name(tensor) + "[" + std::to_string(offset) + "]";
      if (!std::isfinite(fp) || !std::isfinite(fm))
        fail(Errc::numeric, "finite_diff_check: non-finite objective at " + coord);
      const double numeric = (fp - fm) / (2.0 * h);
      const double exact = analytic[tensor].data()[offset];
      const double rel =
          std::fabs(numeric - exact) / std::max({std::fabs(numeric), std::fabs(exact), 1e-8});
      ++result.coords_checked;
      if (rel > result.max_rel_err) {
        result.max_rel_err = rel;
        result.worst_coord = coord;
      }
    }
  }
  return result;
}

}  // namespace gvpnn
