#include "core/types.hpp"

#include <cmath>
#include <unordered_set>

#include "core/errors.hpp"

namespace vp {

std::vector<ClassEntry> make_class_list(const std::vector<std::string>& names) {
  std::vector<ClassEntry> out;
  out.reserve(names.size());
  std::unordered_set<std::string> seen;
  for (const auto& name : names) {
    if (name.empty()) throw Error(ErrorCode::kInvalidInput, "empty class name");
    if (!seen.insert(name).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate class name: " + name);
    }
    out.push_back({name, out.size()});
  }
  return out;
}

std::optional<std::string> HierarchyMap::parent_of(const std::string& class_name) const {
  for (const auto& [parent, members] : parents) {
    for (const auto& m : members) {
      if (m == class_name) return parent;
    }
  }
  return std::nullopt;
}

void FusionConfig::validate() const {
  if (!(beta1 >= 0.0) || !std::isfinite(beta1)) {
    throw Error(ErrorCode::kConfig, "beta1 must be a nonnegative number", "fusion.beta1");
  }
  if (beta2_mode == Beta2Mode::kFixed && !(fixed_beta2 >= 0.0 && fixed_beta2 <= 1.0)) {
    throw Error(ErrorCode::kConfig, "fixed beta2 must lie in [0, 1]", "fusion.beta2");
  }
  if (filter_k == 0) throw Error(ErrorCode::kConfig, "filter_k must be >= 1", "fusion.filter_k");
}

}  // namespace vp
