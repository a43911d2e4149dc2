#include "semmap/metrics.hpp"

#include <cmath>
#include <limits>

namespace semmap {

MetricsReport evaluate_map(const SemanticMap& map, const std::vector<WorldObject>& ground_truth, double radius) {
  MetricsReport report;
  report.gt_object_count = ground_truth.size();
  report.registered_count = map.size();

  std::vector<bool> claimed(ground_truth.size(), false);
  double squared_error = 0.0;
  for (const auto& [id, obj] : map.objects()) {
    ObjectMatch match;
    match.object = id;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      if (ground_truth[g].class_label != obj.class_label) continue;
      const double d = (ground_truth[g].centroid - obj.centroid).norm();
      if (d <= radius && d < best) {
        best = d;
        match.gt_index = static_cast<int>(g);
      }
    }
    if (match.gt_index >= 0) {
      match.error = best;
      auto&& taken = claimed[static_cast<std::size_t>(match.gt_index)];
      if (taken) {
        match.duplicate = true;
        ++report.duplicate_count;
      } else {
        taken = true;
        ++report.matched_count;
        squared_error += best * best;
      }
    }
    report.matches.push_back(match);
  }

  if (report.registered_count > 0) {
    report.precision = static_cast<double>(report.matched_count) / static_cast<double>(report.registered_count);
  }
  if (report.gt_object_count > 0) {
    report.recall = static_cast<double>(report.matched_count) / static_cast<double>(report.gt_object_count);
  }
  if (report.matched_count > 0) {
    report.centroid_rmse = std::sqrt(squared_error / static_cast<double>(report.matched_count));
  }
  return report;
}

}  // namespace semmap
