#pragma once

#include "semmap/geometry.hpp"
#include "semmap/headpose.hpp"
#include "semmap/semantic_map.hpp"
#include "semmap/tracker2d.hpp"
#include "semmap/willingness.hpp"

namespace semmap {

/// Every tunable of the pipeline. Defaults are the documented operating point.
struct PipelineConfig {
  TrackerConfig tracker;
  ExtractionOptions extraction;
  MapConfig map;
  LmOptions lm;
  WillingnessConfig willingness;
  double attention_cone_deg = 15.0;

  /// Throws ConfigError naming the first out-of-range value.
  void validate() const;
};

}  // namespace semmap
