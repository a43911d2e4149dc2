#include "semmap/config.hpp"

namespace semmap {

void PipelineConfig::validate() const {
  tracker.validate();
  if (extraction.stride < 1) throw Error(ErrorCode::ConfigError, "pixel_stride must be >= 1");
  map.validate();
  lm.validate();
  willingness.validate();
  if (!(attention_cone_deg > 0.0 && attention_cone_deg <= 90.0)) {
    throw Error(ErrorCode::ConfigError, "attention_cone_deg must be in (0, 90]");
  }
}

}  // namespace semmap
