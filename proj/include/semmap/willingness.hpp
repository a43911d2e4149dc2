#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace semmap {

struct WillingnessConfig {
  double rate_up = 1.0 / 3.0;    // 1/s, full bar after 3 s of attention
  double rate_down = 1.0 / 9.0;  // 1/s
  double reset_level = 0.5;      // trigger clears below this

  void validate() const;
};

struct WillingnessState {
  double value = 0.0;
  double rate_up = 1.0 / 3.0;
  double rate_down = 1.0 / 9.0;
  double reset_level = 0.5;
  bool triggered = false;
  double last_update = 0.0;

  static WillingnessState initial(const WillingnessConfig& config, double t);
};

/// Integrates the asymmetric accumulator over `dt` seconds. Throws NegativeDt.
WillingnessState update(const WillingnessState& state, bool attending, double dt);

using PersonId = std::int64_t;

class PersonWillingnessMap {
 public:
  explicit PersonWillingnessMap(WillingnessConfig config = {});

  /// Advances every known person to `t_now`; persons absent from `observations`
  /// count as not attending. Returns ids whose trigger turned on in this step.
  std::vector<PersonId> step_frame(const std::vector<std::pair<PersonId, bool>>& observations, double t_now);

  void erase(PersonId id) { states_.erase(id); }
  const std::map<PersonId, WillingnessState>& states() const { return states_; }
  const WillingnessConfig& config() const { return config_; }

 private:
  WillingnessConfig config_;
  std::map<PersonId, WillingnessState> states_;
};

}  // namespace semmap
