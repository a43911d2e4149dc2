#include "semmap/willingness.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "semmap/error.hpp"

namespace semmap {

namespace {

// Accumulated rounding from many small steps must not postpone a full bar by a frame.
constexpr double kSnap = 1e-9;

}  // namespace

void WillingnessConfig::validate() const {
  if (!(rate_down > 0.0)) throw Error(ErrorCode::ConfigError, "rate_down must be positive");
  if (!(rate_up > rate_down)) throw Error(ErrorCode::ConfigError, "rate_up must exceed rate_down");
  if (!(reset_level > 0.0 && reset_level < 1.0)) throw Error(ErrorCode::ConfigError, "reset_level must be in (0, 1)");
}

WillingnessState WillingnessState::initial(const WillingnessConfig& config, double t) {
  WillingnessState s;
  s.rate_up = config.rate_up;
  s.rate_down = config.rate_down;
  s.reset_level = config.reset_level;
  s.last_update = t;
  return s;
}

WillingnessState update(const WillingnessState& state, bool attending, double dt) {
  if (!(dt >= 0.0)) throw Error(ErrorCode::NegativeDt, "dt = " + std::to_string(dt));
  WillingnessState next = state;
  double v = state.value + (attending ? state.rate_up : -state.rate_down) * dt;
  if (v >= 1.0 - kSnap) v = 1.0;
  if (v <= kSnap) v = 0.0;
  next.value = std::clamp(v, 0.0, 1.0);
  next.last_update = state.last_update + dt;
  if (next.value >= 1.0) {
    next.triggered = true;
  } else if (next.triggered && next.value < state.reset_level) {
    next.triggered = false;
  }
  return next;
}

PersonWillingnessMap::PersonWillingnessMap(WillingnessConfig config) : config_(config) { config_.validate(); }

std::vector<PersonId> PersonWillingnessMap::step_frame(const std::vector<std::pair<PersonId, bool>>& observations,
                                                       double t_now) {
  for (const auto& [id, state] : states_) {
    if (t_now < state.last_update) {
      throw Error(ErrorCode::ClockWentBackwards, "t = " + std::to_string(t_now) + " before person " +
                                                     std::to_string(id) + " update at " +
                                                     std::to_string(state.last_update));
    }
  }
  std::map<PersonId, bool> attending;
  for (const auto& [id, flag] : observations) {
    attending[id] = attending[id] || flag;
    states_.try_emplace(id, WillingnessState::initial(config_, t_now));
  }

  std::vector<PersonId> triggered;
  for (auto& [id, state] : states_) {
    const auto it = attending.find(id);
    const bool looking = it != attending.end() && it->second;
    const bool before = state.triggered;
    state = update(state, looking, t_now - state.last_update);
    state.last_update = t_now;
    if (!before && state.triggered) triggered.push_back(id);
  }
  return triggered;
}

}  // namespace semmap
