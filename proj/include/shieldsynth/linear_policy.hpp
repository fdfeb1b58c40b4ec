#pragma once

#include "shieldsynth/types.hpp"

namespace shieldsynth {

/// State-feedback gain with the control-theory sign convention
/// command = -K s. The shield layer renders the already-negated
/// coefficients, so emitted programs show theta = -K.
struct LinearPolicy {
  Mat K;  // command_dim x state_dim

  Vec command(const Vec& s) const { return -(K * s); }
};

}  // namespace shieldsynth
