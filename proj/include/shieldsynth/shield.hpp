#pragma once

#include <cstdint>
#include <string>

#include "shieldsynth/linear_policy.hpp"
#include "shieldsynth/types.hpp"

namespace shieldsynth {

enum class Norm { Linf, L2 };

const char* norm_name(Norm n);
Norm norm_from_name(const std::string& name);

struct Provenance {
  std::string env;
  uint64_t seed = 0;
  long moas_horizon = -1;
};

/// The deployable artifact: verified backup gain plus switching threshold.
/// Immutable after construction; shield_command is pure.
struct Shield {
  LinearPolicy policy;
  double lambda = 0.0;
  Norm norm = Norm::Linf;
  Provenance provenance;
};

struct ShieldDecision {
  Vec command;
  bool intervened = false;
};

/// One matvec and one norm: computes k = -K s and passes c through unless
/// ||c - k|| exceeds lambda. The accumulation order matches the emitted
/// program text exactly (left-to-right terms), so a transcription of the
/// text reproduces this function bit for bit.
ShieldDecision shield_command(const Shield& sh, const Vec& s, const Vec& c);

/// Standalone program text (linear expression, one conditional, one
/// return) plus a trailing JSON parameter block; parse_program round-trips
/// it and emit(parse(emit(x))) == emit(x).
std::string emit_program(const Shield& sh);

/// Parses text produced by emit_program (the parameter block is optional).
/// Throws ParseError with line/column on malformed input.
Shield parse_program(const std::string& text);

std::string shield_to_json(const Shield& sh);
Shield shield_from_json(const std::string& json_text);

}  // namespace shieldsynth
