#pragma once

#include <cstdint>
#include <string>

namespace veriscope {

// Kleene K3 truth value, doubling as a tuple correctness label:
// False = labeled incorrect, True = labeled correct, Unknown = not labeled.
enum class Tri : uint8_t { False = 0, True = 1, Unknown = 2 };

constexpr Tri tri_of(bool b) { return b ? Tri::True : Tri::False; }

constexpr bool is_known(Tri v) { return v != Tri::Unknown; }

// K3 conjunction: 0 dominates, then unknown.
constexpr Tri k3_and(Tri a, Tri b) {
  if (a == Tri::False || b == Tri::False) return Tri::False;
  if (a == Tri::Unknown || b == Tri::Unknown) return Tri::Unknown;
  return Tri::True;
}

// K3 disjunction: 1 dominates, then unknown.
constexpr Tri k3_or(Tri a, Tri b) {
  if (a == Tri::True || b == Tri::True) return Tri::True;
  if (a == Tri::Unknown || b == Tri::Unknown) return Tri::Unknown;
  return Tri::False;
}

constexpr Tri k3_not(Tri a) {
  if (a == Tri::Unknown) return Tri::Unknown;
  return a == Tri::True ? Tri::False : Tri::True;
}

inline std::string to_string(Tri v) {
  switch (v) {
    case Tri::False: return "0";
    case Tri::True: return "1";
    default: return "unknown";
  }
}

}  // namespace veriscope
