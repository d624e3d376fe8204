#pragma once

#include <string>
#include <string_view>

#include "chronos/dynamics.hpp"

namespace chronos {

/// Parses and validates a JSON scenario document.
///
/// Top-level keys: constants {hbar, mass, c, omega}; preset, either
/// "energy-aligned" | "time-aligned" or explicit grids
/// {q: {n, origin, spacing}, t: {n, origin, spacing}}; model
/// ("oscillator" | "free_particle"); initial ({level} | {energy} |
/// {amplitudes: [[re, im], ...]}); steps ([{evolve: dt} |
/// {jump: {from, to, at}}]); tolerances {constraint_tol, eigen_tol}.
///
/// Unknown keys are rejected. Throws SyntaxError (with line/column) for
/// malformed JSON and ValidationError naming the field otherwise.
Scenario parse_scenario(std::string_view text);

/// JSON text that parses back to the same Scenario.
std::string serialize_scenario(const Scenario& sc);

Scenario load_scenario(const std::string& path);

std::string_view to_string(GridPreset preset);
std::string_view to_string(ModelKind kind);

}  // namespace chronos
