#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chronos {

enum class Errc {
  not_hermitian,
  not_unitary,
  no_convergence,
  invalid_argument,
  wrong_axis,
  out_of_band,
  dimension_mismatch,
  out_of_range,
  empty_basis,
  zero_overlap,
  wrong_kind,
  truncation_top,
  index_out_of_range,
  off_lattice,
  equivalence_violation,
  syntax_error,
  validation_error,
  unknown_suite,
  io_error,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace chronos
