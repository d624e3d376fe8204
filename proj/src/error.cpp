#include "chronos/error.hpp"

namespace chronos {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::not_hermitian: return "NotHermitian";
    case Errc::not_unitary: return "NotUnitary";
    case Errc::no_convergence: return "NoConvergence";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::wrong_axis: return "WrongAxis";
    case Errc::out_of_band: return "OutOfBand";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::out_of_range: return "OutOfRange";
    case Errc::empty_basis: return "EmptyBasis";
    case Errc::zero_overlap: return "ZeroOverlap";
    case Errc::wrong_kind: return "WrongKind";
    case Errc::truncation_top: return "TruncationTop";
    case Errc::index_out_of_range: return "IndexOutOfRange";
    case Errc::off_lattice: return "OffLattice";
    case Errc::equivalence_violation: return "EquivalenceViolation";
    case Errc::syntax_error: return "SyntaxError";
    case Errc::validation_error: return "ValidationError";
    case Errc::unknown_suite: return "UnknownSuite";
    case Errc::io_error: return "IOError";
  }
  return "Unknown";
}

}  // namespace chronos
