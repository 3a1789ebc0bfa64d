#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "termspace/embed.hpp"

namespace termspace::cli {

enum ExitCode : int { kOk = 0, kAuditFailed = 1, kUsage = 2, kSolverFailure = 3 };

/// Entry point of the `termspace` tool; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// ---------------------------------------------------------------------------
// Point files: headerless CSV, one point per row, shortest round-trip decimals.

/// Rows of the file as columns of a d x n matrix. Rows must share a length;
/// a mismatch names the offending 1-based row.
Matrix read_points_csv(std::istream& in, const std::string& source = "input");
Matrix read_points_file(const std::string& path);
/// Column j of `columns` becomes row j; `flags`, when nonempty, is appended as
/// an integer column.
void write_csv(std::ostream& out, const Matrix& columns, const std::vector<int>& flags = {});
std::string format_double(double v);

/// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& bytes);

// ---------------------------------------------------------------------------
// Embedder archives.
//
// All integers and floats little-endian, floats IEEE-754 binary64:
//   "TEMB"  u32 version=1
//   u64 d, u64 m, u64 n (ground points; 0 for analytic shapes)
//   u8 variant (0 finite, 1 cover), u8 ground kind (0 finite, 1 circle, 2 sphere)
//   f64 epsilon, u64 seed, f64 reach, u64 l (cover size; 0 for the finite variant)
//   Π: m*d f64, row-major
//   ground: finite  -> n*d f64, one point after another
//           circle  -> center (d f64), radius, basis (2*d f64, first vector then second)
//           sphere  -> center (d f64), radius
//   cover (l > 0): l*d f64 one direction after another, f64 radius, f64 verified radius
//   f64 distortion estimate

inline constexpr std::uint32_t kArchiveVersion = 1;

struct Archive {
  std::uint64_t seed = 0;
  TerminalEmbedder embedder;
};

std::string encode_archive(const TerminalEmbedder& e, std::uint64_t seed);
Archive decode_archive(const std::string& bytes);
void save_archive(const std::string& path, const TerminalEmbedder& e, std::uint64_t seed);
Archive load_archive(const std::string& path);

}  // namespace termspace::cli
