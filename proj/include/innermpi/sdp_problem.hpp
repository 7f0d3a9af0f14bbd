#pragma once

#include <iosfwd>
#include <vector>

namespace innermpi {

enum class VarKind { Free, Nonneg, Gram };

/// A scalar decision variable of the standard-form problem. Gram entries
/// refer to the upper triangle (row <= col) of a symmetric PSD block.
struct VarInfo {
  VarKind kind = VarKind::Free;
  int block = -1;
  int row = -1;
  int col = -1;

  bool operator==(const VarInfo&) const = default;
};

struct SparseEntry {
  int var = 0;
  double value = 0.0;

  bool operator==(const SparseEntry&) const = default;
};

struct EqualityRow {
  std::vector<SparseEntry> entries;
  double rhs = 0.0;

  bool operator==(const EqualityRow&) const = default;
};

/// Standard conic form
///
///   minimize    sum_j c_j x_j + c0
///   subject to  sum_j a_ij x_j = b_i          for every row i
///               x_free unrestricted, x_nonneg >= 0, every Gram block PSD.
///
/// Variables are laid out as [free | nonneg | block 0 | block 1 | ...], each
/// block contributing its upper triangle in row-major order. A coefficient on
/// an off-diagonal Gram variable multiplies the single entry Q_rc (= Q_cr).
struct SdpProblem {
  std::vector<int> psd_blocks;
  int free_count = 0;
  int nonneg_count = 0;
  std::vector<EqualityRow> rows;
  std::vector<SparseEntry> objective;
  double objective_constant = 0.0;

  int variable_count() const;
  /// Index of the first variable of block b.
  int block_offset(int b) const;
  /// Index of Gram entry (r, c) of block b, either triangle.
  int gram_index(int b, int r, int c) const;
  VarInfo variable(int id) const;

  /// Throws std::invalid_argument on out-of-range variable ids or bad sizes.
  void validate() const;

  bool operator==(const SdpProblem&) const = default;
};

/// Sparse text interchange format. Header lines:
///
///   innermpi-sdp 1
///   free <count>
///   nonneg <count>
///   blocks <count> <dim_0> <dim_1> ...
///   rows <count>
///   objconst <value>
///
/// followed by one line per nonzero "<row> <var> <value>", where row -1
/// holds the objective and var -1 holds the right-hand side of the row.
void write_sdp_text(std::ostream& os, const SdpProblem& problem);
SdpProblem read_sdp_text(std::istream& is);

}  // namespace innermpi
