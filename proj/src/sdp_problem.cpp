#include "innermpi/sdp_problem.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace innermpi {

int SdpProblem::variable_count() const {
  int count = free_count + nonneg_count;
  for (int d : psd_blocks) count += d * (d + 1) / 2;
  return count;
}

int SdpProblem::block_offset(int b) const {
  int offset = free_count + nonneg_count;
  for (int i = 0; i < b; ++i) offset += psd_blocks[i] * (psd_blocks[i] + 1) / 2;
  return offset;
}

int SdpProblem::gram_index(int b, int r, int c) const {
  if (r > c) std::swap(r, c);
  const int d = psd_blocks.at(b);
  if (r < 0 || c >= d) throw std::out_of_range("SdpProblem::gram_index: entry outside block");
  // Rows before r contribute d, d-1, ..., d-r+1 entries.
  return block_offset(b) + r * d - r * (r - 1) / 2 + (c - r);
}

VarInfo SdpProblem::variable(int id) const {
  if (id < 0 || id >= variable_count()) throw std::out_of_range("SdpProblem::variable: id out of range");
  if (id < free_count) return {VarKind::Free};
  if (id < free_count + nonneg_count) return {VarKind::Nonneg};
  int offset = free_count + nonneg_count;
  for (int b = 0; b < static_cast<int>(psd_blocks.size()); ++b) {
    const int d = psd_blocks[b];
    const int size = d * (d + 1) / 2;
    if (id < offset + size) {
      int local = id - offset;
      for (int r = 0; r < d; ++r) {
        if (local < d - r) return {VarKind::Gram, b, r, r + local};
        local -= d - r;
      }
    }
    offset += size;
  }
  throw std::logic_error("SdpProblem::variable: unreachable");
}

void SdpProblem::validate() const {
  if (free_count < 0 || nonneg_count < 0) throw std::invalid_argument("SdpProblem: negative variable count");
  for (int d : psd_blocks) {
    if (d <= 0) throw std::invalid_argument("SdpProblem: block dimension must be positive");
  }
  const int nv = variable_count();
  auto check = [nv](const std::vector<SparseEntry>& entries) {
    for (const auto& e : entries) {
      if (e.var < 0 || e.var >= nv) throw std::invalid_argument("SdpProblem: entry references an undeclared variable");
    }
  };
  for (const auto& r : rows) check(r.entries);
  check(objective);
}

void write_sdp_text(std::ostream& os, const SdpProblem& p) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "innermpi-sdp 1\n";
  out << "free " << p.free_count << "\n";
  out << "nonneg " << p.nonneg_count << "\n";
  out << "blocks " << p.psd_blocks.size();
  for (int d : p.psd_blocks) out << ' ' << d;
  out << "\n";
  out << "rows " << p.rows.size() << "\n";
  out << "objconst " << p.objective_constant << "\n";
  for (const auto& e : p.objective) out << -1 << ' ' << e.var << ' ' << e.value << "\n";
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    out << i << ' ' << -1 << ' ' << p.rows[i].rhs << "\n";
    for (const auto& e : p.rows[i].entries) out << i << ' ' << e.var << ' ' << e.value << "\n";
  }
  os << out.str();
}

SdpProblem read_sdp_text(std::istream& is) {
  auto fail = [](const std::string& what) { throw std::runtime_error("read_sdp_text: " + what); };
  auto expect = [&](const char* key) {
    std::string k;
    if (!(is >> k) || k != key) fail(std::string("expected '") + key + "'");
  };
  SdpProblem p;
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "innermpi-sdp" || version != 1) fail("bad header");
  expect("free");
  is >> p.free_count;
  expect("nonneg");
  is >> p.nonneg_count;
  expect("blocks");
  std::size_t nb = 0;
  is >> nb;
  p.psd_blocks.resize(nb);
  for (auto& d : p.psd_blocks) is >> d;
  expect("rows");
  std::size_t nr = 0;
  is >> nr;
  p.rows.resize(nr);
  expect("objconst");
  is >> p.objective_constant;
  if (!is) fail("truncated header");
  long row = 0;
  long var = 0;
  double value = 0.0;
  while (is >> row >> var >> value) {
    if (row == -1) {
      p.objective.push_back({static_cast<int>(var), value});
      continue;
    }
    if (row < 0 || static_cast<std::size_t>(row) >= nr) fail("row id out of range");
    if (var == -1) {
      p.rows[row].rhs = value;
    } else {
      p.rows[row].entries.push_back({static_cast<int>(var), value});
    }
  }
  if (!is.eof()) fail("malformed entry line");
  p.validate();
  return p;
}

}  // namespace innermpi
