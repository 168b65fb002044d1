#pragma once

#include "prsolve/sparse_matrix.hpp"

#include <zlib.h>

#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

namespace prsolve {

namespace detail {

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] inline void parse_fail(long lineno, const std::string& what) {
  throw std::runtime_error("matrix market parse error at line " + std::to_string(lineno) +
                           ": " + what);
}

inline long long parse_index(const std::string& tok, long lineno) {
  long long v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size()) parse_fail(lineno, "bad integer '" + tok + "'");
  return v;
}

inline double parse_value(const std::string& tok, long lineno) {
  double v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size()) parse_fail(lineno, "bad value '" + tok + "'");
  if (!std::isfinite(v)) parse_fail(lineno, "non-finite value '" + tok + "'");
  return v;
}

}  // namespace detail

/// Parses a Matrix Market coordinate stream.  Accepted headers: pattern,
/// real, or integer field with general or symmetric symmetry.  Symmetric
/// inputs are expanded to both (i, j) and (j, i); duplicate coordinates are
/// merged by the triplet builder.  Errors carry the offending line number.
template <class Scalar = double>
CompressedSparseMatrix<Scalar> parse_matrix_market(std::istream& in) {
  std::string line;
  long lineno = 0;

  if (!std::getline(in, line)) detail::parse_fail(1, "empty input");
  ++lineno;
  auto banner = detail::split_ws(line);
  if (banner.size() < 5 || detail::lower(banner[0]) != "%%matrixmarket" ||
      detail::lower(banner[1]) != "matrix" || detail::lower(banner[2]) != "coordinate")
    detail::parse_fail(lineno, "malformed header '" + line + "'");
  const std::string field = detail::lower(banner[3]);
  const std::string symmetry = detail::lower(banner[4]);
  if (field != "pattern" && field != "real" && field != "integer")
    detail::parse_fail(lineno, "unsupported field '" + field + "'");
  if (symmetry != "general" && symmetry != "symmetric")
    detail::parse_fail(lineno, "unsupported symmetry '" + symmetry + "'");
  const bool has_value = field != "pattern";
  const bool symmetric = symmetry == "symmetric";

  // Size line: first non-comment, non-blank line after the banner.
  long long rows = 0, cols = 0, declared = 0;
  for (;;) {
    if (!std::getline(in, line)) detail::parse_fail(lineno + 1, "missing size line");
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != 3) detail::parse_fail(lineno, "size line must be 'rows cols nnz'");
    rows = detail::parse_index(tok[0], lineno);
    cols = detail::parse_index(tok[1], lineno);
    declared = detail::parse_index(tok[2], lineno);
    if (rows < 0 || cols < 0 || declared < 0) detail::parse_fail(lineno, "negative size");
    break;
  }

  std::vector<Triplet<Scalar>> entries;
  entries.reserve(static_cast<std::size_t>(symmetric ? 2 * declared : declared));
  long long seen = 0;
  while (seen < declared) {
    if (!std::getline(in, line))
      detail::parse_fail(lineno + 1, "unexpected end of file (expected " +
                                         std::to_string(declared) + " entries, got " +
                                         std::to_string(seen) + ")");
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != (has_value ? 3u : 2u))
      detail::parse_fail(lineno, "expected " + std::string(has_value ? "'i j value'" : "'i j'"));
    const long long i = detail::parse_index(tok[0], lineno);
    const long long j = detail::parse_index(tok[1], lineno);
    if (i < 1 || i > rows || j < 1 || j > cols)
      detail::parse_fail(lineno, "index (" + std::to_string(i) + ", " + std::to_string(j) +
                                     ") outside declared " + std::to_string(rows) + "x" +
                                     std::to_string(cols));
    const Scalar v = has_value ? static_cast<Scalar>(detail::parse_value(tok[2], lineno))
                               : Scalar(1);
    entries.push_back({static_cast<Index>(i - 1), static_cast<Index>(j - 1), v});
    if (symmetric && i != j)
      entries.push_back({static_cast<Index>(j - 1), static_cast<Index>(i - 1), v});
    ++seen;
  }
  return CompressedSparseMatrix<Scalar>::from_triplets(static_cast<Index>(rows),
                                                       static_cast<Index>(cols),
                                                       std::move(entries));
}

/// Loads a Matrix Market file.  Gzip compression is detected from the two
/// magic bytes 0x1f 0x8b, not the file extension.
template <class Scalar = double>
CompressedSparseMatrix<Scalar> load_matrix_market(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw std::runtime_error("cannot open matrix file: " + path.string());
  unsigned char magic[2] = {0, 0};
  probe.read(reinterpret_cast<char*>(magic), 2);
  const bool gzipped = probe.gcount() == 2 && magic[0] == 0x1f && magic[1] == 0x8b;
  probe.close();

  std::string text;
  if (gzipped) {
    gzFile gz = gzopen(path.string().c_str(), "rb");
    if (!gz) throw std::runtime_error("cannot open gzip file: " + path.string());
    char buf[1 << 16];
    int got = 0;
    while ((got = gzread(gz, buf, sizeof(buf))) > 0) text.append(buf, static_cast<std::size_t>(got));
    const bool ok = got == 0;
    gzclose(gz);
    if (!ok) throw std::runtime_error("gzip decompression failed: " + path.string());
  } else {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  std::istringstream in(text);
  return parse_matrix_market<Scalar>(in);
}

/// Writes coordinate real general text.  Parsing the output reproduces the
/// input matrix exactly (values are printed with 17 significant digits).
template <class Scalar>
void write_matrix_market(const CompressedSparseMatrix<Scalar>& m, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << " " << m.cols() << " " << m.nonzeros() << "\n";
  char buf[64];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index k = m.row_begin(i); k < m.row_end(i); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", static_cast<double>(m.values()[static_cast<std::size_t>(k)]));
      out << (i + 1) << " " << (m.col_indices()[static_cast<std::size_t>(k)] + 1) << " " << buf
          << "\n";
    }
  }
}

template <class Scalar>
void write_matrix_market(const CompressedSparseMatrix<Scalar>& m,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write matrix file: " + path.string());
  write_matrix_market(m, out);
}

}  // namespace prsolve
