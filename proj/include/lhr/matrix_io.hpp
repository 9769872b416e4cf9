#pragma once

#include "lhr/matcore.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>

namespace lhr {

/// Malformed or unreadable input file; the message carries row/column context.
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// matrix-csv: one row per line, comma-separated decimal entries, no header.
// Entries are written with 17 significant digits so values round-trip exactly.
Matrix read_matrix_csv(std::istream &in);
Matrix read_matrix_csv(const std::filesystem::path &path);
void write_matrix_csv(std::ostream &out, const Matrix &m);
void write_matrix_csv(const std::filesystem::path &path, const Matrix &m);

} // namespace lhr
