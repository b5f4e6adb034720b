#pragma once

#include "fsai/sparse.hpp"

#include <iosfwd>
#include <string>

namespace fsai {

/// Reads `%%MatrixMarket matrix coordinate real {general|symmetric}`.
/// Symmetric files are expanded to both triangles. Errors carry the 1-based
/// line number of the offending input line.
CsrMatrix<double> read_matrix_market(std::istream& in);
CsrMatrix<double> read_matrix_market(const std::string& path);

enum class MmSymmetry { automatic, general, symmetric };

/// Writes coordinate/real. With `automatic`, exactly symmetric matrices are
/// written as `symmetric` (lower triangle only), everything else as `general`.
/// Values use 17 significant digits so a read-back is bit-exact.
void write_matrix_market(std::ostream& out, const CsrMatrix<double>& a,
                         MmSymmetry symmetry = MmSymmetry::automatic);
void write_matrix_market(const std::string& path, const CsrMatrix<double>& a,
                         MmSymmetry symmetry = MmSymmetry::automatic);

} // namespace fsai
