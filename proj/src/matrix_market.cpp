#include "fsai/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fsai {
namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

} // namespace

CsrMatrix<double> read_matrix_market(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError("empty Matrix Market input", 1);
    ++lineno;

    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket") throw ParseError("missing %%MatrixMarket banner", lineno);
    object = lower(object);
    format = lower(format);
    field = lower(field);
    symmetry = lower(symmetry);
    if (object != "matrix") throw ParseError("unsupported object '" + object + "'", lineno);
    if (format != "coordinate") throw ParseError("only coordinate format is supported", lineno);
    if (field != "real" && field != "double")
        throw ParseError("unsupported field '" + field + "' (real only)", lineno);
    const bool sym = symmetry == "symmetric";
    if (!sym && symmetry != "general")
        throw ParseError("unsupported symmetry '" + symmetry + "'", lineno);

    // Skip comments, read size line.
    long long rows = -1, cols = -1, entries = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '%' || blank(line)) continue;
        std::istringstream size(line);
        if (!(size >> rows >> cols >> entries) || rows < 0 || cols < 0 || entries < 0)
            throw ParseError("malformed size line", lineno);
        break;
    }
    if (rows < 0) throw ParseError("missing size line", lineno);
    if (sym && rows != cols) throw ParseError("symmetric matrix must be square", lineno);

    std::vector<CooEntry<double>> coo;
    coo.reserve(static_cast<std::size_t>(sym ? 2 * entries : entries));
    long long seen = 0;
    while (seen < entries && std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '%' || blank(line)) continue;
        std::istringstream es(line);
        long long i = 0, j = 0;
        double v = 0.0;
        if (!(es >> i >> j >> v)) throw ParseError("malformed entry", lineno);
        if (i < 1 || i > rows || j < 1 || j > cols)
            throw ParseError("index (" + std::to_string(i) + ", " + std::to_string(j) + ") out of bounds",
                             lineno);
        if (sym && j > i) throw ParseError("upper-triangle entry in symmetric file", lineno);
        const auto r = static_cast<index_t>(i - 1);
        const auto c = static_cast<index_t>(j - 1);
        coo.push_back({r, c, v});
        if (sym && r != c) coo.push_back({c, r, v});
        ++seen;
    }
    if (seen < entries)
        throw ParseError("expected " + std::to_string(entries) + " entries, found " + std::to_string(seen),
                         lineno);
    try {
        return csr_from_coo(std::move(coo), static_cast<index_t>(rows), static_cast<index_t>(cols));
    } catch (const DuplicateEntryError& e) {
        throw ParseError(e.what(), lineno);
    }
}

CsrMatrix<double> read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const CsrMatrix<double>& a, MmSymmetry symmetry) {
    bool sym = false;
    if (symmetry == MmSymmetry::symmetric) {
        if (!a.is_symmetric()) throw StructureError("matrix is not symmetric");
        sym = true;
    } else if (symmetry == MmSymmetry::automatic) {
        sym = a.is_symmetric();
    }
    std::size_t count = 0;
    for (index_t i = 0; i < a.rows(); ++i)
        for (const index_t j : a.row_cols(i))
            if (!sym || j <= i) ++count;

    out << "%%MatrixMarket matrix coordinate real " << (sym ? "symmetric" : "general") << '\n';
    out << a.rows() << ' ' << a.cols() << ' ' << count << '\n';
    char buf[64];
    for (index_t i = 0; i < a.rows(); ++i) {
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (sym && cols[k] > i) continue;
            std::snprintf(buf, sizeof buf, "%.17g", vals[k]);
            out << i + 1 << ' ' << cols[k] + 1 << ' ' << buf << '\n';
        }
    }
}

void write_matrix_market(const std::string& path, const CsrMatrix<double>& a, MmSymmetry symmetry) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    write_matrix_market(out, a, symmetry);
    if (!out) throw IoError("write failed for '" + path + "'");
}

} // namespace fsai
