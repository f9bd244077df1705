#include "sdd/mmio.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace sdd {

namespace {
std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}
} // namespace

SparseMat read_matrix_market(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("matrix market: empty stream");
    std::istringstream hdr(line);
    std::string banner, object, format, field, symmetry;
    hdr >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || lower(object) != "matrix")
        throw IoError("matrix market: bad banner");
    if (lower(format) != "coordinate")
        throw IoError("matrix market: only coordinate format supported");
    if (lower(field) != "real" && lower(field) != "integer")
        throw IoError("matrix market: only real matrices supported");
    const std::string sym = lower(symmetry);
    if (sym != "general" && sym != "symmetric")
        throw IoError("matrix market: unsupported symmetry '" + symmetry + "'");

    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '%') break;
    }
    std::istringstream szl(line);
    int nr = 0, nc = 0;
    long long nnz = 0;
    if (!(szl >> nr >> nc >> nnz)) throw IoError("matrix market: bad size line");

    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(nnz));
    for (long long k = 0; k < nnz; ++k) {
        int i = 0, j = 0;
        double v = 0.0;
        if (!(in >> i >> j >> v)) throw IoError("matrix market: truncated entries");
        trips.push_back({i - 1, j - 1, v});
        if (sym == "symmetric" && i != j) trips.push_back({j - 1, i - 1, v});
    }
    return SparseMat::from_triplets(nr, nc, std::move(trips));
}

SparseMat read_matrix_market_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open '" + path + "'");
    return read_matrix_market(f);
}

void write_matrix_market(std::ostream& out, const SparseMat& M) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << M.rows() << ' ' << M.cols() << ' ' << M.nnz() << '\n';
    char buf[64];
    for (int i = 0; i < M.rows(); ++i) {
        auto [cols, vals] = M.row(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", i + 1, cols[k] + 1, vals[k]);
            out << buf;
        }
    }
}

void write_matrix_market_file(const std::string& path, const SparseMat& M) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    write_matrix_market(f, M);
}

} // namespace sdd
