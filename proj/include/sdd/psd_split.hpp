/// @file psd_split.hpp
/// @brief Element-level PSD splittings of a sparse matrix, with ASCII I/O.

#ifndef SDD_PSD_SPLIT_HPP
#define SDD_PSD_SPLIT_HPP

#include "sdd/sparse.hpp"
#include "sdd/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace sdd {

/// One small dense PSD element acting on the listed global dofs.
struct PsdElem {
    std::vector<int> idx;
    Matrix mat;
};

struct PsdSplit {
    std::vector<PsdElem> elems;

    bool empty() const { return elems.empty(); }
    SparseMat assemble(int n) const;
    /// Every element symmetric with min eig ≥ −tol·λ_max.
    void check_psd(double tol) const;
    /// ‖assemble − target‖_max ≤ tol·‖target‖_max.
    void check_reassembles(const SparseMat& target, double tol) const;
};

/// ASCII format: element count; per element the size, the 0-based index
/// list, then the dense entries row-major (whitespace separated).
PsdSplit read_split(std::istream& in);
PsdSplit read_split_file(const std::string& path);
void write_split(std::ostream& out, const PsdSplit& s);
void write_split_file(const std::string& path, const PsdSplit& s);

} // namespace sdd

#endif
