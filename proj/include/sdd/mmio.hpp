/// @file mmio.hpp
/// @brief Matrix Market coordinate format I/O for SparseMat.

#ifndef SDD_MMIO_HPP
#define SDD_MMIO_HPP

#include "sdd/sparse.hpp"

#include <iosfwd>
#include <string>

namespace sdd {

SparseMat read_matrix_market(std::istream& in);
SparseMat read_matrix_market_file(const std::string& path);

/// Coordinate real general; values printed with full round-trip precision.
void write_matrix_market(std::ostream& out, const SparseMat& M);
void write_matrix_market_file(const std::string& path, const SparseMat& M);

} // namespace sdd

#endif
