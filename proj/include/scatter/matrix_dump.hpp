#pragma once

#include <string>

#include "scatter/opcore.hpp"

namespace scatter {

/// Binary matrix dump, little-endian native doubles:
///   char[8]  magic "SCATOPM1"
///   uint32   version (1)
///   int32    dim
///   uint64   n (node count)
///   double   lambda, epsilon
///   int32    kind (0 F, 1 P, 2 BS, 3 custom)
///   double   h
///   n x { double x, y, z, weight, potential, root_potential; int32 bump_index, i, j, k }
///   n*n x { double re, im }   row-major entries
void write_matrix_dump(const std::string& path, const OperatorMatrix& m);

/// Reads a dump written by write_matrix_dump; the grid is rebuilt from the node table
/// (grid options other than h keep their defaults). Throws std::runtime_error on a
/// malformed or truncated file.
OperatorMatrix read_matrix_dump(const std::string& path);

}  // namespace scatter
