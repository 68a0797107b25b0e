#pragma once

#include <iosfwd>
#include <string>

#include "qprelax/instance.hpp"

namespace qpr {

/// Text instance format (see README for the grammar):
///
///   qprelax-instance v1
///   n 2
///   m 2
///   p 0
///   Q  1 1 1        # upper triangle, row-major (full n*n also accepted)
///   c  -1 -1
///   G  1 -1 1 -1    # row-major n x m
///   g  2 2
///   H                # empty when p = 0
///   h
///
/// or the family shorthand, expanded on load:
///
///   qprelax-instance v1
///   family EX1 0.5
///
/// Numbers are decimal strings; the writer emits shortest round-trip
/// decimals, so write -> read -> write is bit-exact.
QpInstance read_instance(std::istream& is);
QpInstance read_instance_file(const std::string& path);

void write_instance(const QpInstance& inst, std::ostream& os);
void write_instance_file(const QpInstance& inst, const std::string& path);

/// Shortest decimal string that round-trips to exactly this double.
std::string format_double(double v);

}  // namespace qpr
