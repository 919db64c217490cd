#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "laps/diagnostics.hpp"

namespace laps {

inline constexpr int kTraceSchemaVersion = 1;

/// Byte-stable trace serialization ("%.17g" for reals, empty field for NaN,
/// "inf" for infinities). The first line carries the schema version.
void write_trace_csv(std::ostream& out, std::span<const RunRecord> records);

/// Parses a trace produced by write_trace_csv; throws std::runtime_error
/// with a line number on malformed input. The bias vector itself is not
/// serialized, so records round-trip with b2_max / b2_avg only.
std::vector<RunRecord> read_trace_csv(std::istream& in);

std::string format_double(double value);

}  // namespace laps
