#include "laps/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace laps {

namespace {

constexpr const char* kHeader =
    "iteration,phase,grads_per_chain,step_size,decoherence_L,eevpd,eevpd_wanted,"
    "equipartition,max_fluctuation,acceptance,divergent_fraction,b2_max,b2_avg";

std::string field(double value) {
  if (std::isnan(value)) return "";
  return format_double(value);
}

double parse_field(const std::string& text, int line) {
  if (text.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error("trace parse error at line " + std::to_string(line) +
                             ": bad number '" + text + "'");
  }
  if (pos != text.size()) {
    throw std::runtime_error("trace parse error at line " + std::to_string(line) +
                             ": trailing characters in '" + text + "'");
  }
  return value;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(current);
  return fields;
}

}  // namespace

std::string format_double(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_trace_csv(std::ostream& out, std::span<const RunRecord> records) {
  out << "# laps-trace schema=" << kTraceSchemaVersion << "\n";
  out << kHeader << "\n";
  for (const RunRecord& r : records) {
    out << r.iteration << ',' << phase_name(r.phase) << ',' << r.gradient_calls_per_chain << ','
        << field(r.step_size) << ',' << field(r.decoherence_length) << ',' << field(r.eevpd)
        << ',' << field(r.eevpd_wanted) << ',' << field(r.equipartition_loss) << ','
        << field(r.max_fluctuation) << ',' << field(r.acceptance) << ','
        << field(r.divergent_fraction) << ','
        << (r.bias ? field(r.bias->b2_max) : std::string()) << ','
        << (r.bias ? field(r.bias->b2_avg) : std::string()) << "\n";
  }
}

std::vector<RunRecord> read_trace_csv(std::istream& in) {
  std::vector<RunRecord> records;
  std::string line;
  int line_no = 0;

  if (!std::getline(in, line)) throw std::runtime_error("trace parse error: empty file");
  ++line_no;
  if (line.rfind("# laps-trace schema=", 0) != 0) {
    throw std::runtime_error("trace parse error at line 1: missing schema marker");
  }
  if (!std::getline(in, line)) {
    throw std::runtime_error("trace parse error at line 2: missing header");
  }
  ++line_no;
  if (line != kHeader) {
    throw std::runtime_error("trace parse error at line 2: unexpected header");
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 13) {
      throw std::runtime_error("trace parse error at line " + std::to_string(line_no) +
                               ": expected 13 fields, got " + std::to_string(fields.size()));
    }
    RunRecord r;
    r.iteration = static_cast<std::int64_t>(parse_field(fields[0], line_no));
    if (fields[1] == "unadjusted") {
      r.phase = Phase::unadjusted;
    } else if (fields[1] == "adjusted") {
      r.phase = Phase::adjusted;
    } else {
      throw std::runtime_error("trace parse error at line " + std::to_string(line_no) +
                               ": unknown phase '" + fields[1] + "'");
    }
    r.gradient_calls_per_chain = static_cast<std::int64_t>(parse_field(fields[2], line_no));
    r.step_size = parse_field(fields[3], line_no);
    r.decoherence_length = parse_field(fields[4], line_no);
    r.eevpd = parse_field(fields[5], line_no);
    r.eevpd_wanted = parse_field(fields[6], line_no);
    r.equipartition_loss = parse_field(fields[7], line_no);
    r.max_fluctuation = parse_field(fields[8], line_no);
    r.acceptance = parse_field(fields[9], line_no);
    r.divergent_fraction = parse_field(fields[10], line_no);
    const double b2_max = parse_field(fields[11], line_no);
    const double b2_avg = parse_field(fields[12], line_no);
    if (!std::isnan(b2_max) || !std::isnan(b2_avg)) {
      BiasReport report;
      report.b2_max = b2_max;
      report.b2_avg = b2_avg;
      report.gradient_calls_per_chain = r.gradient_calls_per_chain;
      report.iteration = r.iteration;
      report.phase = r.phase;
      r.bias = std::move(report);
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace laps
