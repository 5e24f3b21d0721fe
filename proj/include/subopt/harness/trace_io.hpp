#pragma once

#include <iosfwd>
#include <string>

#include "subopt/harness/config.hpp"
#include "subopt/trace.hpp"

namespace subopt::harness {

/// A trace file: one JSON object per line, records first, then a footer
/// line tagged {"type": "footer", ...} which also embeds the run config.
struct TraceFile {
  RunTrace trace;
  Json config = Json::object();
};

Json record_to_json(const TraceRecord& rec);
TraceRecord record_from_json(const Json& j);
Json footer_to_json(const RunFooter& footer, const Json& config);
RunFooter footer_from_json(const Json& j);

void write_trace(std::ostream& out, const RunTrace& trace, const Json& config);
void write_trace_file(const std::string& path, const RunTrace& trace, const Json& config);

/// Reads a trace. A file without a footer line is accepted (the footer is
/// then default-constructed with records counted); malformed lines throw.
TraceFile read_trace(std::istream& in);
TraceFile read_trace_file(const std::string& path);

}  // namespace subopt::harness
