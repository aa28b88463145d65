#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hyptimes/classify.hpp"
#include "hyptimes/hyperbolic_times.hpp"
#include "hyptimes/pliss.hpp"

namespace hyptimes {

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

std::uint64_t fnv1a(std::string_view data);

// Reproducibility envelope for a tool invocation: command, system identity,
// arguments, tool version, and a content hash of the payload. Deliberately
// carries no timestamps or host identifiers so identical runs serialize to
// identical bytes.
struct RunManifest {
  std::string command;
  std::string tool_version;
  int schema = 1;
  std::string system_name;
  std::map<std::string, double> system_params;
  std::vector<std::pair<std::string, std::string>> arguments;
};

nlohmann::json to_json(const SectionalExponents& e);
nlohmann::json to_json(const LocatedOrbit& o);
nlohmann::json to_json(const SingularityAnalysis& s);
nlohmann::json to_json(const ClassificationResult& r);
nlohmann::json to_json(const PlissResult& r);
nlohmann::json to_json(const FlowPlissResult& r);
nlohmann::json to_json(const ReverseHyperbolicTimes& r);
nlohmann::json to_json(const FlowReverseHyperbolicTimes& r);
nlohmann::json to_json(const ReturnMapDerivative& r);
nlohmann::json to_json(const GronwallCheck& g);
nlohmann::json to_json(const CuspSectionHit& h);

// Wrap a payload with its manifest; the manifest gains a "content_hash"
// field computed from the serialized payload. Returns the serialized
// document (2-space indent, keys sorted, trailing newline).
std::string finalize_report(const nlohmann::json& payload, RunManifest manifest);

// RFC 4180 table: CRLF row endings, quoting only where required, numeric
// cells in shortest round-trip form.
void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace hyptimes
