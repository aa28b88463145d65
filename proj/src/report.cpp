#include "hyptimes/report.hpp"

#include <charconv>
#include <cmath>

#include "hyptimes/errors.hpp"
#include "hyptimes/version.hpp"

namespace hyptimes {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

nlohmann::json vec_json(const Vec& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  static const char digits[] = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[h & 0xf];
    h >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf);
}

}  // namespace

nlohmann::json to_json(const SectionalExponents& e) {
  return {{"times", e.times},
          {"values", e.values},
          {"liminf_estimate", e.liminf_estimate},
          {"limsup_estimate", e.limsup_estimate},
          {"window_begin", e.window_begin},
          {"window_end", e.window_end},
          {"caveat", e.caveat}};
}

nlohmann::json to_json(const LocatedOrbit& o) {
  return {{"point", vec_json(o.point)},
          {"period", o.period},
          {"multipliers_abs", o.multipliers_abs},
          {"contracting", o.contracting}};
}

nlohmann::json to_json(const SingularityAnalysis& s) {
  nlohmann::json eigs = nlohmann::json::array();
  for (const auto& lambda : s.eigenvalues)
    eigs.push_back({{"re", lambda.real()}, {"im", lambda.imag()}});
  return {{"point", vec_json(s.point)},
          {"eigenvalues", eigs},
          {"dim_stable", s.dim_stable},
          {"dim_unstable", s.dim_unstable},
          {"dim_center", s.dim_center},
          {"hyperbolic", s.hyperbolic},
          {"is_sink", s.is_sink},
          {"is_source", s.is_source},
          {"is_saddle", s.is_saddle},
          {"codimension_one_unstable", s.codimension_one_unstable}};
}

nlohmann::json to_json(const ClassificationResult& r) {
  nlohmann::json doc = {{"label", to_string(r.label)},
                        {"zeta", r.zeta},
                        {"horizon", r.horizon},
                        {"hyperbolic_time_fraction", r.hyperbolic_time_fraction},
                        {"contracting_radius", r.contracting_radius},
                        {"min_singularity_distance", r.min_singularity_distance},
                        {"caveats", r.caveats},
                        {"trace", r.trace}};
  if (r.exponents) doc["exponents"] = to_json(*r.exponents);
  if (r.orbit) doc["orbit"] = to_json(*r.orbit);
  if (r.singularity) doc["singularity"] = to_json(*r.singularity);
  return doc;
}

nlohmann::json to_json(const PlissResult& r) {
  return {{"indices", r.indices},
          {"theta", r.theta},
          {"guarantee_active", r.guarantee_active}};
}

nlohmann::json to_json(const FlowPlissResult& r) {
  return {{"indices", r.indices},
          {"grid_step", r.grid_step},
          {"measure", r.measure},
          {"theta", r.theta},
          {"a_used", r.a_used},
          {"guarantee_active", r.guarantee_active}};
}

nlohmann::json to_json(const ReverseHyperbolicTimes& r) {
  return {{"indices", r.indices},
          {"zeta", r.zeta},
          {"theta", r.theta},
          {"fraction", r.fraction},
          {"h_bound", r.h_bound},
          {"guarantee_active", r.guarantee_active},
          {"certified", r.certified},
          {"certified_checked", r.certified_checked}};
}

nlohmann::json to_json(const FlowReverseHyperbolicTimes& r) {
  return {{"indices", r.indices},
          {"times", r.times},
          {"zeta", r.zeta},
          {"rate", r.rate},
          {"measure", r.measure},
          {"theta", r.theta},
          {"guarantee_active", r.guarantee_active},
          {"certified", r.certified},
          {"certified_pairs", r.certified_pairs}};
}

nlohmann::json to_json(const ReturnMapDerivative& r) {
  nlohmann::json mat = nlohmann::json::array();
  for (Eigen::Index i = 0; i < r.derivative.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < r.derivative.cols(); ++j)
      row.push_back(r.derivative(i, j));
    mat.push_back(row);
  }
  return {{"derivative", mat},
          {"relative_gap", r.relative_gap},
          {"return_time", r.return_time},
          {"return_point", vec_json(r.return_point)},
          {"multipliers_abs", r.multipliers_abs},
          {"contracting", r.contracting}};
}

nlohmann::json to_json(const GronwallCheck& g) {
  return {{"holds", g.holds},
          {"max_lhs", g.max_lhs},
          {"max_rhs", g.max_rhs},
          {"worst_margin", g.worst_margin},
          {"delta_bar", g.delta_bar},
          {"l_bound", g.l_bound},
          {"comparisons", g.comparisons}};
}

nlohmann::json to_json(const CuspSectionHit& h) {
  nlohmann::json doc = {{"hit", h.hit}, {"f_initial", h.f_initial}};
  if (h.hit) {
    doc["time"] = h.time;
    doc["state"] = vec_json(h.state);
  }
  return doc;
}

std::string finalize_report(const nlohmann::json& payload, RunManifest manifest) {
  nlohmann::json m = {{"command", manifest.command},
                      {"tool_version", manifest.tool_version.empty()
                                           ? std::string(kVersion)
                                           : manifest.tool_version},
                      {"schema", manifest.schema},
                      {"system", manifest.system_name},
                      {"system_params", manifest.system_params}};
  nlohmann::json args = nlohmann::json::object();
  for (const auto& [key, value] : manifest.arguments) args[key] = value;
  m["arguments"] = args;
  m["content_hash"] = hash_hex(fnv1a(payload.dump()));
  nlohmann::json doc;
  doc["version"] = manifest.schema;
  doc["manifest"] = m;
  if (payload.is_object()) {
    for (const auto& [key, value] : payload.items()) doc[key] = value;
  } else {
    doc["result"] = payload;
  }
  return doc.dump(2) + "\n";
}

void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += "\"\"";
      else out += c;
    }
    out += '"';
    return out;
  };
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) os << ',';
    os << quote(header[i]);
  }
  os << "\r\n";
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw InputError("csv row width differs from the header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << format_double(row[i]);
    }
    os << "\r\n";
  }
}

}  // namespace hyptimes
