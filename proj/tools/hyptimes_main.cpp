// Command-line front end: every pipeline stage is reachable as a subcommand,
// each run emits a JSON report with an embedded manifest that `rerun` can
// replay bit-identically.
#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "hyptimes/classify.hpp"
#include "hyptimes/errors.hpp"
#include "hyptimes/expr.hpp"
#include "hyptimes/flow.hpp"
#include "hyptimes/hyperbolic_times.hpp"
#include "hyptimes/lpf.hpp"
#include "hyptimes/pliss.hpp"
#include "hyptimes/report.hpp"
#include "hyptimes/systems.hpp"
#include "hyptimes/version.hpp"

namespace ht = hyptimes;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitStrict = 4;

ht::Vec parse_vec(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(cell, &used));
      while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ht::InputError("cannot parse '" + cell + "' in vector '" + text + "'");
    }
  }
  if (vals.empty()) throw ht::InputError("empty vector literal '" + text + "'");
  ht::Vec v(static_cast<int>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) v(static_cast<int>(i)) = vals[i];
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ht::InputError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ht::InputError("cannot write '" + path + "'");
  out << content;
}

// At most one of the three ways to name a system.
struct SystemSpec {
  std::string builtin;
  std::string file;
  std::string inline_json;

  ht::SmoothSystem load() const {
    const int given = (!builtin.empty()) + (!file.empty()) + (!inline_json.empty());
    if (given != 1)
      throw ht::InputError("exactly one of --system/--system-file/--system-json is required");
    if (!builtin.empty()) return ht::make_builtin(builtin);
    if (!file.empty()) return ht::from_config(read_file(file));
    return ht::from_config(inline_json);
  }

  void to_args(std::vector<std::pair<std::string, std::string>>& out) const {
    if (!builtin.empty()) out.emplace_back("system", builtin);
    if (!file.empty()) out.emplace_back("system-file", file);
    if (!inline_json.empty()) out.emplace_back("system-json", inline_json);
  }
};

void add_system_options(CLI::App* cmd, SystemSpec& spec) {
  cmd->add_option("--system", spec.builtin, "builtin system name");
  cmd->add_option("--system-file", spec.file, "JSON system description file");
  cmd->add_option("--system-json", spec.inline_json, "inline JSON system description");
}

ht::RunManifest make_manifest(const std::string& command, const ht::SmoothSystem* sys,
                              std::vector<std::pair<std::string, std::string>> args) {
  ht::RunManifest m;
  m.command = command;
  m.tool_version = ht::kVersion;
  if (sys) {
    m.system_name = sys->name;
    m.system_params = sys->params;
  }
  m.arguments = std::move(args);
  return m;
}

// Reports go to --out PREFIX (PREFIX.json, PREFIX.csv); without --out the
// JSON goes to stdout and series are dropped.
void emit(const std::string& out_prefix, const std::string& json_doc,
          const std::vector<std::string>& csv_header,
          const std::vector<std::vector<double>>& csv_rows) {
  if (out_prefix.empty()) {
    std::cout << json_doc;
    return;
  }
  write_file(out_prefix + ".json", json_doc);
  if (!csv_header.empty()) {
    std::ostringstream csv;
    ht::write_csv(csv, csv_header, csv_rows);
    write_file(out_prefix + ".csv", csv.str());
  }
}

std::string fd(double v) { return ht::format_double(v); }

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  SystemSpec sys;
  std::string x0;
  double horizon = 10.0;
  double dt = 1e-3;
  std::size_t steps = 100;
  bool variational = false;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a) {
  ht::SmoothSystem sys = a.sys.load();
  if (a.x0.empty()) throw ht::InputError("--x0 is required");
  const ht::Vec x0 = parse_vec(a.x0);
  const bool is_map = sys.kind == ht::SystemKind::kMap;
  if (!is_map && !(a.dt > 0.0)) throw ht::InputError("--dt must be positive");

  ht::TrajectorySegment seg;
  if (is_map) {
    seg = ht::iterate(sys, x0, a.steps, a.variational);
  } else {
    ht::IntegrateOptions io;
    io.dt = a.dt;
    io.with_fundamental = a.variational;
    seg = ht::integrate(sys, x0, a.horizon, io);
  }

  const int d = sys.dimension;
  std::vector<std::string> header;
  header.push_back("t");
  for (int i = 1; i <= d; ++i) header.push_back("x" + std::to_string(i));
  if (a.variational)
    for (int r = 1; r <= d; ++r)
      for (int c = 1; c <= d; ++c)
        header.push_back("z" + std::to_string(r) + std::to_string(c));
  std::vector<std::vector<double>> rows;
  rows.reserve(seg.size());
  for (std::size_t k = 0; k < seg.size(); ++k) {
    std::vector<double> row;
    row.push_back(seg.times[k]);
    for (int i = 0; i < d; ++i) row.push_back(seg.states[k](i));
    if (a.variational)
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) row.push_back(seg.fundamentals[k](r, c));
    rows.push_back(std::move(row));
  }

  std::vector<std::pair<std::string, std::string>> args;
  a.sys.to_args(args);
  args.emplace_back("x0", a.x0);
  if (is_map) {
    args.emplace_back("steps", std::to_string(a.steps));
  } else {
    args.emplace_back("T", fd(a.horizon));
    args.emplace_back("dt", fd(a.dt));
  }
  if (a.variational) args.emplace_back("variational", "");

  nlohmann::json payload;
  payload["samples"] = seg.size();
  payload["final_state"] = nlohmann::json::array();
  for (int i = 0; i < d; ++i) payload["final_state"].push_back(seg.states.back()(i));
  payload["final_time"] = seg.times.back();
  emit(a.out, ht::finalize_report(payload, make_manifest("simulate", &sys, args)),
       header, rows);
  return kExitOk;
}

// --------------------------------------------------------------- exponents

struct ExponentsArgs {
  SystemSpec sys;
  std::string x0;
  double horizon = 60.0;
  double dt = 1e-3;
  std::size_t steps = 1000;
  std::size_t block = 1;
  bool inverse = false;
  std::string out;
};

int cmd_exponents(const ExponentsArgs& a) {
  ht::SmoothSystem sys = a.sys.load();
  if (a.x0.empty()) throw ht::InputError("--x0 is required");
  const ht::Vec x0 = parse_vec(a.x0);

  std::vector<std::pair<std::string, std::string>> args;
  a.sys.to_args(args);
  args.emplace_back("x0", a.x0);

  nlohmann::json payload;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  if (sys.kind == ht::SystemKind::kMap) {
    if (a.block == 0) throw ht::InputError("--block must be positive");
    args.emplace_back("steps", std::to_string(a.steps));
    args.emplace_back("block", std::to_string(a.block));
    if (a.inverse) args.emplace_back("inverse", "");
    ht::SmoothSystem use = a.inverse ? sys.inverted() : sys;
    ht::TrajectorySegment orbit = ht::iterate(use, x0, a.steps, false);
    ht::ExponentSeries series = ht::block_exponent_series(use, orbit, a.block);
    header = {"n", "block_rate", "partial_average"};
    double sum = 0.0;
    std::vector<double> partial(series.values.size());
    for (std::size_t n = 0; n < series.values.size(); ++n) {
      sum += series.values[n];
      partial[n] = sum / static_cast<double>(n + 1);
      rows.push_back({static_cast<double>(n + 1), series.values[n], partial[n]});
    }
    nlohmann::json s;
    s["kind"] = a.inverse ? "map_inverse_block" : "map_block";
    s["block_steps"] = series.block_steps;
    s["count"] = series.values.size();
    s["max_block_rate"] = series.max_value;
    s["min_block_rate"] = series.min_value;
    if (!partial.empty()) {
      const std::size_t half = partial.size() / 2;
      s["liminf_estimate"] = *std::min_element(partial.begin() + half, partial.end());
      s["limsup_estimate"] = *std::max_element(partial.begin() + half, partial.end());
      s["final_average"] = partial.back();
    }
    s["caveat"] = "finite-horizon estimate over the stated window; the "
                  "asymptotic exponents require the infinite-time limit";
    payload["series"] = s;
  } else {
    if (!(a.dt > 0.0)) throw ht::InputError("--dt must be positive");
    if (!(a.horizon > 2.0)) throw ht::InputError("--T must exceed 2 for a usable window");
    args.emplace_back("T", fd(a.horizon));
    args.emplace_back("dt", fd(a.dt));
    ht::IntegrateOptions io;
    io.dt = a.dt;
    const std::size_t total = static_cast<std::size_t>(std::ceil(a.horizon / a.dt));
    io.record_stride = std::max<std::size_t>(1, total / 8000);
    ht::TrajectorySegment seg = ht::integrate(sys, x0, a.horizon, io);
    ht::LpfCocycle coc = ht::lpf_cocycle(sys, seg);
    ht::SectionalExponents fwd = ht::sectional_exponents(coc, 1.0, a.horizon);
    ht::SectionalExponents inv = ht::inverse_sectional_exponents(coc, 1.0, a.horizon);
    header = {"t", "norm_rate", "conorm_rate"};
    for (std::size_t k = 0; k < fwd.times.size(); ++k)
      rows.push_back({fwd.times[k], fwd.values[k], inv.values[k]});
    payload["series"] = ht::to_json(fwd);
    payload["inverse_series"] = ht::to_json(inv);
  }

  emit(a.out, ht::finalize_report(payload, make_manifest("exponents", &sys, args)),
       header, rows);
  return kExitOk;
}

// --------------------------------------------------------------------- lpf

struct LpfArgs {
  SystemSpec sys;
  std::string x0;
  double horizon = 10.0;
  double dt = 1e-3;
  std::string out;
};

int cmd_lpf(const LpfArgs& a) {
  ht::SmoothSystem sys = a.sys.load();
  if (sys.kind != ht::SystemKind::kVectorField)
    throw ht::InputError("lpf requires a flow system");
  if (a.x0.empty()) throw ht::InputError("--x0 is required");
  if (!(a.dt > 0.0)) throw ht::InputError("--dt must be positive");
  const ht::Vec x0 = parse_vec(a.x0);

  ht::IntegrateOptions io;
  io.dt = a.dt;
  const std::size_t total = static_cast<std::size_t>(std::ceil(a.horizon / a.dt));
  io.record_stride = std::max<std::size_t>(1, total / 8000);
  ht::TrajectorySegment seg = ht::integrate(sys, x0, a.horizon, io);
  ht::LpfCocycle coc = ht::lpf_cocycle(sys, seg);

  std::vector<std::string> header = {"t", "log_norm", "log_conorm", "generator_sup",
                                     "generator_inf"};
  std::vector<std::vector<double>> rows;
  double gen_sup_max = -std::numeric_limits<double>::infinity();
  double gen_inf_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < coc.size(); ++k) {
    const double ds = ht::generator_D_sup(sys, seg.states[k]);
    const double di = ht::generator_D_inf(sys, seg.states[k]);
    gen_sup_max = std::max(gen_sup_max, ds);
    gen_inf_min = std::min(gen_inf_min, di);
    rows.push_back({coc.times[k], coc.log_norms[k], coc.log_conorms[k], ds, di});
  }

  nlohmann::json evidence;
  evidence["samples"] = coc.size();
  evidence["frame_resets"] = coc.frame_resets.size();
  evidence["log_norm_end"] = coc.log_norms.back();
  evidence["log_conorm_end"] = coc.log_conorms.back();
  evidence["generator_sup_max"] = gen_sup_max;
  evidence["generator_inf_min"] = gen_inf_min;
  if (coc.size() >= 3 && sys.dimension >= 2) {
    // Additivity of the generator along the orbit, checked at mid horizon.
    const std::size_t mid = coc.size() / 2;
    ht::Vec v0 = ht::Vec::Zero(sys.dimension);
    // Any direction transverse to the field works; take the frame's first leg.
    v0 = coc.frames.front().col(0);
    evidence["additivity_residual_mid"] =
        ht::additivity_residual(sys, seg, coc, v0, mid);
    evidence["additivity_check_index"] = mid;
  }
  nlohmann::json payload;
  payload["evidence"] = evidence;

  std::vector<std::pair<std::string, std::string>> args;
  a.sys.to_args(args);
  args.emplace_back("x0", a.x0);
  args.emplace_back("T", fd(a.horizon));
  args.emplace_back("dt", fd(a.dt));
  emit(a.out, ht::finalize_report(payload, make_manifest("lpf", &sys, args)),
       header, rows);
  return kExitOk;
}

// ------------------------------------------------------------------- pliss

struct PlissArgs {
  std::string values;
  std::string values_file;
  std::string expr;
  double horizon = 10.0;
  double dt = 1e-3;
  double c1 = 0.0, c2 = 0.0, cap = 0.0;  // discrete mode
  double c = 0.0, eps = 0.0;             // flow mode
  std::optional<double> a_lower;
  bool reverse = false;
  std::string out;
};

int cmd_pliss(const PlissArgs& a) {
  const bool flow_mode = !a.expr.empty();
  const int sources = (!a.values.empty()) + (!a.values_file.empty()) + (!a.expr.empty());
  if (sources != 1)
    throw ht::InputError("exactly one of --values/--values-file/--expr is required");

  std::vector<std::pair<std::string, std::string>> args;
  nlohmann::json payload;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  if (flow_mode) {
    if (!(a.dt > 0.0)) throw ht::InputError("--dt must be positive");
    if (!(a.horizon > 0.0)) throw ht::InputError("--T must be positive");
    if (!(a.eps > 0.0)) throw ht::InputError("--eps must be positive");
    ht::Expression h = ht::Expression::parse(a.expr, {"t"});
    const std::size_t n = static_cast<std::size_t>(std::llround(a.horizon / a.dt)) + 1;
    std::vector<double> samples(n);
    ht::Vec tv(1);
    for (std::size_t k = 0; k < n; ++k) {
      tv(0) = static_cast<double>(k) * a.dt;
      samples[k] = h.eval(tv);
    }
    ht::FlowPlissResult r = ht::flow_pliss_set(samples, a.dt, a.c, a.eps, a.a_lower);
    payload["pliss"] = ht::to_json(r);
    payload["pliss"]["mode"] = "flow";
    header = {"time"};
    for (std::size_t idx : r.indices) rows.push_back({static_cast<double>(idx) * a.dt});
    args.emplace_back("expr", a.expr);
    args.emplace_back("T", fd(a.horizon));
    args.emplace_back("dt", fd(a.dt));
    args.emplace_back("c", fd(a.c));
    args.emplace_back("eps", fd(a.eps));
    if (a.a_lower) args.emplace_back("A", fd(*a.a_lower));
  } else {
    std::vector<double> seq;
    std::string text = !a.values.empty() ? a.values : read_file(a.values_file);
    for (char& ch : text)
      if (ch == '\n' || ch == '\r' || ch == ' ' || ch == '\t') ch = ',';
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (cell.empty()) continue;
      try {
        seq.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ht::InputError("cannot parse sequence entry '" + cell + "'");
      }
    }
    ht::PlissResult r = a.reverse ? ht::reverse_pliss_times(seq, a.c1, a.c2, a.cap)
                                  : ht::pliss_times(seq, a.c1, a.c2, a.cap);
    payload["pliss"] = ht::to_json(r);
    payload["pliss"]["mode"] = a.reverse ? "discrete_reverse" : "discrete";
    payload["pliss"]["count"] = r.indices.size();
    header = {"index"};
    for (std::size_t idx : r.indices) rows.push_back({static_cast<double>(idx)});
    if (!a.values.empty()) args.emplace_back("values", a.values);
    if (!a.values_file.empty()) args.emplace_back("values-file", a.values_file);
    args.emplace_back("c1", fd(a.c1));
    args.emplace_back("c2", fd(a.c2));
    args.emplace_back("H", fd(a.cap));
    if (a.reverse) args.emplace_back("reverse", "");
  }
  emit(a.out, ht::finalize_report(payload, make_manifest("pliss", nullptr, args)),
       header, rows);
  return kExitOk;
}

// ---------------------------------------------------------------- classify

struct ClassifyArgs {
  SystemSpec sys;
  std::string x0;
  std::string grid;
  std::string box;
  double horizon = 60.0;
  double dt = 1e-3;
  std::size_t steps = 400;
  std::optional<double> zeta;
  bool strict = false;
  std::string out;
};

std::size_t worker_count() {
  if (const char* env = std::getenv("HYPTIMES_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end && *end == '\0' && n >= 1 && n <= 256) return static_cast<std::size_t>(n);
    throw ht::InputError("HYPTIMES_THREADS must be an integer in [1,256]");
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

int cmd_classify(const ClassifyArgs& a) {
  ht::SmoothSystem sys = a.sys.load();
  ht::ClassifyOptions opts;
  opts.horizon = a.horizon;
  opts.dt = a.dt;
  opts.map_steps = a.steps;
  opts.zeta = a.zeta;

  std::vector<std::pair<std::string, std::string>> args;
  a.sys.to_args(args);

  const bool grid_mode = !a.grid.empty();
  if (grid_mode == !a.x0.empty())
    throw ht::InputError("exactly one of --x0/--grid is required");

  nlohmann::json payload;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  bool any_inconclusive = false;

  if (!grid_mode) {
    args.emplace_back("x0", a.x0);
    const ht::Vec x0 = parse_vec(a.x0);
    ht::ClassificationResult r = ht::classify_trajectory(sys, x0, opts);
    payload["verdict"] = ht::to_json(r);
    any_inconclusive = r.label == ht::TrajectoryClass::kInconclusive;
  } else {
    // --grid RxC over the sample box (or --box "lo1,lo2;hi1,hi2"),
    // cell-center seeds, row-major cell order.
    std::size_t nx = 0, ny = 0;
    if (std::sscanf(a.grid.c_str(), "%zux%zu", &nx, &ny) != 2 || nx == 0 || ny == 0)
      throw ht::InputError("--grid expects ROWSxCOLS, e.g. 20x20");
    if (sys.dimension != 2)
      throw ht::InputError("--grid requires a two-dimensional system");
    ht::Vec lo = sys.sample_lo, hi = sys.sample_hi;
    if (!a.box.empty()) {
      const std::size_t semi = a.box.find(';');
      if (semi == std::string::npos)
        throw ht::InputError("--box expects 'lo1,lo2;hi1,hi2'");
      lo = parse_vec(a.box.substr(0, semi));
      hi = parse_vec(a.box.substr(semi + 1));
      if (lo.size() != 2 || hi.size() != 2)
        throw ht::InputError("--box must be two-dimensional");
    }
    if (lo.size() != 2 || hi.size() != 2)
      throw ht::InputError("system does not declare a sample box; pass --box");
    args.emplace_back("grid", a.grid);
    if (!a.box.empty()) args.emplace_back("box", a.box);

    const std::size_t cells = nx * ny;
    std::vector<nlohmann::json> verdicts(cells);
    std::vector<std::vector<double>> cell_rows(cells);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mu;

    auto work = [&]() {
      for (;;) {
        const std::size_t idx = next.fetch_add(1);
        if (idx >= cells || failed.load()) return;
        const std::size_t i = idx / ny, j = idx % ny;
        ht::Vec seed(2);
        seed(0) = lo(0) + (hi(0) - lo(0)) * (static_cast<double>(i) + 0.5) /
                              static_cast<double>(nx);
        seed(1) = lo(1) + (hi(1) - lo(1)) * (static_cast<double>(j) + 0.5) /
                              static_cast<double>(ny);
        try {
          ht::ClassificationResult r = ht::classify_trajectory(sys, seed, opts);
          nlohmann::json v;
          v["cell"] = {i, j};
          v["x0"] = {seed(0), seed(1)};
          v["label"] = ht::to_string(r.label);
          if (r.orbit) v["orbit"] = ht::to_json(*r.orbit);
          if (r.singularity) v["singularity_point"] = {r.singularity->point(0),
                                                       r.singularity->point(1)};
          verdicts[idx] = std::move(v);
          cell_rows[idx] = {static_cast<double>(i), static_cast<double>(j),
                            seed(0), seed(1),
                            static_cast<double>(static_cast<int>(r.label)),
                            r.orbit ? r.orbit->period : 0.0};
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(failure_mu);
          failed.store(true);
          failure = e.what();
          return;
        }
      }
    };

    const std::size_t workers = std::min(worker_count(), cells);
    if (workers <= 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
      for (std::thread& t : pool) t.join();
    }
    if (failed.load()) throw ht::NumericError("grid cell failed: " + failure);

    std::map<std::string, std::size_t> tally;
    for (const nlohmann::json& v : verdicts)
      ++tally[v["label"].get<std::string>()];
    payload["verdicts"] = verdicts;
    payload["tally"] = tally;
    for (const auto& [label, count] : tally)
      any_inconclusive |= (label == "inconclusive" && count > 0);
    header = {"cell_i", "cell_j", "x0_1", "x0_2", "label_code", "period"};
    rows = std::move(cell_rows);
  }

  if (sys.kind == ht::SystemKind::kMap) {
    args.emplace_back("steps", std::to_string(a.steps));
  } else {
    args.emplace_back("horizon", fd(a.horizon));
    args.emplace_back("dt", fd(a.dt));
  }
  if (a.zeta) args.emplace_back("zeta", fd(*a.zeta));
  if (a.strict) args.emplace_back("strict", "");

  emit(a.out, ht::finalize_report(payload, make_manifest("classify", &sys, args)),
       header, rows);
  return (a.strict && any_inconclusive) ? kExitStrict : kExitOk;
}

// ----------------------------------------------------------------- section

struct SectionArgs {
  SystemSpec sys;
  std::string x0;
  std::string saddle;
  double horizon = 20.0;
  double dt = 1e-3;
  bool strict = false;
  std::string out;
};

int cmd_section(const SectionArgs& a) {
  ht::SmoothSystem sys = a.sys.load();
  if (sys.kind != ht::SystemKind::kVectorField)
    throw ht::InputError("section requires a flow system");
  if (a.x0.empty()) throw ht::InputError("--x0 is required");
  const ht::Vec x0 = parse_vec(a.x0);

  ht::Vec saddle;
  if (!a.saddle.empty()) {
    saddle = parse_vec(a.saddle);
  } else {
    // Default: nearest declared equilibrium with a saddle spectrum.
    double best = std::numeric_limits<double>::infinity();
    for (const ht::Vec& q : sys.equilibria) {
      if (!ht::analyze_singularity(sys, q).is_saddle) continue;
      const double d = ht::chart_distance(sys.topology, x0, q);
      if (d < best) {
        best = d;
        saddle = q;
      }
    }
    if (saddle.size() == 0)
      throw ht::InputError("no declared saddle equilibrium; pass --saddle");
  }

  ht::CuspSectionHit hit = ht::cusp_section_hit(sys, saddle, x0, a.horizon, a.dt);
  nlohmann::json payload;
  payload["evidence"] = ht::to_json(hit);
  payload["evidence"]["saddle"] = nlohmann::json::array();
  for (int i = 0; i < saddle.size(); ++i) payload["evidence"]["saddle"].push_back(saddle(i));

  std::vector<std::pair<std::string, std::string>> args;
  a.sys.to_args(args);
  args.emplace_back("x0", a.x0);
  if (!a.saddle.empty()) args.emplace_back("saddle", a.saddle);
  args.emplace_back("T", fd(a.horizon));
  args.emplace_back("dt", fd(a.dt));
  if (a.strict) args.emplace_back("strict", "");
  emit(a.out, ht::finalize_report(payload, make_manifest("section", &sys, args)), {}, {});
  return (a.strict && !hit.hit) ? kExitStrict : kExitOk;
}

// ------------------------------------------------------------------- rerun

int dispatch(std::vector<std::string> forward_args);

int cmd_rerun(const std::string& manifest_path, const std::string& out_override) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw ht::InputError(std::string("cannot parse manifest: ") + e.what());
  }
  if (!doc.contains("manifest"))
    throw ht::InputError("file has no manifest block");
  const nlohmann::json& m = doc["manifest"];
  std::vector<std::string> argv;
  argv.push_back(m.at("command").get<std::string>());
  for (const auto& [key, value] : m.at("arguments").items()) {
    argv.push_back("--" + key);
    const std::string v = value.get<std::string>();
    if (!v.empty()) argv.push_back(v);
  }
  if (!out_override.empty()) {
    argv.push_back("--out");
    argv.push_back(out_override);
  }
  return dispatch(std::move(argv));
}

int dispatch(std::vector<std::string> forward_args) {
  CLI::App app{"orbit analysis for smooth maps and flows: trajectory simulation, "
               "Pliss/hyperbolic time detection, linear Poincare flow reports, "
               "and trajectory classification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ht::kVersion));

  SimulateArgs sim;
  CLI::App* c_sim = app.add_subcommand("simulate", "integrate or iterate an orbit");
  add_system_options(c_sim, sim.sys);
  c_sim->add_option("--x0", sim.x0, "initial state, comma separated");
  c_sim->add_option("--T", sim.horizon, "flow horizon");
  c_sim->add_option("--dt", sim.dt, "integrator step");
  c_sim->add_option("--steps", sim.steps, "map iteration count");
  c_sim->add_flag("--variational", sim.variational, "record the fundamental matrix");
  c_sim->add_option("--out", sim.out, "output prefix (.json/.csv)");

  ExponentsArgs expo;
  CLI::App* c_exp = app.add_subcommand("exponents", "finite-horizon exponent estimates");
  add_system_options(c_exp, expo.sys);
  c_exp->add_option("--x0", expo.x0, "initial state");
  c_exp->add_option("--T", expo.horizon, "flow horizon");
  c_exp->add_option("--dt", expo.dt, "integrator step");
  c_exp->add_option("--steps", expo.steps, "map iteration count");
  c_exp->add_option("--block", expo.block, "block length for map averages");
  c_exp->add_flag("--inverse", expo.inverse, "use the inverse map");
  c_exp->add_option("--out", expo.out, "output prefix");

  LpfArgs lpf;
  CLI::App* c_lpf = app.add_subcommand("lpf", "normal cocycle along a flow orbit");
  add_system_options(c_lpf, lpf.sys);
  c_lpf->add_option("--x0", lpf.x0, "initial state");
  c_lpf->add_option("--T", lpf.horizon, "flow horizon");
  c_lpf->add_option("--dt", lpf.dt, "integrator step");
  c_lpf->add_option("--out", lpf.out, "output prefix");

  PlissArgs pliss;
  CLI::App* c_pliss = app.add_subcommand("pliss", "Pliss time selection");
  c_pliss->add_option("--values", pliss.values, "comma separated sequence (discrete mode)");
  c_pliss->add_option("--values-file", pliss.values_file, "file with the sequence");
  c_pliss->add_option("--expr", pliss.expr, "H(t) expression (flow mode)");
  c_pliss->add_option("--T", pliss.horizon, "flow horizon");
  c_pliss->add_option("--dt", pliss.dt, "flow grid step");
  c_pliss->add_option("--c1", pliss.c1, "window mean threshold");
  c_pliss->add_option("--c2", pliss.c2, "sequence mean hypothesis");
  c_pliss->add_option("--H", pliss.cap, "upper bound on the entries");
  c_pliss->add_option("--c", pliss.c, "flow mode rate");
  c_pliss->add_option("--eps", pliss.eps, "flow mode margin");
  c_pliss->add_option("--A", pliss.a_lower, "lower bound on H'");
  c_pliss->add_flag("--reverse", pliss.reverse, "trailing-window (start-position) variant");
  c_pliss->add_option("--out", pliss.out, "output prefix");

  ClassifyArgs cls;
  CLI::App* c_cls = app.add_subcommand("classify", "verified trajectory classification");
  add_system_options(c_cls, cls.sys);
  c_cls->add_option("--x0", cls.x0, "initial state");
  c_cls->add_option("--grid", cls.grid, "batch over ROWSxCOLS cell centers");
  c_cls->add_option("--box", cls.box, "grid box 'lo1,lo2;hi1,hi2'");
  c_cls->add_option("--horizon", cls.horizon, "flow horizon");
  c_cls->add_option("--dt", cls.dt, "integrator step");
  c_cls->add_option("--steps", cls.steps, "map iteration count");
  c_cls->add_option("--zeta", cls.zeta, "contraction rate override");
  c_cls->add_flag("--strict", cls.strict, "exit 4 on inconclusive verdicts");
  c_cls->add_option("--out", cls.out, "output prefix");

  SectionArgs sec;
  CLI::App* c_sec = app.add_subcommand("section", "cusp section first hit near a saddle");
  add_system_options(c_sec, sec.sys);
  c_sec->add_option("--x0", sec.x0, "initial state");
  c_sec->add_option("--saddle", sec.saddle, "saddle location, comma separated");
  c_sec->add_option("--T", sec.horizon, "search horizon");
  c_sec->add_option("--dt", sec.dt, "integrator step");
  c_sec->add_flag("--strict", sec.strict, "exit 4 when the section is not hit");
  c_sec->add_option("--out", sec.out, "output prefix");

  std::string rerun_manifest, rerun_out;
  CLI::App* c_rerun = app.add_subcommand("rerun", "replay a report's manifest");
  c_rerun->add_option("manifest", rerun_manifest, "report JSON with a manifest block")
      ->required();
  c_rerun->add_option("--out", rerun_out, "output prefix override");

  try {
    std::reverse(forward_args.begin(), forward_args.end());
    app.parse(std::move(forward_args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (c_sim->parsed()) return cmd_simulate(sim);
    if (c_exp->parsed()) return cmd_exponents(expo);
    if (c_lpf->parsed()) return cmd_lpf(lpf);
    if (c_pliss->parsed()) return cmd_pliss(pliss);
    if (c_cls->parsed()) return cmd_classify(cls);
    if (c_sec->parsed()) return cmd_section(sec);
    if (c_rerun->parsed()) return cmd_rerun(rerun_manifest, rerun_out);
  } catch (const ht::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ht::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  }
  std::cerr << "error: no subcommand selected\n";
  return kExitInput;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args;
  args.reserve(static_cast<std::size_t>(argc > 1 ? argc - 1 : 0));
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(std::move(args));
}
