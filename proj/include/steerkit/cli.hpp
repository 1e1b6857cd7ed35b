#pragma once

// Command-line front end. `run` is the whole program minus process setup,
// so tests can drive it with string vectors and capture both streams.
//
// Exit codes: 0 success, 2 invalid arguments, 3 unreadable or invalid state
// file, 4 computation error. Failures also write a JSON envelope
//   {"error": {"code": ..., "message": ..., "magnitude": ...}}
// to standard output.

#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "steerkit/steerkit.hpp"

namespace steerkit::cli {

using nlohmann::json;

enum class DirectionChoice { AtoB, BtoA, both };
enum class MethodChoice { automatic, analytic, numeric };
enum class OutputFormat { json, csv };

/// One axis of a sweep: key = start:stop:step, inclusive of stop.
struct GridAxis {
  std::string key;
  double start = 0, stop = 0, step = 0;

  std::vector<double> values() const {
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = start + static_cast<double>(i) * step;
    return v;
  }
};

inline GridAxis parse_grid_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos)
    throw Error(ErrorCode::InvalidArgument, "grid must look like key=start:stop:step, got '" + text + "'");
  GridAxis g;
  g.key = std::string(io::detail::trim(std::string_view(text).substr(0, eq)));
  const std::string range = text.substr(eq + 1);
  const auto c1 = range.find(':');
  const auto c2 = c1 == std::string::npos ? std::string::npos : range.find(':', c1 + 1);
  if (g.key.empty() || c2 == std::string::npos)
    throw Error(ErrorCode::InvalidArgument, "grid must look like key=start:stop:step, got '" + text + "'");
  g.start = io::parse_number(range.substr(0, c1));
  g.stop = io::parse_number(range.substr(c1 + 1, c2 - c1 - 1));
  g.step = io::parse_number(range.substr(c2 + 1));
  if (!(g.step > 0) || !(g.stop >= g.start) || !std::isfinite(g.stop))
    throw Error(ErrorCode::InvalidArgument, "grid '" + text + "' needs step > 0 and stop >= start");
  if ((g.stop - g.start) / g.step > 1e7)
    throw Error(ErrorCode::InvalidArgument, "grid '" + text + "' has too many points");
  return g;
}

/// Everything a single invocation asks for.
struct RunRequest {
  std::string command;
  std::string state_file;
  std::string family_spec;
  std::string theta;
  DirectionChoice direction = DirectionChoice::AtoB;
  MethodChoice method = MethodChoice::automatic;
  OutputFormat output = OutputFormat::json;
  std::vector<std::string> grid;
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  std::string mix = "1,3,0";
  Tolerances tol;
  OptimizerConfig opt;
};

namespace detail {

/// Exit status for a given error, split by where it arose.
enum class Stage { arguments, state_file, compute };

inline int exit_code(Stage s) {
  switch (s) {
    case Stage::arguments: return 2;
    case Stage::state_file: return 3;
    case Stage::compute: return 4;
  }
  return 4;
}

inline std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// RFC 4180 quoting is only needed for fields with separators or quotes.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << csv_field(fields[i]);
    out_ << "\r\n";
  }

 private:
  std::ostream& out_;
};

inline std::vector<Direction> directions(DirectionChoice d) {
  switch (d) {
    case DirectionChoice::AtoB: return {Direction::AtoB};
    case DirectionChoice::BtoA: return {Direction::BtoA};
    case DirectionChoice::both: return {Direction::AtoB, Direction::BtoA};
  }
  return {};
}

inline std::string_view to_string(DirectionChoice d) {
  return d == DirectionChoice::both ? "both" : steerkit::to_string(directions(d).front());
}

inline std::string_view to_string(MethodChoice m) {
  switch (m) {
    case MethodChoice::automatic: return "auto";
    case MethodChoice::analytic: return "analytic";
    case MethodChoice::numeric: return "numeric";
  }
  return "auto";
}

inline std::string_view column_suffix(Direction d) { return d == Direction::AtoB ? "a2b" : "b2a"; }

inline json tolerance_record(const Tolerances& t) {
  return {{"hermitian", t.hermitian}, {"trace", t.trace},       {"psd", t.psd},
          {"inv", t.inv},             {"radicand", t.radicand}, {"positivity", t.positivity},
          {"ratio_f", t.ratio_f},     {"ratio_x", t.ratio_x},   {"jm", t.jm},
          {"zero_t3", t.zero_t3},     {"zero_gap", t.zero_gap}, {"tie", t.tie},
          {"structure", t.structure}};
}

inline json optimizer_record(const OptimizerConfig& c) {
  return {{"grid_per_angle", c.grid_per_angle}, {"top_k", c.top_k},
          {"refine_max_iters", c.refine_max_iters}, {"refine_tol", c.refine_tol},
          {"seed", c.seed}, {"minmax_grid", c.minmax_grid}, {"minmax_box", c.minmax_box},
          {"minmax_max_iters", c.minmax_max_iters}};
}

inline json angles_json(const std::array<double, 4>& a) {
  return {{"alpha0", a[0]}, {"beta0", a[1]}, {"alpha1", a[2]}, {"beta1", a[3]}};
}

/// Outcome of one steerability evaluation plus how it was obtained.
struct SteerOutcome {
  SteeringResult result;
  std::optional<ZeroStateClass> zero_state;
};

inline SteerOutcome steer_one(const io::LoadedState& st, Direction d, MethodChoice m,
                              const OptimizerConfig& cfg, const Tolerances& tol) {
  SteerOutcome out;
  if (m == MethodChoice::numeric || !st.x_state) {
    out.result = maximize_steerability(compute_map(st.rho, d, tol), cfg, tol);
    return out;
  }
  if (m == MethodChoice::analytic) {
    out.result = steerability_x_analytic(*st.x_state, d, tol);
    return out;
  }
  ZeroStateClass cls = classify_zero_state(*st.x_state, d, cfg, tol);
  out.result = cls.verdict == ZeroVerdict::inconsistent ? *cls.numeric : cls.analytic;
  out.zero_state = std::move(cls);
  return out;
}

inline json steer_json(const SteerOutcome& o) {
  const SteeringResult& r = o.result;
  json j = {{"direction", steerkit::to_string(r.direction)},
            {"s", r.s},
            {"steerable", r.s > 0},
            {"method", to_string(r.method)},
            {"angles", angles_json(r.angles)},
            {"objective_at_opt", r.objective_at_opt}};
  if (r.deltas) j["deltas"] = {(*r.deltas)[0], (*r.deltas)[1], (*r.deltas)[2]};
  if (o.zero_state) {
    const ZeroStateClass& z = *o.zero_state;
    j["zero_state"] = {{"verdict", to_string(z.verdict)}, {"t3", z.t3}, {"gap", z.gap}};
    if (z.numeric) j["zero_state"]["numeric_s"] = z.numeric->s;
    j["zero_state"]["analytic_s"] = z.analytic.s;
  }
  return j;
}

/// Merges per-direction documents: one direction goes to the top level,
/// two directions go under "results".
inline void attach(json& doc, const std::vector<json>& per_direction) {
  if (per_direction.size() == 1) {
    for (const auto& [k, v] : per_direction.front().items()) doc[k] = v;
  } else {
    doc["results"] = json::object();
    for (const json& r : per_direction) doc["results"][r["direction"].get<std::string>()] = r;
  }
}

struct Failure {
  Stage stage;
  ErrorCode code;
  std::string message;
  double magnitude;
};

inline int report(const Failure& f, std::ostream& out, std::ostream& err) {
  json env = {{"error",
               {{"code", to_string(f.code)}, {"message", f.message}, {"exit_status", exit_code(f.stage)}}}};
  if (std::isfinite(f.magnitude) && f.magnitude != 0) env["error"]["magnitude"] = f.magnitude;
  out << env.dump(2) << "\n";
  err << "steerkit: " << f.message << "\n";
  return exit_code(f.stage);
}

// ---------------------------------------------------------------------------

class Runner {
 public:
  Runner(const RunRequest& req, std::ostream& out) : req_(req), out_(out) {}

  void execute() {
    const std::string& c = req_.command;
    if (c == "region") return region();
    if (c == "sweep" || c == "asym") return sweep();
    const io::LoadedState st = load_single();
    if (c == "steer") steer(st);
    else if (c == "chsh") chsh(st);
    else if (c == "radius") radius(st);
    else if (c == "ellipsoid") ellipsoid(st);
    else throw Error(ErrorCode::InvalidArgument, "unknown command '" + c + "'");
  }

 private:
  [[noreturn]] static void bad_args(const std::string& msg) {
    throw Error(ErrorCode::InvalidArgument, msg);
  }

  // Errors raised here belong to the argument stage or the state-file stage.
  template <class F>
  auto at(Stage s, F&& f) {
    const Stage saved = stage_;
    stage_ = s;
    auto v = f();
    stage_ = saved;
    return v;
  }

 public:
  Stage stage() const { return stage_; }

 private:
  io::FamilySpec family_spec() {
    io::FamilySpec spec = io::parse_family_spec(req_.family_spec);
    if (!req_.theta.empty()) spec.params["theta"] = io::parse_number(req_.theta);
    return spec;
  }

  io::LoadedState load_single() {
    const bool has_file = !req_.state_file.empty(), has_family = !req_.family_spec.empty();
    if (has_file == has_family) bad_args("give exactly one of --state or --family");
    if (!req_.grid.empty()) bad_args("--grid is only valid for sweep and asym");
    io::LoadedState st =
        has_file ? at(Stage::state_file, [&] { return io::load_state_file(req_.state_file, req_.tol); })
                 : at(Stage::arguments, [&] { return io::load_state(family_spec(), req_.tol); });
    if (req_.method == MethodChoice::analytic && !st.x_state)
      bad_args("--method analytic needs an X-state (up to local unitaries); this state is not one");
    return st;
  }

  json envelope() const {
    json input = {{"command", req_.command},
                  {"direction", to_string(req_.direction)},
                  {"method", to_string(req_.method)},
                  {"output", req_.output == OutputFormat::json ? "json" : "csv"}};
    if (!req_.state_file.empty()) input["state_file"] = req_.state_file;
    if (!req_.family_spec.empty()) input["family"] = req_.family_spec;
    if (!req_.theta.empty()) input["theta"] = req_.theta;
    if (!req_.grid.empty()) input["grid"] = req_.grid;
    if (req_.command == "region") {
      input["samples"] = req_.samples;
      input["seed"] = req_.seed;
      input["mix"] = req_.mix;
    }
    return {{"version", kVersion},
            {"input", input},
            {"tolerances", tolerance_record(req_.tol)},
            {"optimizer", optimizer_record(req_.opt)}};
  }

  static json state_json(const io::LoadedState& st) {
    json j = {{"pauli", io::to_json(to_pauli(st.rho))}};
    if (st.family) j["family"] = io::format_family_spec(*st.family);
    if (st.x_state) j["x_state"] = io::to_json(*st.x_state);
    return j;
  }

  void emit(const json& doc) { out_ << doc.dump(2) << "\n"; }

  XStateParams require_x(const io::LoadedState& st) {
    if (!st.x_state) bad_args("'" + req_.command + "' needs an X-state (up to local unitaries)");
    return *st.x_state;
  }

  void steer(const io::LoadedState& st) {
    std::vector<json> per;
    std::vector<SteerOutcome> outcomes;
    for (Direction d : directions(req_.direction)) {
      outcomes.push_back(steer_one(st, d, req_.method, req_.opt, req_.tol));
      const SteerOutcome& o = outcomes.back();
      json j = steer_json(o);
      // An explicitly requested closed form is exact only for t3 = 0.
      if (!o.zero_state && o.result.method == Method::analytic_xstate)
        j["exact"] = std::abs(x_derived(*st.x_state, d, req_.tol).t3) <= req_.tol.zero_t3;
      per.push_back(std::move(j));
    }
    if (req_.output == OutputFormat::csv) {
      CsvWriter w(out_);
      w.row({"direction", "s", "method", "alpha0", "beta0", "alpha1", "beta1"});
      for (const SteerOutcome& o : outcomes) {
        const auto& a = o.result.angles;
        w.row({std::string(steerkit::to_string(o.result.direction)), fmt12(o.result.s),
               std::string(to_string(o.result.method)), fmt12(a[0]), fmt12(a[1]), fmt12(a[2]),
               fmt12(a[3])});
      }
      return;
    }
    json doc = envelope();
    doc["state"] = state_json(st);
    attach(doc, per);
    emit(doc);
  }

  void chsh(const io::LoadedState& st) {
    const PauliRepresentation p = to_pauli(st.rho);
    const double n = chsh_max(p);
    const Vector3 tau = symmetric_eigenvalues(p.T.transpose() * p.T);
    if (req_.output == OutputFormat::csv) {
      CsvWriter w(out_);
      w.row({"n", "tau1", "tau2", "tau3", "violates"});
      w.row({fmt12(n), fmt12(tau(0)), fmt12(tau(1)), fmt12(tau(2)), n > 2 ? "true" : "false"});
      return;
    }
    json doc = envelope();
    doc["state"] = state_json(st);
    doc["n"] = n;
    doc["tau"] = {tau(0), tau(1), tau(2)};
    doc["violates"] = n > 2;
    doc["method"] = "closed_form";
    emit(doc);
  }

  void radius(const io::LoadedState& st) {
    const XStateParams x = require_x(st);
    std::vector<json> per;
    std::vector<std::pair<Direction, RadiusResult>> rows;
    for (Direction d : directions(req_.direction)) {
      RadiusResult r = steering_radius(x, d, req_.opt, req_.tol);
      json j = {{"direction", steerkit::to_string(d)},
                {"radius", r.radius},
                {"branch", to_string(r.branch)},
                {"per_branch", {{"xy", r.per_branch[0]}, {"xz", r.per_branch[1]}, {"yz", r.per_branch[2]}}},
                {"certified_zero_state", r.certified_zero_state},
                {"skipped_probes", r.skipped_probes},
                {"method", "minmax_numeric"}};
      if (r.point) j["point"] = {{"z1", r.point->z1}, {"z3", r.point->z3}, {"Z", r.point->Z}};
      per.push_back(std::move(j));
      rows.emplace_back(d, r);
    }
    if (req_.output == OutputFormat::csv) {
      CsvWriter w(out_);
      w.row({"direction", "radius", "branch", "r_xy", "r_xz", "r_yz"});
      for (const auto& [d, r] : rows)
        w.row({std::string(steerkit::to_string(d)), fmt12(r.radius), std::string(to_string(r.branch)),
               fmt12(r.per_branch[0]), fmt12(r.per_branch[1]), fmt12(r.per_branch[2])});
      return;
    }
    json doc = envelope();
    doc["state"] = state_json(st);
    attach(doc, per);
    emit(doc);
  }

  void ellipsoid(const io::LoadedState& st) {
    const XStateParams x = require_x(st);
    std::vector<json> per;
    std::vector<std::pair<Direction, EllipsoidResult>> rows;
    for (Direction d : directions(req_.direction)) {
      const EllipsoidResult e = steering_ellipsoid(x, d, req_.tol);
      per.push_back({{"direction", steerkit::to_string(d)},
                     {"center_z", e.center_z},
                     {"volume", e.volume},
                     {"method", "closed_form"}});
      rows.emplace_back(d, e);
    }
    if (req_.output == OutputFormat::csv) {
      CsvWriter w(out_);
      w.row({"direction", "center_z", "volume"});
      for (const auto& [d, e] : rows)
        w.row({std::string(steerkit::to_string(d)), fmt12(e.center_z), fmt12(e.volume)});
      return;
    }
    json doc = envelope();
    doc["state"] = state_json(st);
    attach(doc, per);
    emit(doc);
  }

  // Cartesian product of the grid axes, first axis outermost.
  static std::vector<std::vector<double>> product(const std::vector<GridAxis>& axes) {
    std::vector<std::vector<double>> points{{}};
    for (const GridAxis& a : axes) {
      std::vector<std::vector<double>> next;
      const auto vals = a.values();
      next.reserve(points.size() * vals.size());
      for (const auto& p : points)
        for (double v : vals) {
          next.push_back(p);
          next.back().push_back(v);
        }
      points = std::move(next);
    }
    return points;
  }

  void sweep() {
    const bool asym = req_.command == "asym";
    if (req_.family_spec.empty()) bad_args("'" + req_.command + "' needs --family");
    if (!req_.state_file.empty()) bad_args("'" + req_.command + "' sweeps family parameters; --state is not accepted");
    if (req_.grid.empty()) bad_args("'" + req_.command + "' needs at least one --grid");
    const io::FamilySpec base = family_spec();
    std::vector<GridAxis> axes;
    for (const std::string& g : req_.grid) {
      axes.push_back(parse_grid_axis(g));
      for (std::size_t i = 0; i + 1 < axes.size(); ++i)
        if (axes[i].key == axes.back().key) bad_args("grid key '" + axes.back().key + "' given twice");
    }
    const std::vector<Direction> dirs =
        asym ? std::vector<Direction>{Direction::AtoB, Direction::BtoA} : directions(req_.direction);

    // Validate every point's parameters before any computation.
    const auto points = product(axes);
    std::vector<io::FamilySpec> specs;
    specs.reserve(points.size());
    for (const auto& pt : points) {
      io::FamilySpec spec = base;
      for (std::size_t i = 0; i < axes.size(); ++i) spec.params[axes[i].key] = pt[i];
      (void)family_x_params(spec.family, spec.params);
      specs.push_back(std::move(spec));
    }

    std::vector<std::string> header;
    for (const GridAxis& a : axes) header.push_back(a.key);
    for (Direction d : dirs)
      header.push_back(dirs.size() == 1 && !asym ? "s" : "s_" + std::string(column_suffix(d)));
    if (!asym) header.push_back("n");

    const bool csv = req_.output == OutputFormat::csv;
    std::optional<CsvWriter> w;
    if (csv) {
      w.emplace(out_);
      w->row(header);
    }
    json rows = json::array();
    for (std::size_t k = 0; k < points.size(); ++k) {
      const io::LoadedState st = io::load_state(specs[k], req_.tol);
      std::vector<std::string> fields;
      json row = json::object();
      for (std::size_t i = 0; i < axes.size(); ++i) {
        fields.push_back(fmt12(points[k][i]));
        row[axes[i].key] = points[k][i];
      }
      for (Direction d : dirs) {
        const SteerOutcome o = steer_one(st, d, req_.method, req_.opt, req_.tol);
        const std::string suffix(column_suffix(d));
        fields.push_back(fmt12(o.result.s));
        row["s_" + suffix] = o.result.s;
        row["method_" + suffix] = to_string(o.result.method);
      }
      if (!asym) {
        const double n = chsh_max(to_pauli(st.rho));
        fields.push_back(fmt12(n));
        row["n"] = n;
      }
      if (csv) w->row(fields);
      else rows.push_back(std::move(row));
    }
    if (csv) return;
    json doc = envelope();
    doc["columns"] = header;
    doc["rows"] = std::move(rows);
    emit(doc);
  }

  static RegionMix parse_mix(const std::string& text) {
    std::vector<double> w;
    std::size_t start = 0;
    for (;;) {
      const auto comma = text.find(',', start);
      w.push_back(io::parse_number(text.substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (w.size() != 3) bad_args("--mix takes three weights: bell_diagonal,t3_zero,generic");
    return {w[0], w[1], w[2]};
  }

  void region() {
    if (!req_.state_file.empty() || !req_.family_spec.empty())
      bad_args("'region' samples its own states; --state and --family are not accepted");
    if (req_.direction == DirectionChoice::both) bad_args("'region' takes a single direction");
    if (req_.samples == 0) bad_args("--samples must be positive");
    RegionSamplerConfig cfg;
    cfg.count = req_.samples;
    cfg.seed = req_.seed;
    cfg.direction = directions(req_.direction).front();
    cfg.mix = at(Stage::arguments, [&] { return parse_mix(req_.mix); });
    const std::vector<RegionSample> samples = region_scan(cfg, req_.opt, req_.tol);

    if (req_.output == OutputFormat::csv) {
      CsvWriter w(out_);
      w.row({"n", "s", "a3", "b3", "c1", "c2", "c3", "verdict"});
      for (const RegionSample& s : samples)
        w.row({fmt12(s.n_value), fmt12(s.s_value), fmt12(s.params.a3), fmt12(s.params.b3),
               fmt12(s.params.c1), fmt12(s.params.c2), fmt12(s.params.c3),
               std::string(to_string(s.verdict))});
      return;
    }
    std::size_t applicable = 0, violations = 0;
    double s_min = std::numeric_limits<double>::infinity(), s_max = -s_min, min_slack = s_min;
    json list = json::array();
    for (const RegionSample& s : samples) {
      const CorollaryCheck c = corollary_bounds(s);
      if (c.applies) {
        ++applicable;
        min_slack = std::min(min_slack, c.slack);
      }
      if (!c.upper_ok) ++violations;
      s_min = std::min(s_min, s.s_value);
      s_max = std::max(s_max, s.s_value);
      list.push_back({{"n", s.n_value},
                      {"s", s.s_value},
                      {"x_state", io::to_json(s.params)},
                      {"verdict", to_string(s.verdict)}});
    }
    json doc = envelope();
    doc["summary"] = {{"count", samples.size()},
                      {"with_n_at_most_2", applicable},
                      {"bound_violations", violations},
                      {"s_range", {s_min, s_max}}};
    if (applicable) doc["summary"]["min_slack"] = min_slack;
    doc["method"] = "analytic_xstate";
    doc["samples"] = std::move(list);
    emit(doc);
  }

  const RunRequest& req_;
  std::ostream& out_;
  Stage stage_ = Stage::compute;
};

}  // namespace detail

/// Parses `args` (without the program name) and runs the command.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunRequest req;
  CLI::App app{"Two-setting EPR-steering toolkit for two-qubit states", "steerkit"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", std::string(kVersion));

  std::string direction = "AtoB", method = "auto", output = "json";
  const std::map<std::string, DirectionChoice> dir_map{
      {"AtoB", DirectionChoice::AtoB}, {"BtoA", DirectionChoice::BtoA}, {"both", DirectionChoice::both}};
  const std::map<std::string, MethodChoice> method_map{
      {"auto", MethodChoice::automatic}, {"analytic", MethodChoice::analytic}, {"numeric", MethodChoice::numeric}};
  const std::map<std::string, OutputFormat> out_map{{"json", OutputFormat::json}, {"csv", OutputFormat::csv}};

  auto add_common = [&](CLI::App* sub, bool needs_state, bool sweeps) {
    if (needs_state) {
      sub->add_option("--state", req.state_file, "JSON state file (rho, pauli or family)");
      sub->add_option("--family", req.family_spec, "inline family spec, e.g. \"w_v_theta,V=0.2,theta=pi/6\"");
      sub->add_option("--theta", req.theta, "override the family's theta (radians, expressions allowed)");
      sub->add_option("--method", method, "auto | analytic | numeric")
          ->check(CLI::IsMember({"auto", "analytic", "numeric"}));
    }
    if (sweeps) sub->add_option("--grid", req.grid, "key=start:stop:step, repeatable (Cartesian product)");
    sub->add_option("--direction", direction, "AtoB | BtoA | both")
        ->check(CLI::IsMember({"AtoB", "BtoA", "both"}));
    sub->add_option("--output", output, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--eps-inv", req.tol.inv, "minimum 1 - |b|^2 of the steered reduced state");
    sub->add_option("--eps-hermitian", req.tol.hermitian, "hermiticity tolerance");
    sub->add_option("--eps-trace", req.tol.trace, "trace tolerance");
    sub->add_option("--eps-psd", req.tol.psd, "positivity tolerance");
    sub->add_option("--eps-zero-t3", req.tol.zero_t3, "|t3| below which the closed form is certified");
    sub->add_option("--eps-zero-gap", req.tol.zero_gap, "analytic/numeric agreement for zero-states");
    sub->add_option("--opt-grid", req.opt.grid_per_angle, "coarse grid cells per angle");
    sub->add_option("--opt-seed", req.opt.seed, "multistart jitter seed (0 = none)");
  };

  struct Spec {
    const char* name;
    const char* help;
    bool state, sweeps;
  };
  const Spec specs[] = {
      {"steer", "steerability S in the chosen direction(s)", true, false},
      {"chsh", "maximal CHSH value N", true, false},
      {"radius", "steering radius of an X-state", true, false},
      {"ellipsoid", "steering-ellipsoid centre and volume of an X-state", true, false},
      {"asym", "S in both directions over a family parameter grid", true, true},
      {"sweep", "S (and N) over a family parameter grid", true, true},
      {"region", "seeded (N, S) scatter over zero-states", false, false},
  };
  for (const Spec& s : specs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, s.state, s.sweeps);
    if (std::string_view(s.name) == "region") {
      sub->add_option("--samples", req.samples, "number of samples");
      sub->add_option("--seed", req.seed, "sampler seed");
      sub->add_option("--mix", req.mix, "draw weights bell_diagonal,t3_zero,generic");
    }
    sub->callback([&req, &s] { req.command = s.name; });
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help / --version
      if (dynamic_cast<const CLI::CallForVersion*>(&e)) out << kVersion << "\n";
      else out << app.help("", CLI::AppFormatMode::All);
      return 0;
    }
    return detail::report({detail::Stage::arguments, ErrorCode::InvalidArgument, e.what(), 0}, out, err);
  }
  req.direction = dir_map.at(direction);
  req.method = method_map.at(method);
  req.output = out_map.at(output);
  if (req.command == "asym" && direction != "AtoB")
    err << "steerkit: asym always reports both directions; --direction ignored\n";
  try {
    req.opt.validate();
  } catch (const Error& e) {
    return detail::report({detail::Stage::arguments, e.code(), e.what(), e.magnitude()}, out, err);
  }

  std::ostringstream buffer;  // nothing reaches `out` unless the run succeeds
  detail::Runner runner(req, buffer);
  try {
    runner.execute();
  } catch (const Error& e) {
    detail::Stage stage = runner.stage();
    if (e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::UnknownFamily ||
        e.code() == ErrorCode::ParamOutOfDomain)
      stage = stage == detail::Stage::state_file ? stage : detail::Stage::arguments;
    return detail::report({stage, e.code(), e.what(), e.magnitude()}, out, err);
  } catch (const std::exception& e) {
    return detail::report({runner.stage(), ErrorCode::DomainError, e.what(), 0}, out, err);
  }
  out << buffer.str();
  return 0;
}

}  // namespace steerkit::cli
