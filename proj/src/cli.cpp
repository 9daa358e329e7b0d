#include "convroof/cli.hpp"

#include "convroof/analysis.hpp"
#include "convroof/errors.hpp"
#include "convroof/examples.hpp"
#include "convroof/io.hpp"
#include "convroof/quantum.hpp"
#include "convroof/roof.hpp"
#include "convroof/verify.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

namespace convroof::cli {

namespace {

using io::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Config {
  std::string example;
  std::string input;
  Index resolution = 64;
  std::uint64_t seed = 0;
  std::string query;
  std::string format = "table";
  std::string output;
  int jobs = 1;
  double bound = 1e3;
  Index grid = 32;
  std::string boundary;
  std::string kind = "oscillation";
  std::string radii = "0.2,0.1,0.05";
  Index samples = 100;
  std::optional<double> step;
  std::string resolutions = "64,128,256";
  std::string cloud;
  std::string state;
  std::string state_file;
  std::string measure = "linear_entropy";
  int restarts = 20;
  int ensemble = 0;
  int iterations = 3000;
  bool quick = false;
};

struct Source {
  SampledConvexProblem problem;
  std::optional<examples::ExampleSpec> spec;
  std::string label;
};

Source load_source(const Config& cfg) {
  if (cfg.example.empty() == cfg.input.empty()) {
    throw UsageError("exactly one of --example or --input is required");
  }
  if (!cfg.example.empty()) {
    auto ex = examples::make_example(cfg.example, cfg.resolution,
                                     {.seed = cfg.seed, .constant_value = {}});
    return {std::move(ex.problem), std::move(ex.spec), cfg.example};
  }
  return {io::read_cloud_csv(std::filesystem::path(cfg.input)), std::nullopt, cfg.input};
}

std::vector<Point> require_queries(const Config& cfg, Index dim) {
  if (cfg.query.empty()) throw UsageError("--query is required");
  auto points = io::parse_points(cfg.query);
  if (points.empty()) throw UsageError("--query names no point");
  for (const auto& p : points) {
    if (p.dim() != dim) {
      throw DimensionError("query has dimension " + std::to_string(p.dim()) + ", cloud has " +
                           std::to_string(dim));
    }
  }
  return points;
}

std::string join(const Eigen::VectorXd& v, char sep = ',') {
  std::string s;
  for (Index i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += io::format_number(v(i));
  }
  return s;
}

std::string opt_number(const std::optional<double>& v) {
  return v ? io::format_number(*v) : "n/a";
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json header(const char* command) {
  return {{"schema_version", io::kSchemaVersion}, {"command", command}};
}

std::optional<double> oracle_at(const Source& src, const Eigen::VectorXd& x) {
  if (!src.spec || !src.spec->oracle) return std::nullopt;
  return src.spec->oracle(x);
}

void csv_header(std::ostream& out, Index dim, const std::string& rest) {
  for (Index j = 0; j < dim; ++j) out << 'x' << j + 1 << ',';
  out << rest << '\n';
}

std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void cmd_hull(const Config& cfg, std::ostream& out) {
  const auto src = load_source(cfg);
  const auto& hull = src.problem.hull();
  const auto& cloud = src.problem.cloud();
  if (cfg.format == "json") {
    json j = header("hull");
    j["source"] = src.label;
    j["dim"] = src.problem.dim();
    j["points"] = src.problem.size();
    j["affine_dim"] = hull.affine_dim;
    j["vertices"] = hull.vertex_indices;
    json facets = json::array();
    for (const auto& f : hull.facets) {
      facets.push_back({{"vertices", f.vertices},
                        {"normal", io::vector_json(f.normal)},
                        {"offset", f.offset}});
    }
    j["facets"] = std::move(facets);
    out << j.dump(2) << '\n';
  } else if (cfg.format == "csv") {
    csv_header(out, src.problem.dim(), "index,f");
    for (Index i : hull.vertex_indices) {
      for (Index k = 0; k < src.problem.dim(); ++k) out << csv_number(cloud.matrix()(k, i)) << ',';
      out << i << ',' << csv_number(src.problem.value(i)) << '\n';
    }
  } else {
    io::Table summary({"quantity", "value"});
    summary.add_row({"points", std::to_string(src.problem.size())});
    summary.add_row({"dimension", std::to_string(src.problem.dim())});
    summary.add_row({"affine dimension", std::to_string(hull.affine_dim)});
    summary.add_row({"extreme points", std::to_string(hull.vertex_indices.size())});
    summary.add_row({"facets", src.problem.dim() <= 3 ? std::to_string(hull.facets.size())
                                                       : std::string("n/a")});
    summary.print(out);
    out << '\n';
    io::Table vertices({"index", "point", "f"});
    for (Index i : hull.vertex_indices) {
      vertices.add_row({std::to_string(i), join(cloud.matrix().col(i)),
                        io::format_number(src.problem.value(i))});
    }
    vertices.print(out);
  }
}

void cmd_roof(const Config& cfg, std::ostream& out) {
  const auto src = load_source(cfg);
  const auto queries = require_queries(cfg, src.problem.dim());
  std::vector<RoofValue> values;
  for (const auto& q : queries) values.push_back(roof_eval(src.problem, q));
  const auto& cloud = src.problem.cloud();
  if (cfg.format == "json") {
    json j = header("roof");
    j["source"] = src.label;
    json results = json::array();
    for (const auto& rv : values) {
      json r = io::roof_value_json(src.problem, rv);
      r["oracle"] = opt_json(oracle_at(src, rv.query.coords()));
      results.push_back(std::move(r));
    }
    j["results"] = std::move(results);
    out << j.dump(2) << '\n';
  } else if (cfg.format == "csv") {
    csv_header(out, src.problem.dim(), "value,oracle,support");
    for (const auto& rv : values) {
      for (Index k = 0; k < rv.query.dim(); ++k) out << csv_number(rv.query[k]) << ',';
      const auto oracle = oracle_at(src, rv.query.coords());
      out << csv_number(rv.value) << ',' << (oracle ? csv_number(*oracle) : std::string()) << ','
          << rv.decomposition.support_size() << '\n';
    }
  } else {
    io::Table table({"query", "value", "oracle", "support"});
    for (const auto& rv : values) {
      table.add_row({join(rv.query.coords()), io::format_number(rv.value),
                     opt_number(oracle_at(src, rv.query.coords())),
                     std::to_string(rv.decomposition.support_size())});
    }
    table.print(out);
    for (const auto& rv : values) {
      out << "\ndecomposition of " << join(rv.query.coords()) << '\n';
      io::Table dec({"index", "weight", "point", "f"});
      for (const auto& e : rv.decomposition.entries) {
        dec.add_row({std::to_string(e.index), io::format_number(e.weight),
                     join(cloud.matrix().col(e.index)), io::format_number(src.problem.value(e.index))});
      }
      dec.print(out);
    }
  }
}

void cmd_grid(const Config& cfg, std::ostream& out) {
  const auto src = load_source(cfg);
  if (cfg.grid < 2) throw UsageError("--grid must be at least 2");
  const auto grid = roof_grid(src.problem, cfg.grid, cfg.jobs);
  if (cfg.format == "json") {
    json j = io::grid_json(grid);
    j["command"] = "grid";
    j["source"] = src.label;
    out << j.dump(2) << '\n';
  } else if (cfg.format == "csv") {
    io::write_grid_csv(out, grid);
  } else {
    std::size_t inside = 0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    std::optional<double> worst;
    for (std::size_t i = 0; i < grid.cells.size(); ++i) {
      if (!grid.cells[i]) continue;
      ++inside;
      lo = std::min(lo, grid.cells[i]->value);
      hi = std::max(hi, grid.cells[i]->value);
      if (auto o = oracle_at(src, grid.nodes[i])) {
        worst = std::max(worst.value_or(0.0), std::abs(grid.cells[i]->value - *o));
      }
    }
    io::Table table({"quantity", "value"});
    table.add_row({"nodes", std::to_string(grid.cells.size())});
    table.add_row({"inside hull", std::to_string(inside)});
    table.add_row({"min roof", inside ? io::format_number(lo) : "n/a"});
    table.add_row({"max roof", inside ? io::format_number(hi) : "n/a"});
    table.add_row({"max oracle error", opt_number(worst)});
    table.print(out);
  }
}

void cmd_flat(const Config& cfg, std::ostream& out) {
  const auto src = load_source(cfg);
  const auto queries = require_queries(cfg, src.problem.dim());
  std::vector<FlatSet> sets;
  for (const auto& q : queries) sets.push_back(flat_set(src.problem, q));
  if (cfg.format == "json") {
    json j = header("flat");
    j["source"] = src.label;
    json results = json::array();
    for (std::size_t k = 0; k < sets.size(); ++k) {
      const auto& fs = sets[k];
      json pts = json::array();
      for (const auto& p : fs.points) pts.push_back(io::vector_json(p.coords()));
      results.push_back({{"query", io::vector_json(queries[k].coords())},
                         {"support", fs.support},
                         {"points", std::move(pts)},
                         {"weights", fs.weights},
                         {"gradient", io::vector_json(fs.functional.gradient)},
                         {"offset", fs.functional.offset},
                         {"barycenter_residual", fs.barycenter_residual},
                         {"verified", fs.verified}});
    }
    j["results"] = std::move(results);
    out << j.dump(2) << '\n';
  } else if (cfg.format == "csv") {
    csv_header(out, src.problem.dim(), "support,residual,verified");
    for (std::size_t k = 0; k < sets.size(); ++k) {
      for (Index i = 0; i < queries[k].dim(); ++i) out << csv_number(queries[k][i]) << ',';
      std::string support;
      for (Index s : sets[k].support) support += (support.empty() ? "" : " ") + std::to_string(s);
      out << support << ',' << csv_number(sets[k].barycenter_residual) << ','
          << (sets[k].verified ? "true" : "false") << '\n';
    }
  } else {
    for (std::size_t k = 0; k < sets.size(); ++k) {
      const auto& fs = sets[k];
      if (k) out << '\n';
      out << "flat simplex through " << join(queries[k].coords()) << '\n';
      io::Table table({"index", "weight", "point"});
      for (std::size_t i = 0; i < fs.support.size(); ++i) {
        table.add_row({std::to_string(fs.support[i]), io::format_number(fs.weights[i]),
                       join(fs.points[i].coords())});
      }
      table.print(out);
      out << "affine function: gradient (" << join(fs.functional.gradient) << "), offset "
          << io::format_number(fs.functional.offset) << '\n';
      out << "barycenter residual " << io::format_number(fs.barycenter_residual)
          << (fs.verified ? ", verified" : ", not verified") << '\n';
    }
  }
}

void cmd_hyperplane(const Config& cfg, std::ostream& out) {
  const auto src = load_source(cfg);
  const auto queries = require_queries(cfg, src.problem.dim());
  std::vector<std::optional<AffineFunctional>> found;
  for (const auto& q : queries) found.push_back(supporting_hyperplane(src.problem, q, cfg.bound));
  if (cfg.format == "json") {
    json j = header("hyperplane");
    j["source"] = src.label;
    j["gradient_bound"] = cfg.bound;
    json results = json::array();
    for (std::size_t k = 0; k < found.size(); ++k) {
      json r = {{"query", io::vector_json(queries[k].coords())}, {"feasible", found[k].has_value()}};
      if (found[k]) {
        r["gradient"] = io::vector_json(found[k]->gradient);
        r["offset"] = found[k]->offset;
      }
      results.push_back(std::move(r));
    }
    j["results"] = std::move(results);
    out << j.dump(2) << '\n';
  } else if (cfg.format == "csv") {
    const Index d = src.problem.dim();
    std::string rest = "feasible,";
    for (Index i = 0; i < d; ++i) rest += "g" + std::to_string(i + 1) + ",";
    csv_header(out, d, rest + "offset");
    for (std::size_t k = 0; k < found.size(); ++k) {
      for (Index i = 0; i < d; ++i) out << csv_number(queries[k][i]) << ',';
      out << (found[k] ? "true" : "false");
      for (Index i = 0; i < d; ++i) out << ',' << (found[k] ? csv_number(found[k]->gradient(i)) : "");
      out << ',' << (found[k] ? csv_number(found[k]->offset) : "") << '\n';
    }
  } else {
    io::Table table({"point", "feasible", "gradient", "offset"});
    for (std::size_t k = 0; k < found.size(); ++k) {
      table.add_row({join(queries[k].coords()), found[k] ? "yes" : "no",
                     found[k] ? join(found[k]->gradient) : "-",
                     found[k] ? io::format_number(found[k]->offset) : "-"});
    }
    out << "gradient bound " << io::format_number(cfg.bound) << '\n';
    table.print(out);
  }
}

void cmd_extend(const Config& cfg, std::ostream& out) {
  const auto src = load_source(cfg);
  const auto queries = require_queries(cfg, src.problem.dim());
  std::vector<Point> boundary;
  if (!cfg.boundary.empty()) {
    boundary = io::parse_points(cfg.boundary);
  } else {
    for (Index i : src.problem.hull().vertex_indices) boundary.push_back(src.problem.cloud().point(i));
  }
  std::vector<double> values;
  std::vector<bool> inside;
  for (const auto& q : queries) {
    inside.push_back(hull_contains(src.problem, q.coords()));
    values.push_back(outer_extension(src.problem, q, boundary, cfg.bound));
  }
  if (cfg.format == "json") {
    json j = header("extend");
    j["source"] = src.label;
    j["gradient_bound"] = cfg.bound;
    j["boundary_samples"] = boundary.size();
    json results = json::array();
    for (std::size_t k = 0; k < values.size(); ++k) {
      results.push_back({{"query", io::vector_json(queries[k].coords())},
                         {"inside_hull", static_cast<bool>(inside[k])},
                         {"value", values[k]}});
    }
    j["results"] = std::move(results);
    out << j.dump(2) << '\n';
  } else if (cfg.format == "csv") {
    csv_header(out, src.problem.dim(), "inside_hull,value");
    for (std::size_t k = 0; k < values.size(); ++k) {
      for (Index i = 0; i < queries[k].dim(); ++i) out << csv_number(queries[k][i]) << ',';
      out << (inside[k] ? "true" : "false") << ',' << csv_number(values[k]) << '\n';
    }
  } else {
    io::Table table({"query", "inside hull", "value"});
    for (std::size_t k = 0; k < values.size(); ++k) {
      table.add_row({join(queries[k].coords()), inside[k] ? "yes" : "no",
                     io::format_number(values[k])});
    }
    table.print(out);
  }
}

std::vector<Point> probe_points(const Config& cfg, const Source& src) {
  if (!cfg.query.empty()) return require_queries(cfg, src.problem.dim());
  if (src.spec && !src.spec->singular_points.empty()) return src.spec->singular_points;
  throw UsageError("--query is required");
}

void probe_oscillation(const Config& cfg, std::ostream& out) {
  const auto src = load_source(cfg);
  const auto centers = probe_points(cfg, src);
  const Eigen::VectorXd radii = io::parse_vector(cfg.radii);
  const std::vector<double> r(radii.data(), radii.data() + radii.size());
  std::vector<analysis::OscillationReport> reports;
  for (const auto& c : centers) {
    reports.push_back(analysis::oscillation(src.problem, c, r, cfg.samples,
                                            {.seed = cfg.seed,
                                             .boundary_projections = true,
                                             .max_attempt_factor = 20}));
  }
  if (cfg.format == "json") {
    json j = header("probe");
    j["kind"] = "oscillation";
    j["source"] = src.label;
    json results = json::array();
    for (const auto& rep : reports) {
      json levels = json::array();
      for (const auto& l : rep.levels) {
        levels.push_back({{"radius", l.radius},
                          {"oscillation", opt_json(l.osc)},
                          {"interior_samples", l.interior_samples},
                          {"boundary_samples", l.boundary_samples},
                          {"attempts", l.attempts},
                          {"note", l.note}});
      }
      results.push_back({{"center", io::vector_json(rep.center.coords())},
                         {"center_value", rep.center_value},
                         {"samples_per_radius", rep.samples_per_radius},
                         {"cloud_size", rep.cloud_size},
                         {"seed", rep.seed},
                         {"levels", std::move(levels)}});
    }
    j["results"] = std::move(results);
    out << j.dump(2) << '\n';
  } else if (cfg.format == "csv") {
    csv_header(out, src.problem.dim(), "center_value,radius,oscillation,interior,boundary");
    for (const auto& rep : reports) {
      for (const auto& l : rep.levels) {
        for (Index i = 0; i < rep.center.dim(); ++i) out << csv_number(rep.center[i]) << ',';
        out << csv_number(rep.center_value) << ',' << csv_number(l.radius) << ','
            << (l.osc ? csv_number(*l.osc) : std::string()) << ',' << l.interior_samples << ','
            << l.boundary_samples << '\n';
      }
    }
  } else {
    for (std::size_t k = 0; k < reports.size(); ++k) {
      const auto& rep = reports[k];
      if (k) out << '\n';
      out << "oscillation at " << join(rep.center.coords()) << " (roof "
          << io::format_number(rep.center_value) << ")\n";
      io::Table table({"radius", "oscillation", "interior", "boundary", "note"});
      for (const auto& l : rep.levels) {
        table.add_row({io::format_number(l.radius), opt_number(l.osc),
                       std::to_string(l.interior_samples), std::to_string(l.boundary_samples),
                       l.note});
      }
      table.print(out);
    }
  }
}

void probe_gradient(const Config& cfg, std::ostream& out) {
  const auto src = load_source(cfg);
  const auto points = probe_points(cfg, src);
  std::vector<analysis::GradientProbe> probes;
  for (const auto& p : points) probes.push_back(analysis::gradient_probe(src.problem, p, cfg.step));
  if (cfg.format == "json") {
    json j = header("probe");
    j["kind"] = "gradient";
    j["source"] = src.label;
    json results = json::array();
    for (const auto& g : probes) {
      json stencils = json::array();
      for (auto s : g.stencils) stencils.push_back(analysis::to_string(s));
      json grad = json::array();
      json hess = json::array();
      for (Index i = 0; i < g.grad.size(); ++i) {
        const bool ok = g.finite[static_cast<std::size_t>(i)];
        grad.push_back(ok ? json(g.grad(i)) : json(nullptr));
        hess.push_back(ok ? json(g.hessian_diag(i)) : json(nullptr));
      }
      results.push_back({{"point", io::vector_json(g.point.coords())},
                         {"step", g.step},
                         {"value", g.value},
                         {"gradient", std::move(grad)},
                         {"hessian_diag", std::move(hess)},
                         {"stencils", std::move(stencils)}});
    }
    j["results"] = std::move(results);
    out << j.dump(2) << '\n';
  } else if (cfg.format == "csv") {
    csv_header(out, src.problem.dim(), "step,value,axis,derivative,second,stencil");
    for (const auto& g : probes) {
      for (Index a = 0; a < g.grad.size(); ++a) {
        for (Index i = 0; i < g.point.dim(); ++i) out << csv_number(g.point[i]) << ',';
        const bool ok = g.finite[static_cast<std::size_t>(a)];
        out << csv_number(g.step) << ',' << csv_number(g.value) << ',' << a + 1 << ','
            << (ok ? csv_number(g.grad(a)) : "") << ',' << (ok ? csv_number(g.hessian_diag(a)) : "")
            << ',' << analysis::to_string(g.stencils[static_cast<std::size_t>(a)]) << '\n';
      }
    }
  } else {
    for (std::size_t k = 0; k < probes.size(); ++k) {
      const auto& g = probes[k];
      if (k) out << '\n';
      out << "finite differences at " << join(g.point.coords()) << " (roof "
          << io::format_number(g.value) << ", step " << io::format_number(g.step) << ")\n";
      io::Table table({"axis", "derivative", "second", "stencil"});
      for (Index a = 0; a < g.grad.size(); ++a) {
        const bool ok = g.finite[static_cast<std::size_t>(a)];
        table.add_row({std::to_string(a + 1), ok ? io::format_number(g.grad(a)) : "n/a",
                       ok ? io::format_number(g.hessian_diag(a)) : "n/a",
                       analysis::to_string(g.stencils[static_cast<std::size_t>(a)])});
      }
      table.print(out);
    }
  }
}

void probe_convergence(const Config& cfg, std::ostream& out) {
  if (cfg.example.empty()) throw UsageError("convergence probes need --example");
  const Eigen::VectorXd res = io::parse_vector(cfg.resolutions);
  std::vector<Index> resolutions;
  for (Index i = 0; i < res.size(); ++i) {
    if (res(i) < 1 || res(i) != std::floor(res(i))) throw UsageError("--resolutions must be integers");
    resolutions.push_back(static_cast<Index>(res(i)));
  }
  std::vector<Point> probes;
  if (!cfg.query.empty()) {
    probes = io::parse_points(cfg.query);
  } else {
    probes = examples::make_example(cfg.example, resolutions.front(),
                                    {.seed = cfg.seed, .constant_value = {}})
                 .spec.singular_points;
  }
  const auto rows = analysis::refinement_convergence(cfg.example, resolutions, probes,
                                                     {.seed = cfg.seed, .constant_value = {}});
  if (cfg.format == "json") {
    json j = header("probe");
    j["kind"] = "convergence";
    j["source"] = cfg.example;
    json results = json::array();
    for (const auto& r : rows) {
      results.push_back({{"resolution", r.resolution},
                         {"cloud_size", r.cloud_size},
                         {"probe", io::vector_json(r.probe.coords())},
                         {"roof", opt_json(r.roof)},
                         {"oracle", opt_json(r.oracle)},
                         {"error", opt_json(r.error)}});
    }
    j["results"] = std::move(results);
    out << j.dump(2) << '\n';
  } else if (cfg.format == "csv") {
    out << "resolution,cloud_size,probe,roof,oracle,error\n";
    for (const auto& r : rows) {
      auto cell = [](const std::optional<double>& v) { return v ? csv_number(*v) : std::string(); };
      out << r.resolution << ',' << r.cloud_size << ',' << join(r.probe.coords(), ' ') << ','
          << cell(r.roof) << ',' << cell(r.oracle) << ',' << cell(r.error) << '\n';
    }
  } else {
    io::Table table({"N", "points", "probe", "roof", "oracle", "error"});
    for (const auto& r : rows) {
      table.add_row({std::to_string(r.resolution), std::to_string(r.cloud_size),
                     join(r.probe.coords()), opt_number(r.roof), opt_number(r.oracle),
                     opt_number(r.error)});
    }
    table.print(out);
  }
}

void cmd_example(const Config& cfg, std::ostream& out) {
  if (cfg.example.empty()) throw UsageError("--example is required");
  const auto ex = examples::make_example(cfg.example, cfg.resolution,
                                         {.seed = cfg.seed, .constant_value = {}});
  const auto& pb = ex.problem;
  if (!cfg.cloud.empty()) {
    std::ofstream file(cfg.cloud);
    if (!file) throw UsageError("cannot write '" + cfg.cloud + "'");
    io::write_cloud_csv(file, pb);
  }
  if (cfg.format == "csv") {
    io::write_cloud_csv(out, pb);
    return;
  }

  std::vector<Eigen::VectorXd> probes;
  for (const auto& p : ex.spec.singular_points) probes.push_back(p.coords());
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32), 7u};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<Index> pick(0, pb.size() - 1);
  std::exponential_distribution<double> expo(1.0);
  for (int k = 0; k < 8; ++k) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(pb.dim());
    double total = 0.0;
    for (int t = 0; t < 3; ++t) {
      const double w = expo(rng);
      x += w * pb.cloud().matrix().col(pick(rng));
      total += w;
    }
    probes.push_back(x / total);
  }
  struct Row {
    Eigen::VectorXd point;
    double roof;
    std::optional<double> oracle;
  };
  std::vector<Row> rows;
  for (const auto& p : probes) {
    const auto oracle = ex.spec.oracle ? ex.spec.oracle(p) : std::nullopt;
    rows.push_back({p, roof_eval(pb, Point(p)).value, oracle});
  }
  const auto convexity = is_convex_on_samples(pb.cloud(), pb.values());

  if (cfg.format == "json") {
    json j = header("example");
    j["name"] = ex.spec.name;
    j["dim"] = pb.dim();
    j["resolution"] = cfg.resolution;
    j["points"] = pb.size();
    j["notes"] = ex.spec.notes;
    j["convex_on_samples"] = convexity.convex;
    json cmp = json::array();
    for (const auto& r : rows) {
      cmp.push_back({{"point", io::vector_json(r.point)},
                     {"roof", r.roof},
                     {"oracle", opt_json(r.oracle)},
                     {"error", r.oracle ? json(std::abs(r.roof - *r.oracle)) : json(nullptr)}});
    }
    j["comparison"] = std::move(cmp);
    json pts = json::array();
    for (Index i = 0; i < pb.size(); ++i) pts.push_back(io::vector_json(pb.cloud().matrix().col(i)));
    j["cloud"] = {{"points", std::move(pts)},
                  {"values", std::vector<double>(pb.values().begin(), pb.values().end())}};
    out << j.dump(2) << '\n';
    return;
  }
  out << ex.spec.name << ": " << pb.size() << " points in R^" << pb.dim() << " at N = "
      << cfg.resolution << '\n'
      << ex.spec.notes << '\n'
      << "convex on samples: " << (convexity.convex ? "yes" : "no") << "\n\n";
  io::Table table({"point", "roof", "oracle", "error"});
  for (const auto& r : rows) {
    table.add_row({join(r.point), io::format_number(r.roof), opt_number(r.oracle),
                   r.oracle ? io::format_number(std::abs(r.roof - *r.oracle)) : "n/a"});
  }
  table.print(out);
}

void cmd_entangle(const Config& cfg, std::ostream& out) {
  if (cfg.state.empty() == cfg.state_file.empty()) {
    throw UsageError("exactly one of --state or --state-file is required");
  }
  const auto rho = [&] {
    if (!cfg.state.empty()) return io::parse_state(cfg.state);
    std::ifstream file(cfg.state_file);
    if (!file) throw ParseError("cannot open '" + cfg.state_file + "'");
    json j;
    try {
      file >> j;
    } catch (const json::exception& e) {
      throw ParseError(std::string("invalid state JSON: ") + e.what());
    }
    return io::read_state_json(j);
  }();
  const auto measure = quantum::measure_by_name(cfg.measure);
  quantum::RoofOptions opts;
  opts.ensemble_size = cfg.ensemble;
  opts.restarts = cfg.restarts;
  opts.iterations = cfg.iterations;
  opts.seed = cfg.seed;
  opts.jobs = cfg.jobs;
  const auto result = quantum::roof_entanglement(rho, measure, opts);
  const double concurrence = quantum::concurrence_wootters(rho);
  const double oracle = cfg.measure == "linear_entropy" ? concurrence / std::sqrt(2.0)
                                                        : quantum::entanglement_of_formation(rho);
  if (cfg.format == "json") {
    json j = header("entangle");
    j["state"] = cfg.state.empty() ? cfg.state_file : cfg.state;
    j["rho"] = io::state_json(rho);
    j["measure"] = measure.name;
    j["upper_bound"] = result.value;
    j["oracle"] = oracle;
    j["gap"] = result.value - oracle;
    j["concurrence"] = concurrence;
    j["eigen_ensemble_value"] = result.eigen_ensemble_value;
    j["ensemble_size"] = result.ensemble_size;
    j["restarts"] = cfg.restarts;
    j["best_restart"] = result.best_restart;
    j["converged"] = result.converged;
    j["ensemble"] = io::decomposition_json(result.decomposition);
    out << j.dump(2) << '\n';
  } else if (cfg.format == "csv") {
    out << "measure,upper_bound,oracle,gap,eigen_ensemble,ensemble_size,best_restart,converged\n"
        << measure.name << ',' << csv_number(result.value) << ',' << csv_number(oracle) << ','
        << csv_number(result.value - oracle) << ',' << csv_number(result.eigen_ensemble_value)
        << ',' << result.ensemble_size << ',' << result.best_restart << ','
        << (result.converged ? "true" : "false") << '\n';
  } else {
    io::Table table({"quantity", "value"});
    table.add_row({"measure", measure.name});
    table.add_row({"value (upper bound)", io::format_number(result.value)});
    table.add_row({"oracle", io::format_number(oracle)});
    table.add_row({"gap", io::format_number(result.value - oracle)});
    table.add_row({"concurrence", io::format_number(concurrence)});
    table.add_row({"eigen ensemble", io::format_number(result.eigen_ensemble_value)});
    table.add_row({"ensemble size", std::to_string(result.ensemble_size)});
    table.add_row({"best restart", result.best_restart < 0 ? std::string("eigen ensemble")
                                                           : std::to_string(result.best_restart)});
    table.add_row({"converged", result.converged ? "yes" : "no"});
    table.print(out);
    out << "\nensemble\n";
    io::Table ens({"p", "measure"});
    for (std::size_t k = 0; k < result.decomposition.size(); ++k) {
      ens.add_row({io::format_number(result.decomposition.probabilities[k]),
                   io::format_number(measure.evaluate(result.decomposition.states[k]))});
    }
    ens.print(out);
  }
}

int cmd_verify(const Config& cfg, std::ostream& out) {
  const auto results = verify::run_suite({.quick = cfg.quick, .seed = cfg.seed});
  const bool ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
  if (cfg.format == "json") {
    json j = header("verify");
    j["quick"] = cfg.quick;
    j["seed"] = cfg.seed;
    j["passed"] = ok;
    json checks = json::array();
    for (const auto& r : results) {
      checks.push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    }
    j["checks"] = std::move(checks);
    out << j.dump(2) << '\n';
  } else if (cfg.format == "csv") {
    out << "check,passed,detail\n";
    for (const auto& r : results) {
      out << r.name << ',' << (r.passed ? "true" : "false") << ",\"" << r.detail << "\"\n";
    }
  } else {
    for (const auto& r : results) {
      out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    }
    out << (ok ? "all checks passed" : "verification FAILED") << '\n';
  }
  return ok ? kExitOk : kExitVerifyFailed;
}

void add_source(CLI::App* sub, Config& cfg) {
  auto* ex = sub->add_option("--example", cfg.example, "Built-in example name")
                 ->check(CLI::IsMember(examples::example_names()));
  auto* in = sub->add_option("--input", cfg.input, "Point cloud CSV (x1,...,xd,f)");
  ex->excludes(in);
  sub->add_option("-N", cfg.resolution, "Example resolution")->capture_default_str();
}

void add_common(CLI::App* sub, Config& cfg) {
  sub->add_option("--format", cfg.format, "csv, json or table (grid defaults to csv)")
      ->check(CLI::IsMember({"csv", "json", "table"}));
  sub->add_option("--output", cfg.output, "Write results to this file");
  sub->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Config cfg;
  CLI::App app{"Convex roof extensions of sampled functions", "convroof"};
  app.require_subcommand(1);

  auto* hull = app.add_subcommand("hull", "Extreme points and facets of the sample hull");
  add_source(hull, cfg);
  auto* roof = app.add_subcommand("roof", "Roof value and optimal decomposition at query points");
  add_source(roof, cfg);
  roof->add_option("--query", cfg.query, "x1,...,xd[;x1,...,xd...]");
  auto* grid = app.add_subcommand("grid", "Roof on a lattice over the bounding box");
  add_source(grid, cfg);
  grid->add_option("--grid", cfg.grid, "Nodes per axis")->capture_default_str();
  grid->add_option("--jobs", cfg.jobs, "Worker threads")->check(CLI::PositiveNumber);
  auto* flat = app.add_subcommand("flat", "Optimal simplex and affine piece through a point");
  add_source(flat, cfg);
  flat->add_option("--query", cfg.query, "x1,...,xd[;...]");
  auto* hyper = app.add_subcommand("hyperplane", "Nonvertical supporting hyperplane at a boundary point");
  add_source(hyper, cfg);
  hyper->add_option("--query", cfg.query, "Boundary point(s)");
  hyper->add_option("--bound", cfg.bound, "Gradient bound M")->capture_default_str();
  auto* extend = app.add_subcommand("extend", "Extension outside the hull through supporting hyperplanes");
  add_source(extend, cfg);
  extend->add_option("--query", cfg.query, "x1,...,xd[;...]");
  extend->add_option("--bound", cfg.bound, "Gradient bound M")->capture_default_str();
  extend->add_option("--boundary", cfg.boundary, "Boundary samples (default: hull vertices)");
  auto* probe = app.add_subcommand("probe", "Oscillation, finite differences or refinement");
  add_source(probe, cfg);
  probe->add_option("--kind", cfg.kind, "oscillation, gradient or convergence")
      ->check(CLI::IsMember({"oscillation", "gradient", "convergence"}))
      ->capture_default_str();
  probe->add_option("--query", cfg.query, "Probe point(s); default: singular points");
  probe->add_option("--radii", cfg.radii, "Decreasing radii")->capture_default_str();
  probe->add_option("--samples", cfg.samples, "Samples per radius")->capture_default_str();
  probe->add_option("--step", cfg.step, "Finite-difference step");
  probe->add_option("--resolutions", cfg.resolutions, "Resolutions for convergence")
      ->capture_default_str();
  auto* example = app.add_subcommand("example", "Sample a built-in example");
  example->add_option("--example", cfg.example, "Example name")
      ->required()
      ->check(CLI::IsMember(examples::example_names()));
  example->add_option("-N", cfg.resolution, "Resolution")->capture_default_str();
  example->add_option("--cloud", cfg.cloud, "Also write the cloud CSV here");
  auto* entangle = app.add_subcommand("entangle", "Convex roof of a two-qubit entanglement measure");
  auto* st = entangle->add_option("--state", cfg.state,
                                  "bell | werner:p | random:seed:rank | separable:seed:members");
  auto* sf = entangle->add_option("--state-file", cfg.state_file, "JSON with re/im 4x4 arrays");
  st->excludes(sf);
  entangle->add_option("--measure", cfg.measure, "linear_entropy or von_neumann")
      ->check(CLI::IsMember({"linear_entropy", "von_neumann"}))
      ->capture_default_str();
  entangle->add_option("--restarts", cfg.restarts, "Random restarts")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  entangle->add_option("--ensemble", cfg.ensemble, "Ensemble size (0: 2 x rank, at most 8)");
  entangle->add_option("--iterations", cfg.iterations, "Descent iterations per restart")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  entangle->add_option("--jobs", cfg.jobs, "Worker threads")->check(CLI::PositiveNumber);
  auto* verify = app.add_subcommand("verify", "Run the property suite");
  verify->add_flag("--quick", cfg.quick, "Small samples");

  for (auto* sub : {hull, roof, grid, flat, hyper, extend, probe, example, entangle, verify}) {
    add_common(sub, cfg);
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }
  auto* chosen = app.get_subcommands().front();
  if (chosen->count("--format") == 0) cfg.format = chosen == grid ? "csv" : "table";

  std::ofstream file;
  if (!cfg.output.empty()) {
    file.open(cfg.output);
    if (!file) {
      err << "error: cannot write '" << cfg.output << "'\n";
      return kExitUsage;
    }
  }
  std::ostream& sink = cfg.output.empty() ? out : file;

  try {
    if (chosen == hull) cmd_hull(cfg, sink);
    else if (chosen == roof) cmd_roof(cfg, sink);
    else if (chosen == grid) cmd_grid(cfg, sink);
    else if (chosen == flat) cmd_flat(cfg, sink);
    else if (chosen == hyper) cmd_hyperplane(cfg, sink);
    else if (chosen == extend) cmd_extend(cfg, sink);
    else if (chosen == probe) {
      if (cfg.kind == "oscillation") probe_oscillation(cfg, sink);
      else if (cfg.kind == "gradient") probe_gradient(cfg, sink);
      else probe_convergence(cfg, sink);
    } else if (chosen == example) cmd_example(cfg, sink);
    else if (chosen == entangle) cmd_entangle(cfg, sink);
    else return cmd_verify(cfg, sink);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UnknownExampleError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NonterminationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNontermination;
  } catch (const VerticalHyperplaneError& e) {
    err << "error: " << e.what() << " at (" << join(Eigen::Map<const Eigen::VectorXd>(
                                                   e.point().data(), static_cast<Index>(e.point().size())))
        << ")\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitOk;
}

}  // namespace convroof::cli
