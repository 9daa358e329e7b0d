#include "convroof/io.hpp"

#include "convroof/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace convroof::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> to_double(std::string_view s) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

double require_double(std::string_view s, std::string_view what) {
  const auto v = to_double(s);
  if (!v) throw ParseError("cannot parse " + std::string(what) + " '" + std::string(s) + "'");
  return *v;
}

std::string full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t require_uint(std::string_view s, std::string_view what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ParseError("cannot parse " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

SampledConvexProblem read_cloud_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> columns;
  std::vector<std::vector<double>> rows;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cells = split(t, ',');
    if (!header_seen) {
      header_seen = true;
      if (!to_double(cells.front())) {
        if (cells.size() < 2 || cells.back() != "f") {
          throw ParseError("line " + std::to_string(line_no) +
                           ": header must be x1,...,xd,f");
        }
        columns = cells.size();
        continue;
      }
    }
    if (!columns) columns = cells.size();
    if (cells.size() != *columns) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(*columns) + " columns, found " +
                       std::to_string(cells.size()));
    }
    std::vector<double> row;
    for (auto c : cells) {
      const auto v = to_double(c);
      if (!v) {
        throw ParseError("line " + std::to_string(line_no) + ": not a number '" +
                         std::string(c) + "'");
      }
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("point cloud file has no data rows");
  if (*columns < 2) throw ParseError("need at least one coordinate and a value column");
  const auto d = static_cast<Index>(*columns - 1);
  Eigen::MatrixXd pts(d, static_cast<Index>(rows.size()));
  std::vector<double> values;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Index j = 0; j < d; ++j) pts(j, static_cast<Index>(i)) = rows[i][static_cast<std::size_t>(j)];
    values.push_back(rows[i].back());
  }
  return SampledConvexProblem(PointCloud(std::move(pts)), std::move(values));
}

SampledConvexProblem read_cloud_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return read_cloud_csv(in);
}

void write_cloud_csv(std::ostream& out, const SampledConvexProblem& problem) {
  for (Index j = 0; j < problem.dim(); ++j) out << 'x' << j + 1 << ',';
  out << "f\n";
  for (Index i = 0; i < problem.size(); ++i) {
    for (Index j = 0; j < problem.dim(); ++j) out << full(problem.cloud().matrix()(j, i)) << ',';
    out << full(problem.value(i)) << '\n';
  }
}

void write_grid_csv(std::ostream& out, const RoofGrid& grid) {
  const Index d = grid.lower.size();
  for (Index j = 0; j < d; ++j) out << 'x' << j + 1 << ',';
  out << "value\n";
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    for (Index j = 0; j < d; ++j) out << full(grid.nodes[i](j)) << ',';
    if (grid.cells[i]) out << full(grid.cells[i]->value);
    out << '\n';
  }
}

json vector_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

json grid_json(const RoofGrid& grid) {
  json values = json::array();
  for (const auto& c : grid.cells) values.push_back(c ? json(c->value) : json(nullptr));
  return {{"schema_version", kSchemaVersion},
          {"bbox", {{"lower", vector_json(grid.lower)}, {"upper", vector_json(grid.upper)}}},
          {"resolution", grid.resolution},
          {"order", "row-major, first axis slowest"},
          {"values", std::move(values)}};
}

json roof_value_json(const SampledConvexProblem& problem, const RoofValue& rv) {
  json entries = json::array();
  for (const auto& e : rv.decomposition.entries) {
    entries.push_back({{"index", e.index},
                       {"weight", e.weight},
                       {"point", vector_json(problem.cloud().matrix().col(e.index))},
                       {"f", problem.value(e.index)}});
  }
  return {{"query", vector_json(rv.query.coords())},
          {"value", rv.value},
          {"decomposition", std::move(entries)}};
}

Eigen::VectorXd parse_vector(std::string_view text) {
  const auto cells = split(trim(text), ',');
  Eigen::VectorXd v(static_cast<Index>(cells.size()));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    v(static_cast<Index>(i)) = require_double(cells[i], "coordinate");
  }
  return v;
}

std::vector<Point> parse_points(std::string_view text) {
  std::vector<Point> out;
  for (auto part : split(trim(text), ';')) {
    if (part.empty()) continue;
    out.emplace_back(parse_vector(part));
  }
  return out;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Table::Table(std::vector<std::string> headers) : headers_(std::move(headers)) {}

void Table::add_row(std::vector<std::string> cells) {
  cells.resize(headers_.size());
  rows_.push_back(std::move(cells));
}

void Table::print(std::ostream& out) const {
  std::vector<std::size_t> width(headers_.size());
  for (std::size_t j = 0; j < headers_.size(); ++j) width[j] = headers_[j].size();
  for (const auto& row : rows_)
    for (std::size_t j = 0; j < row.size(); ++j) width[j] = std::max(width[j], row[j].size());
  auto emit = [&](const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      line += cells[j];
      if (j + 1 < cells.size()) line += std::string(width[j] - cells[j].size() + 2, ' ');
    }
    out << line << '\n';
  };
  emit(headers_);
  std::vector<std::string> rule;
  for (std::size_t w : width) rule.emplace_back(w, '-');
  emit(rule);
  for (const auto& row : rows_) emit(row);
}

quantum::DensityMatrix parse_state(std::string_view spec) {
  const auto parts = split(trim(spec), ':');
  const auto kind = parts.front();
  if (kind == "bell" && parts.size() == 1) {
    return quantum::DensityMatrix::from_pure(quantum::bell_state());
  }
  if (kind == "werner" && parts.size() == 2) {
    return quantum::werner_state(require_double(parts[1], "Werner parameter"));
  }
  if (kind == "random" && parts.size() == 3) {
    return quantum::random_state(require_uint(parts[1], "seed"),
                                 static_cast<int>(require_uint(parts[2], "rank")));
  }
  if (kind == "separable" && parts.size() == 3) {
    return quantum::random_separable_state(require_uint(parts[1], "seed"),
                                           static_cast<int>(require_uint(parts[2], "members")));
  }
  throw ParseError("unknown state '" + std::string(spec) +
                   "' (expected bell, werner:p, random:seed:rank or separable:seed:members)");
}

quantum::DensityMatrix read_state_json(const json& j) {
  if (!j.is_object() || !j.contains("re")) throw ParseError("state JSON needs an 're' array");
  quantum::Matrix4c rho = quantum::Matrix4c::Zero();
  auto fill = [&](const char* key, bool imag) {
    if (!j.contains(key)) return;
    const auto& m = j.at(key);
    if (!m.is_array() || m.size() != 4) throw ParseError(std::string(key) + " must be 4x4");
    for (int r = 0; r < 4; ++r) {
      const auto& row = m.at(static_cast<std::size_t>(r));
      if (!row.is_array() || row.size() != 4) throw ParseError(std::string(key) + " must be 4x4");
      for (int c = 0; c < 4; ++c) {
        const auto& cell = row.at(static_cast<std::size_t>(c));
        if (!cell.is_number()) throw ParseError(std::string(key) + " entries must be numbers");
        const double v = cell.get<double>();
        rho(r, c) += imag ? quantum::Complex(0.0, v) : quantum::Complex(v, 0.0);
      }
    }
  };
  fill("re", false);
  fill("im", true);
  return quantum::DensityMatrix(rho);
}

json state_json(const quantum::DensityMatrix& rho) {
  json re = json::array();
  json im = json::array();
  for (int r = 0; r < 4; ++r) {
    json rr = json::array();
    json ii = json::array();
    for (int c = 0; c < 4; ++c) {
      rr.push_back(rho.matrix()(r, c).real());
      ii.push_back(rho.matrix()(r, c).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ii));
  }
  return {{"re", std::move(re)}, {"im", std::move(im)}};
}

json decomposition_json(const quantum::PureDecomposition& d) {
  json out = json::array();
  for (std::size_t k = 0; k < d.size(); ++k) {
    const auto& a = d.states[k].amplitudes();
    json re = json::array();
    json im = json::array();
    for (int i = 0; i < 4; ++i) {
      re.push_back(a(i).real());
      im.push_back(a(i).imag());
    }
    out.push_back({{"probability", d.probabilities[k]}, {"re", std::move(re)}, {"im", std::move(im)}});
  }
  return out;
}

}  // namespace convroof::io
