#pragma once

#include "convroof/quantum.hpp"
#include "convroof/roof.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace convroof::io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// CSV with header x1,...,xd,f; lines starting with '#' and blank lines are
/// skipped. Throws ParseError with the offending line number.
SampledConvexProblem read_cloud_csv(std::istream& in);
SampledConvexProblem read_cloud_csv(const std::filesystem::path& path);
/// Full precision, same layout as read_cloud_csv.
void write_cloud_csv(std::ostream& out, const SampledConvexProblem& problem);

/// x1,...,xd,value with an empty value outside the hull.
void write_grid_csv(std::ostream& out, const RoofGrid& grid);
json grid_json(const RoofGrid& grid);

json roof_value_json(const SampledConvexProblem& problem, const RoofValue& rv);
json vector_json(const Eigen::VectorXd& v);

/// Comma-separated reals, e.g. "0.5,0.5".
Eigen::VectorXd parse_vector(std::string_view text);
/// Semicolon-separated points, e.g. "0,0.5;0.3,0.7".
std::vector<Point> parse_points(std::string_view text);

/// Six significant digits.
std::string format_number(double v);

/// Left-aligned text table.
class Table {
 public:
  explicit Table(std::vector<std::string> headers);
  void add_row(std::vector<std::string> cells);
  void print(std::ostream& out) const;

 private:
  std::vector<std::string> headers_;
  std::vector<std::vector<std::string>> rows_;
};

/// bell | werner:p | random:seed:rank | separable:seed:members
quantum::DensityMatrix parse_state(std::string_view spec);
/// {"re": 4x4, "im": 4x4}
quantum::DensityMatrix read_state_json(const json& j);
json state_json(const quantum::DensityMatrix& rho);
json decomposition_json(const quantum::PureDecomposition& d);

}  // namespace convroof::io
