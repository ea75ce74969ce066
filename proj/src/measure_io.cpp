#include "gwd/measure_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace gwd {

namespace fs = std::filesystem;

namespace {

std::uint64_t to_little(std::uint64_t v)
{
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
  return v;
}

const char* reference_name(ReferenceKind kind)
{
  switch (kind) {
  case ReferenceKind::lebesgue: return "lebesgue";
  case ReferenceKind::masked: return "masked";
  case ReferenceKind::gibbs: return "gibbs";
  }
  return "lebesgue";
}

}  // namespace

nlohmann::json grid_header(const Grid& grid)
{
  nlohmann::json bounds = nlohmann::json::array();
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& ax : grid.axes()) {
    bounds.push_back({ax.lo, ax.hi});
    cells.push_back(ax.cells);
  }
  return {{"d", grid.dim()}, {"bounds", bounds}, {"cells", cells}, {"order", "row-major"}};
}

Grid grid_from_header(const nlohmann::json& header)
{
  const int d = header.at("d").get<int>();
  const auto& bounds = header.at("bounds");
  const auto& cells = header.at("cells");
  if (bounds.size() != static_cast<std::size_t>(d) || cells.size() != static_cast<std::size_t>(d)) {
    throw std::invalid_argument("measure header: bounds/cells do not match d");
  }
  if (header.value("order", std::string("row-major")) != "row-major") {
    throw std::invalid_argument("measure header: only row-major order is supported");
  }
  std::vector<Axis> axes;
  for (int k = 0; k < d; ++k) {
    axes.push_back({bounds[k].at(0).get<double>(), bounds[k].at(1).get<double>(), cells[k].get<int>()});
  }
  return Grid(std::move(axes));
}

void write_f64(const fs::path& path, std::span<const double> values)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (double v : values) {
    const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(v));
    char buf[8];
    std::memcpy(buf, &bits, 8);
    out.write(buf, 8);
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<double> read_f64(const fs::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<double> values;
  char buf[8];
  while (in.read(buf, 8)) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, buf, 8);
    values.push_back(std::bit_cast<double>(to_little(bits)));
  }
  if (in.gcount() != 0) throw std::runtime_error("truncated float64 file: " + path.string());
  return values;
}

fs::path write_measure(const fs::path& stem, const GridMeasure& mu)
{
  auto header = grid_header(mu.grid());
  const auto kind = mu.reference().kind();
  header["reference"] = reference_name(kind);
  const fs::path data = fs::path(stem.string() + ".f64");
  header["data"] = data.filename().string();
  write_f64(data, mu.density());
  if (kind != ReferenceKind::lebesgue) {
    const fs::path weights = fs::path(stem.string() + ".weights.f64");
    header["weights"] = weights.filename().string();
    write_f64(weights, mu.reference().weights());
  }
  const fs::path json_path = fs::path(stem.string() + ".json");
  std::ofstream out(json_path);
  if (!out) throw std::runtime_error("cannot open " + json_path.string() + " for writing");
  out << header.dump(2) << '\n';
  return json_path;
}

GridMeasure read_measure(const fs::path& header_path)
{
  std::ifstream in(header_path);
  if (!in) throw std::runtime_error("cannot open " + header_path.string());
  const auto header = nlohmann::json::parse(in);
  Grid grid = grid_from_header(header);
  const fs::path dir = header_path.parent_path();
  fs::path data = header.contains("data") ? dir / header["data"].get<std::string>()
                                          : fs::path(header_path).replace_extension(".f64");
  auto density = read_f64(data);
  if (density.size() != grid.cell_count()) throw std::runtime_error("density file size does not match the grid");

  const std::string ref = header.value("reference", std::string("lebesgue"));
  if (ref == "lebesgue") return GridMeasure(ReferenceMeasure::lebesgue(std::move(grid)), std::move(density));
  if (ref != "gibbs" && ref != "masked") throw std::runtime_error("unknown reference kind: " + ref);
  if (!header.contains("weights")) throw std::runtime_error("non-Lebesgue reference needs a weights file");
  auto weights = read_f64(dir / header["weights"].get<std::string>());
  if (weights.size() != grid.cell_count()) throw std::runtime_error("weights file size does not match the grid");
  return GridMeasure(ReferenceMeasure::from_weights(std::move(grid), std::move(weights)), std::move(density));
}

void write_measure_csv(const fs::path& path, const GridMeasure& mu)
{
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  static constexpr const char* names[] = {"x", "y", "z"};
  const Grid& g = mu.grid();
  for (int k = 0; k < g.dim(); ++k) out << names[k] << ',';
  out << "density\n" << std::setprecision(17);
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    const Point c = g.center(i);
    for (int k = 0; k < g.dim(); ++k) out << c[k] << ',';
    out << mu[i] << '\n';
  }
}

}  // namespace gwd
