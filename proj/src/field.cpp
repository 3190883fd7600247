#include "fingertrack/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

#include "fingertrack/error.hpp"

namespace fingertrack {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "bricks are read and written as native little-endian");

Vec3 GridSpec::world_from_index(const Vec3& idx) const {
  Vec3 p;
  for (int a = 0; a < 3; ++a) p[a] = origin[a] + axis_sign(a) * spacing * idx[a];
  return p;
}

Vec3 GridSpec::index_from_world(const Vec3& p) const {
  Vec3 idx;
  for (int a = 0; a < 3; ++a) idx[a] = (p[a] - origin[a]) / (axis_sign(a) * spacing);
  return idx;
}

double GridSpec::domain_top() const {
  const double h0 = height_of_layer(0);
  const double h1 = height_of_layer(dims[height_axis] - 1);
  return std::max(h0, h1) + 0.5 * spacing;
}

double GridSpec::domain_bottom() const {
  const double h0 = height_of_layer(0);
  const double h1 = height_of_layer(dims[height_axis] - 1);
  return std::min(h0, h1) - 0.5 * spacing;
}

void GridSpec::validate() const {
  for (int a = 0; a < 3; ++a)
    if (dims[a] < 3) throw ValidationError("grid dims must be >= 3 on every axis");
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ValidationError("grid spacing must be positive");
  if (height_axis < 0 || height_axis > 2) throw ValidationError("height_axis must be 0, 1 or 2");
  for (int a = 0; a < 3; ++a)
    if (!std::isfinite(origin[a])) throw ValidationError("grid origin must be finite");
}

ScalarField::ScalarField(GridSpec spec, std::vector<double> values, int timestep)
    : spec_(spec), values_(std::move(values)), timestep_(timestep) {
  spec_.validate();
  if (values_.size() != spec_.cell_count())
    throw ValidationError("payload size mismatch: expected " + std::to_string(spec_.cell_count()) + " values, got " +
                          std::to_string(values_.size()));
  for (std::size_t n = 0; n < values_.size(); ++n) {
    if (!std::isfinite(values_[n])) throw ValidationError("non-finite density at index " + std::to_string(n));
    if (values_[n] < 0.0) throw ValidationError("negative density at index " + std::to_string(n));
  }
}

double ScalarField::value_at(const VoxelId& v) const {
  if (!spec_.contains(v))
    throw OutOfBounds("voxel (" + std::to_string(v.i) + "," + std::to_string(v.j) + "," + std::to_string(v.k) +
                      ") outside grid");
  return values_[spec_.linear(v)];
}

double ScalarField::max_value() const {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

double trilinear_sample(const ScalarField& field, const Vec3& p) {
  const GridSpec& spec = field.spec();
  const Vec3 u = spec.index_from_world(p);
  int base[3];
  double t[3];
  for (int a = 0; a < 3; ++a) {
    const double hi = spec.dims[a] - 1;
    const double slack = 1e-12 * std::max(1.0, hi);
    if (!(u[a] >= -slack && u[a] <= hi + slack)) throw OutOfBounds("sample point outside the hull of cell centers");
    const double c = std::clamp(u[a], 0.0, hi);
    base[a] = std::min(static_cast<int>(std::floor(c)), spec.dims[a] - 2);
    t[a] = c - base[a];
  }
  auto v = [&](int di, int dj, int dk) { return field.at(base[0] + di, base[1] + dj, base[2] + dk); };
  const double c00 = v(0, 0, 0) + t[0] * (v(1, 0, 0) - v(0, 0, 0));
  const double c10 = v(0, 1, 0) + t[0] * (v(1, 1, 0) - v(0, 1, 0));
  const double c01 = v(0, 0, 1) + t[0] * (v(1, 0, 1) - v(0, 0, 1));
  const double c11 = v(0, 1, 1) + t[0] * (v(1, 1, 1) - v(0, 1, 1));
  const double c0 = c00 + t[1] * (c10 - c00);
  const double c1 = c01 + t[1] * (c11 - c01);
  return c0 + t[2] * (c1 - c0);
}

namespace {

template <typename T>
std::vector<T> read_raw(const fs::path& path, std::size_t expected) {
  std::error_code ec;
  const auto bytes = fs::file_size(path, ec);
  if (ec) throw IoError("missing file: " + path.string());
  if (bytes != expected * sizeof(T))
    throw ValidationError("payload size mismatch in " + path.string() + ": expected " +
                          std::to_string(expected * sizeof(T)) + " bytes, got " + std::to_string(bytes));
  std::vector<T> out(expected);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw IoError("short read on " + path.string());
  return out;
}

template <typename T>
void write_raw(const fs::path& path, std::span<const T> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size_bytes()));
  if (!out) throw IoError("write failed on " + path.string());
}

}  // namespace

void write_brick_u8(const fs::path& path, std::span<const std::uint8_t> data) { write_raw(path, data); }
void write_brick_u32(const fs::path& path, std::span<const std::uint32_t> data) { write_raw(path, data); }
std::vector<std::uint8_t> read_brick_u8(const fs::path& path, std::size_t expected) {
  return read_raw<std::uint8_t>(path, expected);
}
std::vector<std::uint32_t> read_brick_u32(const fs::path& path, std::size_t expected) {
  return read_raw<std::uint32_t>(path, expected);
}

std::vector<ScalarField> load_fields(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("missing file: " + manifest_path.string());
  nlohmann::json m;
  try {
    in >> m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed manifest " + manifest_path.string() + ": " + e.what());
  }

  GridSpec spec;
  try {
    const auto dims = m.at("dims").get<std::vector<int>>();
    if (dims.size() != 3) throw ValidationError("manifest dims must have 3 entries");
    spec.dims = {dims[0], dims[1], dims[2]};
    spec.spacing = m.value("spacing", 1.0);
    if (m.contains("origin")) {
      const auto o = m.at("origin").get<std::vector<double>>();
      if (o.size() != 3) throw ValidationError("manifest origin must have 3 entries");
      spec.origin = {o[0], o[1], o[2]};
    }
    spec.height_axis = m.value("height_axis", 2);
    spec.height_down = m.value("height_down", true);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed manifest grid block: ") + e.what());
  }
  spec.validate();

  const std::string dtype = m.value("dtype", std::string("f32"));
  if (dtype != "f32" && dtype != "f64") throw ValidationError("unsupported dtype " + dtype);
  if (m.value("endianness", std::string("little")) != "little")
    throw ValidationError("only little-endian payloads are supported");

  const auto files = m.at("files").get<std::vector<std::string>>();
  const int n_timesteps = m.value("n_timesteps", static_cast<int>(files.size()));
  if (n_timesteps != static_cast<int>(files.size()))
    throw ValidationError("n_timesteps does not match the number of files");
  const auto first_t = m.value("first_timestep", 0);

  std::vector<ScalarField> out;
  out.reserve(files.size());
  const fs::path base = manifest_path.parent_path();
  for (std::size_t t = 0; t < files.size(); ++t) {
    const fs::path brick = base / files[t];
    std::vector<double> values;
    if (dtype == "f32") {
      const auto raw = read_raw<float>(brick, spec.cell_count());
      values.assign(raw.begin(), raw.end());
    } else {
      values = read_raw<double>(brick, spec.cell_count());
    }
    try {
      out.emplace_back(spec, std::move(values), first_t + static_cast<int>(t));
    } catch (const ValidationError& e) {
      throw ValidationError(brick.string() + ": " + e.what());
    }
  }
  return out;
}

fs::path save_fields(const fs::path& dir, std::span<const ScalarField> fields, BrickType dtype) {
  fs::create_directories(dir);
  nlohmann::json m;
  GridSpec spec;
  if (!fields.empty()) spec = fields.front().spec();
  m["dims"] = {spec.dims[0], spec.dims[1], spec.dims[2]};
  m["spacing"] = spec.spacing;
  m["origin"] = {spec.origin.x, spec.origin.y, spec.origin.z};
  m["height_axis"] = spec.height_axis;
  m["height_down"] = spec.height_down;
  m["n_timesteps"] = fields.size();
  m["first_timestep"] = fields.empty() ? 0 : fields.front().timestep();
  m["dtype"] = dtype == BrickType::f32 ? "f32" : "f64";
  m["endianness"] = "little";
  nlohmann::json files = nlohmann::json::array();
  for (const auto& f : fields) {
    if (!(f.spec() == spec)) throw ValidationError("all timesteps must share one grid");
    const std::string name = "t" + std::to_string(f.timestep()) + ".raw";
    files.push_back(name);
    if (dtype == BrickType::f32) {
      std::vector<float> raw(f.values().begin(), f.values().end());
      write_raw<float>(dir / name, raw);
    } else {
      write_raw<double>(dir / name, f.values());
    }
  }
  m["files"] = files;
  const fs::path manifest = dir / "manifest.json";
  std::ofstream out(manifest, std::ios::trunc);
  if (!out) throw IoError("cannot write " + manifest.string());
  out << m.dump(2) << '\n';
  return manifest;
}

}  // namespace fingertrack
