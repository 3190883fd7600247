#include "fingertrack/server.hpp"

#include <charconv>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "fingertrack/error.hpp"
#include "fingertrack/layout.hpp"
#include "fingertrack/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fingertrack {

namespace {

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("missing file: " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("malformed JSON in " + p.string() + ": " + e.what());
  }
}

ApiResponse ok(const json& j) { return {200, dump_json(j)}; }

ApiResponse error(int status, const std::string& detail) {
  return {status, dump_json({{"error", status == 404 ? "not_found" : "bad_request"}, {"detail", detail}})};
}

struct BadRequest {
  std::string detail;
};

template <typename T>
T parse_int(const std::string& s, const char* what) {
  T v{};
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty())
    throw BadRequest{std::string("malformed ") + what + " '" + s + "'"};
  return v;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path.substr(0, path.find('?'))) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

}  // namespace

ApiSession ApiSession::load(const fs::path& dir) {
  ApiSession s;
  s.manifest_ = read_json(dir / "manifest.json");
  const json& files = s.manifest_.at("files");
  try {
    s.fields_ = load_fields(dir / files.at("fields").get<std::string>());
  } catch (const IoError&) {
    if (s.manifest_.at("n_timesteps").get<std::size_t>() != 0) throw;
  }
  if (!s.fields_.empty()) s.spec_ = s.fields_.front().spec();
  const std::size_t n = s.fields_.size();
  if (files.at("masks").size() != n || files.at("labels").size() != n)
    throw ValidationError("export manifest lists inconsistent timestep counts");
  for (std::size_t t = 0; t < n; ++t) {
    s.masks_.push_back(read_brick_u8(dir / files["masks"][t].at("data").get<std::string>(), s.spec_.cell_count()));
    s.labels_.push_back(read_brick_u32(dir / files["labels"][t].at("data").get<std::string>(), s.spec_.cell_count()));
  }
  const json fingers = read_json(dir / files.at("fingers").get<std::string>());
  for (const auto& step : fingers.at("steps")) s.fingers_.push_back(step.at("fingers").get<std::vector<json>>());
  if (s.fingers_.size() != n) throw ValidationError("fingers.json timestep count does not match the fields");
  s.tracking_ = read_json(dir / files.at("tracking_graph").get<std::string>());
  s.layout_ = read_json(dir / files.at("layout").get<std::string>());
  const json& links = s.tracking_.at("links");
  for (std::size_t i = 0; i < links.size(); ++i)
    s.link_index_[{links[i].at("t").get<int>(), links[i].at("a").get<std::uint32_t>(),
                   links[i].at("b").get<std::uint32_t>()}] = i;
  return s;
}

ApiResponse ApiSession::handle(const std::string& path) const {
  const std::vector<std::string> p = split_path(path);
  try {
    if (p.empty() || p[0] != "api") return error(404, "unknown endpoint " + path);
    if (p.size() == 2 && p[1] == "meta") return meta();
    if (p.size() == 2 && p[1] == "tracking") return tracking();
    if (p.size() == 4 && p[1] == "slice") return slice(parse_int<int>(p[2], "timestep"), parse_int<int>(p[3], "depth"));
    if (p.size() == 3 && p[1] == "fingers") return fingers(parse_int<int>(p[2], "timestep"));
    if (p.size() == 5 && p[1] == "finger")
      return finger(parse_int<int>(p[2], "timestep"), parse_int<std::uint32_t>(p[3], "finger id"), p[4]);
    if (p.size() == 5 && p[1] == "link")
      return link(parse_int<int>(p[2], "timestep"), parse_int<std::uint32_t>(p[3], "finger id"),
                  parse_int<std::uint32_t>(p[4], "finger id"));
  } catch (const BadRequest& e) {
    return error(400, e.detail);
  }
  return error(404, "unknown endpoint " + path);
}

ApiResponse ApiSession::meta() const {
  const json& grid = manifest_.at("grid");
  json j = {{"schema_version", manifest_.at("schema_version")},
            {"code_version", manifest_.at("code_version")},
            {"dataset_id", manifest_.at("config_hash")},
            {"config_hash", manifest_.at("config_hash")},
            {"config", manifest_.at("config")},
            {"timesteps", manifest_.at("timesteps")},
            {"n_timesteps", manifest_.at("n_timesteps")}};
  for (const char* key : {"dims", "spacing", "origin", "height_axis", "height_down"})
    j[key] = grid.is_null() ? json(nullptr) : grid.at(key);
  if (!fields_.empty()) {
    json heights = json::array();
    for (int k = 0; k < spec_.dims[spec_.height_axis]; ++k) heights.push_back(spec_.height_of_layer(k));
    j["layer_heights"] = heights;
  }
  return ok(j);
}

ApiResponse ApiSession::slice(int t, int z) const {
  if (t < 0 || t >= static_cast<int>(fields_.size())) return error(404, "unknown timestep " + std::to_string(t));
  const int ha = spec_.height_axis;
  const int pa = ha == 0 ? 1 : 0;
  const int pb = ha == 2 ? 1 : 2;
  if (z < 0 || z >= spec_.dims[ha]) return error(400, "depth index " + std::to_string(z) + " outside the grid");
  const int cols = spec_.dims[pa], rows = spec_.dims[pb];
  json values = json::array();
  std::map<std::uint32_t, std::vector<Vec2>> sections;
  for (int b = 0; b < rows; ++b) {
    json row = json::array();
    for (int a = 0; a < cols; ++a) {
      std::array<int, 3> c{};
      c[ha] = z;
      c[pa] = a;
      c[pb] = b;
      const VoxelId v{c[0], c[1], c[2]};
      const std::size_t q = spec_.linear(v);
      row.push_back(fields_[t].at(q));
      if (const std::uint32_t id = labels_[t][q]) {
        const Vec3 w = spec_.world(v);
        sections[id].push_back({w[pa], w[pb]});
      }
    }
    values.push_back(std::move(row));
  }
  json fingers = json::array();
  for (const auto& [id, pts] : sections) {
    const Hull h = convex_hull(pts);
    json poly = json::array();
    for (const auto& p : h.polygon) poly.push_back({p.x, p.y});
    fingers.push_back(
        {{"id", id}, {"voxels", pts.size()}, {"centroid", json::array({h.centroid.x, h.centroid.y})}, {"hull", poly}});
  }
  return ok({{"t", t},
             {"z", z},
             {"height", spec_.height_of_layer(z)},
             {"rows", rows},
             {"cols", cols},
             {"axes", {pa, pb}},
             {"values", values},
             {"fingers", fingers}});
}

ApiResponse ApiSession::fingers(int t) const {
  if (t < 0 || t >= static_cast<int>(fingers_.size())) {
    // A run with no timesteps has no fingers anywhere.
    if (fingers_.empty() && t == 0) return ok(json::array());
    return error(404, "unknown timestep " + std::to_string(t));
  }
  json out = json::array();
  for (const auto& f : fingers_[t]) {
    json s = f;
    s.erase("skeleton");
    s.erase("raw_skeleton");
    s.erase("branches");
    out.push_back(std::move(s));
  }
  return ok(out);
}

ApiResponse ApiSession::finger(int t, std::uint32_t id, const std::string& part) const {
  if (t < 0 || t >= static_cast<int>(fingers_.size())) return error(404, "unknown timestep " + std::to_string(t));
  if (id == 0 || id > fingers_[t].size())
    return error(404, "unknown finger " + std::to_string(id) + " at timestep " + std::to_string(t));
  const json& f = fingers_[t][id - 1];
  if (part == "skeleton") return ok(f.at("skeleton"));
  if (part == "branches") return ok(f.at("branches"));
  if (part == "volume") {
    std::vector<std::size_t> voxels, core;
    for (std::size_t q = 0; q < labels_[t].size(); ++q) {
      if (labels_[t][q] != id) continue;
      voxels.push_back(q);
      if (masks_[t][q] != 0) core.push_back(q);
    }
    return ok({{"t", t}, {"id", id}, {"dims", spec_.dims}, {"voxels", voxels}, {"core", core}});
  }
  return error(404, "unknown finger view '" + part + "'");
}

ApiResponse ApiSession::tracking() const {
  json j = tracking_;
  j["layout"] = layout_;
  return ok(j);
}

ApiResponse ApiSession::link(int t, std::uint32_t a, std::uint32_t b) const {
  const auto it = link_index_.find({t, a, b});
  if (it == link_index_.end())
    return error(404, "no link " + std::to_string(a) + " -> " + std::to_string(b) + " at timestep " + std::to_string(t));
  return ok(tracking_.at("links")[it->second]);
}

void serve(const ApiSession& session, const ServeOptions& options) {
  httplib::Server svr;
  auto reply = [&](const httplib::Request& req, httplib::Response& res) {
    const ApiResponse r = session.handle(req.path);
    res.status = r.status;
    res.set_content(r.body, "application/json");
    if (options.cors) res.set_header("Access-Control-Allow-Origin", "*");
  };
  svr.Get(R"(/.*)", reply);
  if (options.cors) {
    svr.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", "*");
      res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });
  }
  const int port = options.port == 0 ? svr.bind_to_any_port(options.host)
                                     : (svr.bind_to_port(options.host, options.port) ? options.port : -1);
  if (port < 0) throw IoError("cannot listen on " + options.host + ":" + std::to_string(options.port));
  std::thread notifier;
  if (options.on_ready)
    notifier = std::thread([&] {
      svr.wait_until_ready();
      options.on_ready(port, [&svr] { svr.stop(); });
    });
  svr.listen_after_bind();
  if (notifier.joinable()) notifier.join();
}

}  // namespace fingertrack
