#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "fingertrack/field.hpp"

namespace fingertrack {

struct ApiResponse {
  int status = 200;
  std::string body;
};

/// Read-only view of an exported run. Every response is a pure function of
/// the export and the request path.
class ApiSession {
 public:
  /// Loads a directory written by export_result. Throws IoError or
  /// ValidationError.
  static ApiSession load(const std::filesystem::path& dir);

  /// GET routing. The query string, if any, is ignored.
  ApiResponse handle(const std::string& path) const;

  std::size_t timestep_count() const { return fields_.size(); }
  const nlohmann::json& manifest() const { return manifest_; }

 private:
  ApiResponse meta() const;
  ApiResponse slice(int t, int z) const;
  ApiResponse fingers(int t) const;
  ApiResponse finger(int t, std::uint32_t id, const std::string& part) const;
  ApiResponse tracking() const;
  ApiResponse link(int t, std::uint32_t a, std::uint32_t b) const;

  nlohmann::json manifest_;
  GridSpec spec_;
  std::vector<ScalarField> fields_;
  std::vector<std::vector<std::uint8_t>> masks_;
  std::vector<std::vector<std::uint32_t>> labels_;
  std::vector<std::vector<nlohmann::json>> fingers_;  // [t][id - 1], full records
  nlohmann::json tracking_;
  nlohmann::json layout_;
  std::map<std::tuple<int, std::uint32_t, std::uint32_t>, std::size_t> link_index_;
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0: any free port
  bool cors = false;
  // Called once the server accepts connections, from a helper thread, with
  // the bound port and a function that stops the server.
  std::function<void(int, std::function<void()>)> on_ready;
};

/// Blocks serving `session` until the process is stopped or on_ready's stop
/// function is called.
void serve(const ApiSession& session, const ServeOptions& options);

}  // namespace fingertrack
