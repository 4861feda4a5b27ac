#include "mfc/manifest.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace mfc {

namespace {

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

void write_json(const std::string &path, const nlohmann::json &j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw std::runtime_error("manifest: cannot write " + path);
  out << j.dump(2) << '\n';
}

nlohmann::json base_json(const RunManifest &m) {
  nlohmann::json j;
  j["version"] = m.version;
  j["command"] = m.command;
  j["config"] = m.config_text;
  j["seeds"] = m.seeds;
  return j;
}

} // namespace

std::string RunManifest::manifest_path(const std::string &out_dir) {
  return (std::filesystem::path(out_dir) / "manifest.json").string();
}

void RunManifest::write_initial(const std::string &out_dir) const {
  ensure_directory(out_dir);
  nlohmann::json j = base_json(*this);
  j["status"] = "running";
  j["started_at"] = timestamp_utc();
  write_json(manifest_path(out_dir), j);

  // config snapshot as a standalone re-runnable file
  std::ofstream cfg(
      (std::filesystem::path(out_dir) / "config.ini").string(),
      std::ios::trunc);
  if (!cfg)
    throw std::runtime_error("manifest: cannot write config.ini");
  cfg << config_text;
}

void RunManifest::finalize(
    const std::string &out_dir,
    const std::vector<std::string> &produced_files) const {
  nlohmann::json j = base_json(*this);
  j["status"] = "complete";
  j["finished_at"] = timestamp_utc();
  j["produced_files"] = produced_files;
  write_json(manifest_path(out_dir), j);
}

void ensure_directory(const std::string &path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec)
    throw std::runtime_error("cannot create directory " + path + ": " +
                             ec.message());
}

} // namespace mfc
