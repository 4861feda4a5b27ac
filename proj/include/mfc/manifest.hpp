#pragma once

#include <string>
#include <vector>

#include "mfc/types.hpp"

namespace mfc {

// Per-run provenance record: written with status "running" before any work,
// finalized with the produced-file index afterwards. The embedded config
// text plus the seed list fully determine deterministic outputs.
struct RunManifest {
  std::string command;
  std::string config_text; // resolved flat key=value snapshot
  std::vector<std::uint64_t> seeds;
  std::string version = "mfcswarm-1";

  void write_initial(const std::string &out_dir) const;
  void finalize(const std::string &out_dir,
                const std::vector<std::string> &produced_files) const;

  static std::string manifest_path(const std::string &out_dir);
};

void ensure_directory(const std::string &path);

} // namespace mfc
