#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace flagsim::cli {

std::string sha256_hex(const std::string& data);

/// One manifest.json per output directory. Inputs are stored re-serialized so
/// the hash can be recomputed from the manifest alone.
class RunManifest {
 public:
  RunManifest(std::string command, std::filesystem::path out_dir);

  void add_input(const std::string& name, std::string text);
  void add_output(const std::string& relative_path);
  void set_simulated_seconds(double s) { simulated_seconds_ = s; }
  void set_wall_seconds(double s) { wall_seconds_ = s; }

  /// SHA-256 over `name \0 text \0` for the inputs in name order.
  std::string input_hash() const;
  std::filesystem::path write() const;

 private:
  std::string command_;
  std::filesystem::path out_dir_;
  std::map<std::string, std::string> inputs_;
  std::vector<std::string> outputs_;
  double simulated_seconds_ = 0.0;
  double wall_seconds_ = 0.0;
};

/// Recomputes the hash of a written manifest's inputs.
std::string recompute_manifest_hash(const std::filesystem::path& manifest_path);

}  // namespace flagsim::cli
