#include "manifest.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "flagsim/error.hpp"

#ifndef FLAGSIM_VERSION
#define FLAGSIM_VERSION "unknown"
#endif

namespace flagsim::cli {

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < length; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return out.str();
}

namespace {

std::string hash_inputs(const std::map<std::string, std::string>& inputs) {
  std::string blob;
  for (const auto& [name, text] : inputs) {
    blob += name;
    blob.push_back('\0');
    blob += text;
    blob.push_back('\0');
  }
  return sha256_hex(blob);
}

}  // namespace

RunManifest::RunManifest(std::string command, std::filesystem::path out_dir)
    : command_(std::move(command)), out_dir_(std::move(out_dir)) {}

void RunManifest::add_input(const std::string& name, std::string text) { inputs_[name] = std::move(text); }

void RunManifest::add_output(const std::string& relative_path) { outputs_.push_back(relative_path); }

std::string RunManifest::input_hash() const { return hash_inputs(inputs_); }

std::filesystem::path RunManifest::write() const {
  nlohmann::ordered_json j;
  j["tool"] = "flagsim";
  j["version"] = FLAGSIM_VERSION;
  j["command"] = command_;
  j["inputs"] = inputs_;
  j["input_sha256"] = input_hash();
  j["outputs"] = outputs_;
  j["simulated_seconds"] = simulated_seconds_;
  j["wall_seconds"] = wall_seconds_;
  const auto path = out_dir_ / "manifest.json";
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  return path;
}

std::string recompute_manifest_hash(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw Error("cannot read " + manifest_path.string());
  const auto j = nlohmann::json::parse(in);
  return hash_inputs(j.at("inputs").get<std::map<std::string, std::string>>());
}

}  // namespace flagsim::cli
