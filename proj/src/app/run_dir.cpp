#include "csgame/app/run_dir.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "csgame/error.hpp"

namespace csgame {

namespace fs = std::filesystem;

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 unavailable");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_, data, n); }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, md, &len);
    std::string out;
    for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

std::string utc_stamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_file_hex(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read '{}'", path.string()));
  Sha256 h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    h.update(buf, static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

RunDirectory::RunDirectory(const fs::path& root, const std::string& command, const std::string& config_hash)
    : root_(root) {
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError(fmt::format("cannot create '{}': {}", root.string(), ec.message()));
  const std::string base = fmt::format("{}-{}", config_hash.substr(0, 12), utc_stamp());
  for (int k = 0;; ++k) {
    const fs::path candidate = root / (k == 0 ? base : fmt::format("{}-{}", base, k));
    if (fs::create_directory(candidate, ec)) {
      dir_ = candidate;
      break;
    }
    if (ec) throw IoError(fmt::format("cannot create '{}': {}", candidate.string(), ec.message()));
  }
  manifest_["command"] = command;
  manifest_["config_hash"] = config_hash;
  manifest_["run_dir"] = dir_.filename().string();
  manifest_["stages"] = nlohmann::json::array();
}

void RunDirectory::record(const std::string& name) {
  if (std::find(outputs_.begin(), outputs_.end(), name) == outputs_.end()) outputs_.push_back(name);
}

void RunDirectory::write_json(const std::string& name, const nlohmann::json& value) {
  std::ofstream out(file(name));
  out << value.dump(2) << '\n';
  if (!out) throw IoError(fmt::format("cannot write '{}'", file(name).string()));
  record(name);
}

void RunDirectory::stage(const std::string& name, double seconds) {
  manifest_["stages"].push_back({{"name", name}, {"wall_seconds", seconds}});
}

fs::path RunDirectory::finalize(int exit_code) {
  const fs::path path = file("manifest.json");
  if (finalized_) return path;
  finalized_ = true;
  manifest_["exit_code"] = exit_code;
  nlohmann::json files = nlohmann::json::array();
  for (const auto& name : outputs_) {
    const fs::path p = file(name);
    if (!fs::exists(p)) continue;
    files.push_back({{"path", name}, {"bytes", fs::file_size(p)}, {"sha256", sha256_file_hex(p)}});
  }
  manifest_["outputs"] = files;
  {
    std::ofstream out(path);
    out << manifest_.dump(2) << '\n';
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  }
  nlohmann::json line = {{"run_dir", dir_.filename().string()},
                         {"command", manifest_["command"]},
                         {"config_hash", manifest_["config_hash"]},
                         {"exit_code", exit_code},
                         {"manifest_sha256", sha256_file_hex(path)}};
  std::ofstream log(root_ / "runs.jsonl", std::ios::app);
  log << line.dump() << '\n';
  if (!log) throw IoError(fmt::format("cannot append to '{}'", (root_ / "runs.jsonl").string()));
  return path;
}

}  // namespace csgame
