#include "subopt/harness/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <mutex>
#include <thread>

#include "subopt/harness/experiment.hpp"

namespace subopt::harness {

int sweep_jobs() {
  if (const char* env = std::getenv(kJobsEnvVar)) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string sweep_file_name(const std::string& stem, const Json& value) {
  std::string token = value.is_string() ? value.get<std::string>() : value.dump();
  for (char& ch : token) {
    const bool keep = (ch >= 'A' && ch <= 'Z') || (ch >= 'a' && ch <= 'z') ||
                      (ch >= '0' && ch <= '9') || ch == '.' || ch == '+' || ch == '-';
    if (!keep) ch = '_';
  }
  return stem + "_" + token + ".jsonl";
}

std::vector<std::string> sweep(const Json& base_config, const std::string& param_path,
                               const std::vector<Json>& values, const std::string& out_dir,
                               int jobs) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  // Build and validate every member before running any of them.
  std::vector<RunConfig> configs;
  std::vector<std::string> paths;
  std::string stem = "run";
  if (base_config.contains("output") && base_config.at("output").contains("path")) {
    const auto p = std::filesystem::path(base_config.at("output").at("path").get<std::string>());
    if (!p.stem().empty()) stem = p.stem().string();
  }
  for (const auto& v : values) {
    configs.push_back(parse_config(set_dotted(base_config, param_path, v)));
    paths.push_back((std::filesystem::path(out_dir) / sweep_file_name(stem, v)).string());
  }
  std::filesystem::create_directories(out_dir);

  const int workers =
      std::min<int>(jobs > 0 ? jobs : sweep_jobs(), static_cast<int>(configs.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        run_experiment(configs[i], paths[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return paths;
}

}  // namespace subopt::harness
