#pragma once

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "gaitkit/backend/protocol.hpp"
#include "gaitkit/util/fs.hpp"

namespace gaitkit::backend {

namespace detail {

/// Runs `exe --manifest <manifest>` with stdout and stderr appended to
/// `log_path`. Returns the exit status, or -signal when killed by a signal.
/// Throws BackendTimeout after killing the child once `timeout_s` elapses.
inline int spawn_and_wait(const std::filesystem::path& exe, const std::filesystem::path& manifest,
                          const std::filesystem::path& log_path, double timeout_s) {
  const std::string exe_s = exe.string(), flag = "--manifest", manifest_s = manifest.string();
  const int log_fd = ::open(log_path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (log_fd < 0) throw Error(ErrorCode::Io, "cannot open backend log " + log_path.string());

  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(log_fd);
    throw Error(ErrorCode::BackendFailed, "fork failed");
  }
  if (pid == 0) {
    ::dup2(log_fd, STDOUT_FILENO);
    ::dup2(log_fd, STDERR_FILENO);
    std::vector<char*> argv{const_cast<char*>(exe_s.c_str()), const_cast<char*>(flag.c_str()),
                            const_cast<char*>(manifest_s.c_str()), nullptr};
    ::execv(exe_s.c_str(), argv.data());
    const std::string msg = "exec failed: " + exe_s + "\n";
    [[maybe_unused]] auto n = ::write(STDERR_FILENO, msg.data(), msg.size());
    ::_exit(127);
  }
  ::close(log_fd);

  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
  int status = 0;
  for (auto pause = std::chrono::milliseconds(1);; pause = std::min(pause * 2, std::chrono::milliseconds(50))) {
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0) throw Error(ErrorCode::BackendFailed, "waitpid failed");
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      throw Error(ErrorCode::BackendTimeout,
                  "backend " + exe_s + " exceeded " + std::to_string(timeout_s) + " s and was killed");
    }
    std::this_thread::sleep_for(pause);
  }
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return WIFSIGNALED(status) ? -WTERMSIG(status) : -1;
}

inline std::string tail(const std::string& text, std::size_t max_bytes) {
  return text.size() <= max_bytes ? text : text.substr(text.size() - max_bytes);
}

}  // namespace detail

/// Timing sidecar a backend may write next to the manifest:
/// `<manifest>.timings.json`, an object mapping frame ordinal to seconds.
inline std::filesystem::path timings_path(const std::filesystem::path& manifest) {
  auto p = manifest;
  p += ".timings.json";
  return p;
}

/// Executes a backend over a written manifest. A nonzero exit or any missing
/// output leaves the job Failed with the missing frames enumerated; outputs
/// that were produced stay usable. A timeout throws after marking the job
/// Failed.
inline void run_backend(BackendJob& job, const std::filesystem::path& executable, const std::filesystem::path& manifest,
                        double timeout_s, const std::filesystem::path& log_path) {
  if (!(timeout_s > 0.0)) throw Error(ErrorCode::InvalidArgument, "timeout must be positive");
  if (!std::filesystem::exists(executable)) {
    throw Error(ErrorCode::BackendFailed, "backend executable not found: " + executable.string());
  }
  for (const auto& r : job.pose) {
    if (!std::filesystem::exists(r.image_path)) {
      throw Error(ErrorCode::Io, "pose request image missing at dispatch: " + r.image_path.string());
    }
  }
  job.start();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    job.exit_code = detail::spawn_and_wait(executable, manifest, log_path, timeout_s);
  } catch (const Error& e) {
    job.diagnostics = e.what();
    job.finish(false);
    throw;
  }
  job.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (std::filesystem::exists(log_path)) job.diagnostics = detail::tail(util::read_file(log_path), 8192);

  job.missing_outputs.clear();
  std::vector<long> produced;
  for (const auto& [frame, out] : job.outputs()) {
    (std::filesystem::exists(out) ? produced : job.missing_outputs).push_back(frame);
  }

  job.seconds_per_request.clear();
  bool have_timings = false;
  if (const auto tp = timings_path(manifest); std::filesystem::exists(tp)) {
    try {
      const auto tj = nlohmann::json::parse(util::read_file(tp));
      for (const auto& [k, v] : tj.items()) job.seconds_per_request[std::stol(k)] = v.get<double>();
      have_timings = true;
    } catch (const std::exception&) {
      job.seconds_per_request.clear();
    }
  }
  if (!have_timings && !produced.empty()) {
    const double each = job.wall_seconds / static_cast<double>(produced.size());
    for (long f : produced) job.seconds_per_request[f] = each;
  }
  job.finish(job.exit_code == 0 && job.missing_outputs.empty());
}

}  // namespace gaitkit::backend
