#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace sgrid {

inline constexpr const char* kVersion = "0.1.0";

// Domain error (bad data, bad config, model invariant broken). CLI maps it to exit 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical or resource failure inside a solver, distinct from an infeasible model.
class SolverError : public Error {
 public:
  explicit SolverError(const std::string& msg) : Error(msg) {}
};

// Filesystem / usage problems. CLI maps it to exit 2.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Shortest decimal string that round-trips to the same double. Normalizes -0.
inline std::string format_double(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error("bad numeric value '" + std::string(s) + "' in " + where);
  return v;
}

inline long parse_long(std::string_view s, const std::string& where) {
  long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error("bad integer value '" + std::string(s) + "' in " + where);
  return v;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for " + path);
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create " + path);
  out << content;
  out.flush();
  if (!out) throw IoError("write failed for " + path);
}

// Splits one CSV line. The formats here never quote fields.
inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t c = line.find(',', pos);
    std::string_view f = (c == std::string_view::npos) ? line.substr(pos)
                                                       : line.substr(pos, c - pos);
    while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.remove_suffix(1);
    while (!f.empty() && f.front() == ' ') f.remove_prefix(1);
    out.emplace_back(f);
    if (c == std::string_view::npos) break;
    pos = c + 1;
  }
  return out;
}

inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = (nl == std::string::npos)
                                ? std::string_view(text).substr(pos)
                                : std::string_view(text).substr(pos, nl - pos);
    if (!line.empty() && !(line.size() == 1 && line[0] == '\r'))
      rows.push_back(split_csv_line(line));
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  return rows;
}

// Row-at-a-time CSV builder with deterministic number formatting.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) {
    append_row_(header);
  }
  void row(const std::vector<std::string>& fields) { append_row_(fields); }
  const std::string& str() const { return text_; }

 private:
  void append_row_(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) text_ += ',';
      text_ += fields[i];
    }
    text_ += '\n';
  }
  std::string text_;
};

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string fnv1a64_hex(std::string_view data) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(data)));
  return std::string(buf);
}

inline std::string iso8601_utc_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf);
}

// Runs fn(0..count-1) on up to `threads` workers. Iterations must write only
// their own output slots; scheduling order is unspecified but results are not
// allowed to depend on it. The first exception is rethrown after all joins.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  if (threads <= 1 || count == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  unsigned workers = static_cast<unsigned>(
      std::min<std::size_t>(threads, count));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        std::size_t i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Thread count: explicit option wins, then STRANDED_GRID_THREADS, then 1.
inline unsigned resolve_threads(int requested) {
  if (requested > 0) return static_cast<unsigned>(requested);
  if (const char* env = std::getenv("STRANDED_GRID_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
    if (std::string(env) == "max") {
      unsigned hc = std::thread::hardware_concurrency();
      return hc > 0 ? hc : 1;
    }
  }
  return 1;
}

inline unsigned max_threads() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? hc : 1;
}

}  // namespace sgrid
