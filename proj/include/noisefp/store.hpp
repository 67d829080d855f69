#ifndef NOISEFP_STORE_HPP
#define NOISEFP_STORE_HPP

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>

#include "error.hpp"
#include "matching.hpp"

namespace noisefp {

namespace detail {

inline std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Owns a descriptor holding a flock(2) advisory lock.
class LockedFile {
 public:
  LockedFile(const std::filesystem::path& path, bool exclusive) {
    fd_ = exclusive ? ::open(path.c_str(), O_RDWR | O_CREAT, 0644)
                    : ::open(path.c_str(), O_RDONLY);
    if (fd_ < 0)
      throw StoreError("cannot open " + path.string() + ": " + std::strerror(errno));
    if (::flock(fd_, exclusive ? LOCK_EX : LOCK_SH) != 0) {
      const int err = errno;
      ::close(fd_);
      throw StoreError("cannot lock " + path.string() + ": " + std::strerror(err));
    }
  }
  LockedFile(const LockedFile&) = delete;
  LockedFile& operator=(const LockedFile&) = delete;
  ~LockedFile() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }

  std::string read_all() const {
    std::string out;
    char buf[4096];
    ::lseek(fd_, 0, SEEK_SET);
    for (;;) {
      const ssize_t got = ::read(fd_, buf, sizeof buf);
      if (got < 0) {
        if (errno == EINTR) continue;
        throw StoreError(std::string("read failed: ") + std::strerror(errno));
      }
      if (got == 0) break;
      out.append(buf, std::size_t(got));
    }
    return out;
  }

  void replace_contents(const std::string& data) {
    if (::ftruncate(fd_, 0) != 0 || ::lseek(fd_, 0, SEEK_SET) != 0)
      throw StoreError(std::string("truncate failed: ") + std::strerror(errno));
    std::size_t done = 0;
    while (done < data.size()) {
      const ssize_t put = ::write(fd_, data.data() + done, data.size() - done);
      if (put < 0) {
        if (errno == EINTR) continue;
        throw StoreError(std::string("write failed: ") + std::strerror(errno));
      }
      done += std::size_t(put);
    }
    ::fsync(fd_);
  }

 private:
  int fd_ = -1;
};

}  // namespace detail

/// Text form of a template: `key=value` lines plus one `quantiles:` line.
inline std::string serialize_template(const FingerprintTemplate& t) {
  using detail::fmt12;
  std::ostringstream o;
  o << "version=" << t.version << "\n"
    << "user_id=" << t.user_id << "\n"
    << "modality=" << to_string(t.modality) << "\n"
    << "enroll_count=" << t.enroll_count << "\n"
    << "moments.n=" << t.moments.n << "\n"
    << "moments.mean=" << fmt12(t.moments.mean) << "\n"
    << "moments.sd=" << fmt12(t.moments.sd) << "\n"
    << "moments.skewness=" << fmt12(t.moments.skewness) << "\n"
    << "moments.excess_kurtosis=" << fmt12(t.moments.excess_kurtosis) << "\n"
    << "tail.tail_fraction=" << fmt12(t.tail.tail_fraction) << "\n"
    << "tail.lower_dev=" << fmt12(t.tail.lower_dev) << "\n"
    << "tail.upper_dev=" << fmt12(t.tail.upper_dev) << "\n"
    << "tail.combined_dev=" << fmt12(t.tail.combined_dev) << "\n"
    << "tail.normality_stat=" << fmt12(t.tail.normality_stat) << "\n"
    << "tail.normality_pass=" << (t.tail.normality_pass ? "true" : "false") << "\n"
    << "quantiles:";
  for (std::size_t k = 0; k < t.quantiles.size(); ++k)
    o << (k ? "," : "") << fmt12(t.quantiles[k]);
  o << "\n";
  return o.str();
}

inline FingerprintTemplate parse_template(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::string quantiles_line;
  bool have_quantiles = false;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("quantiles:", 0) == 0) {
      quantiles_line = line.substr(10);
      have_quantiles = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw FormatError("template line without '=': " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }

  auto field = [&](const char* key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw FormatError(std::string("template missing ") + key);
    return it->second;
  };
  auto real = [&](const char* key) { return detail::parse_real(field(key), 0); };
  auto count = [&](const char* key) {
    const double v = real(key);
    if (v < 0 || v != std::floor(v))
      throw FormatError(std::string("template field ") + key + " is not a count");
    return static_cast<std::size_t>(v);
  };

  FingerprintTemplate t;
  if (field("version") != std::to_string(kTemplateVersion))
    throw UnsupportedError("template version '" + field("version") +
                           "' is not supported");
  t.version = kTemplateVersion;
  t.user_id = field("user_id");
  t.modality = parse_modality(field("modality"));
  t.enroll_count = count("enroll_count");
  t.moments.n = count("moments.n");
  t.moments.mean = real("moments.mean");
  t.moments.sd = real("moments.sd");
  t.moments.skewness = real("moments.skewness");
  t.moments.excess_kurtosis = real("moments.excess_kurtosis");
  t.tail.tail_fraction = real("tail.tail_fraction");
  t.tail.lower_dev = real("tail.lower_dev");
  t.tail.upper_dev = real("tail.upper_dev");
  t.tail.combined_dev = real("tail.combined_dev");
  t.tail.normality_stat = real("tail.normality_stat");
  const std::string& pass = field("tail.normality_pass");
  if (pass != "true" && pass != "false")
    throw FormatError("tail.normality_pass must be true or false");
  t.tail.normality_pass = pass == "true";

  if (!have_quantiles) throw FormatError("template missing quantiles line");
  const auto parts = detail::split_commas(quantiles_line);
  if (parts.size() != kQuantileKnots)
    throw FormatError("template needs 101 quantiles, found " +
                      std::to_string(parts.size()));
  for (std::size_t k = 0; k < kQuantileKnots; ++k) {
    t.quantiles[k] = detail::parse_real(parts[k], 0);
    if (k > 0 && t.quantiles[k] < t.quantiles[k - 1])
      throw FormatError("template quantiles are not non-decreasing");
  }
  return t;
}

/// One file per (user, modality) under a root directory. Writers hold an
/// exclusive flock on the file; readers a shared one.
class TemplateStore {
 public:
  explicit TemplateStore(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const noexcept { return root_; }

  std::filesystem::path path_for(const std::string& user_id, Modality m) const {
    check_user_id(user_id);
    return root_ / (user_id + "." + std::string(to_string(m)) + ".tpl");
  }

  bool contains(const std::string& user_id, Modality m) const {
    return std::filesystem::exists(path_for(user_id, m));
  }

  std::filesystem::path save(const FingerprintTemplate& t) const {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec) throw StoreError("cannot create store " + root_.string() + ": " + ec.message());
    const auto path = path_for(t.user_id, t.modality);
    detail::LockedFile f(path, /*exclusive=*/true);
    f.replace_contents(serialize_template(t));
    return path;
  }

  FingerprintTemplate load(const std::string& user_id, Modality m) const {
    const auto path = path_for(user_id, m);
    if (!std::filesystem::exists(path))
      throw StoreError("no " + std::string(to_string(m)) + " template for user '" +
                       user_id + "' in " + root_.string());
    detail::LockedFile f(path, /*exclusive=*/false);
    FingerprintTemplate t = parse_template(f.read_all());
    if (t.user_id != user_id || t.modality != m)
      throw StoreError("template file " + path.string() + " holds another identity");
    return t;
  }

 private:
  static void check_user_id(const std::string& id) {
    if (id.empty() || id.size() > 128)
      throw StoreError("user id must have 1..128 characters");
    for (char c : id) {
      const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                      (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
      if (!ok) throw StoreError("user id may only use [A-Za-z0-9_.-]");
    }
    if (id.front() == '.') throw StoreError("user id may not start with '.'");
  }

  std::filesystem::path root_;
};

}  // namespace noisefp

#endif  // NOISEFP_STORE_HPP
