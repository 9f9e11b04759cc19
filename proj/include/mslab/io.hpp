#pragma once

// Deterministic output files: every file carries the artifact version and the
// config hash; files are written to a temporary name and renamed into place.

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mslab/core.hpp"

namespace mslab::io {

using json = nlohmann::json;

/// 64-bit FNV-1a, printed as 16 hex digits.
inline std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Hash of the canonical dump (sorted keys) of a config document.
inline std::string config_hash(const json& cfg) { return fnv1a_hex(cfg.dump()); }

struct Stamp {
  std::string config_hash;
  std::string version = kVersion;
};

/// Shortest round-trip decimal representation.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open " + tmp.string() + " for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

/// CSV with a leading comment line "# mslab <version> config=<hash>".
class Csv {
 public:
  Csv(const Stamp& st, std::vector<std::string> header) : ncol_(header.size()) {
    out_ << "# mslab " << st.version << " config=" << st.config_hash << '\n';
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != ncol_) throw Error("csv row has the wrong number of cells");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  [[nodiscard]] std::string str() const { return out_.str(); }
  void save(const std::filesystem::path& p) const { write_atomic(p, str()); }

 private:
  std::size_t ncol_;
  std::ostringstream out_;
};

inline json stamped(const Stamp& st, json body) {
  body["version"] = st.version;
  body["config_hash"] = st.config_hash;
  return body;
}

inline void save_json(const std::filesystem::path& p, const Stamp& st, json body) {
  write_atomic(p, stamped(st, std::move(body)).dump(2) + "\n");
}

/// Raw little-endian float64 grid (row-major; complex fields as interleaved re, im)
/// plus a JSON header next to it.
inline void save_grid(const std::filesystem::path& bin, const Stamp& st, const Eigen::MatrixXcd& f, json meta) {
  std::string bytes;
  bytes.reserve(static_cast<std::size_t>(f.size()) * 16);
  auto put = [&](double v) {
    unsigned char b[8];
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
    bytes.append(reinterpret_cast<const char*>(b), 8);
  };
  for (Eigen::Index i = 0; i < f.rows(); ++i)
    for (Eigen::Index j = 0; j < f.cols(); ++j) {
      put(f(i, j).real());
      put(f(i, j).imag());
    }
  write_atomic(bin, bytes);
  meta["file"] = bin.filename().string();
  meta["dtype"] = "float64-le";
  meta["layout"] = "row-major, complex interleaved";
  meta["rows"] = f.rows();
  meta["cols"] = f.cols();
  save_json(bin.string() + ".json", st, std::move(meta));
}

inline Eigen::MatrixXcd load_grid(const std::filesystem::path& bin, Eigen::Index rows, Eigen::Index cols) {
  std::ifstream f(bin, std::ios::binary);
  if (!f) throw Error("cannot open " + bin.string());
  Eigen::MatrixXcd out(rows, cols);
  auto get = [&]() {
    unsigned char b[8];
    f.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
  };
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double re = get();
      const double im = get();
      out(i, j) = {re, im};
    }
  if (!f) throw Error("short read from " + bin.string());
  return out;
}

}  // namespace mslab::io
