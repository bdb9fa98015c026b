#include "nlh/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

namespace nlh {

int parallel_degree(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("NLH_PARALLEL")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, int degree) {
  int deg = parallel_degree(degree);
  if (deg <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  for (int t = 0; t < deg; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ConfigError("loglog_slope: need at least two matching samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = x.size();
  for (std::size_t i = 0; i < m; ++i) {
    double lx = std::log(x[i]), ly = std::log(std::max(y[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a_hash(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string config_fingerprint(const nlohmann::json& resolved) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, fnv1a_hash(resolved.dump()));
  return buf;
}

nlohmann::json spectral_set_json(const SpectralSet& s) {
  nlohmann::json j;
  j["intervals"] = nlohmann::json::array();
  for (const auto& iv : s.intervals) j["intervals"].push_back({iv.lo, iv.hi});
  j["points"] = nlohmann::json::array();
  for (const auto& p : s.points) j["points"].push_back({{"v", p.value}, {"mult", p.multiplicity}});
  if (!s.provenance.empty()) j["provenance"] = s.provenance;
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << content;
  if (!out) throw ConfigError("failed writing output file: " + path);
}

CsvWriter::CsvWriter(std::vector<std::string> columns, const std::string& comment)
    : columns_(std::move(columns)) {
  if (!comment.empty()) body_ += "# " + comment + "\n";
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    body_ += columns_[i];
    body_ += (i + 1 == columns_.size()) ? "\n" : ",";
  }
}

void CsvWriter::row(const std::vector<double>& vals) {
  for (std::size_t i = 0; i < vals.size(); ++i) {
    body_ += format_double(vals[i]);
    body_ += (i + 1 == vals.size()) ? "\n" : ",";
  }
}

void CsvWriter::row_mixed(const std::vector<std::string>& vals) {
  for (std::size_t i = 0; i < vals.size(); ++i) {
    body_ += vals[i];
    body_ += (i + 1 == vals.size()) ? "\n" : ",";
  }
}

}  // namespace nlh
