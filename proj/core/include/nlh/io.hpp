#pragma once

#include <atomic>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlh/common.hpp"
#include "nlh/spectral.hpp"

namespace nlh {

std::uint64_t fnv1a_hash(const std::string& data);

/// Short stable hex fingerprint of a resolved config, stamped into every report.
std::string config_fingerprint(const nlohmann::json& resolved);

/// {"intervals": [[a,b],...], "points": [{"v":..,"mult":..},...]}
nlohmann::json spectral_set_json(const SpectralSet& s);

void write_text_file(const std::string& path, const std::string& content);

/// Deterministic CSV emitter: header row plus a leading comment line.
class CsvWriter {
public:
  CsvWriter(std::vector<std::string> columns, const std::string& comment);
  void row(const std::vector<double>& vals);
  void row_mixed(const std::vector<std::string>& vals);
  const std::string& str() const { return body_; }

private:
  std::vector<std::string> columns_;
  std::string body_;
};

}  // namespace nlh
