#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace kolmolab {

/// Deterministic float formatting shared by every artifact writer.
std::string format_num(double v);

/// RFC-4180 CSV assembly: fields holding commas, quotes or newlines are quoted.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header);
  void add_row(const std::vector<std::string>& fields);
  const std::string& str() const { return body_; }

 private:
  std::size_t width_;
  std::string body_;
};

/// Two-column whitespace-separated plot data.
std::string plot_data(const std::vector<double>& x, const std::vector<double>& y);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace kolmolab
