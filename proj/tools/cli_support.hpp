#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace cli {

/// Shortest text that always reads back to the same double: %.17g.
std::string g17(double v);

/// 64-bit FNV-1a of a byte string, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

std::string read_file(const std::string& path);

/// Ordered key=value metadata written at the top of every output.
class Meta {
 public:
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value) { set(key, g17(value)); }
  void set(const std::string& key, int value) { set(key, std::to_string(value)); }
  void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }
  const std::vector<std::pair<std::string, std::string>>& items() const { return items_; }

  /// "# key=value" lines.
  void write_comment_block(std::ostream& out) const;
  /// FNV-1a of the block text.
  std::string config_hash() const;

 private:
  std::vector<std::pair<std::string, std::string>> items_;
};

/// Opens `path` for writing, or returns stdout for "-" / empty.
class Output {
 public:
  explicit Output(const std::string& path);
  std::ostream& stream();
  void close();

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

/// Reads a key=value config file and appends `--key=value` (or `--key` for
/// true flags) to args for every key the command line does not already set.
/// Lines of the form "# key=value" are accepted only for keys in `known`,
/// so the metadata block of an output file can be fed back as a config.
void merge_config(std::vector<std::string>& args, const std::string& path, const std::vector<std::string>& known);

/// Parses "a,b,c" into doubles; accepts fractions such as "1/30".
std::vector<double> parse_list(const std::string& text);
double parse_number(const std::string& text);

/// Parses "a,b;c,d" into a square matrix.
Eigen::MatrixXd parse_matrix(const std::string& text);

/// Expands "1,5,10" or "start:stop:step" (inclusive) into values.
std::vector<double> parse_range(const std::string& text);

std::string host_descriptor();

/// JSON escaping of a string literal.
std::string json_string(const std::string& s);

}  // namespace cli
