#include "cli_support.hpp"

#include <sys/utsname.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "asyncov/error.hpp"

namespace cli {

using asyncov::Error;
using asyncov::ErrorKind;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void Meta::set(const std::string& key, const std::string& value) {
  for (auto& kv : items_) {
    if (kv.first == key) {
      kv.second = value;
      return;
    }
  }
  items_.emplace_back(key, value);
}

void Meta::write_comment_block(std::ostream& out) const {
  for (const auto& [k, v] : items_) out << "# " << k << '=' << v << '\n';
}

std::string Meta::config_hash() const {
  std::string text;
  for (const auto& [k, v] : items_) text += k + '=' + v + '\n';
  return fnv1a_hex(text);
}

struct Output::Impl {
  std::ofstream file;
  bool to_stdout = true;
};

Output::Output(const std::string& path) : impl_(std::make_shared<Impl>()) {
  if (path.empty() || path == "-") return;
  impl_->file.open(path, std::ios::binary);
  if (!impl_->file) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  impl_->to_stdout = false;
}

std::ostream& Output::stream() { return impl_->to_stdout ? std::cout : impl_->file; }

void Output::close() {
  if (impl_->to_stdout) {
    std::cout.flush();
    return;
  }
  impl_->file.close();
  if (!impl_->file) throw Error(ErrorKind::Io, "failed writing output");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool has_option(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

}  // namespace

void merge_config(std::vector<std::string>& args, const std::string& path, const std::vector<std::string>& known) {
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t lineno = 0;
  bool saw_comment = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string body = trim(line);
    bool from_comment = false;
    if (body.empty()) continue;
    // An output file: its leading metadata block is the config, the table
    // that follows is data.
    if (saw_comment && body[0] != '#' && body.find('=') == std::string::npos) break;
    if (body[0] == '#' || body[0] == ';') {
      saw_comment = true;
      body = trim(body.substr(1));
      from_comment = true;
    }
    if (body.empty() || body[0] == '[') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      if (from_comment) continue;
      throw Error(ErrorKind::Usage, "config line is not key=value", lineno);
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    const bool is_known = std::find(known.begin(), known.end(), key) != known.end();
    if (!is_known) {
      if (from_comment) continue;
      throw Error(ErrorKind::Usage, "unknown config key '" + key + "'", lineno);
    }
    if (has_option(args, key)) continue;
    if (value == "true") {
      args.push_back("--" + key);
    } else if (value == "false") {
      continue;
    } else {
      args.push_back("--" + key + "=" + value);
    }
  }
}

double parse_number(const std::string& text) {
  const std::string t = trim(text);
  const auto slash = t.find('/');
  try {
    std::size_t used = 0;
    if (slash != std::string::npos) {
      const double a = std::stod(t.substr(0, slash), &used);
      if (used != slash) throw std::invalid_argument(t);
      const std::string rest = t.substr(slash + 1);
      const double b = std::stod(rest, &used);
      if (used != rest.size() || b == 0.0) throw std::invalid_argument(t);
      return a / b;
    }
    const double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::Usage, "'" + text + "' is not a number");
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(item));
  if (out.empty()) throw Error(ErrorKind::Usage, "empty list");
  return out;
}

Eigen::MatrixXd parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';')) rows.push_back(parse_list(row));
  const auto D = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd m(D, D);
  for (Eigen::Index i = 0; i < D; ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != D) {
      throw Error(ErrorKind::Usage, "covariance matrix must be square");
    }
    for (Eigen::Index j = 0; j < D; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

std::vector<double> parse_range(const std::string& text) {
  if (text.find(':') == std::string::npos) return parse_list(text);
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(parse_number(item));
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
    throw Error(ErrorKind::Usage, "range must be start:stop:step with a positive step");
  }
  std::vector<double> out;
  for (long long i = 0;; ++i) {
    const double v = parts[0] + static_cast<double>(i) * parts[2];
    if (v > parts[1] + 1e-9 * parts[2]) break;
    out.push_back(v);
  }
  return out;
}

std::string host_descriptor() {
  utsname u{};
  std::string s = "unknown";
  if (uname(&u) == 0) s = std::string(u.sysname) + " " + u.release + " " + u.machine;
  return s + " threads=" + std::to_string(std::thread::hardware_concurrency());
}

std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

}  // namespace cli
