#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "csv.hpp"
#include "errors.hpp"

namespace ppnav {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Flat key=value text, one key per line, '#' starts a comment.
class Plan {
 public:
  static Plan parse(const std::string& text, const std::string& origin = "plan") {
    Plan p;
    std::istringstream is(text);
    std::string line;
    int no = 0;
    while (std::getline(is, line)) {
      ++no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw InputError(origin + ":" + std::to_string(no) + ": expected key=value, got '" + line + "'");
      const std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
      if (k.empty()) throw InputError(origin + ":" + std::to_string(no) + ": empty key");
      if (p.kv_.count(k)) throw InputError(origin + ":" + std::to_string(no) + ": duplicate key '" + k + "'");
      p.kv_[k] = v;
      p.order_.push_back(k);
    }
    return p;
  }

  static Plan load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InputError("cannot read plan file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path);
  }

  bool has(const std::string& k) const { return kv_.count(k) > 0; }

  void set(const std::string& k, const std::string& v) {
    if (!kv_.count(k)) order_.push_back(k);
    kv_[k] = v;
  }

  std::string str(const std::string& k) const {
    auto it = kv_.find(k);
    if (it == kv_.end()) throw InputError("plan is missing key '" + k + "'");
    return it->second;
  }
  std::string str(const std::string& k, const std::string& def) const { return has(k) ? str(k) : def; }

  double num(const std::string& k) const {
    const std::string v = str(k);
    try {
      return parse_double(v);
    } catch (const std::exception&) {
      throw InputError("plan key '" + k + "' is not a number: '" + v + "'");
    }
  }
  double num(const std::string& k, double def) const { return has(k) ? num(k) : def; }

  std::int64_t integer(const std::string& k) const {
    const double v = num(k);
    if (v != double(std::int64_t(v))) throw InputError("plan key '" + k + "' must be an integer");
    return std::int64_t(v);
  }
  std::int64_t integer(const std::string& k, std::int64_t def) const { return has(k) ? integer(k) : def; }

  std::uint64_t count(const std::string& k, std::uint64_t def) const {
    const auto v = integer(k, std::int64_t(def));
    if (v < 0) throw InputError("plan key '" + k + "' must be nonnegative");
    return std::uint64_t(v);
  }

  std::vector<double> list(const std::string& k) const {
    std::vector<double> out;
    std::stringstream ss(str(k));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      try {
        out.push_back(parse_double(item));
      } catch (const std::exception&) {
        throw InputError("plan key '" + k + "' has a non-numeric entry '" + item + "'");
      }
    }
    if (out.empty()) throw InputError("plan key '" + k + "' is an empty list");
    return out;
  }

  // Rejects keys outside `allowed`, naming the first offender.
  void restrict_to(const std::set<std::string>& allowed) const {
    for (const auto& k : order_)
      if (!allowed.count(k)) throw InputError("unknown plan key '" + k + "'");
  }

  const std::vector<std::string>& keys() const { return order_; }

  std::string text() const {
    std::string s;
    for (const auto& k : order_) s += k + "=" + kv_.at(k) + "\n";
    return s;
  }

 private:
  std::map<std::string, std::string> kv_;
  std::vector<std::string> order_;
};

}  // namespace ppnav
