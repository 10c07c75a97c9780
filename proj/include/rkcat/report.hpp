#pragma once

#include <string>
#include <utility>
#include <vector>

namespace rkcat {

struct Check {
  std::string name;
  bool pass = false;
  double residual = 0.0;
  std::string details;
};

struct Report {
  std::string id;
  std::vector<Check> checks;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  void add(std::string name, bool pass, double residual, std::string details = {}) {
    checks.push_back({std::move(name), pass, residual, std::move(details)});
  }
  void append(const Report& other, const std::string& prefix = {}) {
    for (auto c : other.checks) {
      if (!prefix.empty()) c.name = prefix + "." + c.name;
      checks.push_back(std::move(c));
    }
  }
  const Check* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

}  // namespace rkcat
