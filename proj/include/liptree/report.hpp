// Certificate reports: a named list of machine-checked conditions, each with
// a pass flag and a human-readable detail string, plus free-form notes
// (e.g. corrections applied to embedded reference values).
#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace liptree {

struct CheckLine {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct CertificateReport {
  std::string title;
  std::vector<CheckLine> checks;
  std::vector<std::string> notes;

  void add(std::string name, bool pass, std::string detail = "") {
    checks.push_back({std::move(name), pass, std::move(detail)});
  }
  void note(std::string s) { notes.push_back(std::move(s)); }

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  std::vector<const CheckLine*> failures() const {
    std::vector<const CheckLine*> out;
    for (const auto& c : checks)
      if (!c.pass) out.push_back(&c);
    return out;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["title"] = title;
    j["pass"] = pass();
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
      nlohmann::ordered_json line;
      line["name"] = c.name;
      line["pass"] = c.pass;
      if (!c.detail.empty()) line["detail"] = c.detail;
      arr.push_back(line);
    }
    j["checks"] = arr;
    if (!notes.empty()) j["notes"] = notes;
    return j;
  }
};

}  // namespace liptree
