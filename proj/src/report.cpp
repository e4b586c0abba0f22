#include "dios/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "dios/errors.hpp"

namespace dios {

namespace {

constexpr const char* kVersion = "0.1.0";

void dump(const nlohmann::json& j, std::string& out, int indent) {
  auto pad = [&](int level) { out.append(size_t(level) * 2, ' '); };
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map: sorted keys
        if (!first) out += ",\n";
        first = false;
        pad(indent + 1);
        out += nlohmann::json(it.key()).dump();
        out += ": ";
        dump(it.value(), out, indent + 1);
      }
      out += "\n";
      pad(indent);
      out += "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += ",\n";
        first = false;
        pad(indent + 1);
        dump(e, out, indent + 1);
      }
      out += "\n";
      pad(indent);
      out += "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      double v = j.get<double>();
      if (!std::isfinite(v)) throw Error("report contains a non-finite number");
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      return;
    }
    default:
      out += j.dump();  // strings (escaped), integers, booleans, null
      return;
  }
}

void reject_non_finite(const nlohmann::json& j) {
  if (j.is_number_float() && !std::isfinite(j.get<double>()))
    throw Error("report contains a non-finite number");
  if (j.is_structured())
    for (const auto& e : j) reject_non_finite(e);
}

}  // namespace

std::string canonical_dump(const nlohmann::json& j) {
  std::string out;
  dump(j, out, 0);
  out += "\n";
  return out;
}

nlohmann::json tool_info() {
  return {{"name", "dios"}, {"version", kVersion}};
}

void emit_report(const nlohmann::json& body, const nlohmann::json& config_echo,
                 const std::string& path, double timing_seconds) {
  nlohmann::json envelope{
      {"tool", tool_info()}, {"config", config_echo}, {"report", body}};
  if (timing_seconds >= 0) envelope["timing"] = {{"seconds", timing_seconds}};
  reject_non_finite(envelope);
  std::string text = canonical_dump(envelope);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw ConfigError("failed writing report to '" + path + "'");
}

}  // namespace dios
