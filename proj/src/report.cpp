#include "centroaffine/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace centroaffine {

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void dump_rec(const nlohmann::ordered_json& j, std::string& out, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent) * depth, ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        out += nlohmann::json(key).dump();
        out += ": ";
        dump_rec(value, out, indent, depth + 1);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& value : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        dump_rec(value, out, indent, depth + 1);
      }
      out += "\n" + close_pad + "]";
      return;
    }
    case nlohmann::json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

}  // namespace

std::string dump_ordered(const nlohmann::ordered_json& j, int indent) {
  std::string out;
  dump_rec(j, out, indent, 0);
  out += "\n";
  return out;
}

std::string dump_compact(const nlohmann::ordered_json& j) {
  std::string out;
  if (j.is_object()) {
    out += "{";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out += ",";
      first = false;
      out += nlohmann::json(it.key()).dump() + ":" + dump_compact(it.value());
    }
    out += "}";
  } else if (j.is_array()) {
    out += "[";
    bool first = true;
    for (const auto& item : j) {
      if (!first) out += ",";
      first = false;
      out += dump_compact(item);
    }
    out += "]";
  } else if (j.is_number_float()) {
    out += format_double(j.get<double>());
  } else {
    out += j.dump();
  }
  return out;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path temp = target.string() + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + temp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("short write to " + temp.string());
  }
  fs::rename(temp, target);
}

}  // namespace centroaffine
