#pragma once

#include "json.hpp"

#include <string>

namespace centroaffine {

/// Fixed 17-significant-digit rendering with C-locale digits; non-finite
/// values render as JSON null so emitted documents always parse.
std::string format_double(double v);

/// Serialize an insertion-ordered JSON tree with every floating value passed
/// through format_double, so identical trees give byte-identical text.
std::string dump_ordered(const nlohmann::ordered_json& j, int indent = 2);

/// Single-line variant of dump_ordered for newline-delimited logs.
std::string dump_compact(const nlohmann::ordered_json& j);

/// Write through a sibling temp file plus rename; readers never observe a
/// partially written document.  Parent directories are created on demand.
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace centroaffine
