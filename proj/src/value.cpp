/* Copyright 2026 The LFP Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "lfp/value.hpp"

#include <algorithm>
#include <sstream>

#include "lfp/expr.hpp"

namespace lfp {

std::size_t Value::resident_bytes() const {
  if (kind == Kind::Frame && frame) return frame->resident_bytes();
  if (kind == Kind::Scalar) return 16;
  return 0;
}

namespace {

constexpr std::size_t kShownRows = 10;

void append_escaped(std::string& out, const Cell& c) {
  if (is_null(c)) {
    out += "\\N";
    return;
  }
  std::string s = format_cell(c);
  for (char ch : s) {
    switch (ch) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      default: out += ch;
    }
  }
}

std::string_view canonical_type(Dtype t) { return t.textual() ? "text" : dtype_name(t); }

}  // namespace

std::string render_frame(const Frame& f) {
  std::ostringstream out;
  std::size_t shown = std::min(f.rows(), kShownRows);
  if (f.width() == 0) {
    out << "Empty frame\n";
  } else {
    std::vector<std::vector<std::string>> cells(f.width());
    std::vector<std::size_t> widths(f.width());
    for (std::size_t c = 0; c < f.width(); ++c) {
      const Column& col = *f.columns()[c];
      widths[c] = col.name.size();
      for (std::size_t r = 0; r < shown; ++r) {
        cells[c].push_back(format_cell(col.at(r)));
        widths[c] = std::max(widths[c], cells[c].back().size());
      }
    }
    auto pad = [&out](const std::string& s, std::size_t w) { out << std::string(w - s.size(), ' ') << s; };
    for (std::size_t c = 0; c < f.width(); ++c) {
      if (c) out << "  ";
      pad(f.columns()[c]->name, widths[c]);
    }
    out << '\n';
    for (std::size_t r = 0; r < shown; ++r) {
      for (std::size_t c = 0; c < f.width(); ++c) {
        if (c) out << "  ";
        pad(cells[c][r], widths[c]);
      }
      out << '\n';
    }
  }
  out << '[' << f.rows() << " rows x " << f.width() << " columns]";
  return out.str();
}

std::string render_value(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Frame: return render_frame(*v.frame);
    case Value::Kind::Scalar: return format_cell(v.scalar);
    case Value::Kind::None: return "None";
  }
  return "None";
}

std::string canonical_text(const Value& v) {
  std::string out;
  if (v.kind == Value::Kind::None) return "none\n";
  if (v.kind == Value::Kind::Scalar) {
    out = "scalar\t";
    out += is_null(v.scalar) ? "null" : canonical_type(cell_dtype(v.scalar));
    out += '\t';
    append_escaped(out, v.scalar);
    out += '\n';
    return out;
  }
  const Frame& f = *v.frame;
  out = "frame\t" + std::to_string(f.rows());
  for (const auto& c : f.columns()) {
    out += '\t';
    out += c->name;
    out += ':';
    out += canonical_type(c->dtype);
  }
  out += '\n';
  for (std::size_t r = 0; r < f.rows(); ++r) {
    for (std::size_t c = 0; c < f.width(); ++c) {
      if (c) out += '\t';
      append_escaped(out, f.columns()[c]->at(r));
    }
    out += '\n';
  }
  return out;
}

}  // namespace lfp
