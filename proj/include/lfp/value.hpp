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

#pragma once

#include <memory>
#include <string>

#include "lfp/cell.hpp"
#include "lfp/frame.hpp"

namespace lfp {

/// Result of a task: nothing (prints), a frame, or a scalar.
struct Value {
  enum class Kind { None, Frame, Scalar };
  Kind kind = Kind::None;
  FramePtr frame;
  Cell scalar;

  static Value none() { return {}; }
  static Value of(Frame f) {
    Value v;
    v.kind = Kind::Frame;
    v.frame = std::make_shared<const Frame>(std::move(f));
    return v;
  }
  static Value of(FramePtr f) {
    Value v;
    v.kind = Kind::Frame;
    v.frame = std::move(f);
    return v;
  }
  static Value of(Cell c) {
    Value v;
    v.kind = Kind::Scalar;
    v.scalar = std::move(c);
    return v;
  }
  bool is_frame() const { return kind == Kind::Frame; }
  bool is_scalar() const { return kind == Kind::Scalar; }
  std::size_t resident_bytes() const;
};

/// Fixed-width table: at most 10 rows, then an "[N rows x M columns]" footer.
std::string render_frame(const Frame& f);
std::string render_value(const Value& v);

/// Canonical text used for output hashing: a schema line, then one line per
/// row. Category columns serialize as text.
std::string canonical_text(const Value& v);

}  // namespace lfp
