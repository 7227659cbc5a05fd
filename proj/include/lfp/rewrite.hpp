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

#include <set>
#include <string>
#include <vector>

#include "lfp/script.hpp"

namespace lfp::rewrite {

struct RewriteOptions {
  std::set<std::string> externals{"ext"};
  /// Directory that relative dataset paths resolve against.
  std::string base_dir;
};

/// Static passes, in the order rewrite_program applies them.
const std::vector<std::string>& static_pass_names();

/// Narrows every dataset read to the columns live after it.
script::Program rewrite_column_selection(const script::Program& p, const RewriteOptions& options = {});
/// Removes drop(columns=...) entries naming columns the frame cannot contain.
script::Program rewrite_dropped_columns(const script::Program& p, const RewriteOptions& options = {});
/// Enables lazy printing, appends a final flush and forces external-call
/// frame arguments with the frames live after the call as hints.
script::Program rewrite_lazy_io(const script::Program& p, const RewriteOptions& options = {});

script::Program rewrite_program(const script::Program& p, const std::set<std::string>& passes,
                                const RewriteOptions& options = {});

}  // namespace lfp::rewrite
