/*
 * Copyright 2026 The mcf Authors.
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

#ifndef MCF_CLI_HPP
#define MCF_CLI_HPP

#include <iosfwd>

namespace mcf {

/// The `mcf` command line (gen, train, predict, eval, blend, bench). Returns
/// the process exit code: 0 success, 1 usage, 2 data or I/O, 3 numeric.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mcf

#endif  // MCF_CLI_HPP
