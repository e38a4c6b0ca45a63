// Copyright 2026 The LR-GMML Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LRGMML_CLI_H_
#define LRGMML_CLI_H_

#include <iosfwd>

namespace lrgmml {

// Entry point of the `lrgmml` tool. Subcommands: train, eval, sweep,
// gradcheck, gmml-baseline. Exit codes: 0 success, 1 usage, 2 I/O,
// 3 numerical.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out,
                 std::ostream& err);

}  // namespace lrgmml

#endif  // LRGMML_CLI_H_
