// Copyright 2026 The bevrpn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BEVRPN_TESTS__FILE_TREE_HPP_
#define BEVRPN_TESTS__FILE_TREE_HPP_

#include <filesystem>
#include <map>
#include <string>

namespace files
{

/// Relative path -> file contents for every regular file under root.
std::map<std::string, std::string> snapshot(const std::filesystem::path & root);

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string & name);

}  // namespace files

#endif  // BEVRPN_TESTS__FILE_TREE_HPP_
