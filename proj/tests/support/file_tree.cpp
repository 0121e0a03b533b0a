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

#include "file_tree.hpp"

#include <fstream>
#include <sstream>

namespace files
{

std::map<std::string, std::string> snapshot(const std::filesystem::path & root)
{
  std::map<std::string, std::string> out;
  for (const auto & e : std::filesystem::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) {
      continue;
    }
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    out[std::filesystem::relative(e.path(), root).generic_string()] = s.str();
  }
  return out;
}

std::filesystem::path scratch_dir(const std::string & name)
{
  const auto p = std::filesystem::temp_directory_path() / ("bevrpn_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace files
