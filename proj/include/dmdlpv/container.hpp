/*
 Copyright 2026 The dmdlpv Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef DMDLPV_CONTAINER_HPP
#define DMDLPV_CONTAINER_HPP

#include "dmdlpv/common.hpp"

#include "json.hpp"

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dmdlpv {

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

std::vector<std::string> split_csv_line(const std::string& line);

/// Self-describing binary file used for datasets and models.
///
/// Layout:
///   bytes 0..7   magic "DMDLPV1\n"
///   bytes 8..15  little-endian uint64 header length L
///   next L bytes UTF-8 JSON header; its "matrices" array lists
///                {"name", "rows", "cols"} in storage order
///   remainder    float64 little-endian, column-major, matrices back to back
struct Container {
    nlohmann::json header = nlohmann::json::object();
    std::vector<std::pair<std::string, Matrix>> matrices;

    void add(std::string name, Matrix m);
    bool has(const std::string& name) const;
    const Matrix& matrix(const std::string& name) const;
};

void write_container(const std::string& path, const Container& c);
Container read_container(const std::string& path);

} // namespace dmdlpv

#endif // DMDLPV_CONTAINER_HPP
