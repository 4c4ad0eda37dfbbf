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
#include "dmdlpv/container.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace dmdlpv {

namespace {

constexpr char kMagic[8] = {'D', 'M', 'D', 'L', 'P', 'V', '1', '\n'};

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

} // namespace

std::string format_double(double value)
{
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) {
        throw IoError("format_double: conversion failed");
    }
    return std::string(buf, end);
}

double parse_double(std::string_view text)
{
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
        text.remove_prefix(1);
    }
    while (!text.empty() &&
           (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw IoError("cannot parse number '" + std::string(text) + "'");
    }
    return value;
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r' && ch != '\n') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

void Container::add(std::string name, Matrix m)
{
    for (auto& [n, mat] : matrices) {
        if (n == name) {
            mat = std::move(m);
            return;
        }
    }
    matrices.emplace_back(std::move(name), std::move(m));
}

bool Container::has(const std::string& name) const
{
    for (const auto& entry : matrices) {
        if (entry.first == name) {
            return true;
        }
    }
    return false;
}

const Matrix& Container::matrix(const std::string& name) const
{
    for (const auto& [n, mat] : matrices) {
        if (n == name) {
            return mat;
        }
    }
    throw IoError("container has no matrix '" + name + "'");
}

void write_container(const std::string& path, const Container& c)
{
    nlohmann::json header = c.header;
    nlohmann::json listing = nlohmann::json::array();
    for (const auto& [name, m] : c.matrices) {
        listing.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
    }
    header["matrices"] = listing;
    const std::string text = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t len = text.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& entry : c.matrices) {
        const Matrix& m = entry.second;
        out.write(reinterpret_cast<const char*>(m.data()),
                  static_cast<std::streamsize>(m.size() * sizeof(double)));
    }
    if (!out) {
        throw IoError("write to '" + path + "' failed");
    }
}

Container read_container(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    char magic[sizeof(kMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw IoError("'" + path + "' is not a dmdlpv container");
    }
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    if (!in || len > (1ull << 30)) {
        throw IoError("'" + path + "': corrupt header length");
    }
    std::string text(len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(len));
    if (!in) {
        throw IoError("'" + path + "': truncated header");
    }
    Container c;
    try {
        c.header = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("'" + path + "': bad header: " + e.what());
    }
    if (!c.header.contains("matrices") || !c.header["matrices"].is_array()) {
        throw IoError("'" + path + "': header lists no matrices");
    }
    for (const auto& entry : c.header["matrices"]) {
        const auto rows = entry.at("rows").get<Index>();
        const auto cols = entry.at("cols").get<Index>();
        Matrix m(rows, cols);
        in.read(reinterpret_cast<char*>(m.data()),
                static_cast<std::streamsize>(m.size() * sizeof(double)));
        if (!in) {
            throw IoError("'" + path + "': truncated matrix data");
        }
        c.matrices.emplace_back(entry.at("name").get<std::string>(), std::move(m));
    }
    c.header.erase("matrices");
    return c;
}

} // namespace dmdlpv
