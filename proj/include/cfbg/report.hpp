// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace cfbg
{

// Cells are JSON scalars so that CSV and JSON output share one number formatting.
struct Table
{
    std::vector<std::string> columns;
    std::vector<std::vector<nlohmann::json>> rows;

    void add_row(std::vector<nlohmann::json> row);
};

struct Manifest
{
    std::vector<std::pair<std::string, std::string>> entries;

    void add(const std::string &key, const std::string &value) { entries.emplace_back(key, value); }
};

std::string version_string();
std::string hex64(std::uint64_t v);

// '#key: value' lines, then the header, then one line per row.
void write_csv(std::ostream &os, const Manifest &m, const Table &t);
void write_json(std::ostream &os, const Manifest &m, const Table &t);

} // namespace cfbg
