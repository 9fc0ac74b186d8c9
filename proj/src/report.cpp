// SPDX-License-Identifier: Apache-2.0
#include "cfbg/report.hpp"

#include <cstdio>
#include <stdexcept>

#ifndef CFBG_VERSION
#define CFBG_VERSION "0.0.0"
#endif
#ifndef CFBG_GIT_DESCRIBE
#define CFBG_GIT_DESCRIBE "unknown"
#endif

namespace cfbg
{

void Table::add_row(std::vector<nlohmann::json> row)
{
    if (row.size() != columns.size())
        throw std::logic_error("Table::add_row: expected " + std::to_string(columns.size()) + " cells, got " +
                               std::to_string(row.size()));
    rows.push_back(std::move(row));
}

std::string version_string()
{
    return std::string(CFBG_VERSION) + "+" + CFBG_GIT_DESCRIBE;
}

std::string hex64(std::uint64_t v)
{
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

namespace
{

std::string csv_cell(const nlohmann::json &v)
{
    if (v.is_string()) {
        const auto &s = v.get_ref<const std::string &>();
        if (s.find_first_of(",\"\n") == std::string::npos)
            return s;
        std::string out = "\"";
        for (char c : s)
            out += c == '"' ? std::string("\"\"") : std::string(1, c);
        return out + "\"";
    }
    if (v.is_null())
        return "";
    return v.dump();
}

} // namespace

void write_csv(std::ostream &os, const Manifest &m, const Table &t)
{
    for (const auto &[k, v] : m.entries)
        os << "# " << k << ": " << v << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto &row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << csv_cell(row[i]);
        os << '\n';
    }
}

void write_json(std::ostream &os, const Manifest &m, const Table &t)
{
    nlohmann::ordered_json j;
    for (const auto &[k, v] : m.entries)
        j["manifest"][k] = v;
    j["columns"] = t.columns;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto &row : t.rows) {
        nlohmann::ordered_json r;
        for (std::size_t i = 0; i < row.size(); ++i)
            r[t.columns[i]] = row[i];
        j["rows"].push_back(r);
    }
    os << j.dump(2) << '\n';
}

} // namespace cfbg
