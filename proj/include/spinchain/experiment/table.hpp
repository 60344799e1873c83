#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "spinchain/common.hpp"

namespace spinchain::experiment {

enum class ColumnType { Integer, Real };

struct Column {
    std::string name;
    ColumnType type = ColumnType::Real;
};

/// Rows of finite values under a fixed schema, plus `#` metadata lines.
class ResultTable {
public:
    explicit ResultTable(std::vector<Column> schema) : schema_(std::move(schema)) {}

    const std::vector<Column>& schema() const { return schema_; }
    const std::vector<std::vector<Real>>& rows() const { return rows_; }
    const std::vector<std::pair<std::string, std::string>>& metadata() const { return metadata_; }

    void add_metadata(std::string key, std::string value) { metadata_.emplace_back(std::move(key), std::move(value)); }

    void add_row(std::vector<Real> row) {
        if (row.size() != schema_.size())
            throw NumericalError("ResultTable: row has " + std::to_string(row.size()) + " values, schema has " +
                                 std::to_string(schema_.size()));
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (!std::isfinite(row[c]))
                throw NumericalError("ResultTable: non-finite value in column '" + schema_[c].name + "' (row " +
                                     std::to_string(rows_.size()) + ")");
        }
        rows_.push_back(std::move(row));
    }

    std::size_t column_index(const std::string& name) const {
        for (std::size_t c = 0; c < schema_.size(); ++c)
            if (schema_[c].name == name) return c;
        throw DomainError("ResultTable: no column named '" + name + "'");
    }

    std::vector<Real> column(const std::string& name) const {
        const std::size_t c = column_index(name);
        std::vector<Real> out;
        for (const auto& r : rows_) out.push_back(r[c]);
        return out;
    }

    void write_csv(std::ostream& os) const {
        for (const auto& [k, v] : metadata_) os << "# " << k << ": " << v << '\n';
        for (std::size_t c = 0; c < schema_.size(); ++c) os << (c ? "," : "") << schema_[c].name;
        os << '\n';
        for (const auto& r : rows_) {
            for (std::size_t c = 0; c < r.size(); ++c) {
                if (c) os << ',';
                os << format_value(r[c], schema_[c].type);
            }
            os << '\n';
        }
    }

    static std::string format_value(Real v, ColumnType type) {
        char buf[64];
        if (type == ColumnType::Integer) {
            std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(std::llround(v)));
        } else {
            std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);   // no "-0"
        }
        return buf;
    }

private:
    std::vector<Column> schema_;
    std::vector<std::vector<Real>> rows_;
    std::vector<std::pair<std::string, std::string>> metadata_;
};

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace spinchain::experiment
