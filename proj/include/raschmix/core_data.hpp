#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace raschmix {

// Input errors (file/schema/value problems) are distinguished from usage
// errors so the CLI can map them to distinct exit codes.
class data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FilterReport {
    int n_input = 0;
    int n_removed_zero = 0;
    int n_removed_perfect = 0;
    int n_effective = 0;
};

// Binary n x m response matrix with cached row scores.
// Immutable after construction; safe to share across threads.
class ResponseMatrix {
public:
    ResponseMatrix(std::vector<std::uint8_t> entries, int n, int m,
                   std::vector<std::string> item_names,
                   std::vector<std::string> person_ids = {})
        : n_(n), m_(m), entries_(std::move(entries)),
          item_names_(std::move(item_names)), person_ids_(std::move(person_ids)) {
        if (m_ < 2) throw data_error("response matrix needs at least 2 items");
        if (n_ < 1) throw data_error("response matrix needs at least 1 person");
        if (entries_.size() != static_cast<std::size_t>(n_) * m_)
            throw data_error("response matrix: entry count does not match shape");
        if (item_names_.size() != static_cast<std::size_t>(m_))
            throw data_error("response matrix: item name count does not match m");
        for (std::size_t idx = 0; idx < entries_.size(); ++idx) {
            if (entries_[idx] > 1) {
                const int i = static_cast<int>(idx) / m_;
                const int j = static_cast<int>(idx) % m_;
                throw data_error("non-binary entry at row " + std::to_string(i + 1) +
                                 ", column " + std::to_string(j + 1));
            }
        }
        if (person_ids_.empty()) {
            person_ids_.reserve(n_);
            for (int i = 0; i < n_; ++i) person_ids_.push_back(std::to_string(i + 1));
        } else if (person_ids_.size() != static_cast<std::size_t>(n_)) {
            throw data_error("response matrix: person id count does not match n");
        }
        row_scores_.resize(n_);
        for (int i = 0; i < n_; ++i) {
            int s = 0;
            for (int j = 0; j < m_; ++j) s += entries_[static_cast<std::size_t>(i) * m_ + j];
            row_scores_[i] = s;
        }
    }

    int n() const { return n_; }
    int m() const { return m_; }
    std::uint8_t operator()(int i, int j) const {
        return entries_[static_cast<std::size_t>(i) * m_ + j];
    }
    std::span<const std::uint8_t> row(int i) const {
        return {entries_.data() + static_cast<std::size_t>(i) * m_,
                static_cast<std::size_t>(m_)};
    }
    int row_score(int i) const { return row_scores_[i]; }
    const std::vector<int>& row_scores() const { return row_scores_; }
    const std::vector<std::string>& item_names() const { return item_names_; }
    const std::string& person_id(int i) const { return person_ids_[i]; }
    const std::vector<std::string>& person_ids() const { return person_ids_; }

    // weighted fraction of 1-responses per item
    std::vector<double> weighted_item_means(std::span<const double> w) const {
        if (w.size() != static_cast<std::size_t>(n_))
            throw std::invalid_argument("weighted_item_means: weight length mismatch");
        std::vector<double> means(static_cast<std::size_t>(m_), 0.0);
        double total = 0.0;
        for (int i = 0; i < n_; ++i) {
            total += w[i];
            if (w[i] == 0.0) continue;
            const auto r = row(i);
            for (int j = 0; j < m_; ++j) means[j] += w[i] * r[j];
        }
        if (total > 0.0)
            for (auto& v : means) v /= total;
        return means;
    }

    int distinct_pattern_count() const {
        std::vector<std::string_view> rows;
        rows.reserve(n_);
        for (int i = 0; i < n_; ++i)
            rows.emplace_back(reinterpret_cast<const char*>(entries_.data()) +
                                  static_cast<std::size_t>(i) * m_,
                              static_cast<std::size_t>(m_));
        std::sort(rows.begin(), rows.end());
        return static_cast<int>(std::unique(rows.begin(), rows.end()) - rows.begin());
    }

private:
    int n_, m_;
    std::vector<std::uint8_t> entries_;
    std::vector<std::string> item_names_;
    std::vector<std::string> person_ids_;
    std::vector<int> row_scores_;
};

// Raw integer matrix as read from a CSV, before dichotomization.
struct RawMatrix {
    std::vector<std::vector<int>> rows;
    std::vector<std::string> item_names;
    std::vector<std::string> person_ids;  // empty -> 1-based row numbers
};

// Collapse {0,1,2} responses to binary: 0 -> 0, {1,2} -> 1.
inline ResponseMatrix dichotomize(const RawMatrix& raw) {
    const int n = static_cast<int>(raw.rows.size());
    if (n == 0) throw data_error("dichotomize: empty input");
    const int m = static_cast<int>(raw.rows.front().size());
    std::vector<std::uint8_t> entries;
    entries.reserve(static_cast<std::size_t>(n) * m);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(raw.rows[i].size()) != m)
            throw data_error("dichotomize: ragged row " + std::to_string(i + 1));
        for (int j = 0; j < m; ++j) {
            const int v = raw.rows[i][j];
            if (v < 0 || v > 2)
                throw data_error("entry out of range {0,1,2} at row " +
                                 std::to_string(i + 1) + ", column " +
                                 std::to_string(j + 1) + " (value " +
                                 std::to_string(v) + ")");
            entries.push_back(v == 0 ? 0 : 1);
        }
    }
    return ResponseMatrix(std::move(entries), n, m, raw.item_names, raw.person_ids);
}

// Interpret raw entries as already binary; {0,1} only.
inline ResponseMatrix as_binary(const RawMatrix& raw) {
    const int n = static_cast<int>(raw.rows.size());
    if (n == 0) throw data_error("empty input");
    const int m = static_cast<int>(raw.rows.front().size());
    std::vector<std::uint8_t> entries;
    entries.reserve(static_cast<std::size_t>(n) * m);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(raw.rows[i].size()) != m)
            throw data_error("ragged row " + std::to_string(i + 1));
        for (int j = 0; j < m; ++j) {
            const int v = raw.rows[i][j];
            if (v != 0 && v != 1)
                throw data_error("non-binary entry at row " + std::to_string(i + 1) +
                                 ", column " + std::to_string(j + 1) + " (value " +
                                 std::to_string(v) + ")");
            entries.push_back(static_cast<std::uint8_t>(v));
        }
    }
    return ResponseMatrix(std::move(entries), n, m, raw.item_names, raw.person_ids);
}

// Drop rows with raw score 0 or m.  Such rows carry no information under
// the conditional likelihood; BIC's sample size is n_effective.
inline std::pair<ResponseMatrix, FilterReport> filter_extremes(const ResponseMatrix& data) {
    FilterReport report;
    report.n_input = data.n();
    std::vector<std::uint8_t> entries;
    std::vector<std::string> ids;
    for (int i = 0; i < data.n(); ++i) {
        const int s = data.row_score(i);
        if (s == 0) {
            ++report.n_removed_zero;
        } else if (s == data.m()) {
            ++report.n_removed_perfect;
        } else {
            const auto r = data.row(i);
            entries.insert(entries.end(), r.begin(), r.end());
            ids.push_back(data.person_id(i));
        }
    }
    report.n_effective = report.n_input - report.n_removed_zero - report.n_removed_perfect;
    if (report.n_effective == 0)
        throw data_error("no informative responses: every row has an extreme score");
    ResponseMatrix filtered(std::move(entries), report.n_effective, data.m(),
                            data.item_names(), std::move(ids));
    return {std::move(filtered), report};
}

inline ResponseMatrix subset_rows(const ResponseMatrix& data, std::span<const int> rows) {
    std::vector<std::uint8_t> entries;
    entries.reserve(rows.size() * data.m());
    std::vector<std::string> ids;
    ids.reserve(rows.size());
    for (int i : rows) {
        if (i < 0 || i >= data.n()) throw std::invalid_argument("subset_rows: index out of range");
        const auto r = data.row(i);
        entries.insert(entries.end(), r.begin(), r.end());
        ids.push_back(data.person_id(i));
    }
    return ResponseMatrix(std::move(entries), static_cast<int>(rows.size()), data.m(),
                          data.item_names(), std::move(ids));
}

// ---- CSV ingestion ----------------------------------------------------
// Header row with column names; one row per person; comma delimiter;
// optional leading `id` column.

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline CsvTable read_csv(std::istream& in, const std::string& origin = "<stream>") {
    CsvTable table;
    std::string line;
    bool first = true;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string field;
        std::stringstream ss(line);
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (!line.empty() && line.back() == ',') fields.emplace_back();
        if (first) {
            table.header = std::move(fields);
            first = false;
        } else {
            if (fields.size() != table.header.size())
                throw data_error(origin + ": line " + std::to_string(line_no) + " has " +
                                 std::to_string(fields.size()) + " fields, expected " +
                                 std::to_string(table.header.size()));
            table.rows.push_back(std::move(fields));
        }
    }
    if (first) throw data_error(origin + ": empty file");
    return table;
}

inline CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open file: " + path);
    return read_csv(in, path);
}

inline int parse_int_cell(const std::string& cell, const std::string& origin, int row,
                          const std::string& column) {
    std::size_t pos = 0;
    int value = 0;
    try {
        value = std::stoi(cell, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != cell.size() || cell.empty())
        throw data_error(origin + ": non-integer cell '" + cell + "' at row " +
                         std::to_string(row) + ", column '" + column + "'");
    return value;
}

// Convert a CSV table to a RawMatrix.  A leading `id` column (case
// insensitive) supplies person identifiers; columns listed in `exclude`
// are skipped (e.g. a grouping column used by the LR test).
inline RawMatrix csv_to_raw(const CsvTable& table, const std::string& origin = "<csv>",
                            const std::vector<std::string>& exclude = {}) {
    RawMatrix raw;
    std::vector<int> item_cols;
    int id_col = -1;
    for (int c = 0; c < static_cast<int>(table.header.size()); ++c) {
        const std::string& name = table.header[c];
        std::string lower(name);
        std::transform(lower.begin(), lower.end(), lower.begin(),
                       [](unsigned char ch) { return std::tolower(ch); });
        if (c == 0 && lower == "id") {
            id_col = c;
            continue;
        }
        if (std::find(exclude.begin(), exclude.end(), name) != exclude.end()) continue;
        item_cols.push_back(c);
        raw.item_names.push_back(name);
    }
    if (item_cols.empty()) throw data_error(origin + ": no item columns");
    for (int r = 0; r < static_cast<int>(table.rows.size()); ++r) {
        std::vector<int> row;
        row.reserve(item_cols.size());
        for (int c : item_cols)
            row.push_back(parse_int_cell(table.rows[r][c], origin, r + 1, table.header[c]));
        raw.rows.push_back(std::move(row));
        if (id_col >= 0) raw.person_ids.push_back(table.rows[r][id_col]);
    }
    return raw;
}

}  // namespace raschmix
