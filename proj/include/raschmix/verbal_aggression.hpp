#pragma once

#include <string>
#include <vector>

#include "core_data.hpp"

namespace raschmix {

// Loader for the bundled Verbal Aggression dataset (De Boeck & Wilson,
// 2004): 316 respondents, 12 want/do items over two frustrating
// situations, responses 0 = no, 1 = perhaps, 2 = yes.  See data/README.md
// for provenance and the pinned checksum.

using VerbalAggressionTable = RawMatrix;

inline const std::vector<std::string>& verbal_aggression_columns() {
    static const std::vector<std::string> columns = {
        "S1WantCurse", "S1DoCurse", "S1WantScold", "S1DoScold",
        "S1WantShout", "S1DoShout", "S2WantCurse", "S2DoCurse",
        "S2WantScold", "S2DoScold", "S2WantShout", "S2DoShout",
    };
    return columns;
}

inline VerbalAggressionTable load_verbal_aggression(const std::string& path) {
    const CsvTable table = read_csv_file(path);
    const std::vector<std::string>& expected = verbal_aggression_columns();

    for (const std::string& name : expected) {
        if (std::find(table.header.begin(), table.header.end(), name) == table.header.end())
            throw data_error(path + ": missing column '" + name + "'");
    }
    if (table.header.size() != expected.size()) {
        for (const std::string& name : table.header)
            if (std::find(expected.begin(), expected.end(), name) == expected.end())
                throw data_error(path + ": unexpected column '" + name + "'");
    }
    if (table.header != expected)
        throw data_error(path + ": columns out of order (expected " + expected.front() +
                         " .. " + expected.back() + ")");

    RawMatrix raw = csv_to_raw(table, path);
    for (std::size_t i = 0; i < raw.rows.size(); ++i) {
        for (std::size_t j = 0; j < raw.rows[i].size(); ++j) {
            const int v = raw.rows[i][j];
            if (v < 0 || v > 2)
                throw data_error(path + ": value " + std::to_string(v) + " outside {0,1,2} at row " +
                                 std::to_string(i + 1) + ", column '" + expected[j] + "'");
        }
    }
    if (raw.rows.empty()) throw data_error(path + ": no data rows");
    return raw;
}

#ifdef RASCHMIX_DATA_DIR
inline std::string bundled_verbal_aggression_path() {
    return std::string(RASCHMIX_DATA_DIR) + "/verbal_aggression.csv";
}

inline VerbalAggressionTable load_verbal_aggression() {
    return load_verbal_aggression(bundled_verbal_aggression_path());
}
#endif

}  // namespace raschmix
