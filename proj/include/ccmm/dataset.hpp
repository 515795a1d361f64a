#pragma once

// Tabular data, classification functions, and the structural relations
// (nested / crossed / aliased) between classifications.

#include <ccmm/detail/csv.hpp>
#include <ccmm/error.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

namespace ccmm {

struct Column {
    std::string name;
    std::variant<std::vector<double>, std::vector<std::string>> values;

    bool numeric() const noexcept { return std::holds_alternative<std::vector<double>>(values); }
    std::size_t size() const {
        return std::visit([](const auto& v) { return v.size(); }, values);
    }
};

/// Immutable table of numeric and label columns, all of length n >= 1.
class Dataset {
public:
    Dataset() = default;

    explicit Dataset(std::vector<Column> columns) : columns_(std::move(columns)) {
        if (columns_.empty()) throw DataError("dataset has no columns");
        n_ = columns_.front().size();
        if (n_ == 0) throw DataError("empty file");
        std::unordered_set<std::string> seen;
        for (const auto& c : columns_) {
            if (!seen.insert(c.name).second) throw DataError("duplicate column '" + c.name + "'");
            if (c.size() != n_) {
                throw DataError("column '" + c.name + "' has " + std::to_string(c.size()) +
                                " values, expected " + std::to_string(n_));
            }
            if (c.numeric()) {
                const auto& v = std::get<std::vector<double>>(c.values);
                for (std::size_t i = 0; i < v.size(); ++i) {
                    if (!std::isfinite(v[i])) {
                        throw DataError("column '" + c.name + "', row " + std::to_string(i + 1) +
                                        ": non-finite value");
                    }
                }
            }
        }
    }

    std::size_t n() const noexcept { return n_; }
    const std::vector<Column>& columns() const noexcept { return columns_; }

    const Column* find(const std::string& name) const {
        for (const auto& c : columns_)
            if (c.name == name) return &c;
        return nullptr;
    }

    const Column& column(const std::string& name) const {
        if (const auto* c = find(name)) return *c;
        throw DataError("missing column '" + name + "'");
    }

    const std::vector<double>& numeric(const std::string& name) const {
        const auto& c = column(name);
        if (!c.numeric()) throw DataError("column '" + name + "' is not numeric");
        return std::get<std::vector<double>>(c.values);
    }

    const std::vector<std::string>& labels(const std::string& name) const {
        const auto& c = column(name);
        if (c.numeric()) throw DataError("column '" + name + "' is numeric, expected labels");
        return std::get<std::vector<std::string>>(c.values);
    }

    /// Row subset in the given order.
    Dataset select_rows(std::span<const std::size_t> rows) const {
        std::vector<Column> out;
        out.reserve(columns_.size());
        for (const auto& c : columns_) {
            Column nc{c.name, {}};
            std::visit(
                [&](const auto& v) {
                    std::decay_t<decltype(v)> sub;
                    sub.reserve(rows.size());
                    for (auto r : rows) sub.push_back(v.at(r));
                    nc.values = std::move(sub);
                },
                c.values);
            out.push_back(std::move(nc));
        }
        return Dataset(std::move(out));
    }

private:
    std::vector<Column> columns_;
    std::size_t n_ = 0;
};

/// Column-role hints for ingestion. Columns not listed as numeric are kept as labels.
struct TableSchema {
    std::vector<std::string> numeric;
    std::vector<std::string> labels;  // must exist; listed for validation only
};

inline Dataset parse_table(std::istream& in, const TableSchema& schema) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (detail::read_csv_line(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        header = detail::split_csv_record(line, line_no);
        break;
    }
    if (header.empty()) throw DataError("empty file");

    for (const auto& want : schema.numeric) {
        if (std::find(header.begin(), header.end(), want) == header.end())
            throw DataError("missing column '" + want + "'");
    }
    for (const auto& want : schema.labels) {
        if (std::find(header.begin(), header.end(), want) == header.end())
            throw DataError("missing column '" + want + "'");
    }

    std::vector<bool> is_num(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        is_num[c] = std::find(schema.numeric.begin(), schema.numeric.end(), header[c]) !=
                    schema.numeric.end();
    }
    std::vector<std::vector<double>> nums(header.size());
    std::vector<std::vector<std::string>> labs(header.size());

    std::size_t row = 0;
    while (detail::read_csv_line(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        ++row;
        auto fields = detail::split_csv_record(line, line_no);
        if (fields.size() != header.size()) {
            throw DataError("row " + std::to_string(row) + " (line " + std::to_string(line_no) +
                            "): expected " + std::to_string(header.size()) + " fields, found " +
                            std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (!is_num[c]) {
                labs[c].push_back(std::move(fields[c]));
                continue;
            }
            const auto& s = fields[c];
            auto b = s.find_first_not_of(" \t");
            auto e = s.find_last_not_of(" \t");
            double v = 0.0;
            bool ok = b != std::string::npos;
            if (ok) {
                const char* first = s.data() + b;
                const char* last = s.data() + e + 1;
                if (*first == '+') ++first;
                auto [ptr, ec] = std::from_chars(first, last, v);
                ok = ec == std::errc() && ptr == last && std::isfinite(v);
            }
            if (!ok) {
                throw DataError("row " + std::to_string(row) + ", column '" + header[c] +
                                "': cannot parse '" + s + "' as a finite number");
            }
            nums[c].push_back(v);
        }
    }
    if (row == 0) throw DataError("empty file");

    std::vector<Column> cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (is_num[c]) cols.push_back({header[c], std::move(nums[c])});
        else cols.push_back({header[c], std::move(labs[c])});
    }
    return Dataset(std::move(cols));
}

inline Dataset read_table(const std::string& path, const TableSchema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return parse_table(in, schema);
}

/// Writes the delimited format parse_table reads; numbers round-trip exactly.
inline void write_table(std::ostream& out, const Dataset& d) {
    const auto& cols = d.columns();
    for (std::size_t c = 0; c < cols.size(); ++c) {
        out << (c ? "," : "") << detail::escape_csv_field(cols[c].name);
    }
    out << '\n';
    for (std::size_t i = 0; i < d.n(); ++i) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c) out << ',';
            if (cols[c].numeric()) out << detail::format_double(std::get<std::vector<double>>(cols[c].values)[i]);
            else out << detail::escape_csv_field(std::get<std::vector<std::string>>(cols[c].values)[i]);
        }
        out << '\n';
    }
}

inline void write_table(const std::string& path, const Dataset& d) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    write_table(out, d);
}

/// Numeric column names of a dataset, for re-reading a written table with the same roles.
inline TableSchema schema_of(const Dataset& d) {
    TableSchema s;
    for (const auto& c : d.columns()) (c.numeric() ? s.numeric : s.labels).push_back(c.name);
    return s;
}

/// The classification function: observation index -> cluster index, clusters in order of first appearance.
struct ClassificationMap {
    std::string name;
    std::vector<std::size_t> assign;
    std::vector<std::string> labels;

    std::size_t J() const noexcept { return labels.size(); }
    std::size_t n() const noexcept { return assign.size(); }

    std::vector<std::size_t> cluster_sizes() const {
        std::vector<std::size_t> sizes(J(), 0);
        for (auto a : assign) ++sizes[a];
        return sizes;
    }

    bool operator==(const ClassificationMap&) const = default;
};

inline ClassificationMap encode_labels(std::string name, std::span<const std::string> values) {
    ClassificationMap m;
    m.name = std::move(name);
    m.assign.reserve(values.size());
    std::unordered_map<std::string, std::size_t> index;
    for (const auto& v : values) {
        auto [it, inserted] = index.try_emplace(v, m.labels.size());
        if (inserted) m.labels.push_back(v);
        m.assign.push_back(it->second);
    }
    return m;
}

inline ClassificationMap encode_classification(const Dataset& d, const std::string& column) {
    const auto& c = d.column(column);
    if (c.numeric()) throw DataError("column '" + column + "' is numeric; classifications need labels");
    return encode_labels(column, std::get<std::vector<std::string>>(c.values));
}

enum class Relation { nested_in, contains, crossed, aliased };

inline const char* to_string(Relation r) {
    switch (r) {
    case Relation::nested_in: return "nested-in";
    case Relation::contains: return "contains";
    case Relation::crossed: return "crossed-with";
    case Relation::aliased: return "aliased-with";
    }
    return "?";
}

struct CellOccupancy {
    std::size_t occupied = 0;
    std::size_t total = 0;  // J_a * J_b
    std::size_t max_occupancy = 0;
    std::size_t empty() const noexcept { return total - occupied; }
};

/// Joint (a, b) cell counts, cells in order of first appearance.
struct CellTable {
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    std::vector<std::size_t> counts;
    std::vector<std::size_t> cell_of;  // per observation
};

inline CellTable tabulate_cells(const ClassificationMap& a, const ClassificationMap& b) {
    if (a.n() != b.n()) {
        throw DataError("classifications '" + a.name + "' and '" + b.name + "' differ in length");
    }
    CellTable t;
    t.cell_of.reserve(a.n());
    std::unordered_map<std::uint64_t, std::size_t> index;
    for (std::size_t i = 0; i < a.n(); ++i) {
        const std::uint64_t key = static_cast<std::uint64_t>(a.assign[i]) * b.J() + b.assign[i];
        auto [it, inserted] = index.try_emplace(key, t.cells.size());
        if (inserted) {
            t.cells.emplace_back(a.assign[i], b.assign[i]);
            t.counts.push_back(0);
        }
        ++t.counts[it->second];
        t.cell_of.push_back(it->second);
    }
    return t;
}

struct PairStructure {
    std::size_t a = 0, b = 0;  // indices into StructureReport::names, a < b
    bool a_in_b = false;
    bool b_in_a = false;
    CellOccupancy cells;

    Relation relation() const noexcept {
        if (a_in_b && b_in_a) return Relation::aliased;
        if (a_in_b) return Relation::nested_in;
        if (b_in_a) return Relation::contains;
        return Relation::crossed;
    }
};

struct StructureReport {
    std::vector<std::string> names;
    std::vector<std::size_t> cluster_counts;
    std::vector<PairStructure> pairs;

    /// Relation of the ordered pair (first, second) by name.
    Relation relation(const std::string& first, const std::string& second) const {
        for (const auto& p : pairs) {
            if (names[p.a] == first && names[p.b] == second) return p.relation();
            if (names[p.b] == first && names[p.a] == second) {
                switch (p.relation()) {
                case Relation::nested_in: return Relation::contains;
                case Relation::contains: return Relation::nested_in;
                default: return p.relation();
                }
            }
        }
        throw DataError("no structure entry for '" + first + "' and '" + second + "'");
    }

    const PairStructure& pair(const std::string& first, const std::string& second) const {
        for (const auto& p : pairs) {
            if ((names[p.a] == first && names[p.b] == second) ||
                (names[p.b] == first && names[p.a] == second))
                return p;
        }
        throw DataError("no structure entry for '" + first + "' and '" + second + "'");
    }
};

namespace detail {

// Exact nesting test on a cell table: every cluster on the chosen side occupies exactly one cell.
inline bool each_in_one_cell(std::size_t clusters, const CellTable& t, bool first_side) {
    std::vector<std::size_t> partners(clusters, 0);
    for (const auto& [ca, cb] : t.cells) ++partners[first_side ? ca : cb];
    return std::all_of(partners.begin(), partners.end(), [](std::size_t k) { return k == 1; });
}

}  // namespace detail

inline StructureReport analyze_structure(std::span<const ClassificationMap> maps) {
    StructureReport r;
    for (const auto& m : maps) {
        if (m.n() != maps.front().n()) {
            throw DataError("classification '" + m.name + "' has " + std::to_string(m.n()) +
                            " observations, expected " + std::to_string(maps.front().n()));
        }
        r.names.push_back(m.name);
        r.cluster_counts.push_back(m.J());
    }
    for (std::size_t i = 0; i < maps.size(); ++i) {
        for (std::size_t j = i + 1; j < maps.size(); ++j) {
            const auto t = tabulate_cells(maps[i], maps[j]);
            PairStructure p;
            p.a = i;
            p.b = j;
            p.a_in_b = detail::each_in_one_cell(maps[i].J(), t, true);
            p.b_in_a = detail::each_in_one_cell(maps[j].J(), t, false);
            p.cells.occupied = t.cells.size();
            p.cells.total = maps[i].J() * maps[j].J();
            p.cells.max_occupancy = t.counts.empty() ? 0 : *std::max_element(t.counts.begin(), t.counts.end());
            r.pairs.push_back(p);
        }
    }
    return r;
}

}  // namespace ccmm
