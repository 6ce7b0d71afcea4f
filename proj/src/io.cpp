#include "sepgl/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "sepgl/error.hpp"

namespace sepgl {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

/// Lines without their terminating LF; a trailing LF does not open an extra line.
std::vector<std::string_view> lines_of(std::string_view text)
{
    auto lines = split(text, '\n');
    if (!lines.empty() && lines.back().empty()) {
        lines.pop_back();
    }
    return lines;
}

[[noreturn]] void parse_error(std::size_t line, const std::string& reason)
{
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + reason);
}

bool parse_index(std::string_view s, long long& out)
{
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end && !s.empty();
}

} // namespace

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path);
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
        throw Error(ErrorCode::IoError, "write failed for " + path);
    }
}

std::string format_double(double x)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

double parse_double(std::string_view text)
{
    double value = 0.0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc() || ptr != end) {
        throw Error(ErrorCode::NonNumericCell, "not a number: '" + std::string(text) + "'");
    }
    return value;
}

GroupStructure parse_group_file(std::string_view text)
{
    const auto lines = lines_of(text);
    Index p = -1;
    std::vector<IndexSet> groups;
    std::vector<double> weights;
    std::vector<std::string> names;
    std::vector<std::size_t> line_of_group;

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        const std::string_view line = lines[i];
        if (line.empty() || line.front() == '#') {
            continue;
        }
        if (p < 0) {
            long long value = 0;
            if (line.substr(0, 2) != "p=" || !parse_index(line.substr(2), value) || value < 1) {
                parse_error(lineno, "expected p=");
            }
            p = static_cast<Index>(value);
            continue;
        }
        const auto fields = split(line, '\t');
        if (fields.size() != 3) {
            parse_error(lineno, "expected 3 tab-separated fields, got " + std::to_string(fields.size()));
        }
        if (fields[0].empty()) {
            parse_error(lineno, "empty group name");
        }
        double w = 0.0;
        try {
            w = parse_double(fields[1]);
        } catch (const Error&) {
            parse_error(lineno, "bad weight '" + std::string(fields[1]) + "'");
        }
        if (!std::isfinite(w)) {
            parse_error(lineno, "weight must be finite");
        }
        IndexSet members;
        if (!fields[2].empty()) {
            for (std::string_view cell : split(fields[2], ',')) {
                long long idx = 0;
                if (!parse_index(cell, idx)) {
                    parse_error(lineno, "bad index '" + std::string(cell) + "'");
                }
                if (!members.empty() && idx - 1 <= members.back()) {
                    parse_error(lineno, "indices must be strictly increasing");
                }
                members.push_back(static_cast<Index>(idx - 1));
            }
        }
        groups.push_back(std::move(members));
        weights.push_back(w);
        names.emplace_back(fields[0]);
        line_of_group.push_back(lineno);
    }
    if (p < 0) {
        parse_error(1, "expected p=");
    }

    const ValidationReport report = validate(p, groups, weights);
    if (!report.ok) {
        std::string where;
        if (report.group >= 0) {
            where = "line " + std::to_string(line_of_group[static_cast<std::size_t>(report.group)]) + ": ";
        }
        throw Error(ErrorCode::ValidationError, where + report.message);
    }
    return GroupStructure(p, std::move(groups), std::move(weights), std::move(names));
}

std::string write_group_file(const GroupStructure& gs)
{
    std::string out = "p=" + std::to_string(gs.p()) + "\n";
    for (Index g = 0; g < gs.num_groups(); ++g) {
        const std::string name = gs.name(g);
        if (name.empty() || name.find_first_of("\t\n") != std::string::npos || name.front() == '#') {
            throw Error(ErrorCode::InvalidArgument, "group name '" + name + "' cannot be written");
        }
        out += name;
        out += '\t';
        out += format_double(gs.weight(g));
        out += '\t';
        const auto& members = gs.group(g);
        for (std::size_t k = 0; k < members.size(); ++k) {
            if (k > 0) {
                out += ',';
            }
            out += std::to_string(members[k] + 1);
        }
        out += '\n';
    }
    return out;
}

GmtImport import_gmt(std::string_view gmt_text, const std::vector<std::string>& symbol_header)
{
    std::unordered_map<std::string, Index> column;
    for (std::size_t j = 0; j < symbol_header.size(); ++j) {
        if (!column.emplace(symbol_header[j], static_cast<Index>(j)).second) {
            throw Error(ErrorCode::ParseError, "duplicate header symbol '" + symbol_header[j] + "'");
        }
    }

    GmtImport result;
    std::vector<std::string> names;
    std::vector<IndexSet> sets;
    const auto lines = lines_of(gmt_text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string_view line = lines[i];
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto fields = split(line, '\t');
        if (fields.size() < 2 || fields[0].empty()) {
            parse_error(i + 1, "expected '<name>\\t<description>\\t<symbol>...'");
        }
        IndexSet cols;
        for (std::size_t f = 2; f < fields.size(); ++f) {
            if (fields[f].empty()) {
                continue;
            }
            auto it = column.find(std::string(fields[f]));
            if (it != column.end()) {
                cols.push_back(it->second);
            }
        }
        std::sort(cols.begin(), cols.end());
        cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
        if (cols.empty()) {
            result.dropped_sets.emplace_back(fields[0]);
            result.warnings.push_back("set '" + std::string(fields[0]) + "' has no symbols in the header; dropped");
            continue;
        }
        names.emplace_back(fields[0]);
        sets.push_back(std::move(cols));
    }
    if (sets.empty()) {
        throw Error(ErrorCode::EmptyAfterFilter, "no gene set survives filtering");
    }

    std::vector<Index> remap(symbol_header.size(), -1);
    for (const auto& s : sets) {
        for (Index j : s) {
            remap[static_cast<std::size_t>(j)] = 0;
        }
    }
    for (std::size_t j = 0; j < remap.size(); ++j) {
        if (remap[j] == 0) {
            remap[j] = static_cast<Index>(result.retained.size());
            result.retained.push_back(static_cast<Index>(j));
        }
    }
    std::vector<double> weights;
    for (auto& s : sets) {
        for (Index& j : s) {
            j = remap[static_cast<std::size_t>(j)];
        }
        weights.push_back(std::sqrt(static_cast<double>(s.size())));
    }
    result.groups = GroupStructure(static_cast<Index>(result.retained.size()), std::move(sets), std::move(weights),
                                   std::move(names));
    return result;
}

CsvMatrix load_matrix_csv(std::string_view text, bool has_header)
{
    const auto lines = lines_of(text);
    CsvMatrix out;
    std::size_t first = 0;
    if (has_header) {
        if (lines.empty()) {
            throw Error(ErrorCode::ParseError, "line 1: missing header row");
        }
        for (std::string_view cell : split(lines[0], ',')) {
            out.header.emplace_back(cell);
        }
        first = 1;
    }
    std::vector<std::vector<double>> rows;
    std::size_t width = has_header ? out.header.size() : 0;
    for (std::size_t i = first; i < lines.size(); ++i) {
        const auto cells = split(lines[i], ',');
        if (width == 0) {
            width = cells.size();
        }
        if (cells.size() != width) {
            throw Error(ErrorCode::RaggedRows, "row " + std::to_string(i + 1) + " has " +
                                                   std::to_string(cells.size()) + " cells, expected " +
                                                   std::to_string(width));
        }
        std::vector<double> row;
        row.reserve(width);
        for (std::size_t k = 0; k < cells.size(); ++k) {
            double v = 0.0;
            try {
                v = parse_double(cells[k]);
            } catch (const Error&) {
                throw Error(ErrorCode::NonNumericCell, "row " + std::to_string(i + 1) + ", column " +
                                                           std::to_string(k + 1) + ": '" + std::string(cells[k]) +
                                                           "'");
            }
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::NonNumericCell, "row " + std::to_string(i + 1) + ", column " +
                                                           std::to_string(k + 1) + " is not finite");
            }
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    out.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t k = 0; k < width; ++k) {
            out.values(static_cast<Index>(i), static_cast<Index>(k)) = rows[i][k];
        }
    }
    return out;
}

std::string write_matrix_csv(const Eigen::MatrixXd& values, const std::vector<std::string>& header)
{
    std::string out;
    if (!header.empty()) {
        if (static_cast<Index>(header.size()) != values.cols()) {
            throw Error(ErrorCode::DimensionMismatch, "header and matrix widths differ");
        }
        for (std::size_t k = 0; k < header.size(); ++k) {
            out += k ? "," : "";
            out += header[k];
        }
        out += '\n';
    }
    for (Index i = 0; i < values.rows(); ++i) {
        for (Index k = 0; k < values.cols(); ++k) {
            out += k ? "," : "";
            out += format_double(values(i, k));
        }
        out += '\n';
    }
    return out;
}

Eigen::VectorXd load_vector_csv(std::string_view text)
{
    const Eigen::MatrixXd m = load_matrix_csv(text).values;
    if (m.rows() == 1) {
        return m.row(0).transpose();
    }
    if (m.cols() == 1) {
        return m.col(0);
    }
    throw Error(ErrorCode::DimensionMismatch, "expected a single row or column, got " + std::to_string(m.rows()) +
                                                  "x" + std::to_string(m.cols()));
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X, const std::vector<Index>& columns)
{
    Eigen::MatrixXd out(X.rows(), static_cast<Index>(columns.size()));
    for (std::size_t k = 0; k < columns.size(); ++k) {
        if (columns[k] < 0 || columns[k] >= X.cols()) {
            throw Error(ErrorCode::IndexOutOfRange, "column " + std::to_string(columns[k]) + " out of range");
        }
        out.col(static_cast<Index>(k)) = X.col(columns[k]);
    }
    return out;
}

} // namespace sepgl
