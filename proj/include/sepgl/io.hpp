#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "sepgl/group_model.hpp"

namespace sepgl {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

/// Shortest decimal that parses back to the same double.
std::string format_double(double x);

/// Whole-string parse; throws NonNumericCell on anything else.
double parse_double(std::string_view text);

/**
 * Group file grammar:
 *
 *     # comment
 *     p=3
 *     A<TAB>1<TAB>1,2
 *     B<TAB>1<TAB>1,2,3
 *
 * Indices are 1-based and strictly increasing within a line. Errors carry the
 * 1-based line number: ParseError for grammar violations, ValidationError when
 * the groups do not form a valid structure.
 */
GroupStructure parse_group_file(std::string_view text);
std::string write_group_file(const GroupStructure& gs);

struct GmtImport {
    GroupStructure groups;
    /// Original header column of every retained column, increasing.
    std::vector<Index> retained;
    std::vector<std::string> dropped_sets;
    std::vector<std::string> warnings;
};

/**
 * Gene sets mapped onto the columns of a design matrix. Symbols missing from
 * the header are skipped, sets left empty are dropped, and columns outside
 * every set are removed. Weights are sqrt of the filtered set sizes.
 */
GmtImport import_gmt(std::string_view gmt_text, const std::vector<std::string>& symbol_header);

struct CsvMatrix {
    Eigen::MatrixXd values;
    /// Empty unless a header row was requested.
    std::vector<std::string> header;
};

/// Rectangular CSV of finite reals. RaggedRows and NonNumericCell carry the 1-based row.
CsvMatrix load_matrix_csv(std::string_view text, bool has_header = false);
std::string write_matrix_csv(const Eigen::MatrixXd& values, const std::vector<std::string>& header = {});

/// A single row or a single column of numbers.
Eigen::VectorXd load_vector_csv(std::string_view text);

/// Keeps the given columns, in order.
Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X, const std::vector<Index>& columns);

} // namespace sepgl
