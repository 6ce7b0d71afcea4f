#include <filesystem>

#include <gtest/gtest.h>

#include "sepgl/error.hpp"
#include "sepgl/io.hpp"
#include "sepgl/simgen.hpp"
#include "test_util.hpp"

using namespace sepgl;

namespace {

ErrorCode code_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::InvalidArgument;
}

std::string message_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(GroupFile, ParsesGrammar)
{
    const auto gs = parse_group_file("# demo\np=3\n\nG1\t1\t1,2\nG2\t1.5\t1,2,3\n");
    EXPECT_EQ(gs.p(), 3);
    ASSERT_EQ(gs.num_groups(), 2);
    EXPECT_EQ(gs.group(0), (IndexSet{0, 1}));
    EXPECT_EQ(gs.group(1), (IndexSet{0, 1, 2}));
    EXPECT_DOUBLE_EQ(gs.weight(1), 1.5);
    EXPECT_EQ(gs.name(1), "G2");
}

TEST(GroupFile, Errors)
{
    EXPECT_EQ(code_of([] { parse_group_file("G1\t1\t1\n"); }), ErrorCode::ParseError);
    EXPECT_NE(message_of([] { parse_group_file("G1\t1\t1\n"); }).find("line 1"), std::string::npos);
    EXPECT_EQ(code_of([] { parse_group_file("p=2\nG1\t1\n"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { parse_group_file("p=2\nG1\tx\t1,2\n"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { parse_group_file("p=2\nG1\t1\t2,1\n"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { parse_group_file("p=2\nG1\t1\t1,x\n"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { parse_group_file("p=3\nG1\t1\t1,2\n"); }), ErrorCode::ValidationError);
    EXPECT_EQ(code_of([] { parse_group_file("p=2\nG1\t-1\t1,2\n"); }), ErrorCode::ValidationError);
    const std::string msg = message_of([] { parse_group_file("p=2\nG1\t1\t1\nG2\t1\t2,3\n"); });
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(GroupFile, RoundTrip)
{
    for (std::uint64_t t = 0; t < 20; ++t) {
        CounterRng rng(1, t);
        const auto gs = random_structure(15, 4, rng);
        const auto back = parse_group_file(write_group_file(gs));
        ASSERT_EQ(back.num_groups(), gs.num_groups());
        for (Index g = 0; g < gs.num_groups(); ++g) {
            EXPECT_EQ(back.group(g), gs.group(g));
            EXPECT_EQ(back.weight(g), gs.weight(g));
            EXPECT_EQ(back.name(g), gs.name(g));
        }
    }
}

TEST(Gmt, ToyImport)
{
    const std::vector<std::string> header{"A", "B", "C", "D", "E", "F", "G", "H", "I", "J"};
    const std::string gmt = "S1\tdesc\tA\tC\tZZ\n"
                            "S2\tdesc\tC\tD\tE\tB\n"
                            "S3\tdesc\tQQ\tRR\n"
                            "S4\tdesc\tJ\n";
    const GmtImport imp = import_gmt(gmt, header);
    EXPECT_EQ(imp.retained, (std::vector<Index>{0, 1, 2, 3, 4, 9}));
    ASSERT_EQ(imp.groups.num_groups(), 3);
    EXPECT_EQ(imp.groups.p(), 6);
    EXPECT_EQ(imp.groups.group(0), (IndexSet{0, 2}));
    EXPECT_EQ(imp.groups.group(1), (IndexSet{1, 2, 3, 4}));
    EXPECT_EQ(imp.groups.group(2), (IndexSet{5}));
    EXPECT_DOUBLE_EQ(imp.groups.weight(0), std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(imp.groups.weight(1), 2.0);
    EXPECT_EQ(imp.dropped_sets, (std::vector<std::string>{"S3"}));
    EXPECT_EQ(imp.warnings.size(), 1U);
}

TEST(Gmt, Errors)
{
    EXPECT_EQ(code_of([] { import_gmt("S\td\tX\n", {"A", "B"}); }), ErrorCode::EmptyAfterFilter);
    EXPECT_EQ(code_of([] { import_gmt("S\td\tA\n", {"A", "A"}); }), ErrorCode::ParseError);
}

TEST(MatrixCsv, RoundTripAndHeader)
{
    CounterRng rng(2);
    const Eigen::MatrixXd M = test::normal_matrix(7, 4, rng);
    const auto plain = load_matrix_csv(write_matrix_csv(M));
    EXPECT_EQ(plain.values, M);
    const auto with = load_matrix_csv(write_matrix_csv(M, {"a", "b", "c", "d"}), true);
    EXPECT_EQ(with.header, (std::vector<std::string>{"a", "b", "c", "d"}));
    EXPECT_EQ(with.values, M);
    EXPECT_EQ(select_columns(M, {3, 0}).col(0), M.col(3));
}

TEST(MatrixCsv, Errors)
{
    EXPECT_EQ(code_of([] { load_matrix_csv("1,2\n3\n"); }), ErrorCode::RaggedRows);
    EXPECT_EQ(code_of([] { load_matrix_csv("1,2\n3,abc\n"); }), ErrorCode::NonNumericCell);
    EXPECT_NE(message_of([] { load_matrix_csv("1,2\n3,abc\n"); }).find("row 2"), std::string::npos);
    EXPECT_EQ(code_of([] { load_matrix_csv("1,nan\n"); }), ErrorCode::NonNumericCell);
    EXPECT_EQ(code_of([] { load_vector_csv("1,2\n3,4\n"); }), ErrorCode::DimensionMismatch);
    EXPECT_EQ(load_vector_csv("1\n2\n3\n"), Eigen::Vector3d(1, 2, 3));
    EXPECT_EQ(load_vector_csv("1,2,3\n"), Eigen::Vector3d(1, 2, 3));
}

TEST(TextFiles, RoundTripAndMissing)
{
    const auto path = std::filesystem::temp_directory_path() / "sepgl_io_test.txt";
    write_text_file(path.string(), "a\tb\n");
    EXPECT_EQ(read_text_file(path.string()), "a\tb\n");
    std::filesystem::remove(path);
    EXPECT_EQ(code_of([&] { read_text_file(path.string()); }), ErrorCode::IoError);
}

TEST(Numbers, ShortestRoundTrip)
{
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 12808.0}) {
        EXPECT_EQ(parse_double(format_double(x)), x);
    }
    EXPECT_EQ(code_of([] { parse_double("1.0x"); }), ErrorCode::NonNumericCell);
}
