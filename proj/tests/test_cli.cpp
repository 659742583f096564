#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "isospec/cli.hpp"

using namespace isospec;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "isospec");
    std::ostringstream out, err;
    Result r;
    r.code = cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> v;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) v.push_back(l);
    return v;
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> v;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            v.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    v.push_back(cur);
    return v;
}

fs::path temp_file(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "isospec_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST(ExpandParams, RangesAndLists) {
    EXPECT_EQ(cli::expand_params("0.1:0.9:0.1").size(), 9u);
    EXPECT_EQ(cli::expand_params("0.1:0.9:0.1").back(), "0.9");
    EXPECT_EQ(cli::expand_params("1:8"), (std::vector<std::string>{"1", "2", "3", "4", "5", "6", "7", "8"}));
    EXPECT_EQ(cli::expand_params("5,10,15"), (std::vector<std::string>{"5", "10", "15"}));
    EXPECT_EQ(cli::expand_params("1:2:0.5,7"), (std::vector<std::string>{"1", "1.5", "2", "7"}));
    EXPECT_THROW(cli::expand_params("3:1"), ParameterError);
    EXPECT_THROW(cli::expand_params("1:2:0"), ParameterError);
    EXPECT_THROW(cli::expand_params(""), ParameterError);
}

TEST(Cli, ComputeRectangleTwo) {
    const Result r = run_cli({"compute", "--family", "rectangle", "--param", "2"});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 2u);
    EXPECT_EQ(ls[0], csv_header());
    const auto f = split(ls[1]);
    ASSERT_EQ(f.size(), 10u);
    EXPECT_EQ(f[0], "rectangle");
    EXPECT_EQ(f[1], "2");
    EXPECT_EQ(f[2], "");
    EXPECT_EQ(f[3], "18");
    EXPECT_EQ(f[4], "5");
    EXPECT_EQ(f[9], "true");
    EXPECT_NE(r.err.find("options "), std::string::npos);
}

TEST(Cli, ComputeFromDomainFile) {
    const fs::path p = temp_file("square.json");
    std::ofstream(p) << R"({"label": "square", "outer": [[0,0],[1,0],[1,1],[0,1]], "holes": []})";
    const Result r = run_cli({"compute", "--domain", p.string()});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_EQ(split(lines(r.out)[1])[4], "4");
}

TEST(Cli, ComputeJson) {
    const Result r = run_cli({"compute", "--family", "regular", "--param", "5", "--format", "json"});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    const Json j = Json::parse(r.out);
    EXPECT_EQ(j.at("report").at("N"), 3);
    EXPECT_EQ(j.at("report").at("converged"), true);
    EXPECT_FALSE(j.at("options_hash").get<std::string>().empty());
}

TEST(Cli, ComputeErrors) {
    const fs::path bad = temp_file("bad.json");
    std::ofstream(bad) << "{ not json";
    EXPECT_EQ(run_cli({"compute", "--domain", bad.string()}).code, cli::kUsage);
    const fs::path cw = temp_file("cw.json");
    std::ofstream(cw) << R"({"outer": [[0,0],[0,1],[1,1],[1,0]]})";
    EXPECT_EQ(run_cli({"compute", "--domain", cw.string()}).code, cli::kUsage);
    EXPECT_EQ(run_cli({"compute", "--domain", temp_file("missing.json").string()}).code, cli::kUsage);
    EXPECT_EQ(run_cli({"compute", "--family", "blob", "--param", "1"}).code, cli::kUsage);
    EXPECT_EQ(run_cli({"compute", "--family", "random", "--param", "5"}).code, cli::kUsage);
    EXPECT_EQ(run_cli({"compute", "--family", "rectangle", "--param", "x"}).code, cli::kUsage);
    EXPECT_EQ(run_cli({"compute"}).code, cli::kUsage);
    EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kUsage);
    EXPECT_EQ(run_cli({}).code, cli::kUsage);
}

TEST(Cli, ComputeNotConvergedExitsSolver) {
    const Result r = run_cli({"compute", "--family", "comb", "--param", "4", "--max-levels", "2"});
    if (r.code == cli::kSolver) {
        EXPECT_EQ(split(lines(r.out)[1])[9], "false");
    } else {
        EXPECT_EQ(r.code, cli::kOk);
    }
}

TEST(Cli, SweepAnnulusRowCount) {
    const Result r = run_cli({"sweep", "--family", "annulus", "--params", "0.1:0.9:0.1", "--max-levels", "2"});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 10u);
    for (std::size_t i = 1; i < ls.size(); ++i) EXPECT_EQ(split(ls[i]).size(), 10u);
    EXPECT_EQ(split(ls[1])[1], "0.1");
    EXPECT_EQ(split(ls[9])[1], "0.9");
}

TEST(Cli, SweepRandomTwelveRowsByteIdentical) {
    const std::vector<std::string> args{"sweep", "--family", "random", "--sides", "5,10,15,20,25,30",
                                        "--seeds", "2", "--max-levels", "2"};
    const Result a = run_cli(args);
    ASSERT_EQ(a.code, cli::kOk) << a.err;
    const auto ls = lines(a.out);
    ASSERT_EQ(ls.size(), 13u);
    EXPECT_EQ(split(ls[1])[2], "1");
    EXPECT_EQ(split(ls[2])[2], "2");
    std::vector<std::string> parallel = args;
    parallel.push_back("--workers");
    parallel.push_back("3");
    const Result b = run_cli(parallel);
    EXPECT_EQ(a.out, b.out);
}

TEST(Cli, SweepWritesFile) {
    const fs::path p = temp_file("sweep.csv");
    fs::remove(p);
    const Result r = run_cli({"sweep", "--family", "rectangle", "--params", "1,2", "--max-levels", "2", "-o", p.string()});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_TRUE(r.out.empty());
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    EXPECT_EQ(lines(s.str()).size(), 3u);
}

TEST(Cli, SweepErrors) {
    EXPECT_EQ(run_cli({"sweep", "--family", "blob", "--params", "1"}).code, cli::kUsage);
    EXPECT_EQ(run_cli({"sweep", "--family", "random", "--sides", "5"}).code, cli::kUsage);
    EXPECT_EQ(run_cli({"sweep", "--family", "comb"}).code, cli::kUsage);
    EXPECT_EQ(run_cli({"sweep", "--family", "comb", "--params", "0:2"}).code, cli::kUsage);
}

TEST(Cli, Table1) {
    const Result r = run_cli({"table1"});
    ASSERT_EQ(r.code, cli::kOk);
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 7u);
    EXPECT_NE(ls[1].find("1.84   3.05   4.20   2.40"), std::string::npos) << ls[1];
    EXPECT_NE(ls[6].find("2.86   4.33   5.63   5.76"), std::string::npos) << ls[6];
    const Result c = run_cli({"table1", "--format", "csv"});
    ASSERT_EQ(lines(c.out).size(), 7u);
    EXPECT_EQ(lines(c.out)[0], "n,p1,p2,p3,j");
}

TEST(Cli, Ball) {
    const Result r = run_cli({"ball", "7", "--format", "csv"});
    ASSERT_EQ(r.code, cli::kOk);
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 7u);
    EXPECT_EQ(split(ls[2])[0], "3");
    EXPECT_EQ(split(ls[2])[2], "4");
    const Result g = run_cli({"ball", "12", "--growth", "2"});
    ASSERT_EQ(g.code, cli::kOk);
    EXPECT_NE(g.out.find("growth l=2: first n with N >= n^l: 7"), std::string::npos) << g.out;
    EXPECT_EQ(run_cli({"ball", "65"}).code, cli::kUsage);
}

TEST(Cli, Rect) {
    const Result r = run_cli({"rect", "1", "1"});
    ASSERT_EQ(r.code, cli::kOk);
    EXPECT_NE(r.out.find("N = 4"), std::string::npos);
    const Result c = run_cli({"rect", "1", "50", "--format", "csv"});
    EXPECT_EQ(split(lines(c.out)[1])[0], "53");
    EXPECT_EQ(run_cli({"rect", "1", "-1"}).code, cli::kUsage);
    EXPECT_EQ(run_cli({"rect", "1", "1e9"}).code, cli::kUsage);
}

TEST(Cli, CheckPasses) {
    const Result r = run_cli({"check"});
    EXPECT_EQ(r.code, cli::kOk) << r.out;
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, DomainRoundTrip) {
    const Result r = run_cli({"domain", "--family", "waffle", "--param", "2"});
    ASSERT_EQ(r.code, cli::kOk);
    const PlanarDomain d = domain_from_json(Json::parse(r.out));
    EXPECT_EQ(d.holes.size(), 4u);
    EXPECT_DOUBLE_EQ(area(d), 21.0);
    EXPECT_EQ(d.provenance.generator, "waffle");

    const Result rnd = run_cli({"domain", "--family", "random", "--param", "12", "--seed", "4"});
    ASSERT_EQ(rnd.code, cli::kOk);
    const PlanarDomain back = domain_from_json(Json::parse(rnd.out));
    const PlanarDomain direct = make_random_polygon(12, 4);
    ASSERT_EQ(back.outer.size(), direct.outer.size());
    for (std::size_t i = 0; i < back.outer.size(); ++i) EXPECT_EQ(back.outer[i].x, direct.outer[i].x);
    EXPECT_EQ(back.provenance.seed, std::optional<std::uint64_t>(4));
}

TEST(Cli, DomainMeshAndMatrix) {
    const Result m = run_cli({"domain", "--family", "rectangle", "--param", "1", "--mesh", "1.5"});
    ASSERT_EQ(m.code, cli::kOk);
    const Json j = Json::parse(m.out);
    EXPECT_EQ(j.at("triangles").size(), 2u);
    EXPECT_EQ(j.at("nodes").size(), 4u);
    const Result k = run_cli({"domain", "--family", "rectangle", "--param", "1", "--mesh", "0.8", "--matrix",
                              "stiffness", "--bc", "dirichlet"});
    ASSERT_EQ(k.code, cli::kOk);
    const OperatorPair p = assemble(triangulate(make_rectangle(1.0), 0.8), BoundaryCondition::Dirichlet);
    const std::string n = std::to_string(p.n_dof);
    EXPECT_EQ(lines(k.out)[0], "%%MatrixMarket matrix coordinate real symmetric");
    EXPECT_EQ(lines(k.out)[1].rfind(n + " " + n + " ", 0), 0u) << lines(k.out)[1];
    EXPECT_EQ(run_cli({"domain", "--family", "random", "--param", "5"}).code, cli::kUsage);
}

TEST(Io, CsvFailedRowKeepsColumns) {
    SweepRow row;
    row.item = {"comb", "3", std::nullopt};
    row.error = "boom";
    const auto f = split(csv_row(row));
    ASSERT_EQ(f.size(), 10u);
    EXPECT_EQ(f[3], "40.5");
    EXPECT_EQ(f[9], "false");
}

TEST(Io, OptionsHashStable) {
    CountingOptions a, b;
    EXPECT_EQ(options_hash(a), options_hash(b));
    b.max_levels = 4;
    EXPECT_NE(options_hash(a), options_hash(b));
    EXPECT_EQ(options_hash(a).size(), 16u);
}

TEST(Io, DomainJsonErrors) {
    EXPECT_THROW(domain_from_json(Json::array()), ParameterError);
    EXPECT_THROW(domain_from_json(Json{{"outer", {{0, 0}, {1}}}}), ParameterError);
    EXPECT_THROW(domain_from_json(Json{{"label", "x"}}), ParameterError);
}
