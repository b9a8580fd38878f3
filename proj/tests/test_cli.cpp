#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "gxlearn/io.hpp"

using namespace gxlearn;

namespace {

const std::string tmp_root = std::string(GXLEARN_TEST_TMPDIR) + "/cli";

struct CliResult {
    int exit_code = -1;
    std::string out, err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CliResult run_cli(const std::string& args) {
    std::filesystem::create_directories(tmp_root);
    const std::string out_path = tmp_root + "/stdout.txt";
    const std::string err_path = tmp_root + "/stderr.txt";
    const std::string cmd =
        std::string(GXLEARN_CLI_PATH) + " " + args + " >" + out_path + " 2>" + err_path;
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

std::string fresh_dir(const std::string& name) {
    const std::string dir = tmp_root + "/" + name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Writes a two-class matrix whose first eight genes carry the class signal,
/// plus the matching label file. Returns {matrix_path, labels_path}.
std::pair<std::string, std::string> write_toy(const std::string& dir, int n = 40, int p = 60) {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> noise(0.0, 1.0);
    const std::string mpath = dir + "/toy.csv";
    const std::string lpath = dir + "/toy_labels.txt";
    std::ofstream m(mpath);
    m << "sample";
    for (int j = 0; j < p; ++j) m << ",g" << j;
    m << "\n";
    std::ofstream l(lpath);
    for (int i = 0; i < n; ++i) {
        const int c = i % 2;
        m << "s" << i;
        for (int j = 0; j < p; ++j) {
            const double signal = j < 8 ? 3.0 * c : 0.0;
            m << "," << 100.0 + signal + noise(rng);
        }
        m << "\n";
        l << (c ? "tumor" : "normal") << "\n";
    }
    return {mpath, lpath};
}

} // namespace

TEST_CASE("cv subcommand writes the comparison artifacts", "[cli]") {
    const std::string dir = fresh_dir("cv");
    const auto [data, labels] = write_toy(dir);
    const CliResult r = run_cli("cv --method kma --data " + data + " --labels " + labels +
                                " --k 10 --seed 7 --out " + dir);
    INFO(r.err);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("KMA") != std::string::npos);

    const std::string summary = slurp(dir + "/cv_summary.csv");
    CHECK(summary.find("gxlearn.cv_summary.v1,KMA,") != std::string::npos);
    CHECK(slurp(dir + "/cv_folds.csv").find("gxlearn.cv_folds.v1,KMA,") != std::string::npos);
    CHECK(slurp(dir + "/cv_confusion.csv").find("gxlearn.cv_confusion.v1,KMA,") !=
          std::string::npos);

    // Two aligned text lines: method names over error rates.
    const std::string table = slurp(dir + "/cv_table.txt");
    CHECK(std::count(table.begin(), table.end(), '\n') == 2);

    const std::string prov = slurp(dir + "/provenance.txt");
    CHECK(prov.rfind("gxlearn provenance v1\ncommand cv\n", 0) == 0);
    CHECK(prov.find("seed 7") != std::string::npos);
    CHECK(prov.find("fnv1a64=" + fnv1a64_hex(data)) != std::string::npos);
}

TEST_CASE("cv compares several methods in one run", "[cli]") {
    const std::string dir = fresh_dir("cv_multi");
    const auto [data, labels] = write_toy(dir);
    const CliResult r = run_cli("cv --method knn,lda,kma --data " + data + " --labels " + labels +
                                " --k 5 --seed 3 --out " + dir);
    INFO(r.err);
    REQUIRE(r.exit_code == 0);
    const std::string summary = slurp(dir + "/cv_summary.csv");
    CHECK(summary.find(",KNN,") != std::string::npos);
    CHECK(summary.find(",LDA,") != std::string::npos);
    CHECK(summary.find(",KMA,") != std::string::npos);
}

TEST_CASE("cv artifacts are byte-identical across reruns", "[cli]") {
    const std::string dir_a = fresh_dir("det_a");
    const std::string dir_b = fresh_dir("det_b");
    const auto [data, labels] = write_toy(dir_a);
    const std::string args = " --method knn,kma --data " + data + " --labels " + labels +
                             " --k 5 --seed 11 --out ";
    REQUIRE(run_cli("cv" + args + dir_a).exit_code == 0);
    REQUIRE(run_cli("cv" + args + dir_b).exit_code == 0);
    for (const char* name : {"cv_summary.csv", "cv_folds.csv", "cv_confusion.csv", "cv_table.txt"})
        CHECK(slurp(dir_a + "/" + std::string(name)) == slurp(dir_b + "/" + std::string(name)));
}

TEST_CASE("preprocess writes the reduced matrix and the kept-gene map", "[cli]") {
    const std::string dir = fresh_dir("pp");
    const auto [data, labels] = write_toy(dir);
    (void)labels;
    const CliResult r = run_cli("preprocess --data " + data +
                                " --fold-min 1.0001 --span-min 0.5 --out " + dir);
    INFO(r.err);
    REQUIRE(r.exit_code == 0);

    const ExpressionMatrix x = load_matrix(dir + "/preprocessed.csv");
    CHECK(x.rows() == 40);
    CHECK(x.cols() == 60);
    // Per-sample standardization is part of the default chain.
    for (Index i = 0; i < x.rows(); ++i)
        CHECK(x.values.row(i).mean() == Catch::Approx(0.0).margin(1e-12));
    CHECK(slurp(dir + "/kept_genes.csv").rfind("schema,index,gene_id\n", 0) == 0);
}

TEST_CASE("diagnostic subcommands emit csv plus svg", "[cli]") {
    const std::string dir = fresh_dir("diag");
    const auto [data, labels] = write_toy(dir);
    REQUIRE(run_cli("rle --data " + data + " --out " + dir).exit_code == 0);
    REQUIRE(run_cli("boxstats --data " + data + " --out " + dir).exit_code == 0);
    REQUIRE(run_cli("pca --data " + data + " --labels " + labels + " --out " + dir).exit_code ==
            0);
    for (const char* name : {"rle.csv", "rle.svg", "boxstats.csv", "boxstats.svg",
                             "pca_scores.csv", "pca_variance.csv", "pca.svg"})
        CHECK(std::filesystem::exists(dir + "/" + std::string(name)));
    CHECK(slurp(dir + "/rle.svg").rfind("<svg", 0) == 0);
    CHECK(slurp(dir + "/pca.svg").find("tumor") != std::string::npos);
}

TEST_CASE("select ranks genes and keeps the requested top set", "[cli]") {
    const std::string dir = fresh_dir("sel");
    const auto [data, labels] = write_toy(dir);
    const CliResult r =
        run_cli("select --data " + data + " --labels " + labels + " --p-keep 10 --out " + dir);
    INFO(r.err);
    REQUIRE(r.exit_code == 0);
    const ExpressionMatrix kept = load_matrix(dir + "/selected.csv");
    CHECK(kept.cols() == 10);
    // The informative genes g0..g7 must all survive a keep-10 cut.
    int informative = 0;
    for (const auto& id : kept.gene_ids)
        if (id.size() == 2 && id[0] == 'g' && id[1] < '8') ++informative;
    CHECK(informative == 8);
}

TEST_CASE("train then predict round-trips through the model file", "[cli]") {
    const std::string dir = fresh_dir("tp");
    const auto [data, labels] = write_toy(dir);
    REQUIRE(run_cli("train --data " + data + " --labels " + labels +
                    " --method kma --p-keep 20 --out " + dir)
                .exit_code == 0);
    REQUIRE(std::filesystem::exists(dir + "/model.gxm"));
    const CliResult r =
        run_cli("predict --data " + data + " --model " + dir + "/model.gxm --out " + dir);
    INFO(r.err);
    REQUIRE(r.exit_code == 0);

    // Training data should come back essentially perfectly classified.
    std::ifstream pred(dir + "/predictions.csv");
    std::string line;
    std::getline(pred, line); // header
    int row = 0, correct = 0;
    while (std::getline(pred, line)) {
        const std::string want = row % 2 ? "tumor" : "normal";
        if (line.find("," + want) != std::string::npos &&
            line.rfind(want) + want.size() == line.size())
            ++correct;
        ++row;
    }
    CHECK(row == 40);
    CHECK(correct >= 38);
}

TEST_CASE("predicting with mismatched gene count fails as a data error", "[cli]") {
    const std::string dir = fresh_dir("mismatch");
    const auto [data, labels] = write_toy(dir);
    REQUIRE(run_cli("train --data " + data + " --labels " + labels + " --method knn --out " + dir)
                .exit_code == 0);
    std::filesystem::create_directories(dir + "/narrow");
    const auto [narrow, narrow_labels] = write_toy(dir + "/narrow", 10, 5);
    (void)narrow_labels;
    const CliResult r =
        run_cli("predict --data " + narrow + " --model " + dir + "/model.gxm --out " + dir);
    CHECK(r.exit_code == 3);
    CHECK(r.err.rfind("error: data:", 0) == 0);
}

TEST_CASE("unknown flags and missing inputs map to distinct exit codes", "[cli]") {
    const std::string dir = fresh_dir("errors");
    const auto [data, labels] = write_toy(dir);
    CHECK(run_cli("cv --no-such-flag --data " + data + " --labels " + labels).exit_code == 2);
    CHECK(run_cli("frobnicate").exit_code == 2);

    const CliResult missing =
        run_cli("cv --data " + dir + "/absent.csv --labels " + labels + " --out " + dir);
    CHECK(missing.exit_code == 3);
    CHECK(missing.err.rfind("error: data:", 0) == 0);

    const CliResult bad_method = run_cli("cv --method warp-drive --data " + data + " --labels " +
                                         labels + " --out " + dir);
    CHECK(bad_method.exit_code == 3);
}

TEST_CASE("config file fills gaps but explicit flags win", "[cli]") {
    const std::string dir = fresh_dir("config");
    const auto [data, labels] = write_toy(dir);
    {
        std::ofstream cfg(dir + "/run.cfg");
        cfg << "# comparison defaults\n"
            << "cv.k = 4\n"
            << "classifier.k = 7\n"
            << "io.na = NA\n"
            << "unrelated.key = ignored\n";
    }
    const CliResult r = run_cli("cv --method knn --data " + data + " --labels " + labels +
                                " --config " + dir + "/run.cfg --neighbors 3 --seed 2 --out " +
                                dir);
    INFO(r.err);
    REQUIRE(r.exit_code == 0);
    const std::string prov = slurp(dir + "/provenance.txt");
    CHECK(prov.find("config.cv.k 4\n") != std::string::npos);         // from the file
    CHECK(prov.find("config.classifier.k 3\n") != std::string::npos); // flag overrides the file
    CHECK(prov.find("config.cv.seed 2\n") != std::string::npos);
}

TEST_CASE("grid flags trigger the nested search during cv", "[cli]") {
    const std::string dir = fresh_dir("grid");
    const auto [data, labels] = write_toy(dir, 30, 30);
    const CliResult r = run_cli("cv --method knn --grid-k 1,3,5 --data " + data + " --labels " +
                                labels + " --k 3 --seed 5 --out " + dir);
    INFO(r.err);
    REQUIRE(r.exit_code == 0);
    const std::string folds = slurp(dir + "/cv_folds.csv");
    CHECK(folds.find("k=") != std::string::npos); // per-fold chosen settings are reported
}
