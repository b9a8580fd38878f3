#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gxlearn/feature_select.hpp"
#include "oracles.hpp"

using namespace gxlearn;

namespace {
Dataset make(const Eigen::MatrixXd& v, std::vector<int> labels) {
    Dataset d;
    d.x = ExpressionMatrix::complete(v);
    d.y = LabelVector::from_ints(labels);
    return d;
}
} // namespace

TEST_CASE("hand-worked two-class ratio") {
    Eigen::MatrixXd v(4, 1);
    v << 0, 2, 4, 6;
    auto d = make(v, {0, 0, 1, 1});
    auto r = bss_wss_ranking(d);
    CHECK(r.ratios[0] == 4.0); // BSS 16, WSS 4, exactly
}

TEST_CASE("degenerate genes: constant gives 0, perfectly separated gives infinity") {
    Eigen::MatrixXd v(4, 3);
    v << 5, 1, 0,
         5, 1, 2,
         5, 3, 4,
         5, 3, 6;
    auto d = make(v, {0, 0, 1, 1});
    auto r = bss_wss_ranking(d);
    CHECK(r.ratios[0] == 0.0);
    CHECK(std::isinf(r.ratios[1]));
    CHECK(r.ratios[2] == 4.0);
    CHECK(r.order == std::vector<Index>{1, 2, 0}); // infinity first
}

TEST_CASE("ranking ties break by ascending gene index") {
    Eigen::MatrixXd v(4, 3);
    v << 0, 0, 9,
         2, 2, 9,
         4, 4, 9,
         6, 6, 9;
    auto d = make(v, {0, 0, 1, 1});
    auto r = bss_wss_ranking(d);
    CHECK(r.ratios[0] == r.ratios[1]);
    CHECK(r.order == std::vector<Index>{0, 1, 2});
}

TEST_CASE("vectorized ratios match the double-loop oracle") {
    oracle::Rng rng(47);
    for (int rep = 0; rep < 20; ++rep) {
        const int C = rep % 2 == 0 ? 2 : 3;
        const int n = 10, p = 20;
        Eigen::MatrixXd v = oracle::random_matrix(rng, n, p, 2.0);
        std::vector<int> y(n);
        for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = i % C; // all classes non-empty
        auto d = make(v, y);
        auto r = bss_wss_ranking(d);
        auto ref = oracle::bss_wss(v, y, C);
        for (int j = 0; j < p; ++j) {
            const double scale = std::max(1.0, std::abs(ref[static_cast<std::size_t>(j)]));
            CHECK(std::abs(r.ratios[static_cast<std::size_t>(j)] - ref[static_cast<std::size_t>(j)]) <=
                  1e-12 * scale);
        }
    }
}

TEST_CASE("scaling one gene leaves its ratio unchanged") {
    oracle::Rng rng(53);
    Eigen::MatrixXd v = oracle::random_matrix(rng, 8, 5);
    std::vector<int> y{0, 1, 0, 1, 0, 1, 0, 1};
    auto r1 = bss_wss_ranking(make(v, y));
    v.col(2) *= 37.5;
    auto r2 = bss_wss_ranking(make(v, y));
    CHECK(r2.ratios[2] == Catch::Approx(r1.ratios[2]).epsilon(1e-12));
}

TEST_CASE("permuting samples leaves ratios unchanged") {
    oracle::Rng rng(59);
    Eigen::MatrixXd v = oracle::random_matrix(rng, 6, 4);
    std::vector<int> y{0, 0, 1, 1, 0, 1};
    auto r1 = bss_wss_ranking(make(v, y));

    std::vector<Index> perm{5, 2, 0, 4, 1, 3};
    Eigen::MatrixXd pv(6, 4);
    std::vector<int> py(6);
    for (int i = 0; i < 6; ++i) {
        pv.row(i) = v.row(perm[static_cast<std::size_t>(i)]);
        py[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
    }
    auto r2 = bss_wss_ranking(make(pv, py));
    for (std::size_t j = 0; j < 4; ++j)
        CHECK(r2.ratios[j] == Catch::Approx(r1.ratios[j]).epsilon(1e-12));
}

TEST_CASE("selection keeps top genes in original column order") {
    Eigen::MatrixXd v(4, 3);
    v << 0, 5, 0,
         2, 5, 2,
         4, 5, 4,
         6, 5, 6;
    v.col(2) *= 2.0; // same ratio as col 0
    auto d = make(v, {0, 0, 1, 1});
    d.x.gene_ids = {"gA", "gB", "gC"};
    auto r = bss_wss_ranking(d);

    auto sel = select_top(d, r, 2);
    CHECK(sel.x.gene_ids == std::vector<std::string>{"gA", "gC"}); // original order, gB (ratio 0) dropped
    CHECK(sel.x.values(3, 0) == 6.0);
    CHECK(sel.x.values(3, 1) == 12.0);

    auto all = select_top(d, r, 3);
    CHECK(all.x.gene_ids == d.x.gene_ids);

    CHECK_THROWS_AS(select_top(d, r, 0), data_error);
    CHECK_THROWS_AS(select_top(d, r, 4), data_error);
}

TEST_CASE("infinite-ratio genes are selected before finite ones") {
    Eigen::MatrixXd v(4, 3);
    v << 0, 1, 5,
         2, 1, 5.5,
         4, 3, 6,
         6, 3, 6.5;
    auto d = make(v, {0, 0, 1, 1}); // ratios: 4, inf, something finite
    auto r = bss_wss_ranking(d);
    auto sel = top_gene_indices(r, 2);
    CHECK(std::find(sel.begin(), sel.end(), Index{1}) != sel.end());
}

TEST_CASE("ranking requires complete data and non-empty classes") {
    Eigen::MatrixXd v(4, 2);
    v << 1, 2, 3, 4, 5, 6, 7, 8;
    auto d = make(v, {0, 0, 1, 1});
    d.x.mask(0, 0) = false;
    d.x.values(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(bss_wss_ranking(d), data_error);

    Dataset d2;
    d2.x = ExpressionMatrix::complete(v);
    d2.y.labels = {0, 0, 0, 0};
    d2.y.class_count = 2; // class 1 declared but empty
    d2.y.class_names = {"0", "1"};
    CHECK_THROWS_AS(bss_wss_ranking(d2), data_error);
}
