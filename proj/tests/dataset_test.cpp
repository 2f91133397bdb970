#include "marginboost/dataset.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "test_util.hpp"

using namespace marginboost;
using testutil::write_temp_file;

TEST(LoadCsv, MapsZeroOneLabels) {
    const auto path = write_temp_file("0.1,0.2,0\n0.3,0.4,1\n0.5,0.6,0\n0.7,0.8,1\n", ".csv");
    const Dataset ds = load_csv(path, 2);
    EXPECT_EQ(ds.n_rows, 4u);
    EXPECT_EQ(ds.n_cols, 2u);
    EXPECT_EQ(ds.labels, (std::vector<int>{-1, +1, -1, +1}));
    EXPECT_EQ(ds.meta.at("label_mapping"), "0->-1, 1->+1");
}

TEST(LoadCsv, NonNumericFeatureNamesLine) {
    const auto path = write_temp_file("0.1,0.2,1\n0.3,oops,-1\n", ".csv");
    try {
        load_csv(path, 2);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(LoadCsv, LabelColumnArithmetic) {
    const auto path = write_temp_file("0.1,0.2,1\n0.3,0.4,-1\n", ".csv");
    const Dataset ds = load_csv(path, 2);
    EXPECT_EQ(ds.n_cols, 2u);
    EXPECT_DOUBLE_EQ(ds.at(1, 1), 0.4);
}

TEST(LoadCsv, HeaderAutoDetected) {
    const auto path = write_temp_file("f1,f2,class\n0.1,0.2,a\n0.3,0.4,b\n", ".csv");
    const Dataset ds = load_csv(path, 2);
    EXPECT_EQ(ds.n_rows, 2u);
    EXPECT_EQ(ds.labels, (std::vector<int>{-1, +1}));  // a < b lexicographically
}

TEST(LoadCsv, SingleClassRejected) {
    const auto path = write_temp_file("0.1,1\n0.2,1\n", ".csv");
    EXPECT_THROW(load_csv(path, 1), DataError);
}

TEST(LoadCsv, RaggedRowNamesLine) {
    const auto path = write_temp_file("0.1,0.2,1\n0.3,-1\n", ".csv");
    try {
        load_csv(path, 2);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(LoadLibsvm, DensifiesSparseRows) {
    const auto path = write_temp_file("+1 1:0.5 3:1.0\n-1 2:0.25\n", ".libsvm");
    const Dataset ds = load_libsvm(path);
    EXPECT_EQ(ds.n_rows, 2u);
    EXPECT_EQ(ds.n_cols, 3u);
    EXPECT_DOUBLE_EQ(ds.at(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(ds.at(0, 1), 0.0);
    EXPECT_DOUBLE_EQ(ds.at(0, 2), 1.0);
    EXPECT_EQ(ds.labels, (std::vector<int>{+1, -1}));
}

TEST(LoadLibsvm, EmptyFileRejected) {
    const auto path = write_temp_file("", ".libsvm");
    EXPECT_THROW(load_libsvm(path), DataError);
}

TEST(LoadLibsvm, NonIncreasingIndicesRejected) {
    const auto path = write_temp_file("+1 2:0.5 2:1.0\n-1 1:0.25\n", ".libsvm");
    EXPECT_THROW(load_libsvm(path), DataError);
}

TEST(LoadLibsvm, LexicographicLabelRule) {
    const auto path = write_temp_file("2 1:0.5\n1 1:0.25\n", ".libsvm");
    const Dataset ds = load_libsvm(path);
    EXPECT_EQ(ds.labels, (std::vector<int>{+1, -1}));  // "1" -> -1, "2" -> +1
    EXPECT_EQ(ds.meta.at("label_mapping"), "1->-1, 2->+1");
}

TEST(Split, CeilingSizes) {
    Dataset ds = testutil::make_dataset(
        {{0.0}, {0.1}, {0.2}, {0.3}, {0.4}, {0.5}, {0.6}, {0.7}, {0.8}, {0.9}},
        {+1, -1, +1, -1, +1, -1, +1, -1, +1, -1}, false);
    const auto [train, test] = split_train_test(ds, 0.7, 7);
    EXPECT_EQ(train.n_rows, 7u);
    EXPECT_EQ(test.n_rows, 3u);
}

TEST(Split, HalfOf690IsExact) {
    std::vector<std::vector<double>> rows(690, std::vector<double>{0.0});
    std::vector<int> labels(690);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i][0] = static_cast<double>(i);
        labels[i] = i % 2 == 0 ? +1 : -1;
    }
    Dataset ds = testutil::make_dataset(rows, labels, false);
    const auto [train, test] = split_train_test(ds, 0.5, 3);
    EXPECT_EQ(train.n_rows, 345u);
    EXPECT_EQ(test.n_rows, 345u);
}

TEST(Split, DeterministicUnderSeed) {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 50; ++i) {
        rows.push_back({i * 0.01, i * 0.02});
        labels.push_back(i % 3 == 0 ? +1 : -1);
    }
    Dataset ds = testutil::make_dataset(rows, labels, false);
    const auto [a_train, a_test] = split_train_test(ds, 0.7, 99);
    const auto [b_train, b_test] = split_train_test(ds, 0.7, 99);
    EXPECT_EQ(a_train.features, b_train.features);
    EXPECT_EQ(a_train.labels, b_train.labels);
    EXPECT_EQ(a_test.features, b_test.features);
}

TEST(Split, PartitionIsExhaustive) {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 23; ++i) {
        rows.push_back({static_cast<double>(i)});
        labels.push_back(i % 2 == 0 ? +1 : -1);
    }
    Dataset ds = testutil::make_dataset(rows, labels, false);
    const auto [train, test] = split_train_test(ds, 0.6, 5);
    std::multiset<double> seen;
    for (std::size_t i = 0; i < train.n_rows; ++i) seen.insert(train.at(i, 0));
    for (std::size_t i = 0; i < test.n_rows; ++i) seen.insert(test.at(i, 0));
    EXPECT_EQ(seen.size(), 23u);
    EXPECT_EQ(*seen.begin(), 0.0);
    EXPECT_EQ(*seen.rbegin(), 22.0);
}

TEST(Split, SingleClassDataErrors) {
    Dataset ds = testutil::make_dataset({{0.1}, {0.2}, {0.3}}, {+1, +1, +1}, false);
    EXPECT_THROW(split_train_test(ds, 0.67, 1), DataError);
}

TEST(Normalize, MinMaxMapsTrainExactly) {
    Dataset train = testutil::make_dataset({{2.0}, {4.0}, {6.0}}, {+1, -1, +1}, false);
    Dataset test = testutil::make_dataset({{8.0}}, {+1}, false);
    const auto [ntrain, ntest, params] = normalize_unit_interval(train, test);
    EXPECT_DOUBLE_EQ(ntrain.at(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(ntrain.at(1, 0), 0.5);
    EXPECT_DOUBLE_EQ(ntrain.at(2, 0), 1.0);
    EXPECT_DOUBLE_EQ(ntest.at(0, 0), 1.0);  // 8 clamps to 1 under min=2, range=4
    EXPECT_TRUE(ntrain.normalized);
}

TEST(Normalize, ConstantColumnMapsToZero) {
    Dataset train = testutil::make_dataset({{5.0}, {5.0}, {5.0}}, {+1, -1, +1}, false);
    Dataset test = train;
    const auto [ntrain, ntest, params] = normalize_unit_interval(train, test);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(ntrain.at(i, 0), 0.0);
    EXPECT_DOUBLE_EQ(params.range[0], 1.0);
}

TEST(Normalize, MismatchedWidthRejected) {
    Dataset train = testutil::make_dataset({{1.0, 2.0}}, {+1}, false);
    Dataset test = testutil::make_dataset({{1.0}}, {-1}, false);
    EXPECT_THROW(normalize_unit_interval(train, test), DataError);
}

TEST(Normalize, IdempotentOnNormalizedData) {
    Dataset train = testutil::make_dataset({{2.0, -1.0}, {4.0, 0.0}, {6.0, 3.0}},
                                           {+1, -1, +1}, false);
    const NormParams params = fit_unit_interval(train);
    const Dataset once = apply_unit_interval(train, params, false);
    const NormParams again = fit_unit_interval(once);
    const Dataset twice = apply_unit_interval(once, again, false);
    for (std::size_t i = 0; i < once.features.size(); ++i)
        EXPECT_NEAR(once.features[i], twice.features[i], 1e-12);
}

TEST(Generate, EmptyDatasetAllowed) {
    GeneratorSpec spec;
    spec.n = 0;
    const Dataset ds = generate(spec);
    EXPECT_EQ(ds.n_rows, 0u);
    EXPECT_EQ(ds.n_cols, 20u);
}

TEST(Generate, DeterministicUnderSeed) {
    GeneratorSpec spec;
    spec.kind = GeneratorSpec::Kind::Threenorm;
    spec.n = 40;
    spec.seed = 12345;
    const Dataset a = generate(spec);
    const Dataset b = generate(spec);
    EXPECT_EQ(a.features, b.features);
    EXPECT_EQ(a.labels, b.labels);
}

TEST(Generate, LabelsBalancedOverManyDraws) {
    GeneratorSpec spec;
    spec.kind = GeneratorSpec::Kind::Twonorm;
    spec.n = 10000;
    spec.seed = 7;
    const Dataset ds = generate(spec);
    std::size_t pos = 0;
    for (int y : ds.labels) pos += y > 0 ? 1 : 0;
    const double freq = static_cast<double>(pos) / 10000.0;
    EXPECT_GE(freq, 0.45);
    EXPECT_LE(freq, 0.55);
}

// Monte Carlo oracle: the +1 class of twonorm is centered at a*1 with
// a = 2/sqrt(dim); the sample mean must match within 3 sigma / sqrt(n).
TEST(Generate, TwonormClassMeanMatchesMonteCarlo) {
    GeneratorSpec spec;
    spec.kind = GeneratorSpec::Kind::Twonorm;
    spec.n = 20000;
    spec.dim = 20;
    spec.seed = 99;
    const Dataset ds = generate(spec);
    const double a = 2.0 / std::sqrt(20.0);

    std::vector<double> mean(20, 0.0);
    std::size_t count = 0;
    for (std::size_t i = 0; i < ds.n_rows; ++i) {
        if (ds.labels[i] != +1) continue;
        ++count;
        for (std::size_t j = 0; j < 20; ++j) mean[j] += ds.at(i, j);
    }
    ASSERT_GT(count, 8000u);
    const double tol = 3.0 / std::sqrt(static_cast<double>(count));
    for (std::size_t j = 0; j < 20; ++j) EXPECT_NEAR(mean[j] / count, a, tol);
}

// Monte Carlo oracle: the wide ringnorm class is N(0, 4I); the sample
// covariance diagonal must come out near 4 within 5%.
TEST(Generate, RingnormWideClassCovariance) {
    GeneratorSpec spec;
    spec.kind = GeneratorSpec::Kind::Ringnorm;
    spec.n = 40000;
    spec.dim = 10;
    spec.seed = 1234;
    const Dataset ds = generate(spec);

    std::vector<double> mean(10, 0.0);
    std::size_t count = 0;
    for (std::size_t i = 0; i < ds.n_rows; ++i) {
        if (ds.labels[i] != +1) continue;
        ++count;
        for (std::size_t j = 0; j < 10; ++j) mean[j] += ds.at(i, j);
    }
    for (double& v : mean) v /= static_cast<double>(count);
    std::vector<double> var(10, 0.0);
    double cross = 0.0;  // covariance between features 0 and 1
    for (std::size_t i = 0; i < ds.n_rows; ++i) {
        if (ds.labels[i] != +1) continue;
        for (std::size_t j = 0; j < 10; ++j) {
            const double d = ds.at(i, j) - mean[j];
            var[j] += d * d;
        }
        cross += (ds.at(i, 0) - mean[0]) * (ds.at(i, 1) - mean[1]);
    }
    for (std::size_t j = 0; j < 10; ++j) {
        var[j] /= static_cast<double>(count - 1);
        EXPECT_NEAR(var[j], 4.0, 0.2);  // 5% of 4
    }
    EXPECT_NEAR(cross / static_cast<double>(count - 1), 0.0, 0.2);
}

TEST(Generate, MetaSidecarRoundTrip) {
    GeneratorSpec spec;
    spec.kind = GeneratorSpec::Kind::Ringnorm;
    spec.n = 16;
    spec.dim = 3;
    spec.seed = 42;
    const Dataset ds = generate(spec);
    const auto path = testutil::temp_path(".csv");
    save_csv(ds, path);
    write_meta_sidecar(ds, path);
    const std::string meta = testutil::read_file(path + ".meta");
    EXPECT_NE(meta.find("kind=ringnorm"), std::string::npos);
    EXPECT_NE(meta.find("n=16"), std::string::npos);
    EXPECT_NE(meta.find("seed=42"), std::string::npos);
    EXPECT_NE(meta.find("a="), std::string::npos);

    const Dataset reloaded = load_csv(path, 3);
    EXPECT_EQ(reloaded.n_rows, ds.n_rows);
    EXPECT_EQ(reloaded.labels, ds.labels);
    for (std::size_t i = 0; i < ds.features.size(); ++i)
        EXPECT_DOUBLE_EQ(reloaded.features[i], ds.features[i]);
}
