#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "sandwich/core.hpp"
#include "sandwich/noise.hpp"
#include "sandwich/parallel.hpp"

using namespace sandwich;

TEST(TimeGrid, UnitIntervalTenSteps) {
    const auto g = make_grid(1.0, 10);
    ASSERT_EQ(g.size(), 11u);
    for (std::size_t k = 0; k <= 10; ++k) EXPECT_DOUBLE_EQ(g.node(k), 0.1 * static_cast<double>(k));
    EXPECT_EQ(g.node(0), 0.0);
    EXPECT_EQ(g.node(10), 1.0);
}

TEST(TimeGrid, FineMesh) {
    const auto g = make_grid(1.0, 100000);
    EXPECT_DOUBLE_EQ(g.mesh(), 1e-5);
    EXPECT_EQ(g.node(100000), 1.0);
}

TEST(TimeGrid, HorizonTwo) {
    const auto nodes = make_grid(2.0, 4).nodes();
    const std::vector<double> expected{0.0, 0.5, 1.0, 1.5, 2.0};
    EXPECT_EQ(nodes, expected);
}

TEST(TimeGrid, RejectsBadArguments) {
    EXPECT_THROW(make_grid(0.0, 10), std::invalid_argument);
    EXPECT_THROW(make_grid(-1.0, 10), std::invalid_argument);
    EXPECT_THROW(make_grid(1.0, 0), std::invalid_argument);
    EXPECT_THROW(make_grid(std::numeric_limits<double>::infinity(), 3), std::invalid_argument);
}

TEST(TimeGrid, NodesStrictlyIncreasing) {
    for (std::size_t n : {1u, 3u, 7u, 1000u}) {
        const auto nodes = make_grid(3.7, n).nodes();
        for (std::size_t k = 1; k < nodes.size(); ++k) EXPECT_LT(nodes[k - 1], nodes[k]);
        EXPECT_EQ(nodes.back(), 3.7);
    }
}

TEST(TauMinus, Examples) {
    const auto g = make_grid(1.0, 10);
    EXPECT_DOUBLE_EQ(g.tau_minus(0.25), 0.2);
    EXPECT_DOUBLE_EQ(g.tau_minus(0.2), 0.2);
    EXPECT_DOUBLE_EQ(g.tau_minus(1.0), 1.0);
    EXPECT_DOUBLE_EQ(g.tau_plus(0.25), 0.3);
    EXPECT_DOUBLE_EQ(g.tau_plus(0.2), 0.2);
}

TEST(TauMinus, OutsideIntervalThrows) {
    const auto g = make_grid(1.0, 10);
    EXPECT_THROW(g.tau_minus(-0.01), std::invalid_argument);
    EXPECT_THROW(g.tau_minus(1.01), std::invalid_argument);
    EXPECT_THROW(g.tau_plus(std::nan("")), std::invalid_argument);
}

TEST(TauMinus, ProjectionProperty) {
    std::mt19937_64 rng(3);
    for (std::size_t n : {1u, 10u, 37u, 1024u}) {
        const auto g = make_grid(2.5, n);
        std::uniform_real_distribution<double> u(0.0, 2.5);
        for (int i = 0; i < 2000; ++i) {
            const double t = u(rng);
            const double lo = g.tau_minus(t);
            const double hi = g.tau_plus(t);
            EXPECT_LE(lo, t);
            EXPECT_GE(hi, t);
            const double gap = hi - lo;
            EXPECT_TRUE(gap == 0.0 || std::abs(gap - g.mesh()) < 1e-12) << gap;
        }
        for (std::size_t k = 0; k <= n; ++k) {
            EXPECT_EQ(g.tau_minus(g.node(k)), g.node(k));
            EXPECT_EQ(g.tau_plus(g.node(k)), g.node(k));
        }
    }
}

TEST(SamplePath, RejectsWrongLengthAndNonFinite) {
    const auto g = make_grid(1.0, 2);
    EXPECT_THROW(SamplePath(g, {1.0, 2.0}), std::invalid_argument);
    EXPECT_THROW(SamplePath(g, {1.0, std::nan(""), 3.0}), NumericError);
    try {
        SamplePath(g, {1.0, 2.0, std::numeric_limits<double>::infinity()});
        FAIL();
    } catch (const NumericError& e) {
        EXPECT_EQ(e.node(), 2u);
    }
}

TEST(SamplePath, RestrictToCoarseGrid) {
    const auto fine = make_grid(1.0, 8);
    std::vector<double> v(9);
    for (std::size_t k = 0; k < 9; ++k) v[k] = static_cast<double>(k);
    const SamplePath p(fine, v);
    const auto c = p.restrict_to(make_grid(1.0, 2));
    EXPECT_EQ(c.values(), (std::vector<double>{0.0, 4.0, 8.0}));
    EXPECT_THROW(p.restrict_to(make_grid(1.0, 3)), std::invalid_argument);
}

TEST(Csv, ExactFormat) {
    const SamplePath p(make_grid(1.0, 2), {1.0, 2.0, 3.0});
    std::ostringstream out;
    write_path_csv(p, out);
    EXPECT_EQ(out.str(), "t,value\n0,1\n0.5,2\n1,3\n");
}

TEST(Csv, RoundTripFbmPath) {
    const auto g = make_grid(1.0, 1000);
    const auto z = sample_noise(NoiseSpec::fbm(0.7), g, RngStream(11, 0)).path;
    std::stringstream buf;
    write_path_csv(z, buf);
    const auto back = read_path_csv(buf);
    EXPECT_TRUE(back == z);
}

TEST(Csv, RoundTripAwkwardValues) {
    const SamplePath p(make_grid(3.0, 3), {0.1, -1e-308, 1.0 / 3.0, 6.02214076e23});
    std::stringstream buf;
    write_path_csv(p, buf);
    EXPECT_TRUE(read_path_csv(buf) == p);
}

TEST(Csv, DecreasingTimeColumnRejected) {
    std::istringstream in("t,value\n0,1\n0.5,2\n0.25,3\n");
    EXPECT_THROW(read_path_csv(in), ParseError);
}

TEST(Csv, MalformedInputsRejected) {
    for (const char* text : {"time,value\n0,1\n1,2\n", "t,value\n0,1\n1\n", "t,value\n0,1\n1,x\n",
                             "t,value\n0,1\n1,2,3\n", "t,value\n0.1,1\n1,2\n",
                             "t,value\n0,1\n0.3,2\n1,3\n", "t,value\n0,1\n", "t,value\n0,nan\n1,1\n"}) {
        std::istringstream in(text);
        EXPECT_THROW(read_path_csv(in), ParseError) << text;
    }
}

TEST(Csv, MissingFileIsIoError) {
    EXPECT_THROW(read_path_csv(std::string("/nonexistent/dir/p.csv")), std::runtime_error);
}

TEST(RngStream, DeterministicPerSeedAndIndex) {
    const auto a = RngStream(42, 7).normals(100);
    const auto b = RngStream(42, 7).normals(100);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, RngStream(42, 8).normals(100));
    EXPECT_NE(a, RngStream(43, 7).normals(100));
}

TEST(RngStream, SubstreamsDifferFromParentAndSiblings) {
    const RngStream s(5, 3);
    EXPECT_NE(s.substream(0).key(), s.substream(1).key());
    EXPECT_NE(s.substream(0).key(), s.key());
    EXPECT_NE(s.substream(0).key(), RngStream(5, 0).key());
}

TEST(RngStream, StreamsAreUncorrelated) {
    const auto a = RngStream(1, 0).normals(20000);
    const auto b = RngStream(1, 1).normals(20000);
    double ab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) ab += a[i] * b[i];
    // correlation estimate has sd 1/sqrt(20000) ≈ 0.007
    EXPECT_LT(std::abs(ab / static_cast<double>(a.size())), 0.03);
}

TEST(SampleMoments, MeanAndStderr) {
    const auto m = sample_moments({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(m.mean, 2.5);
    EXPECT_NEAR(m.variance, 5.0 / 3.0, 1e-15);
    EXPECT_NEAR(m.stderr_, std::sqrt(5.0 / 12.0), 1e-15);
    EXPECT_EQ(sample_moments({7.0}).stderr_, 0.0);
}

TEST(CompensatedSum, RecoversSmallTerms) {
    CompensatedSum s;
    s.add(1e16);
    for (int i = 0; i < 1000; ++i) s.add(1.0);
    s.add(-1e16);
    EXPECT_EQ(s.value(), 1000.0);
}

TEST(Parallel, ResultsIndependentOfWorkerCount) {
    auto task = [](std::size_t i) { return RngStream(9, i).normals(3)[2]; };
    const auto one = parallel_map<double>(257, 1, task);
    const auto many = parallel_map<double>(257, 4, task);
    EXPECT_EQ(one, many);
}

TEST(Parallel, PropagatesExceptions) {
    EXPECT_THROW(parallel_for(50, 3,
                              [](std::size_t i) {
                                  if (i == 17) throw std::runtime_error("boom");
                              }),
                 std::runtime_error);
}
