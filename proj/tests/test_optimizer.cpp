#include "doctest.h"
#include "oracles.hpp"

#include "starmap/optimizer.hpp"

#include <cmath>
#include <limits>
#include <vector>

using namespace starmap;

namespace {

using V = std::vector<double>;

double dot(const V& u, const V& v) {
    double s = 0;
    for (std::size_t l = 0; l < u.size(); ++l) {
        s += u[l] * v[l];
    }
    return s;
}

FuzzyGraph graph_from_edges(std::size_t n, std::vector<Edge> edges) {
    FuzzyGraph g;
    g.n = n;
    g.edges = std::move(edges);
    g.rho.assign(n, 0.0);
    g.sigma.assign(n, 1.0);
    g.degree.assign(n, 0.0);
    for (const Edge& e : g.edges) {
        g.degree[e.i] += e.w;
        g.degree[e.j] += e.w;
    }
    return g;
}

// Three tight groups, each with a star at its centroid-ish position.
struct StarFixture {
    DataMatrix X;
    FuzzyGraph graph;
    EmbeddingState state;
};

StarFixture star_fixture(std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> x, y;
    std::vector<std::uint32_t> m;
    const double cx[3] = {0, 8, -8}, cy[3] = {6, -4, -4};
    for (std::size_t i = 0; i < 30; ++i) {
        const std::size_t c = i % 3;
        x.insert(x.end(), {cx[c] + rng.normal(), cy[c] + rng.normal(), rng.normal()});
        y.insert(y.end(), {cx[c] / 2 + 2 * rng.normal(), cy[c] / 2 + 2 * rng.normal()});
        m.push_back(static_cast<std::uint32_t>(c));
    }
    StarFixture f;
    f.X = DataMatrix(30, 3, x);
    f.graph = build_fuzzy_graph(f.X, 5, 1);
    f.state.Y = DataMatrix(30, 2, y);
    f.state.S = DataMatrix::from_rows({{0, 3}, {4, -2}, {-4, -2}});
    f.state.assignment = m;
    return f;
}

}  // namespace

TEST_CASE("method names") {
    CHECK(to_string(Method::umap) == "umap");
    CHECK(to_string(Method::starmap) == "starmap");
    CHECK(parse_method("starmap") == Method::starmap);
    CHECK(parse_method("umap") == Method::umap);
    CHECK_THROWS_AS(parse_method("tsne"), InvalidArgument);
}

TEST_CASE("hyperparameter validation") {
    Hyperparams p;
    CHECK_NOTHROW(p.validate());
    CHECK(p.epochs_for(10000) == 500);
    CHECK(p.epochs_for(10001) == 200);
    p.n_epochs = 7;
    CHECK(p.epochs_for(20000) == 7);
    Hyperparams bad;
    bad.lambda = 1.5;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = {};
    bad.clip = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = {};
    bad.a = -1;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = {};
    bad.q = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("similarity examples") {
    const V o{0, 0}, e{1, 0};
    CHECK(similarity(o, o, 1.577, 0.895) == 1.0);
    CHECK(similarity(o, e, 1.0, 1.0) == 0.5);
    CHECK(similarity(o, e, 1.577, 0.895) == doctest::Approx(0.38804811796662786).epsilon(1e-15));
}

TEST_CASE("attraction examples") {
    const V yi{1, 0}, yj{0, 0};
    const V f = attraction_term(yi, yj, 1.0, 1.0, 1.0, 1e-3);
    CHECK(f[0] == -1.0);
    CHECK(f[1] == 0.0);
    for (double v : attraction_term(yi, yj, 0.0, 1.0, 1.0, 1e-3)) {
        CHECK(v == 0.0);
    }
    for (double v : attraction_term(yj, yj, 1.0, 1.577, 0.895, 1e-3)) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("repulsion examples") {
    const V yi{1, 0}, yj{0, 0};
    const V f = repulsion_term(yi, yj, 0.0, 1.0, 1.0, 1e-3);
    CHECK(f[0] == 1.0);
    CHECK(f[1] == 0.0);
    for (double v : repulsion_term(yi, yj, 1.0, 1.0, 1.0, 1e-3)) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("coincident repulsion is bounded and points in a random direction") {
    Hyperparams p;
    const V y{2, -1};
    V out(2);
    Rng rng(1), replay(1);
    sampled_repulsion(y, y, p, rng, out);
    CHECK(std::hypot(out[0], out[1]) == doctest::Approx(p.clip * p.eps).epsilon(1e-12));
    V again(2);
    sampled_repulsion(y, y, p, replay, again);
    CHECK(out == again);

    const V far{5, 3};
    sampled_repulsion(far, y, p, rng, out);
    const double c = clip_coeff(repulsion_coefficient(25.0, 0.0, p.a, p.b, p.eps), p.clip);
    CHECK(out[0] == c * 3.0);
    CHECK(out[1] == c * 4.0);
}

TEST_CASE("star examples") {
    const V s{0, 0}, yi{1, 0};
    for (double v : star_term(s, s, 3.0, 1.0, 1.0, 1e-3)) {
        CHECK(v == 0.0);
    }
    const V f = star_term(yi, s, 1.0, 1.0, 1.0, 1e-3);
    CHECK(f[0] == -1.0);
    CHECK(f[1] == 0.0);
    const V y2{0.3, -1.7};
    const V f1 = star_term(y2, s, 0.8, 1.577, 0.895, 1e-3);
    const V f2 = star_term(y2, s, 1.6, 1.577, 0.895, 1e-3);
    CHECK(f2[0] == doctest::Approx(2 * f1[0]).epsilon(1e-15));
    CHECK(f2[1] == doctest::Approx(2 * f1[1]).epsilon(1e-15));
}

TEST_CASE("clipping") {
    CHECK(clip_coeff(0.2, 0.4) == 0.2);
    CHECK(clip_coeff(7.0, 0.4) == 0.4);
    CHECK(clip_coeff(-7.0, 0.4) == -0.4);
}

TEST_CASE("blending identity") {
    Rng rng(2);
    for (int t = 0; t < 100; ++t) {
        const V yi{3 * rng.normal(), 3 * rng.normal()}, yj{3 * rng.normal(), 3 * rng.normal()};
        const V s{3 * rng.normal(), 3 * rng.normal()};
        const double w = rng.uniform(), d = 5 * rng.uniform();
        const V att = attraction_term(yi, yj, w, 1.577, 0.895, 1e-3);
        const V st = star_term(yi, s, d, 1.577, 0.895, 1e-3);
        CHECK(blend_attraction(0.0, st, att) == att);
        CHECK(blend_attraction(1.0, st, att) == st);
    }
    CHECK_THROWS_AS(blend_attraction(0.5, V{1}, V{1, 2}), InvalidArgument);
}

TEST_CASE("force signs on random pairs") {
    Rng rng(3);
    for (int t = 0; t < 1000; ++t) {
        const V yi{4 * rng.normal(), 4 * rng.normal()}, yj{4 * rng.normal(), 4 * rng.normal()};
        const V diff{yi[0] - yj[0], yi[1] - yj[1]};
        const double w = rng.uniform();
        CHECK(dot(attraction_term(yi, yj, w, 1.577, 0.895, 1e-3), diff) <= 0.0);
        CHECK(dot(repulsion_term(yi, yj, w, 1.577, 0.895, 1e-3), diff) >= 0.0);
    }
}

TEST_CASE("loss limits and oracle") {
    Hyperparams p;
    SUBCASE("attracting pair") {
        const std::vector<double> W{0, 1, 1, 0};
        const DataMatrix near = DataMatrix::from_rows({{0, 0}, {1e-4, 0}});
        const DataMatrix at1 = DataMatrix::from_rows({{0, 0}, {1, 0}});
        CHECK(loss(near, W, p) < 1e-6);
        CHECK(loss(at1, W, p) == doctest::Approx(-2 * std::log(0.38804811796662786)).epsilon(1e-12));
    }
    SUBCASE("repelling pair far apart") {
        const std::vector<double> W{0, 0, 0, 0};
        const DataMatrix far = DataMatrix::from_rows({{0, 0}, {1e4, 0}});
        CHECK(loss(far, W, p) < 1e-6);
    }
    SUBCASE("random instance") {
        Rng rng(4);
        const DataMatrix Y = oracle::random_matrix(10, 2, 5, 3.0);
        const auto W = oracle::random_weights(10, rng);
        CHECK(loss(Y, W, p) == doctest::Approx(oracle::cross_entropy(Y, W, p.a, p.b)).epsilon(1e-12));
    }
    SUBCASE("graph overload") {
        const DataMatrix Y = oracle::random_matrix(4, 2, 6);
        const FuzzyGraph g = graph_from_edges(4, {{0, 1, 0.5}, {2, 3, 1.0}});
        CHECK(loss(Y, g, p) == loss(Y, g.dense(), p));
        CHECK(full_gradient(Y, g, p) == full_gradient(Y, g.dense(), p));
    }
    CHECK_THROWS_AS(loss(DataMatrix(2, 2), std::vector<double>(3), p), InvalidArgument);
}

TEST_CASE("gradient matches finite differences") {
    Hyperparams p;
    for (std::uint64_t s = 0; s < 5; ++s) {
        Rng rng(100 + s);
        const DataMatrix Y = oracle::spread_points(10, 2, rng, 3.0, 0.2);
        const auto W = oracle::random_weights(10, rng);
        const DataMatrix G = full_gradient(Y, W, p);
        const DataMatrix F = pairwise_forces(Y, W, p);
        const DataMatrix fd = oracle::negative_fd_gradient(
            Y, [&](const DataMatrix& Z) { return oracle::cross_entropy(Z, W, p.a, p.b); }, 1e-5);
        for (std::size_t i = 0; i < 10; ++i) {
            for (std::size_t l = 0; l < 2; ++l) {
                CHECK(G(i, l) == 2 * F(i, l));
                CHECK(std::abs(G(i, l) - fd(i, l)) <= 1e-4 * std::max(1.0, std::abs(fd(i, l))));
            }
        }
    }
}

TEST_CASE("two-point gradients are equal and opposite") {
    Hyperparams p;
    const DataMatrix Y = DataMatrix::from_rows({{-0.7, 0.2}, {0.7, -0.2}});
    const std::vector<double> W{0, 0.6, 0.6, 0};
    const DataMatrix G = full_gradient(Y, W, p);
    CHECK(G(0, 0) == -G(1, 0));
    CHECK(G(0, 1) == -G(1, 1));
}

TEST_CASE("pure repulsion gradient steps lower the loss") {
    Hyperparams p;
    const DataMatrix Y = oracle::random_matrix(8, 2, 7, 2.0);
    const std::vector<double> W(64, 0.0);
    const DataMatrix G = full_gradient(Y, W, p);
    const double L0 = loss(Y, W, p);
    for (std::size_t i = 0; i < 8; ++i) {
        DataMatrix Z = Y;
        for (std::size_t l = 0; l < 2; ++l) {
            Z(i, l) += 1e-3 * G(i, l);
        }
        CHECK(loss(Z, W, p) < L0);
    }
}

TEST_CASE("coefficient monotonicity in w") {
    Hyperparams p;
    for (int di = 1; di <= 50; ++di) {
        const double d2 = std::pow(di / 10.0, 2);
        double prev_a = -1, prev_r = std::numeric_limits<double>::infinity();
        for (int wi = 0; wi <= 10; ++wi) {
            const double w = wi / 10.0;
            const double ca = std::abs(attraction_coefficient(d2, w, p.a, p.b, p.eps));
            const double cr = std::abs(repulsion_coefficient(d2, w, p.a, p.b, p.eps));
            CHECK(ca >= prev_a);
            CHECK(cr <= prev_r);
            prev_a = ca;
            prev_r = cr;
        }
    }
}

TEST_CASE("N=2 attraction shrinks the gap") {
    const FuzzyGraph g = graph_from_edges(2, {{0, 1, 1.0}});
    EmbeddingState st;
    st.Y = DataMatrix::from_rows({{-3, 1}, {4, 0}});
    const double before = oracle::dist(st.Y, 0, 1);
    Hyperparams p;
    p.n_epochs = 200;
    OptimizeOptions opt;
    opt.negative_sampling = false;
    optimize(st, g, p, Method::umap, opt);
    CHECK(oracle::dist(st.Y, 0, 1) < 0.5 * before);
    CHECK(st.epoch == 200);
}

TEST_CASE("pure star pull contracts every point toward its star") {
    StarFixture f = star_fixture(8);
    Hyperparams p;
    p.lambda = 1.0;
    p.n_epochs = 300;
    p.seed = 3;
    const DataMatrix S0 = f.state.S;
    auto star_dist = [&](const DataMatrix& Y, std::size_t i) {
        return std::hypot(Y(i, 0) - f.state.S(f.state.assignment[i], 0), Y(i, 1) - f.state.S(f.state.assignment[i], 1));
    };
    std::vector<double> prev(30);
    for (std::size_t i = 0; i < 30; ++i) {
        prev[i] = star_dist(f.state.Y, i);
    }
    bool monotone = true;
    OptimizeOptions opt;
    opt.negative_sampling = false;
    opt.on_epoch = [&](std::size_t, const DataMatrix& Y) {
        for (std::size_t i = 0; i < 30; ++i) {
            const double d = star_dist(Y, i);
            monotone = monotone && d <= prev[i];
            prev[i] = d;
        }
    };
    optimize(f.state, f.graph, p, Method::starmap, opt);
    CHECK(monotone);
    CHECK(f.state.S == S0);
    for (std::size_t i = 0; i < 30; ++i) {
        CHECK(prev[i] < 0.1);
    }
}

TEST_CASE("lambda zero reproduces umap updates") {
    StarFixture a = star_fixture(9);
    StarFixture b = star_fixture(9);
    Hyperparams p;
    p.lambda = 0.0;
    p.n_epochs = 60;
    p.seed = 4;
    optimize(a.state, a.graph, p, Method::starmap);
    optimize(b.state, b.graph, p, Method::umap);
    REQUIRE(a.state.Y.values().size() == b.state.Y.values().size());
    CHECK(std::equal(a.state.Y.values().begin(), a.state.Y.values().end(), b.state.Y.values().begin()));
}

TEST_CASE("deterministic mode replays bit for bit and leaves stars alone") {
    StarFixture a = star_fixture(10);
    StarFixture b = star_fixture(10);
    const DataMatrix S0 = a.state.S;
    Hyperparams p;
    p.n_epochs = 50;
    p.seed = 5;
    optimize(a.state, a.graph, p, Method::starmap);
    optimize(b.state, b.graph, p, Method::starmap);
    CHECK(a.state.Y == b.state.Y);
    CHECK(a.state.S == S0);
    CHECK(a.state.Y.all_finite());

    StarFixture c = star_fixture(10);
    p.seed = 6;
    optimize(c.state, c.graph, p, Method::starmap);
    CHECK_FALSE(c.state.Y == a.state.Y);
}

TEST_CASE("parallel mode stays finite and keeps stars fixed") {
    StarFixture f = star_fixture(11);
    const DataMatrix S0 = f.state.S;
    Hyperparams p;
    p.n_epochs = 50;
    OptimizeOptions opt;
    opt.deterministic = false;
    opt.threads = 4;
    optimize(f.state, f.graph, p, Method::starmap, opt);
    CHECK(f.state.Y.all_finite());
    CHECK(f.state.S == S0);
    CHECK(f.state.epoch == 50);
}

TEST_CASE("non-finite coordinates abort with a diagnostic") {
    StarFixture f = star_fixture(12);
    f.state.Y(4, 1) = std::numeric_limits<double>::quiet_NaN();
    Hyperparams p;
    p.n_epochs = 5;
    try {
        optimize(f.state, f.graph, p, Method::umap);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
        CHECK(std::string(e.what()).find("epoch 1") != std::string::npos);
    }
}

TEST_CASE("optimize argument errors") {
    StarFixture f = star_fixture(13);
    Hyperparams p;
    p.n_epochs = 1;
    EmbeddingState wrong_n;
    wrong_n.Y = DataMatrix(5, 2);
    CHECK_THROWS_AS(optimize(wrong_n, f.graph, p, Method::umap), InvalidArgument);
    EmbeddingState no_stars;
    no_stars.Y = f.state.Y;
    CHECK_THROWS_AS(optimize(no_stars, f.graph, p, Method::starmap), InvalidArgument);
    EmbeddingState bad_assign = f.state;
    bad_assign.assignment[0] = 3;
    CHECK_THROWS_AS(optimize(bad_assign, f.graph, p, Method::starmap), InvalidArgument);
    p.lambda = -0.1;
    CHECK_THROWS_AS(optimize(f.state, f.graph, p, Method::umap), InvalidArgument);
}
