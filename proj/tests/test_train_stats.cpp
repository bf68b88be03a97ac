#include <cmath>

#include "doctest.h"
#include "s3kit/serialize.hpp"
#include "s3kit/train_stats.hpp"

using namespace s3kit;

namespace {

SampleTable load_table1() {
    static SampleTable table = table_from_csv(read_csv(std::string(S3KIT_DATA_DIR) + "/table1.csv"));
    return table;
}

const std::vector<double>& table_column(const SampleTable& t, const std::string& name) {
    for (std::size_t i = 0; i < t.names.size(); ++i)
        if (t.names[i] == name) return t.columns[i];
    throw std::runtime_error("missing column " + name);
}

WelchResult welch_pair(const std::string& a, const std::string& b) {
    SampleTable t = load_table1();
    return welch_t_test(table_column(t, a), table_column(t, b));
}

}  // namespace

TEST_CASE("forward pass distinguishes chain wiring from input wiring") {
    TrainableNet chain;
    chain.topology = parse_topology("I,0");
    chain.w = {2.0, 3.0};
    chain.b = {-1.0, 0.0};
    chain.out_coef = {0.5, -1.0};
    chain.out_bias = 0.25;
    chain.domain = {0.0, 2.0};
    CHECK(forward_trainable(chain, 1.0) == -2.25);  // r0 = 1, r1 = 3
    CHECK(forward_trainable(chain, 0.4) == 0.25);   // r0 = 0 kills the chain

    TrainableNet star = chain;
    star.topology = parse_topology("I,I");
    CHECK(forward_trainable(star, 1.0) == -2.25);
    CHECK(forward_trainable(star, 0.4) == doctest::Approx(-0.95).epsilon(1e-15));
}

TEST_CASE("an imported construction evaluates identically to its chain") {
    PiecewiseLinear pwl = make_pwl({0.0, 0.3, 0.7, 1.0}, {0.1, 0.8, -0.2, 0.5});
    S3ChainNet chain = build_chain(pwl);
    TrainableNet net = trainable_from_chain(chain);
    CHECK(net.w.size() == chain.neurons.size());
    CHECK(net.n_params() == 3 * chain.neurons.size() + 1);
    for (double x : linspace(0.0, 1.0, 501))
        CHECK(forward_trainable(net, x) == chain_value(chain, x));
}

TEST_CASE("training from a constructed net starts at zero loss and stays put") {
    PiecewiseLinear pwl = make_pwl({0.0, 0.25, 0.6, 1.0}, {0.0, 0.5, 0.1, 0.4});
    TrainableNet init = trainable_from_chain(build_chain(pwl));

    // Data produced by the net itself: the loss floor is exactly zero.
    DataSet data;
    data.x = linspace(0.0, 1.0, 64);
    for (double x : data.x) data.y.push_back(forward_trainable(init, x));

    TrainConfig cfg;
    cfg.learning_rate = 0.5;
    cfg.epochs = 5;
    TrainResult result = train_net(init.topology, data, cfg, &init);
    REQUIRE(result.loss_history.size() == 5);
    for (double loss : result.loss_history) CHECK(loss == 0.0);
    CHECK_FALSE(result.diverged);
    CHECK(result.net.w == init.w);  // zero gradient: parameters untouched
    CHECK(result.net.b == init.b);
    CHECK(result.net.out_coef == init.out_coef);
    CHECK(result.net.out_bias == init.out_bias);
}

TEST_CASE("zero learning rate freezes the loss history") {
    RegressionTask task = make_regression_task(3);
    DataSet data = sample_task(task, chain_topology(4), 0);
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.epochs = 12;
    cfg.seed = 9;
    TrainResult result = train_chain(4, data, cfg);
    REQUIRE(result.loss_history.size() == 12);
    for (double loss : result.loss_history) CHECK(loss == result.loss_history.front());
    CHECK_FALSE(result.diverged);
}

TEST_CASE("training validates its inputs") {
    DataSet data{{0.0, 0.5, 1.0}, {0.0, 1.0, 0.0}};
    TrainConfig cfg;
    CHECK_THROWS_AS(train_chain(0, data, cfg), ValidationError);
    cfg.epochs = 0;
    CHECK_THROWS_AS(train_chain(3, data, cfg), ValidationError);
    cfg.epochs = 10;
    cfg.learning_rate = -0.1;
    CHECK_THROWS_AS(train_chain(3, data, cfg), ValidationError);
    cfg.learning_rate = 0.01;
    cfg.init_scale = 0.0;
    CHECK_THROWS_AS(train_chain(3, data, cfg), ValidationError);
    cfg.init_scale = 0.1;
    CHECK_THROWS_AS(train_chain(3, DataSet{{0.1}, {}}, cfg), ValidationError);
    CHECK_THROWS_AS(train_chain(3, DataSet{{}, {}}, cfg), ValidationError);

    // Init wired for a different topology is rejected.
    TrainableNet init = random_trainable(star_topology(3), cfg, {0.0, 1.0});
    CHECK_THROWS_AS(train_net(chain_topology(3), data, cfg, &init), ValidationError);
}

TEST_CASE("random init is seeded and centered away from dead ReLUs") {
    TrainConfig cfg;
    cfg.seed = 77;
    cfg.init_scale = 0.25;
    TrainableNet a = random_trainable(chain_topology(6), cfg, {0.0, 1.0});
    TrainableNet b = random_trainable(chain_topology(6), cfg, {0.0, 1.0});
    CHECK(a.w == b.w);
    CHECK(a.b == b.b);
    cfg.seed = 78;
    TrainableNet c = random_trainable(chain_topology(6), cfg, {0.0, 1.0});
    CHECK(a.w != c.w);
    for (std::size_t i = 0; i < a.w.size(); ++i) {
        CHECK(a.w[i] >= 0.75);
        CHECK(a.w[i] <= 1.25);
        CHECK(std::fabs(a.b[i]) <= 0.25);
    }
}

TEST_CASE("analytic gradients match central differences") {
    const double h = 1e-6;
    std::size_t comparisons = 0;
    for (std::uint64_t seed : {101, 202, 303}) {
        for (const char* wiring : {"I,0,1,2,3", "I,I,I,I,I", "I,0,I,1,3"}) {
            OmegaTopology topology = parse_topology(wiring);
            TrainConfig cfg;
            cfg.seed = seed;
            cfg.init_scale = 0.15;
            TrainableNet net = random_trainable(topology, cfg, {0.0, 1.0});
            RegressionTask task = make_regression_task(seed);
            DataSet data = sample_task(task, topology, 0);

            Gradients g = mse_gradient(net, data);
            auto check_param = [&](double* param, double analytic) {
                double saved = *param;
                *param = saved + h;
                double up = mse_loss(net, data);
                *param = saved - h;
                double down = mse_loss(net, data);
                *param = saved;
                double numeric = (up - down) / (2.0 * h);
                CHECK(std::fabs(numeric - analytic) <=
                      1e-4 * (1.0 + std::fabs(numeric) + std::fabs(analytic)));
                ++comparisons;
            };
            for (std::size_t i = 0; i < net.w.size(); ++i) {
                check_param(&net.w[i], g.w[i]);
                check_param(&net.b[i], g.b[i]);
                check_param(&net.out_coef[i], g.out_coef[i]);
            }
            check_param(&net.out_bias, g.out_bias);
        }
    }
    CHECK(comparisons >= 100);
}

TEST_CASE("an absurd learning rate is flagged as divergence, not silently kept") {
    RegressionTask task = make_regression_task(1);
    DataSet data = sample_task(task, chain_topology(5), 0);
    TrainConfig cfg;
    cfg.learning_rate = 1e9;
    cfg.epochs = 50;
    TrainResult result = train_chain(5, data, cfg);
    CHECK(result.diverged);
    CHECK(result.loss_history.size() <= 50);  // aborted at the blow-up
}

TEST_CASE("task sampling is keyed on topology content, not object identity") {
    RegressionTask task = make_regression_task(42);
    OmegaTopology a = chain_topology(5);
    OmegaTopology b = parse_topology("I,0,1,2,3");  // same content, fresh object
    DataSet da = sample_task(task, a, 3);
    DataSet db = sample_task(task, b, 3);
    CHECK(da.x == db.x);
    CHECK(da.y == db.y);

    DataSet other_trial = sample_task(task, a, 4);
    CHECK(da.x != other_trial.x);
    DataSet other_wiring = sample_task(task, star_topology(5), 3);
    CHECK(da.x != other_wiring.x);
    RegressionTask other_seed = make_regression_task(43);
    CHECK(da.x != sample_task(other_seed, a, 3).x);

    CHECK(da.x.size() == task.samples_per_trial);
    for (double x : da.x) {
        CHECK(x >= task.target.domain_lo());
        CHECK(x <= task.target.domain_hi());
    }
}

TEST_CASE("identical topologies give identical experiment columns") {
    std::vector<OmegaTopology> topologies = {chain_topology(6), chain_topology(6)};
    RegressionTask task = make_regression_task(7);
    TrainConfig cfg;
    cfg.learning_rate = 0.05;
    cfg.epochs = 40;
    cfg.seed = 11;
    SampleTable table = equivalence_experiment(topologies, task, 4, cfg);
    REQUIRE(table.columns.size() == 2);
    REQUIRE(table.names.size() == 2);
    CHECK(table.names[0] != table.names[1]);
    CHECK(table.columns[0].size() == 4);
    CHECK(table.columns[0] == table.columns[1]);
    CHECK(table.dropped == std::vector<std::size_t>{0, 0});

    CHECK_THROWS_AS(equivalence_experiment(topologies, task, 1, cfg), ValidationError);
    CHECK_THROWS_AS(equivalence_experiment({}, task, 4, cfg), ValidationError);
}

TEST_CASE("diverging trials are dropped and counted") {
    std::vector<OmegaTopology> topologies = {chain_topology(4)};
    RegressionTask task = make_regression_task(5);
    TrainConfig cfg;
    cfg.learning_rate = 1e9;
    cfg.epochs = 30;
    SampleTable table = equivalence_experiment(topologies, task, 3, cfg);
    REQUIRE(table.columns.size() == 1);
    CHECK(table.dropped[0] == 3);
    CHECK(table.columns[0].empty());
}

TEST_CASE("Welch test reproduces the frozen fixture oracles") {
    WelchResult r12 = welch_pair("I", "II");
    CHECK(r12.t == doctest::Approx(0.1585669399486536).epsilon(1e-10));
    CHECK(r12.dof == doctest::Approx(30.83881823696167).epsilon(1e-10));
    CHECK(r12.p == doctest::Approx(0.8750439211176302).epsilon(1e-10));

    WelchResult r34 = welch_pair("III", "IV");
    CHECK(r34.t == doctest::Approx(-1.6826390874089818).epsilon(1e-10));
    CHECK(r34.dof == doctest::Approx(37.940699743466546).epsilon(1e-10));
    CHECK(r34.p == doctest::Approx(0.10065826013963329).epsilon(1e-10));

    WelchResult r23 = welch_pair("II", "III");
    CHECK(r23.t == doctest::Approx(1.8955680992774075).epsilon(1e-10));
    CHECK(r23.p == doctest::Approx(0.06712778390294231).epsilon(1e-10));

    CHECK(welch_pair("V", "VI").p == doctest::Approx(0.9948997980384675).epsilon(1e-10));
}

TEST_CASE("Welch p-values match the published table on the consistent columns") {
    // Printed reference values, four decimals. The fixture's V and VI columns
    // are not consistent with the printed test results (see the acceptance
    // run for the full breakdown), so only pairs among I..IV are pinned here.
    CHECK(std::fabs(welch_pair("I", "II").p - 0.8765) <= 0.005);
    CHECK(std::fabs(welch_pair("I", "III").p - 0.1030) <= 0.005);
    CHECK(std::fabs(welch_pair("I", "IV").p - 1.0) <= 0.005);
    CHECK(std::fabs(welch_pair("II", "III").p - 0.0671) <= 0.005);
    CHECK(std::fabs(welch_pair("II", "IV").p - 0.8738) <= 0.005);
    CHECK(std::fabs(welch_pair("III", "IV").p - 0.1007) <= 0.005);
}

TEST_CASE("column means of the fixture") {
    SampleTable t = load_table1();
    std::vector<double> means = column_means(t);
    REQUIRE(means.size() == 6);
    CHECK(means[0] == doctest::Approx(0.10503).epsilon(1e-12));
    CHECK(means[1] == doctest::Approx(0.10489).epsilon(1e-12));
    CHECK(means[2] == doctest::Approx(0.10328).epsilon(1e-12));
    CHECK(means[3] == doctest::Approx(0.10503).epsilon(1e-12));
    CHECK(means[4] == doctest::Approx(0.10408).epsilon(1e-12));
    CHECK(means[5] == doctest::Approx(0.104075).epsilon(1e-12));
    // Printed means, where consistent: 0.1050 0.1049 0.1033 0.1050.
    CHECK(std::fabs(means[0] - 0.1050) <= 5e-5);
    CHECK(std::fabs(means[1] - 0.1049) <= 5e-5);
    CHECK(std::fabs(means[2] - 0.1033) <= 5e-5);
    CHECK(std::fabs(means[3] - 0.1050) <= 5e-5);
}

TEST_CASE("Welch test properties: symmetry, scale invariance, degeneracy") {
    std::vector<double> a = {0.11, 0.10, 0.12, 0.105, 0.099};
    std::vector<double> b = {0.10, 0.103, 0.097, 0.101, 0.108, 0.1};

    WelchResult ab = welch_t_test(a, b);
    WelchResult ba = welch_t_test(b, a);
    CHECK(ab.p == ba.p);
    CHECK(ab.t == -ba.t);
    CHECK(ab.dof == ba.dof);

    std::vector<double> a3(a), b3(b);
    for (double& v : a3) v *= 3.0;
    for (double& v : b3) v *= 3.0;
    WelchResult scaled = welch_t_test(a3, b3);
    CHECK(scaled.p == doctest::Approx(ab.p).epsilon(1e-12));
    CHECK(scaled.t == doctest::Approx(ab.t).epsilon(1e-12));

    WelchResult same = welch_t_test({1.0, 1.0, 1.0}, {1.0, 1.0});
    CHECK(same.p == 1.0);
    CHECK(same.t == 0.0);
    WelchResult apart = welch_t_test({1.0, 1.0, 1.0}, {2.0, 2.0});
    CHECK(apart.p == 0.0);
    CHECK(std::isinf(apart.t));

    CHECK_THROWS_AS(welch_t_test({1.0}, {1.0, 2.0}), ValidationError);  // need n >= 2
}

TEST_CASE("t-distribution tail machinery") {
    // dof = 1 is the Cauchy law: closed-form two-sided p = 1 - (2/pi) atan(t).
    CHECK(student_t_two_sided_p(1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(student_t_two_sided_p(0.0, 7.0) == 1.0);
    // dof = 2 closed form: p = 1 - t / sqrt(2 + t^2).
    double t = std::sqrt(2.0);
    CHECK(student_t_two_sided_p(t, 2.0) ==
          doctest::Approx(1.0 - t / std::sqrt(2.0 + t * t)).epsilon(1e-12));
    // Classic critical value: t_{0.025, 10} = 2.2281388519649385.
    CHECK(student_t_two_sided_p(2.2281388519649385, 10.0) ==
          doctest::Approx(0.05).epsilon(1e-9));

    CHECK(log_beta(1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(log_beta(2.0, 3.0) == doctest::Approx(std::log(1.0 / 12.0)).epsilon(1e-13));

    // I_x(a,b) + I_{1-x}(b,a) = 1, and symmetry point exactly one half.
    for (double x : {0.1, 0.3, 0.5, 0.8}) {
        double lhs = regularized_incomplete_beta(2.5, 4.0, x) +
                     regularized_incomplete_beta(4.0, 2.5, 1.0 - x);
        CHECK(lhs == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(regularized_incomplete_beta(3.0, 3.0, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(regularized_incomplete_beta(2.0, 2.0, 0.0) == 0.0);
    CHECK(regularized_incomplete_beta(2.0, 2.0, 1.0) == 1.0);
}
