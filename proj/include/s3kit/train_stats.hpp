#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "s3kit/omega.hpp"
#include "s3kit/piecewise.hpp"
#include "s3kit/s3_chain.hpp"

namespace s3kit {

// Hyperparameters for full-batch gradient descent. learning_rate 0 is allowed
// (it makes the loss history provably constant, which the tests rely on).
struct TrainConfig {
    double learning_rate = 0.01;
    std::size_t epochs = 100;
    std::uint64_t seed = 0;
    double init_scale = 0.1;  // uniform init half-width
};

struct DataSet {
    std::vector<double> x;
    std::vector<double> y;
};

// Trainable relaxation of the constructed nets: same single-parent wiring,
// but the output signs become free real coefficients (a net with hard ±1
// signs has no usable sign gradient; the relaxation strictly contains the
// constructed family, whose nets are exact minima of the fit loss).
struct TrainableNet {
    OmegaTopology topology;
    std::vector<double> w;
    std::vector<double> b;
    std::vector<double> out_coef;
    double out_bias = 0.0;
    std::array<double, 2> domain{0.0, 1.0};

    std::size_t n_params() const { return 3 * w.size() + 1; }
};

// Seeded init. Weights are drawn around 1 (w in [1-s, 1+s]) and biases around
// 0 (b in [-s, s]): a weight drawn around 0 kills deep chains at birth, since
// one dead ReLU zeroes every downstream activation and its gradients.
TrainableNet random_trainable(const OmegaTopology& topology, const TrainConfig& cfg,
                              std::array<double, 2> domain);

// Exact-construction import: w/b copied, out_coef = the hard signs, so the
// imported net evaluates identically to the source chain.
TrainableNet trainable_from_chain(const S3ChainNet& chain);

double forward_trainable(const TrainableNet& net, double x);

struct Gradients {
    std::vector<double> w;
    std::vector<double> b;
    std::vector<double> out_coef;
    double out_bias = 0.0;
};

double mse_loss(const TrainableNet& net, const DataSet& data);
double rmse(const TrainableNet& net, const DataSet& data);

// Analytic full-batch gradient of the mean squared error, backpropagated
// through the recurrence (children always have higher indices than their
// parent, so one descending sweep settles every activation gradient).
Gradients mse_gradient(const TrainableNet& net, const DataSet& data);

struct TrainResult {
    TrainableNet net;
    std::vector<double> loss_history;  // pre-update loss, one entry per epoch
    bool diverged = false;             // loss above 1e6 (or non-finite): aborted
};

TrainResult train_net(const OmegaTopology& topology, const DataSet& data, const TrainConfig& cfg,
                      const TrainableNet* init = nullptr);

// Chain-wired convenience wrapper: `layers` is the neuron count.
TrainResult train_chain(std::size_t layers, const DataSet& data, const TrainConfig& cfg,
                        const TrainableNet* init = nullptr);

// Synthetic regression task: noisy samples of a fixed tame piecewise-linear
// target on [0, 1]. The target shape is canonical (independent of the seed);
// master_seed drives the sample draws only.
struct RegressionTask {
    PiecewiseLinear target;
    std::size_t samples_per_trial = 64;
    double noise_sigma = 0.05;
    std::uint64_t master_seed = 0;
};

RegressionTask make_regression_task(std::uint64_t master_seed);

// Deterministic trial data. The stream is keyed on (master_seed, topology
// content, trial): identical topologies see identical data, distinct ones
// get independent draws.
DataSet sample_task(const RegressionTask& task, const OmegaTopology& topology, std::size_t trial);

// Named columns of repeated-trial scalars; columns need not share lengths
// (diverged trials are dropped from their column and counted in `dropped`).
struct SampleTable {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    std::vector<std::size_t> dropped;
};

// Trains every topology `trials` times on freshly seeded task data and
// records the final training RMSE per trial, one column per topology.
SampleTable equivalence_experiment(const std::vector<OmegaTopology>& topologies,
                                   const RegressionTask& task, std::size_t trials,
                                   const TrainConfig& cfg);

struct WelchResult {
    double t = 0.0;
    double dof = 0.0;
    double p = 1.0;
};

// Welch's unequal-variance t-test, two-sided. Degenerate convention when both
// sample variances vanish: equal means -> p = 1, unequal -> p = 0 (t = ±inf).
WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

std::vector<double> column_means(const SampleTable& table);

// Numeric kernels backing the t-test, exposed for direct oracle checks.
double log_beta(double a, double b);
double regularized_incomplete_beta(double a, double b, double x);
double student_t_two_sided_p(double t, double dof);

}  // namespace s3kit
