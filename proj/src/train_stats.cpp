#include "s3kit/train_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace s3kit {

namespace {

void check_config(const TrainConfig& cfg) {
    if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate))
        throw ValidationError("train: learning_rate must be finite and >= 0");
    if (cfg.epochs == 0) throw ValidationError("train: epochs must be >= 1");
    if (!(cfg.init_scale > 0.0)) throw ValidationError("train: init_scale must be positive");
}

void check_data(const DataSet& data) {
    if (data.x.empty()) throw ValidationError("train: data must be nonempty");
    if (data.x.size() != data.y.size())
        throw ValidationError("train: x and y lengths differ");
    for (std::size_t i = 0; i < data.x.size(); ++i)
        if (!std::isfinite(data.x[i]) || !std::isfinite(data.y[i]))
            throw ValidationError("train: non-finite sample at index " + std::to_string(i));
}

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t topology_fingerprint(const OmegaTopology& topology) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the parent encoding
    for (int p : topology.parents) {
        h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(p));
        h *= 0x100000001b3ULL;
    }
    return h;
}

struct Activations {
    std::vector<double> in;   // per neuron: its input (x or parent's output)
    std::vector<double> pre;  // w*in + b
    std::vector<double> out;  // relu(pre)
    double value = 0.0;
};

Activations run_forward(const TrainableNet& net, double x) {
    const std::size_t n = net.w.size();
    Activations act;
    act.in.resize(n);
    act.pre.resize(n);
    act.out.resize(n);
    // Bias added last, matching the constructed nets' accumulation order, so
    // an imported construction evaluates bit-identically to its source chain.
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        int parent = net.topology.parents[i];
        act.in[i] = parent == kInputParent ? x : act.out[static_cast<std::size_t>(parent)];
        act.pre[i] = net.w[i] * act.in[i] + net.b[i];
        act.out[i] = act.pre[i] > 0.0 ? act.pre[i] : 0.0;
        total += net.out_coef[i] * act.out[i];
    }
    act.value = total + net.out_bias;
    return act;
}

// One fused pass: batch loss plus (when grad != nullptr) its gradient.
double batch_pass(const TrainableNet& net, const DataSet& data, Gradients* grad) {
    const std::size_t n = net.w.size();
    const std::size_t m = data.x.size();
    if (grad) {
        grad->w.assign(n, 0.0);
        grad->b.assign(n, 0.0);
        grad->out_coef.assign(n, 0.0);
        grad->out_bias = 0.0;
    }
    double loss = 0.0;
    std::vector<double> g_out(n);
    for (std::size_t k = 0; k < m; ++k) {
        Activations act = run_forward(net, data.x[k]);
        double residual = act.value - data.y[k];
        loss += residual * residual;
        if (!grad) continue;
        double dv = 2.0 * residual / static_cast<double>(m);
        grad->out_bias += dv;
        for (std::size_t i = 0; i < n; ++i) g_out[i] = net.out_coef[i] * dv;
        for (std::size_t ri = n; ri-- > 0;) {  // children first: they sit above their parent
            grad->out_coef[ri] += act.out[ri] * dv;
            double gz = act.pre[ri] > 0.0 ? g_out[ri] : 0.0;
            grad->w[ri] += gz * act.in[ri];
            grad->b[ri] += gz;
            int parent = net.topology.parents[ri];
            if (parent != kInputParent) g_out[static_cast<std::size_t>(parent)] += gz * net.w[ri];
        }
    }
    return loss / static_cast<double>(m);
}

}  // namespace

TrainableNet random_trainable(const OmegaTopology& topology, const TrainConfig& cfg,
                              std::array<double, 2> domain) {
    check_config(cfg);
    require_valid_topology(topology);
    if (!(domain[0] < domain[1])) throw ValidationError("train: empty domain");
    const std::size_t n = topology.n_hidden();
    TrainableNet net;
    net.topology = topology;
    net.domain = domain;
    net.w.resize(n);
    net.b.resize(n);
    net.out_coef.assign(n, 1.0);
    Rng rng(cfg.seed);
    for (std::size_t i = 0; i < n; ++i) net.w[i] = 1.0 + rng.uniform(-cfg.init_scale, cfg.init_scale);
    for (std::size_t i = 0; i < n; ++i) net.b[i] = rng.uniform(-cfg.init_scale, cfg.init_scale);
    return net;
}

TrainableNet trainable_from_chain(const S3ChainNet& chain) {
    TrainableNet net;
    net.topology = chain_topology(static_cast<int>(chain.neurons.size()));
    net.domain = chain.domain;
    net.out_bias = chain.output_bias;
    net.w.reserve(chain.neurons.size());
    net.b.reserve(chain.neurons.size());
    net.out_coef.reserve(chain.neurons.size());
    for (std::size_t i = 0; i < chain.neurons.size(); ++i) {
        net.w.push_back(chain.neurons[i].w);
        net.b.push_back(chain.neurons[i].b);
        net.out_coef.push_back(static_cast<double>(chain.signs[i]));
    }
    return net;
}

double forward_trainable(const TrainableNet& net, double x) {
    return run_forward(net, x).value;
}

double mse_loss(const TrainableNet& net, const DataSet& data) {
    check_data(data);
    return batch_pass(net, data, nullptr);
}

double rmse(const TrainableNet& net, const DataSet& data) {
    return std::sqrt(mse_loss(net, data));
}

Gradients mse_gradient(const TrainableNet& net, const DataSet& data) {
    check_data(data);
    Gradients grad;
    batch_pass(net, data, &grad);
    return grad;
}

namespace {

TrainResult run_training(const OmegaTopology& topology, const DataSet& data,
                         const TrainConfig& cfg, const TrainableNet* init) {
    check_config(cfg);
    check_data(data);
    TrainResult result;
    if (init) {
        if (init->topology.parents != topology.parents)
            throw ValidationError("train: init net wired for a different topology");
        result.net = *init;
    } else {
        auto [lo, hi] = std::minmax_element(data.x.begin(), data.x.end());
        double pad = *lo == *hi ? 0.5 : 0.0;  // degenerate one-point domain
        result.net = random_trainable(topology, cfg, {*lo - pad, *hi + pad});
    }
    TrainableNet& net = result.net;
    const std::size_t n = net.w.size();
    result.loss_history.reserve(cfg.epochs);
    Gradients grad;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        double loss = batch_pass(net, data, &grad);
        result.loss_history.push_back(loss);
        if (!(loss <= 1e6)) {  // also catches NaN
            result.diverged = true;
            return result;
        }
        for (std::size_t i = 0; i < n; ++i) {
            net.w[i] -= cfg.learning_rate * grad.w[i];
            net.b[i] -= cfg.learning_rate * grad.b[i];
            net.out_coef[i] -= cfg.learning_rate * grad.out_coef[i];
        }
        net.out_bias -= cfg.learning_rate * grad.out_bias;
    }
    return result;
}

}  // namespace

TrainResult train_net(const OmegaTopology& topology, const DataSet& data, const TrainConfig& cfg,
                      const TrainableNet* init) {
    require_valid_topology(topology);
    return run_training(topology, data, cfg, init);
}

TrainResult train_chain(std::size_t layers, const DataSet& data, const TrainConfig& cfg,
                        const TrainableNet* init) {
    if (layers == 0) throw ValidationError("train: layer count must be >= 1");
    return run_training(chain_topology(static_cast<int>(layers)), data, cfg, init);
}

RegressionTask make_regression_task(std::uint64_t master_seed) {
    RegressionTask task;
    // Canonical six-segment target with order-one slopes: steep random pwls
    // (slopes up to 1e4) are hopeless for plain gradient descent, so the
    // experiment standardizes on a tame shape every topology can represent.
    task.target = make_pwl({0.0, 0.15, 0.3, 0.45, 0.6, 0.8, 1.0},
                           {0.2, 0.55, 0.35, 0.7, 0.4, 0.75, 0.5});
    task.master_seed = master_seed;
    return task;
}

DataSet sample_task(const RegressionTask& task, const OmegaTopology& topology, std::size_t trial) {
    if (task.samples_per_trial == 0)
        throw ValidationError("sample_task: samples_per_trial must be >= 1");
    if (!(task.noise_sigma >= 0.0))
        throw ValidationError("sample_task: noise_sigma must be >= 0");
    std::uint64_t stream = splitmix64(task.master_seed ^ splitmix64(topology_fingerprint(topology) ^
                                                                    splitmix64(trial)));
    Rng rng(stream);
    const double lo = task.target.domain_lo();
    const double hi = task.target.domain_hi();
    DataSet data;
    data.x.reserve(task.samples_per_trial);
    data.y.reserve(task.samples_per_trial);
    for (std::size_t i = 0; i < task.samples_per_trial; ++i) {
        double x = rng.uniform(lo, hi);
        data.x.push_back(x);
        data.y.push_back(eval_pwl(task.target, x) + task.noise_sigma * rng.gaussian());
    }
    return data;
}

SampleTable equivalence_experiment(const std::vector<OmegaTopology>& topologies,
                                   const RegressionTask& task, std::size_t trials,
                                   const TrainConfig& cfg) {
    if (topologies.empty()) throw ValidationError("equivalence_experiment: no topologies");
    if (trials < 2) throw ValidationError("equivalence_experiment: trials must be >= 2");
    for (const auto& t : topologies) require_valid_topology(t);

    const std::size_t k = topologies.size();
    std::vector<double> results(k * trials);
    std::vector<char> bad(k * trials, 0);
    parallel_for(k * trials, [&](std::size_t flat) {
        const std::size_t col = flat / trials;
        const std::size_t trial = flat % trials;
        DataSet data = sample_task(task, topologies[col], trial);
        TrainConfig trial_cfg = cfg;
        trial_cfg.seed = splitmix64(cfg.seed ^ splitmix64(topology_fingerprint(topologies[col])) ^
                                    splitmix64(trial + 0x7261696eULL));
        TrainResult run = run_training(topologies[col], data, trial_cfg, nullptr);
        if (run.diverged) {
            bad[flat] = 1;
            return;
        }
        results[flat] = rmse(run.net, data);
    });

    SampleTable table;
    table.names.reserve(k);
    table.columns.resize(k);
    table.dropped.assign(k, 0);
    for (std::size_t col = 0; col < k; ++col) {
        table.names.push_back("net" + std::to_string(col + 1));
        table.columns[col].reserve(trials);
        for (std::size_t trial = 0; trial < trials; ++trial) {
            std::size_t flat = col * trials + trial;
            if (bad[flat]) ++table.dropped[col];
            else table.columns[col].push_back(results[flat]);
        }
    }
    return table;
}

namespace {

double sample_mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v, double mean) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0))
        throw ValidationError("incomplete beta: parameters must be positive");
    if (!(x >= 0.0) || !(x <= 1.0))
        throw ValidationError("incomplete beta: x must lie in [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    // The continued fraction converges fastest left of the central ridge;
    // mirror through I_x(a,b) = 1 - I_{1-x}(b,a) otherwise. The mirror is a
    // single up-front decision, not a recursion: with rounded thresholds a
    // ridge point can satisfy both mirror conditions and recurse forever.
    const bool mirrored = x > (a + 1.0) / (a + b + 2.0);
    if (mirrored) {
        std::swap(a, b);
        x = 1.0 - x;
    }

    const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b)) / a;
    // Modified Lentz evaluation of the standard even/odd continued fraction.
    const double tiny = 1e-300;
    double c = 1.0;
    double d = 1.0 - (a + b) * x / (a + 1.0);
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        double dm = static_cast<double>(m);
        double even = dm * (b - dm) * x / ((a + 2.0 * dm - 1.0) * (a + 2.0 * dm));
        d = 1.0 + even * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + even / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        double odd = -(a + dm) * (a + b + dm) * x / ((a + 2.0 * dm) * (a + 2.0 * dm + 1.0));
        d = 1.0 + odd * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + odd / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-14) break;
    }
    return mirrored ? 1.0 - front * h : front * h;
}

double student_t_two_sided_p(double t, double dof) {
    if (!(dof > 0.0)) throw ValidationError("t distribution: dof must be positive");
    if (t == 0.0) return 1.0;
    if (std::isinf(t)) return 0.0;
    double x = dof / (dof + t * t);
    return regularized_incomplete_beta(dof / 2.0, 0.5, x);
}

WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2)
        throw ValidationError("welch_t_test: both samples need at least 2 values");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double ma = sample_mean(a);
    const double mb = sample_mean(b);
    const double va = sample_variance(a, ma);
    const double vb = sample_variance(b, mb);

    WelchResult result;
    if (va == 0.0 && vb == 0.0) {
        // Documented degenerate convention: no within-sample scatter at all.
        result.dof = na + nb - 2.0;
        if (ma == mb) {
            result.t = 0.0;
            result.p = 1.0;
        } else {
            result.t = ma > mb ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
            result.p = 0.0;
        }
        return result;
    }

    const double qa = va / na;
    const double qb = vb / nb;
    result.t = (ma - mb) / std::sqrt(qa + qb);
    result.dof = (qa + qb) * (qa + qb) /
                 (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
    result.p = student_t_two_sided_p(result.t, result.dof);
    return result;
}

std::vector<double> column_means(const SampleTable& table) {
    std::vector<double> means;
    means.reserve(table.columns.size());
    for (const auto& col : table.columns) {
        if (col.empty()) throw ValidationError("column_means: empty column");
        means.push_back(sample_mean(col));
    }
    return means;
}

}  // namespace s3kit
