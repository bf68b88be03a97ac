#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "s3kit/builtins.hpp"
#include "s3kit/serialize.hpp"
#include "s3kit/spectral.hpp"

namespace {

using s3kit::json;

constexpr const char* kToolVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Run manifests: every output-producing run drops one next to its first
// output so the exact parameters and inputs can be recovered later.

struct RunRecord {
    std::string subcommand;
    json parameters = json::object();
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    bool has_seed = false;
    std::uint64_t seed = 0;
};

class RunTimer {
  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

  private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

void write_manifest(const RunRecord& rec, double seconds) {
    if (rec.outputs.empty()) return;
    json j;
    j["kind"] = "run_manifest";
    j["subcommand"] = rec.subcommand;
    j["parameters"] = rec.parameters;
    j["inputs"] = rec.inputs;
    j["outputs"] = rec.outputs;
    if (rec.has_seed) j["seed"] = rec.seed;
    else j["seed"] = nullptr;
    j["tool_version"] = kToolVersion;
    j["duration_seconds"] = seconds;
    s3kit::write_json_atomic(rec.outputs.front() + ".manifest.json", j);
}

// ---------------------------------------------------------------------------
// Small shared helpers.

std::string trimmed(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

s3kit::OmegaTopology resolve_topology(const std::string& inline_text, const std::string& file) {
    if (!inline_text.empty() && !file.empty())
        throw s3kit::ValidationError("give either --topology or --file, not both");
    if (!inline_text.empty()) return s3kit::parse_topology(inline_text);
    if (!file.empty()) return s3kit::parse_topology(trimmed(s3kit::read_text(file)));
    throw s3kit::ValidationError("a topology is required (--topology or --file)");
}

int parse_parent(const std::string& token) {
    if (token == "I") return s3kit::kInputParent;
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(token, &used);
    } catch (const std::exception&) {
        throw s3kit::ValidationError("bad parent '" + token + "' (expected \"I\" or an index)");
    }
    if (used != token.size() || v < 0)
        throw s3kit::ValidationError("bad parent '" + token + "' (expected \"I\" or an index)");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = s.find(sep, pos);
        out.push_back(s.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

std::vector<double> parse_coords(const std::string& s) {
    std::vector<double> out;
    for (const std::string& tok : split(s, ',')) {
        errno = 0;
        char* end = nullptr;
        double v = std::strtod(tok.c_str(), &end);
        if (tok.empty() || end != tok.c_str() + tok.size() || errno == ERANGE)
            throw s3kit::ValidationError("bad coordinate '" + tok + "' in '" + s + "'");
        out.push_back(v);
    }
    return out;
}

// The chain construction divides consecutive slope increments, so weights can
// blow up on near-degenerate targets; warn once per affected net.
void warn_conditioning(double max_weight, const std::string& label) {
    if (max_weight > s3kit::kConditioningLimit)
        std::cerr << "warning: " << label << " has a weight of magnitude "
                  << s3kit::format_double(max_weight)
                  << "; evaluations may lose precision\n";
}

double max_abs_weight(const s3kit::OmegaNet& net) {
    double m = 0.0;
    for (const auto& n : net.neurons) m = std::max(m, std::fabs(n.w));
    return m;
}

s3kit::Csv curve_csv(const std::vector<double>& xs, const std::vector<std::string>& names,
                     const std::vector<std::function<double(double)>>& fns) {
    s3kit::Csv csv;
    csv.header.push_back("x");
    for (const auto& n : names) csv.header.push_back(n);
    csv.rows.reserve(xs.size());
    for (double x : xs) {
        std::vector<std::string> row;
        row.reserve(1 + fns.size());
        row.push_back(s3kit::format_double(x));
        for (const auto& fn : fns) row.push_back(s3kit::format_double(fn(x)));
        csv.rows.push_back(std::move(row));
    }
    return csv;
}

// ---------------------------------------------------------------------------
// approx: fit a builtin, build the chain, verify, emit net + plot CSV.

struct ApproxOpts {
    std::string fn;
    std::vector<double> interval;
    double step = 0.01;
    std::size_t grid = 10000;
    std::string out;
    std::string curve_out;
    std::size_t curve_points = 1001;
};

void run_approx(const ApproxOpts& o) {
    RunTimer timer;
    const s3kit::BuiltinFunction& builtin = s3kit::find_builtin(o.fn);
    double lo = o.interval.empty() ? builtin.default_lo : o.interval[0];
    double hi = o.interval.empty() ? builtin.default_hi : o.interval[1];
    if (!(lo < hi)) throw s3kit::ValidationError("approx: interval must satisfy lo < hi");

    s3kit::PiecewiseLinear raw = s3kit::fit_uniform(builtin.fn, lo, hi, o.step);
    s3kit::PiecewiseLinear pwl = s3kit::simplify(raw, s3kit::default_slope_tol(raw));
    s3kit::S3ChainNet net = s3kit::build_chain(pwl);
    warn_conditioning(s3kit::max_abs_weight(net), "chain");
    double err = s3kit::sup_error(net, pwl, o.grid);

    std::string curve_path = o.curve_out.empty() ? o.out + ".curve.csv" : o.curve_out;
    s3kit::write_json_atomic(o.out, s3kit::chain_to_json(net));
    std::vector<double> xs = s3kit::linspace(lo, hi, o.curve_points);
    s3kit::write_csv_atomic(
        curve_path,
        curve_csv(xs, {"target", "network"},
                  {builtin.fn, [&](double x) { return s3kit::chain_value(net, x); }}));

    std::cout << "segments = " << pwl.segment_count() << '\n';
    std::cout << "neurons = " << net.neurons.size() << '\n';
    std::cout << "sup_error = " << s3kit::format_double(err) << '\n';
    std::cout << "wrote " << o.out << '\n';
    std::cout << "wrote " << curve_path << '\n';

    RunRecord rec;
    rec.subcommand = "approx";
    rec.parameters["fn"] = o.fn;
    rec.parameters["interval"] = json::array({lo, hi});
    rec.parameters["step"] = o.step;
    rec.parameters["grid"] = o.grid;
    rec.parameters["curve_points"] = o.curve_points;
    rec.outputs = {o.out, curve_path};
    write_manifest(rec, timer.seconds());
}

// ---------------------------------------------------------------------------
// omega subcommands.

struct OmegaGenOpts {
    int n = 0;
    std::uint64_t seed = 0;
    std::string out;
};

void run_omega_gen(const OmegaGenOpts& o) {
    RunTimer timer;
    s3kit::OmegaTopology t = s3kit::random_topology(o.n, o.seed);
    std::cout << s3kit::format_topology(t) << '\n';
    if (!o.out.empty()) {
        s3kit::write_text_atomic(o.out, s3kit::format_topology(t) + "\n");
        RunRecord rec;
        rec.subcommand = "omega gen";
        rec.parameters["n"] = o.n;
        rec.has_seed = true;
        rec.seed = o.seed;
        rec.outputs = {o.out};
        write_manifest(rec, timer.seconds());
    }
}

struct TopologySourceOpts {
    std::string topology;
    std::string file;
};

void run_omega_check(const TopologySourceOpts& o) {
    s3kit::OmegaTopology t = resolve_topology(o.topology, o.file);
    auto violations = s3kit::validate_topology(t);
    if (violations.empty()) {
        std::cout << "valid\n";
        std::cout << "neurons = " << t.n_hidden() << '\n';
        std::cout << "edges = " << 2 * (t.n_hidden() + 2) - 3 << '\n';
        std::cout << "members = " << s3kit::topology_count(t.n_hidden()) << '\n';
        return;
    }
    for (const auto& v : violations) {
        std::cout << "violation: " << v.requirement;
        if (v.neuron >= 0) std::cout << " (neuron " << v.neuron << ")";
        std::cout << ": " << v.detail << '\n';
    }
    throw s3kit::ValidationError("topology invalid (" + std::to_string(violations.size()) +
                                 " violation(s); see stdout)");
}

struct OmegaRewireOpts {
    TopologySourceOpts source;
    int neuron = 0;
    std::string parent;
    std::string out;
};

void run_omega_rewire(const OmegaRewireOpts& o) {
    RunTimer timer;
    s3kit::OmegaTopology t = resolve_topology(o.source.topology, o.source.file);
    s3kit::OmegaTopology rewired = s3kit::cut_rewire(t, o.neuron, parse_parent(o.parent));
    std::cout << s3kit::format_topology(rewired) << '\n';
    if (!o.out.empty()) {
        s3kit::write_text_atomic(o.out, s3kit::format_topology(rewired) + "\n");
        RunRecord rec;
        rec.subcommand = "omega rewire";
        rec.parameters["topology"] = s3kit::format_topology(t);
        rec.parameters["neuron"] = o.neuron;
        rec.parameters["parent"] = o.parent;
        if (!o.source.file.empty()) rec.inputs.push_back(o.source.file);
        rec.outputs = {o.out};
        write_manifest(rec, timer.seconds());
    }
}

struct OmegaEquivOpts {
    TopologySourceOpts source;
    std::string pwl_file;
    std::string fn;
    std::vector<double> interval;
    double step = 0.01;
    std::size_t grid = 10000;
    std::string out;
};

void run_omega_equiv(const OmegaEquivOpts& o) {
    RunTimer timer;
    s3kit::OmegaTopology t = resolve_topology(o.source.topology, o.source.file);

    s3kit::PiecewiseLinear pwl;
    if (!o.pwl_file.empty() && !o.fn.empty())
        throw s3kit::ValidationError("give either --pwl or --fn, not both");
    if (!o.pwl_file.empty()) {
        pwl = s3kit::pwl_from_json(s3kit::read_json(o.pwl_file));
    } else if (!o.fn.empty()) {
        const s3kit::BuiltinFunction& builtin = s3kit::find_builtin(o.fn);
        double lo = o.interval.empty() ? builtin.default_lo : o.interval[0];
        double hi = o.interval.empty() ? builtin.default_hi : o.interval[1];
        if (!(lo < hi)) throw s3kit::ValidationError("equiv: interval must satisfy lo < hi");
        s3kit::PiecewiseLinear raw = s3kit::fit_uniform(builtin.fn, lo, hi, o.step);
        pwl = s3kit::simplify(raw, s3kit::default_slope_tol(raw));
    } else {
        throw s3kit::ValidationError("a target is required (--pwl or --fn)");
    }

    s3kit::S3ChainNet chain = s3kit::build_chain(pwl);
    s3kit::OmegaNet net = s3kit::build_omega(t, pwl);
    warn_conditioning(s3kit::max_abs_weight(chain), "chain");
    warn_conditioning(max_abs_weight(net), "omega net");

    std::cout << "sup_difference = "
              << s3kit::format_double(s3kit::sup_difference(net, chain, o.grid)) << '\n';
    std::cout << "sup_error = " << s3kit::format_double(s3kit::sup_error(net, pwl, o.grid))
              << '\n';

    if (!o.out.empty()) {
        s3kit::write_json_atomic(o.out, s3kit::omega_to_json(net));
        std::cout << "wrote " << o.out << '\n';
        RunRecord rec;
        rec.subcommand = "omega equiv";
        rec.parameters["topology"] = s3kit::format_topology(t);
        if (!o.fn.empty()) {
            rec.parameters["fn"] = o.fn;
            rec.parameters["step"] = o.step;
        }
        rec.parameters["grid"] = o.grid;
        if (!o.source.file.empty()) rec.inputs.push_back(o.source.file);
        if (!o.pwl_file.empty()) rec.inputs.push_back(o.pwl_file);
        rec.outputs = {o.out};
        write_manifest(rec, timer.seconds());
    }
}

struct OmegaEnumOpts {
    int n = 0;
    std::string out;
};

void run_omega_enum(const OmegaEnumOpts& o) {
    RunTimer timer;
    std::vector<s3kit::OmegaTopology> all = s3kit::enumerate_topologies(o.n);
    if (o.out.empty()) {
        for (const auto& t : all) std::cout << s3kit::format_topology(t) << '\n';
        return;
    }
    std::string body;
    for (const auto& t : all) {
        body += s3kit::format_topology(t);
        body += '\n';
    }
    s3kit::write_text_atomic(o.out, body);
    std::cout << "count = " << all.size() << '\n';
    std::cout << "wrote " << o.out << '\n';
    RunRecord rec;
    rec.subcommand = "omega enum";
    rec.parameters["n"] = o.n;
    rec.outputs = {o.out};
    write_manifest(rec, timer.seconds());
}

// ---------------------------------------------------------------------------
// spectra: hidden-graph spectral radius and classification.

struct SpectraOpts {
    TopologySourceOpts source;
    double tol = 1e-10;
};

void run_spectra(const SpectraOpts& o) {
    s3kit::OmegaTopology t = resolve_topology(o.source.topology, o.source.file);
    s3kit::require_valid_topology(t);
    s3kit::HiddenGraph g = s3kit::hidden_graph(t);
    s3kit::SpectralResult res = s3kit::spectral_radius_full(g, o.tol);
    s3kit::GraphClass cls = s3kit::classify(g);

    std::cout << "vertices = " << g.n_vertices << '\n';
    std::cout << "edges = " << g.edge_count() << '\n';
    std::cout << "rho = " << s3kit::format_double(res.rho) << '\n';
    std::cout << "residual = " << s3kit::format_double(res.residual) << '\n';
    std::cout << "iterations = " << res.iterations << '\n';
    std::cout << "converged = " << (res.converged ? "true" : "false") << '\n';
    std::cout << "is_tree = " << (cls.is_tree ? "true" : "false") << '\n';
    std::cout << "is_star = " << (cls.is_star ? "true" : "false") << '\n';
    std::cout << "connected = " << (cls.connected ? "true" : "false") << '\n';
    std::cout << "adjacency:\n";
    for (std::size_t r = 0; r < g.n_vertices; ++r) {
        for (std::size_t c = 0; c < g.n_vertices; ++c) {
            if (c) std::cout << ' ';
            std::cout << static_cast<int>(g.adjacency.at(r, c));
        }
        std::cout << '\n';
    }
}

// ---------------------------------------------------------------------------
// trees sweep: extremal scan over all labeled trees per vertex count.

struct TreesSweepOpts {
    std::size_t min_n = 3;
    std::size_t max_n = 8;
    std::string out;
    std::string radii_out;
    double tol = 1e-10;
};

void run_trees_sweep(const TreesSweepOpts& o) {
    RunTimer timer;
    if (o.min_n < 2 || o.min_n > o.max_n)
        throw s3kit::ValidationError("trees sweep: need 2 <= min <= max");

    s3kit::Csv summary;
    summary.header = {"n",        "tree_count",      "max_rho",
                      "star_rho", "max_nonstar_rho", "star_unique",
                      "all_rho_le_n_minus_1"};
    for (std::size_t n = o.min_n; n <= o.max_n; ++n) {
        s3kit::TreeSweepResult r = s3kit::sweep_labeled_trees(n, o.tol);
        summary.rows.push_back({std::to_string(r.n), std::to_string(r.tree_count),
                                s3kit::format_double(r.max_rho), s3kit::format_double(r.star_rho),
                                s3kit::format_double(r.max_nonstar_rho),
                                r.max_attained_only_by_stars ? "true" : "false",
                                r.all_below_n_minus_1 ? "true" : "false"});
    }
    std::cout << s3kit::csv_to_string(summary);

    RunRecord rec;
    rec.subcommand = "trees sweep";
    rec.parameters["min"] = o.min_n;
    rec.parameters["max"] = o.max_n;

    if (!o.out.empty()) {
        s3kit::write_csv_atomic(o.out, summary);
        rec.outputs.push_back(o.out);
    }
    if (!o.radii_out.empty()) {
        s3kit::Csv radii;
        radii.header = {"n", "tree_index", "rho"};
        for (std::size_t n = o.min_n; n <= o.max_n; ++n) {
            std::uint64_t index = 0;
            s3kit::for_each_labeled_tree(n, [&](const s3kit::HiddenGraph& g) {
                radii.rows.push_back({std::to_string(n), std::to_string(index++),
                                      s3kit::format_double(s3kit::spectral_radius(g, o.tol))});
            });
        }
        s3kit::write_csv_atomic(o.radii_out, radii);
        rec.outputs.push_back(o.radii_out);
    }
    write_manifest(rec, timer.seconds());
}

// ---------------------------------------------------------------------------
// ka build / eval.

struct KaBuildOpts {
    std::string dec;
    std::size_t n = 2;
    double sigma = 0.05;
    double step = 0.01;
    std::string out;
};

void run_ka_build(const KaBuildOpts& o) {
    RunTimer timer;
    s3kit::KADecomposition dec = s3kit::make_registered_decomposition(o.dec, o.n);
    s3kit::BudgetPlan plan = s3kit::error_budget(dec, o.sigma);
    s3kit::KANet net = s3kit::assemble(dec, o.sigma, o.step);
    double err = s3kit::composite_error(net, dec);

    std::cout << "width = " << s3kit::width_of(net) << '\n';
    std::cout << "epsilon = " << s3kit::format_double(plan.epsilon) << '\n';
    std::cout << "composite_error = " << s3kit::format_double(err) << '\n';
    s3kit::write_json_atomic(o.out, s3kit::ka_to_json(net));
    std::cout << "wrote " << o.out << '\n';

    RunRecord rec;
    rec.subcommand = "ka build";
    rec.parameters["dec"] = o.dec;
    rec.parameters["n"] = o.n;
    rec.parameters["sigma"] = o.sigma;
    rec.parameters["step"] = o.step;
    rec.outputs = {o.out};
    write_manifest(rec, timer.seconds());
}

struct KaEvalOpts {
    std::string net_file;
    std::vector<std::string> at;
};

void run_ka_eval(const KaEvalOpts& o) {
    s3kit::KANet net = s3kit::ka_from_json(s3kit::read_json(o.net_file));
    for (const std::string& point : o.at) {
        double v = s3kit::forward_ka(net, parse_coords(point));
        std::cout << s3kit::format_double(v) << '\n';
    }
}

// ---------------------------------------------------------------------------
// bounds compare / eval.

struct BoundFlags {
    std::size_t samples = 1000;
    double gamma = 1.0;
    double data_bound = 1.0;
    double delta = 0.05;
    std::size_t classes = 2;
};

s3kit::BoundInputs to_inputs(const BoundFlags& f) {
    s3kit::BoundInputs in;
    in.n_samples = f.samples;
    in.margin = f.gamma;
    in.data_bound = f.data_bound;
    in.confidence = f.delta;
    in.class_count = f.classes;
    s3kit::validate_inputs(in);
    return in;
}

void record_bound_flags(RunRecord& rec, const BoundFlags& f) {
    rec.parameters["samples"] = f.samples;
    rec.parameters["gamma"] = f.gamma;
    rec.parameters["data_bound"] = f.data_bound;
    rec.parameters["delta"] = f.delta;
    rec.parameters["classes"] = f.classes;
}

struct BoundsCompareOpts {
    std::string dense_file;
    std::string s3_file;
    BoundFlags flags;
    std::string out;
};

void run_bounds_compare(const BoundsCompareOpts& o) {
    RunTimer timer;
    std::vector<s3kit::Matrix> dense = s3kit::matrices_from_json(s3kit::read_json(o.dense_file));
    std::vector<s3kit::Matrix> slim = s3kit::matrices_from_json(s3kit::read_json(o.s3_file));
    s3kit::BoundReport report = s3kit::compare_bounds(dense, slim, to_inputs(o.flags));

    std::cout << "bound                 dense                      s3                         s3_not_worse\n";
    for (const auto& c : report.comparisons) {
        std::string name = c.name;
        name.resize(22, ' ');
        std::string dv = s3kit::format_double(c.dense_value);
        dv.resize(27, ' ');
        std::string sv = s3kit::format_double(c.s3_value);
        sv.resize(27, ' ');
        std::cout << name << dv << sv << (c.s3_not_worse ? "yes" : "NO") << '\n';
    }
    std::cout << "all_verdicts_hold = " << (report.all_verdicts_hold ? "true" : "false") << '\n';

    if (!o.out.empty()) {
        s3kit::write_json_atomic(o.out, s3kit::report_to_json(report));
        std::cout << "wrote " << o.out << '\n';
        RunRecord rec;
        rec.subcommand = "bounds compare";
        record_bound_flags(rec, o.flags);
        rec.inputs = {o.dense_file, o.s3_file};
        rec.outputs = {o.out};
        write_manifest(rec, timer.seconds());
    }
}

struct BoundsEvalOpts {
    std::string profile_file;
    BoundFlags flags;
    std::string dense_dims;
    std::string out;
};

void run_bounds_eval(const BoundsEvalOpts& o) {
    RunTimer timer;
    s3kit::NormProfile profile = s3kit::profile_from_json(s3kit::read_json(o.profile_file));
    s3kit::BoundInputs inputs = to_inputs(o.flags);

    json values = json::object();
    auto emit = [&](const std::string& name, const std::function<double()>& compute) {
        try {
            double v = compute();
            values[name] = v;
            std::cout << name << " = " << s3kit::format_double(v) << '\n';
        } catch (const s3kit::ValidationError& e) {
            std::cout << name << " = skipped (" << e.what() << ")\n";
        }
    };

    emit("bartlett_dense", [&] { return s3kit::bartlett_dense(profile, inputs); });
    if (!o.dense_dims.empty()) {
        std::vector<std::size_t> dims;
        for (const std::string& tok : split(o.dense_dims, ',')) {
            try {
                std::size_t used = 0;
                long v = std::stol(tok, &used);
                if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
                dims.push_back(static_cast<std::size_t>(v));
            } catch (const std::exception&) {
                throw s3kit::ValidationError("bad --dense-dims entry '" + tok + "'");
            }
        }
        emit("bartlett_s3", [&] { return s3kit::bartlett_s3(profile, dims, inputs); });
    }
    for (auto variant : {s3kit::AuxVariant::chain_rademacher, s3kit::AuxVariant::chain_pacbayes,
                         s3kit::AuxVariant::dense_rademacher, s3kit::AuxVariant::dense_pacbayes})
        emit(s3kit::aux_variant_name(variant),
             [&] { return s3kit::aux_bound(profile, inputs, variant); });

    if (!o.out.empty()) {
        json j;
        j["kind"] = "bound_values";
        j["bounds"] = values;
        s3kit::write_json_atomic(o.out, j);
        std::cout << "wrote " << o.out << '\n';
        RunRecord rec;
        rec.subcommand = "bounds eval";
        record_bound_flags(rec, o.flags);
        if (!o.dense_dims.empty()) rec.parameters["dense_dims"] = o.dense_dims;
        rec.inputs = {o.profile_file};
        rec.outputs = {o.out};
        write_manifest(rec, timer.seconds());
    }
}

// ---------------------------------------------------------------------------
// train: gradient descent on a sampled builtin, loss + fitted-curve CSVs.

struct TrainOpts {
    std::size_t layers = 0;
    double lr = 0.01;
    std::size_t epochs = 1000;
    std::uint64_t seed = 0;
    double init_scale = 0.1;
    std::string target;
    std::vector<double> interval;
    double sample_step = 0.01;
    std::string out;
};

void run_train(const TrainOpts& o) {
    RunTimer timer;
    const s3kit::BuiltinFunction& builtin = s3kit::find_builtin(o.target);
    double lo = o.interval.empty() ? builtin.default_lo : o.interval[0];
    double hi = o.interval.empty() ? builtin.default_hi : o.interval[1];
    if (!(lo < hi)) throw s3kit::ValidationError("train: interval must satisfy lo < hi");

    // Sample on the uniform grid (endpoint included), same layout fit_uniform
    // uses, so "sampled with interval h" means the usual h-spaced abscissae.
    s3kit::PiecewiseLinear sampled = s3kit::fit_uniform(builtin.fn, lo, hi, o.sample_step);
    s3kit::DataSet data{sampled.breakpoints, sampled.values};

    s3kit::TrainConfig cfg;
    cfg.learning_rate = o.lr;
    cfg.epochs = o.epochs;
    cfg.seed = o.seed;
    cfg.init_scale = o.init_scale;
    s3kit::TrainResult result = s3kit::train_chain(o.layers, data, cfg);

    std::string loss_path = o.out + "_loss.csv";
    std::string curve_path = o.out + "_curve.csv";
    s3kit::Csv loss;
    loss.header = {"epoch", "loss"};
    for (std::size_t e = 0; e < result.loss_history.size(); ++e)
        loss.rows.push_back({std::to_string(e), s3kit::format_double(result.loss_history[e])});
    s3kit::write_csv_atomic(loss_path, loss);
    s3kit::write_csv_atomic(
        curve_path,
        curve_csv(data.x, {"target", "fitted"},
                  {[&](double x) { return s3kit::eval_pwl(sampled, x); },
                   [&](double x) { return s3kit::forward_trainable(result.net, x); }}));

    std::cout << "samples = " << data.x.size() << '\n';
    std::cout << "epochs_run = " << result.loss_history.size() << '\n';
    std::cout << "final_rmse = " << s3kit::format_double(s3kit::rmse(result.net, data)) << '\n';
    std::cout << "diverged = " << (result.diverged ? "true" : "false") << '\n';
    std::cout << "wrote " << loss_path << '\n';
    std::cout << "wrote " << curve_path << '\n';

    RunRecord rec;
    rec.subcommand = "train";
    rec.parameters["layers"] = o.layers;
    rec.parameters["lr"] = o.lr;
    rec.parameters["epochs"] = o.epochs;
    rec.parameters["init_scale"] = o.init_scale;
    rec.parameters["target"] = o.target;
    rec.parameters["interval"] = json::array({lo, hi});
    rec.parameters["sample_step"] = o.sample_step;
    rec.has_seed = true;
    rec.seed = o.seed;
    rec.outputs = {loss_path, curve_path};
    write_manifest(rec, timer.seconds());
}

// ---------------------------------------------------------------------------
// ttest: Welch test between two CSV columns.

struct TtestOpts {
    std::string csv_file;
    std::string cols;
};

void run_ttest(const TtestOpts& o) {
    std::vector<std::string> names = split(o.cols, ',');
    if (names.size() != 2 || names[0].empty() || names[1].empty())
        throw s3kit::ValidationError("--cols expects exactly two column names, e.g. --cols A,B");
    s3kit::Csv csv = s3kit::read_csv(o.csv_file);
    s3kit::WelchResult r =
        s3kit::welch_t_test(s3kit::csv_column(csv, names[0]), s3kit::csv_column(csv, names[1]));
    std::cout << "t = " << s3kit::format_double(r.t) << '\n';
    std::cout << "dof = " << s3kit::format_double(r.dof) << '\n';
    std::cout << "p = " << s3kit::format_double(r.p) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"one-neuron chain networks: construction, rewiring, spectra, and bounds"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    // approx ----------------------------------------------------------------
    ApproxOpts approx_opts;
    CLI::App* approx = app.add_subcommand("approx", "fit a builtin and build the exact chain");
    approx->add_option("--fn", approx_opts.fn, "builtin function name")->required();
    approx->add_option("--interval", approx_opts.interval, "fit interval lo hi")->expected(2);
    approx->add_option("--step", approx_opts.step, "breakpoint spacing (default 0.01)");
    approx->add_option("--grid", approx_opts.grid, "verification grid points (default 10000)");
    approx->add_option("--out", approx_opts.out, "output network JSON path")->required();
    approx->add_option("--curve-out", approx_opts.curve_out,
                       "plot CSV path (default: <out>.curve.csv)");
    approx->add_option("--curve-points", approx_opts.curve_points,
                       "plot CSV sample count (default 1001)");
    approx->callback([&] { run_approx(approx_opts); });

    // omega -----------------------------------------------------------------
    CLI::App* omega = app.add_subcommand("omega", "single-inbound-edge network family");
    omega->require_subcommand(1);

    OmegaGenOpts gen_opts;
    CLI::App* gen = omega->add_subcommand("gen", "draw a uniform random topology");
    gen->add_option("--n", gen_opts.n, "hidden neuron count")->required();
    gen->add_option("--seed", gen_opts.seed, "random seed (default 0)");
    gen->add_option("--out", gen_opts.out, "write the topology to this file");
    gen->callback([&] { run_omega_gen(gen_opts); });

    TopologySourceOpts check_opts;
    CLI::App* check = omega->add_subcommand("check", "validate a topology");
    check->add_option("--topology", check_opts.topology, "inline topology, e.g. I,0,I,2");
    check->add_option("--file", check_opts.file, "file containing the topology");
    check->callback([&] { run_omega_check(check_opts); });

    OmegaRewireOpts rewire_opts;
    CLI::App* rewire = omega->add_subcommand("rewire", "move one neuron's inbound edge");
    rewire->add_option("--topology", rewire_opts.source.topology, "inline topology");
    rewire->add_option("--file", rewire_opts.source.file, "file containing the topology");
    rewire->add_option("--neuron", rewire_opts.neuron, "neuron to rewire")->required();
    rewire->add_option("--parent", rewire_opts.parent, "new parent: \"I\" or an index")
        ->required();
    rewire->add_option("--out", rewire_opts.out, "write the rewired topology to this file");
    rewire->callback([&] { run_omega_rewire(rewire_opts); });

    OmegaEquivOpts equiv_opts;
    CLI::App* equiv = omega->add_subcommand(
        "equiv", "build the topology's net and compare it against the chain");
    equiv->add_option("--topology", equiv_opts.source.topology, "inline topology");
    equiv->add_option("--file", equiv_opts.source.file, "file containing the topology");
    equiv->add_option("--pwl", equiv_opts.pwl_file, "piecewise-linear target JSON");
    equiv->add_option("--fn", equiv_opts.fn, "builtin target name");
    equiv->add_option("--interval", equiv_opts.interval, "fit interval lo hi")->expected(2);
    equiv->add_option("--step", equiv_opts.step, "breakpoint spacing (default 0.01)");
    equiv->add_option("--grid", equiv_opts.grid, "comparison grid points (default 10000)");
    equiv->add_option("--out", equiv_opts.out, "write the constructed net JSON here");
    equiv->callback([&] { run_omega_equiv(equiv_opts); });

    OmegaEnumOpts enum_opts;
    CLI::App* enumerate = omega->add_subcommand("enum", "list every member topology");
    enumerate->add_option("--n", enum_opts.n, "hidden neuron count (<= 8)")->required();
    enumerate->add_option("--out", enum_opts.out, "write one topology per line to this file");
    enumerate->callback([&] { run_omega_enum(enum_opts); });

    // spectra ----------------------------------------------------------------
    SpectraOpts spectra_opts;
    CLI::App* spectra = app.add_subcommand("spectra", "hidden-graph spectral radius");
    spectra->add_option("--topology", spectra_opts.source.topology, "inline topology");
    spectra->add_option("--file", spectra_opts.source.file, "file containing the topology");
    spectra->add_option("--tol", spectra_opts.tol, "residual tolerance (default 1e-10)");
    spectra->callback([&] { run_spectra(spectra_opts); });

    // trees ------------------------------------------------------------------
    CLI::App* trees = app.add_subcommand("trees", "labeled-tree spectral scans");
    trees->require_subcommand(1);
    TreesSweepOpts sweep_opts;
    CLI::App* sweep = trees->add_subcommand("sweep", "extremal scan over all labeled trees");
    sweep->add_option("--min", sweep_opts.min_n, "smallest vertex count (default 3)");
    sweep->add_option("--max", sweep_opts.max_n, "largest vertex count (default 8)");
    sweep->add_option("--out", sweep_opts.out, "write the summary CSV here");
    sweep->add_option("--radii-out", sweep_opts.radii_out,
                      "write per-tree radii CSV here (large)");
    sweep->add_option("--tol", sweep_opts.tol, "eigensolve tolerance (default 1e-10)");
    sweep->callback([&] { run_trees_sweep(sweep_opts); });

    // ka ---------------------------------------------------------------------
    CLI::App* ka = app.add_subcommand("ka", "superposition approximator");
    ka->require_subcommand(1);

    KaBuildOpts ka_build_opts;
    CLI::App* ka_build = ka->add_subcommand("build", "assemble a two-stage approximator");
    ka_build->add_option("--dec", ka_build_opts.dec, "decomposition: additive|product|constant")
        ->required();
    ka_build->add_option("--n", ka_build_opts.n, "input dimension (default 2)");
    ka_build->add_option("--sigma", ka_build_opts.sigma, "target sup error (default 0.05)");
    ka_build->add_option("--step", ka_build_opts.step, "chain breakpoint spacing (default 0.01)");
    ka_build->add_option("--out", ka_build_opts.out, "output bundle JSON path")->required();
    ka_build->callback([&] { run_ka_build(ka_build_opts); });

    KaEvalOpts ka_eval_opts;
    CLI::App* ka_eval = ka->add_subcommand("eval", "evaluate a bundle at points");
    ka_eval->add_option("--net", ka_eval_opts.net_file, "bundle JSON path")->required();
    ka_eval->add_option("--at", ka_eval_opts.at, "comma-separated coordinates (repeatable)")
        ->required();
    ka_eval->callback([&] { run_ka_eval(ka_eval_opts); });

    // bounds -----------------------------------------------------------------
    CLI::App* bounds = app.add_subcommand("bounds", "margin-based generalization bounds");
    bounds->require_subcommand(1);

    BoundsCompareOpts cmp_opts;
    CLI::App* cmp = bounds->add_subcommand(
        "compare", "dense stack vs its column-submatrix slim counterpart");
    cmp->add_option("--dense", cmp_opts.dense_file, "dense weight stack JSON")->required();
    cmp->add_option("--s3", cmp_opts.s3_file, "slim weight stack JSON")->required();
    cmp->add_option("--samples", cmp_opts.flags.samples, "sample count (default 1000)");
    cmp->add_option("--gamma", cmp_opts.flags.gamma, "margin (default 1)");
    cmp->add_option("--data-bound", cmp_opts.flags.data_bound, "data norm bound (default 1)");
    cmp->add_option("--delta", cmp_opts.flags.delta, "confidence level (default 0.05)");
    cmp->add_option("--classes", cmp_opts.flags.classes, "class count (default 2)");
    cmp->add_option("--out", cmp_opts.out, "write the report JSON here");
    cmp->callback([&] { run_bounds_compare(cmp_opts); });

    BoundsEvalOpts beval_opts;
    CLI::App* beval = bounds->add_subcommand("eval", "evaluate bounds on one profile");
    beval->add_option("--profile", beval_opts.profile_file, "profile JSON (layers or matrices)")
        ->required();
    beval->add_option("--samples", beval_opts.flags.samples, "sample count (default 1000)");
    beval->add_option("--gamma", beval_opts.flags.gamma, "margin (default 1)");
    beval->add_option("--data-bound", beval_opts.flags.data_bound, "data norm bound (default 1)");
    beval->add_option("--delta", beval_opts.flags.delta, "confidence level (default 0.05)");
    beval->add_option("--classes", beval_opts.flags.classes, "class count (default 2)");
    beval->add_option("--dense-dims", beval_opts.dense_dims,
                      "dense in-dims for the slim-form bound, e.g. 8,16,24");
    beval->add_option("--out", beval_opts.out, "write computed values JSON here");
    beval->callback([&] { run_bounds_eval(beval_opts); });

    // train -------------------------------------------------------------------
    TrainOpts train_opts;
    CLI::App* train = app.add_subcommand("train", "gradient-train a chain on a builtin");
    train->add_option("--layers", train_opts.layers, "chain neuron count")->required();
    train->add_option("--lr", train_opts.lr, "learning rate (default 0.01)");
    train->add_option("--epochs", train_opts.epochs, "epoch count (default 1000)");
    train->add_option("--seed", train_opts.seed, "init seed (default 0)");
    train->add_option("--init-scale", train_opts.init_scale, "uniform init half-width");
    train->add_option("--target", train_opts.target, "builtin function name")->required();
    train->add_option("--interval", train_opts.interval, "sample interval lo hi")->expected(2);
    train->add_option("--sample-step", train_opts.sample_step, "sample spacing (default 0.01)");
    train->add_option("--out", train_opts.out, "output prefix (writes <out>_loss.csv etc.)")
        ->required();
    train->callback([&] { run_train(train_opts); });

    // ttest -------------------------------------------------------------------
    TtestOpts ttest_opts;
    CLI::App* ttest = app.add_subcommand("ttest", "Welch t-test between two CSV columns");
    ttest->add_option("--csv", ttest_opts.csv_file, "input CSV path")->required();
    ttest->add_option("--cols", ttest_opts.cols, "two column names, e.g. A,B")->required();
    ttest->callback([&] { run_ttest(ttest_opts); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        std::cerr << "error: usage: " << e.what() << '\n';
        return 1;
    } catch (const s3kit::IoError& e) {
        std::cerr << "error: io: " << e.what() << '\n';
        return 2;
    } catch (const s3kit::ValidationError& e) {
        std::cerr << "error: validation: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
