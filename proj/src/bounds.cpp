#include "s3kit/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace s3kit {

namespace {

constexpr double kEuler = 2.718281828459045235360287;

// Largest eigenvalue of the (symmetric PSD) Gram matrix A^T A by power
// iteration; its square root is the spectral norm. PSD spectra have no
// sign-flipped twin of the dominant eigenvalue, so no shift is needed, but a
// fixed start vector can sit exactly in the Gram null space (e.g. all-ones
// against A = [1, -1]); a seeded random restart escapes that.
double gram_top_eigenvalue(const Matrix& a, double tol) {
    const std::size_t n = a.cols;
    bool all_zero = true;
    for (double v : a.data)
        if (v != 0.0) { all_zero = false; break; }
    if (all_zero) return 0.0;

    Rng restart_rng(0x5eedu);
    std::vector<double> v(n);
    for (double& x : v) x = 0.5 + restart_rng.uniform01();
    double norm = 0.0;
    for (double x : v) norm += x * x;
    for (double& x : v) x /= std::sqrt(norm);

    std::vector<double> av(a.rows), gv(n);
    double lambda = 0.0;
    for (std::size_t it = 0; it < 100000; ++it) {
        for (std::size_t r = 0; r < a.rows; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < n; ++c) s += a.at(r, c) * v[c];
            av[r] = s;
        }
        for (std::size_t c = 0; c < n; ++c) {
            double s = 0.0;
            for (std::size_t r = 0; r < a.rows; ++r) s += a.at(r, c) * av[r];
            gv[c] = s;
        }
        double gv_norm = 0.0;
        for (double x : gv) gv_norm += x * x;
        gv_norm = std::sqrt(gv_norm);
        if (gv_norm == 0.0) {
            // v landed in the null space; restart from a fresh random vector.
            for (double& x : v) x = 0.5 + restart_rng.uniform01();
            double vn = 0.0;
            for (double x : v) vn += x * x;
            for (double& x : v) x /= std::sqrt(vn);
            continue;
        }
        lambda = 0.0;
        for (std::size_t c = 0; c < n; ++c) lambda += v[c] * gv[c];
        double residual = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            double d = gv[c] - lambda * v[c];
            residual += d * d;
        }
        if (std::sqrt(residual) <= tol * std::max(1.0, lambda)) return lambda;
        for (std::size_t c = 0; c < n; ++c) v[c] = gv[c] / gv_norm;
    }
    return lambda;
}

}  // namespace

MatrixNorms matrix_norms(const Matrix& a) {
    if (a.rows == 0 || a.cols == 0) throw ValidationError("matrix_norms: empty matrix");
    for (double v : a.data)
        if (!std::isfinite(v)) throw ValidationError("matrix_norms: non-finite entry");

    MatrixNorms out{};
    // All-zero columns contribute nothing to any of the three norms; dropping
    // them before the Gram solve makes zero-column padding exactly invariant
    // (the padded and unpadded iterations become the same computation).
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < a.cols; ++c) {
        bool zero = true;
        for (std::size_t r = 0; r < a.rows; ++r)
            if (a.at(r, c) != 0.0) { zero = false; break; }
        if (!zero) keep.push_back(c);
    }
    if (keep.empty()) {
        out.spectral = 0.0;
    } else {
        Matrix active(a.rows, keep.size());
        for (std::size_t r = 0; r < a.rows; ++r)
            for (std::size_t k = 0; k < keep.size(); ++k) active.at(r, k) = a.at(r, keep[k]);
        out.spectral = std::sqrt(std::max(0.0, gram_top_eigenvalue(active, 1e-10)));
    }

    double two_one = 0.0;
    for (std::size_t c = 0; c < a.cols; ++c) {
        double col = 0.0;
        for (std::size_t r = 0; r < a.rows; ++r) col += a.at(r, c) * a.at(r, c);
        two_one += std::sqrt(col);
    }
    out.two_one = two_one;

    double fro = 0.0;
    for (double v : a.data) fro += v * v;
    out.frobenius = std::sqrt(fro);
    return out;
}

std::size_t NormProfile::max_width() const {
    std::size_t p = 0;
    for (const auto& l : layers) p = std::max(p, l.out_dim);
    return p;
}

bool is_dense_shape(const NormProfile& p) {
    if (p.layers.empty()) return false;
    // n_1 is the input width d_0; each later layer consumes everything so far.
    std::size_t running = p.layers[0].in_dim;
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        if (p.layers[i].in_dim != running) return false;
        running += p.layers[i].out_dim;
    }
    return true;
}

bool is_s3_shape(const NormProfile& p) {
    const std::size_t depth = p.layers.size();
    if (depth == 0) return false;
    for (std::size_t i = 1; i + 1 < depth; ++i) {
        if (p.layers[i].in_dim != p.layers[i - 1].out_dim) return false;
    }
    if (depth >= 2) {
        std::size_t concat = p.layers[0].in_dim;  // d_0
        for (std::size_t i = 0; i + 1 < depth; ++i) concat += p.layers[i].out_dim;
        if (p.layers[depth - 1].in_dim != concat) return false;
    }
    return true;
}

void validate_inputs(const BoundInputs& in) {
    if (in.n_samples == 0) throw ValidationError("bounds: sample count must be positive");
    if (!(in.margin > 0.0)) throw ValidationError("bounds: margin must be positive");
    if (!(in.data_bound > 0.0)) throw ValidationError("bounds: data bound must be positive");
    if (!(in.confidence > 0.0 && in.confidence < 1.0))
        throw ValidationError("bounds: confidence must lie in (0,1)");
}

namespace {

void validate_profile(const NormProfile& p) {
    if (p.layers.empty()) throw ValidationError("bounds: profile has no layers");
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        const auto& l = p.layers[i];
        if (l.lipschitz < 0.0 || l.spectral_bound < 0.0 || l.two_one_bound < 0.0 ||
            l.frobenius_bound < 0.0)
            throw ValidationError("bounds: negative bound in layer " + std::to_string(i + 1));
        if (l.out_dim == 0 || l.in_dim == 0)
            throw ValidationError("bounds: zero dimension in layer " + std::to_string(i + 1));
    }
}

// Third-term core shared by the dense and slim margin bounds; log_dims are
// the in-dims to use inside ln(2 d_i n_i).
double margin_bound(const NormProfile& p, const std::vector<std::size_t>& log_in_dims,
                    const BoundInputs& in) {
    validate_profile(p);
    validate_inputs(in);
    const double n = static_cast<double>(in.n_samples);

    double first = 8.0 / std::pow(n, 1.5);
    double second = 3.0 * std::sqrt(std::log(1.0 / in.confidence) / (2.0 * n));

    double lip_product = 1.0;
    double ratio_sum = 0.0;
    double logdim_sum = 0.0;
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        const auto& l = p.layers[i];
        double factor = 1.0 + l.lipschitz * l.spectral_bound;
        lip_product *= factor;
        ratio_sum += (l.lipschitz * l.lipschitz * l.two_one_bound * l.two_one_bound) /
                     (factor * factor);
        logdim_sum += std::log(2.0 * static_cast<double>(l.out_dim) *
                               static_cast<double>(log_in_dims[i]));
    }
    double third = (36.0 * in.data_bound * std::log(n) / (in.margin * n)) * lip_product *
                   std::sqrt(ratio_sum * logdim_sum);
    return first + second + third;
}

}  // namespace

double bartlett_dense(const NormProfile& profile, const BoundInputs& inputs) {
    validate_profile(profile);
    if (!is_dense_shape(profile))
        throw ValidationError(
            "bartlett_dense: profile dims are not dense-concatenation shaped "
            "(need n_{i+1} = n_i + d_i)");
    std::vector<std::size_t> dims;
    for (const auto& l : profile.layers) dims.push_back(l.in_dim);
    return margin_bound(profile, dims, inputs);
}

double bartlett_s3(const NormProfile& profile, const std::vector<std::size_t>& dense_in_dims,
                   const BoundInputs& inputs) {
    validate_profile(profile);
    if (dense_in_dims.size() != profile.layers.size())
        throw ValidationError("bartlett_s3: dense dimension list does not match depth");
    for (std::size_t i = 0; i < profile.layers.size(); ++i) {
        if (dense_in_dims[i] == 0)
            throw ValidationError("bartlett_s3: zero dense dimension at layer " +
                                  std::to_string(i + 1));
        if (profile.layers[i].in_dim > dense_in_dims[i])
            throw ValidationError(
                "bartlett_s3: slim in-dim exceeds the dense in-dim at layer " +
                std::to_string(i + 1));
    }
    return margin_bound(profile, dense_in_dims, inputs);
}

double aux_bound(const NormProfile& profile, const BoundInputs& inputs, AuxVariant variant) {
    validate_profile(profile);
    validate_inputs(inputs);
    const double m = static_cast<double>(inputs.n_samples);
    const double L = static_cast<double>(profile.depth());
    const double p = static_cast<double>(profile.max_width());

    switch (variant) {
        case AuxVariant::chain_rademacher: {
            double prod = 1.0;
            for (const auto& l : profile.layers) prod *= l.frobenius_bound;
            return std::pow(2.0, L) * prod / std::sqrt(m);
        }
        case AuxVariant::dense_rademacher: {
            double prod = 1.0;
            for (const auto& l : profile.layers) prod *= 1.0 + 2.0 * l.frobenius_bound;
            return prod / std::sqrt(m);
        }
        case AuxVariant::chain_pacbayes: {
            if (L * p <= 1.0)
                throw ValidationError("aux_bound: L*p must exceed 1 for the log factor");
            double prod = 1.0;
            double ratio_sum = 0.0;
            for (const auto& l : profile.layers) {
                if (l.spectral_bound == 0.0)
                    throw ValidationError("aux_bound: zero spectral bound in chain_pacbayes");
                prod *= l.spectral_bound;
                ratio_sum += (l.frobenius_bound * l.frobenius_bound) /
                             (l.spectral_bound * l.spectral_bound);
            }
            return prod * std::log(L * p) / (inputs.margin * std::sqrt(m)) *
                   std::sqrt(L * L * p * ratio_sum);
        }
        case AuxVariant::dense_pacbayes: {
            if (L * p <= 1.0)
                throw ValidationError("aux_bound: L*p must exceed 1 for the log factor");
            double prod = 1.0;
            double ratio_sum = 0.0;
            for (const auto& l : profile.layers) {
                double factor = 1.0 + kEuler * l.spectral_bound;
                prod *= factor;
                ratio_sum += (l.frobenius_bound * l.frobenius_bound) / (factor * factor);
            }
            return prod * std::log(L * p) / (inputs.margin * std::sqrt(m)) *
                   std::sqrt(L * L * p * ratio_sum);
        }
    }
    throw ValidationError("aux_bound: unknown variant");
}

AuxVariant parse_aux_variant(const std::string& name) {
    if (name == "chain_rademacher") return AuxVariant::chain_rademacher;
    if (name == "chain_pacbayes") return AuxVariant::chain_pacbayes;
    if (name == "dense_rademacher") return AuxVariant::dense_rademacher;
    if (name == "dense_pacbayes") return AuxVariant::dense_pacbayes;
    throw ValidationError(
        "unknown bound variant '" + name +
        "' (known: chain_rademacher, chain_pacbayes, dense_rademacher, dense_pacbayes)");
}

std::string aux_variant_name(AuxVariant v) {
    switch (v) {
        case AuxVariant::chain_rademacher: return "chain_rademacher";
        case AuxVariant::chain_pacbayes: return "chain_pacbayes";
        case AuxVariant::dense_rademacher: return "dense_rademacher";
        case AuxVariant::dense_pacbayes: return "dense_pacbayes";
    }
    return "?";
}

double ramp_loss(const std::vector<double>& logits, std::size_t label, double gamma) {
    if (!(gamma > 0.0)) throw ValidationError("ramp_loss: gamma must be positive");
    if (label < 1 || label > logits.size())
        throw ValidationError("ramp_loss: label " + std::to_string(label) +
                              " out of range for " + std::to_string(logits.size()) + " classes");
    if (logits.size() < 2) throw ValidationError("ramp_loss: need at least 2 classes");

    const std::size_t y = label - 1;
    double best_other = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < logits.size(); ++i)
        if (i != y) best_other = std::max(best_other, logits[i]);
    const double margin = logits[y] - best_other;

    const double r = -margin;
    if (r < -gamma) return 0.0;
    if (r > 0.0) return 1.0;
    return 1.0 + r / gamma;
}

NormProfile profile_from_matrices(const std::vector<Matrix>& mats) {
    if (mats.empty()) throw ValidationError("profile_from_matrices: no matrices");
    NormProfile p;
    for (const auto& m : mats) {
        MatrixNorms norms = matrix_norms(m);
        LayerNorms l;
        l.lipschitz = 1.0;  // ReLU
        l.spectral_bound = norms.spectral;
        // The margin bound consumes ||A^T||_{2,1}: column norms of the
        // transpose, i.e. row norms of A.
        l.two_one_bound = matrix_norms(transpose(m)).two_one;
        l.frobenius_bound = norms.frobenius;
        l.out_dim = m.rows;
        l.in_dim = m.cols;
        p.layers.push_back(l);
    }
    return p;
}

BoundReport compare_bounds(const std::vector<Matrix>& dense_mats,
                           const std::vector<Matrix>& s3_mats, const BoundInputs& inputs) {
    if (dense_mats.size() != s3_mats.size())
        throw ValidationError("compare_bounds: depth mismatch (" +
                              std::to_string(dense_mats.size()) + " vs " +
                              std::to_string(s3_mats.size()) + ")");
    if (dense_mats.empty()) throw ValidationError("compare_bounds: no layers");
    for (std::size_t i = 0; i < dense_mats.size(); ++i) {
        if (dense_mats[i].rows != s3_mats[i].rows)
            throw ValidationError("compare_bounds: out-dim mismatch at layer " +
                                  std::to_string(i + 1));
        if (s3_mats[i].cols > dense_mats[i].cols)
            throw ValidationError(
                "compare_bounds: slim matrix wider than dense at layer " + std::to_string(i + 1) +
                "; it must embed as a column submatrix");
    }
    validate_inputs(inputs);

    BoundReport report;
    report.dense_profile = profile_from_matrices(dense_mats);
    report.s3_profile = profile_from_matrices(s3_mats);

    std::vector<std::size_t> dense_dims;
    for (const auto& l : report.dense_profile.layers) dense_dims.push_back(l.in_dim);

    auto add = [&](const std::string& name, double dense_value, double s3_value) {
        BoundComparison c;
        c.name = name;
        c.dense_value = dense_value;
        c.s3_value = s3_value;
        c.s3_not_worse = s3_value <= dense_value;
        report.comparisons.push_back(c);
    };

    add("margin_bound", margin_bound(report.dense_profile, dense_dims, inputs),
        margin_bound(report.s3_profile, dense_dims, inputs));
    // The slim stack padded with zero columns matches the dense shape while
    // keeping its norms exactly, so the dense-form expressions evaluated on
    // the slim profile are the padded network's bounds.
    add(aux_variant_name(AuxVariant::dense_rademacher),
        aux_bound(report.dense_profile, inputs, AuxVariant::dense_rademacher),
        aux_bound(report.s3_profile, inputs, AuxVariant::dense_rademacher));
    add(aux_variant_name(AuxVariant::dense_pacbayes),
        aux_bound(report.dense_profile, inputs, AuxVariant::dense_pacbayes),
        aux_bound(report.s3_profile, inputs, AuxVariant::dense_pacbayes));

    report.all_verdicts_hold = std::all_of(report.comparisons.begin(), report.comparisons.end(),
                                           [](const BoundComparison& c) { return c.s3_not_worse; });
    return report;
}

}  // namespace s3kit
