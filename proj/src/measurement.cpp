#include "lsrecover/measurement.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "lsrecover/dct.hpp"
#include "lsrecover/ls_model.hpp"
#include "lsrecover/rng.hpp"

namespace lsr {

struct MeasurementOp::Impl {
    OperatorSpec spec;
    // Gaussian
    Matrix rows;
    // FJLT
    std::vector<double> signs;
    std::vector<Index> selection;
    double scale = 1.0;
    std::optional<Dct> dct;
};

std::string to_string(OperatorKind kind) {
    return kind == OperatorKind::Gaussian ? "gaussian" : "fjlt";
}

OperatorKind operator_kind_from_string(const std::string& name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "gaussian") return OperatorKind::Gaussian;
    if (lower == "fjlt") return OperatorKind::Fjlt;
    throw InvalidInput("unknown operator kind '" + name + "'");
}

OperatorKind MeasurementOp::kind() const { return impl_->spec.kind; }
Index MeasurementOp::m() const { return impl_->spec.m; }
Index MeasurementOp::n() const { return impl_->spec.n; }
Index MeasurementOp::p() const { return impl_->spec.p; }
std::uint64_t MeasurementOp::seed() const { return impl_->spec.seed; }
OperatorSpec MeasurementOp::spec() const { return impl_->spec; }

const Matrix& MeasurementOp::sensing_rows() const {
    if (kind() != OperatorKind::Gaussian) throw InvalidInput("sensing_rows: not a Gaussian operator");
    return impl_->rows;
}
const std::vector<double>& MeasurementOp::signs() const {
    if (kind() != OperatorKind::Fjlt) throw InvalidInput("signs: not an FJLT operator");
    return impl_->signs;
}
const std::vector<Index>& MeasurementOp::selection() const {
    if (kind() != OperatorKind::Fjlt) throw InvalidInput("selection: not an FJLT operator");
    return impl_->selection;
}
double MeasurementOp::scale() const { return impl_->scale; }

Vector MeasurementOp::apply(const Matrix& x) const {
    const auto& s = impl_->spec;
    if (x.rows() != s.m || x.cols() != s.n) throw InvalidInput("apply: shape mismatch");
    if (s.kind == OperatorKind::Gaussian) return impl_->rows * vec(x);

    const auto mn = static_cast<std::size_t>(s.m * s.n);
    std::vector<double> work(mn);
    const double* src = x.data();
    for (std::size_t k = 0; k < mn; ++k) work[k] = impl_->signs[k] * src[k];
    impl_->dct->forward(work, work);
    Vector out(s.p);
    for (Index l = 0; l < s.p; ++l) out(l) = impl_->scale * work[static_cast<std::size_t>(impl_->selection[l])];
    return out;
}

Matrix MeasurementOp::adjoint(const Vector& y) const {
    const auto& s = impl_->spec;
    if (y.size() != s.p) throw InvalidInput("adjoint: length mismatch");
    Matrix out(s.m, s.n);
    if (s.kind == OperatorKind::Gaussian) {
        vec(out).noalias() = impl_->rows.transpose() * y;
        return out;
    }
    const auto mn = static_cast<std::size_t>(s.m * s.n);
    std::vector<double> work(mn, 0.0);
    for (Index l = 0; l < s.p; ++l) work[static_cast<std::size_t>(impl_->selection[l])] = impl_->scale * y(l);
    impl_->dct->inverse(work, work);
    double* dst = out.data();
    for (std::size_t k = 0; k < mn; ++k) dst[k] = impl_->signs[k] * work[k];
    return out;
}

MeasurementOp make_gaussian(Index m, Index n, Index p, std::uint64_t seed) {
    if (m < 1 || n < 1 || p < 1) throw InvalidInput("make_gaussian: dimensions must be positive");
    auto impl = std::make_shared<MeasurementOp::Impl>();
    impl->spec = {OperatorKind::Gaussian, m, n, p, seed};
    impl->rows.resize(p, m * n);
    Rng rng(seed);
    const double sd = 1.0 / std::sqrt(static_cast<double>(p));
    double* data = impl->rows.data();
    for (Index k = 0; k < impl->rows.size(); ++k) data[k] = sd * rng.normal();
    return MeasurementOp(std::move(impl));
}

MeasurementOp make_fjlt(Index m, Index n, Index p, std::uint64_t seed) {
    if (m < 1 || n < 1 || p < 1) throw InvalidInput("make_fjlt: dimensions must be positive");
    const Index mn = m * n;
    if (p > mn) throw InvalidInput("make_fjlt: p must not exceed mn");
    auto impl = std::make_shared<MeasurementOp::Impl>();
    impl->spec = {OperatorKind::Fjlt, m, n, p, seed};
    Rng rng(seed);
    impl->signs.resize(static_cast<std::size_t>(mn));
    for (auto& d : impl->signs) d = rng.sign();

    std::vector<Index> perm(static_cast<std::size_t>(mn));
    std::iota(perm.begin(), perm.end(), Index{0});
    for (Index k = 0; k < p; ++k) {
        const auto pick = k + static_cast<Index>(rng.below(static_cast<std::uint64_t>(mn - k)));
        std::swap(perm[k], perm[pick]);
    }
    perm.resize(static_cast<std::size_t>(p));
    std::sort(perm.begin(), perm.end());
    impl->selection = std::move(perm);
    impl->scale = std::sqrt(static_cast<double>(mn) / static_cast<double>(p));
    impl->dct.emplace(mn);
    return MeasurementOp(std::move(impl));
}

MeasurementOp make_operator(const OperatorSpec& spec) {
    return spec.kind == OperatorKind::Gaussian ? make_gaussian(spec.m, spec.n, spec.p, spec.seed)
                                               : make_fjlt(spec.m, spec.n, spec.p, spec.seed);
}

namespace {

struct RatioAccumulator {
    IsometryStats stats;
    double sum = 0.0;

    void add(double ratio) {
        if (stats.trials == 0) {
            stats.worst_lower = stats.worst_upper = ratio;
        } else {
            stats.worst_lower = std::min(stats.worst_lower, ratio);
            stats.worst_upper = std::max(stats.worst_upper, ratio);
        }
        ++stats.trials;
        sum += ratio;
    }

    IsometryStats finish() {
        if (stats.trials > 0) {
            stats.mean_ratio = sum / static_cast<double>(stats.trials);
            stats.mean_ratio = std::clamp(stats.mean_ratio, stats.worst_lower, stats.worst_upper);
            stats.delta_hat = std::max({0.0, 1.0 - stats.worst_lower, stats.worst_upper - 1.0});
        }
        return stats;
    }
};

}  // namespace

IsometryStats near_isometry_stats(const MeasurementOp& op,
                                  const std::function<Matrix(std::size_t)>& sampler,
                                  std::size_t trials) {
    if (trials < 1) throw InvalidInput("near_isometry_stats: trials must be positive");
    RatioAccumulator acc;
    for (std::size_t t = 0; t < trials; ++t) {
        const Matrix x = sampler(t);
        const double norm = x.norm();
        if (norm == 0.0) continue;
        acc.add(op.apply(x / norm).squaredNorm());
    }
    return acc.finish();
}

RicEstimate empirical_ric(const MeasurementOp& op, Index r, Index s, double mu,
                          std::size_t trials, std::uint64_t seed) {
    if (trials < 1) throw InvalidInput("empirical_ric: trials must be positive");
    ModelParams params{op.m(), op.n(), std::min(op.p(), op.m() * op.n()), r, s, mu};
    RatioAccumulator acc;
    RicEstimate out;
    const std::size_t max_draws = 100 * trials;
    for (std::size_t t = 0; acc.stats.trials < trials && t < max_draws; ++t) {
        const Problem problem = generate_problem(params, mix_seed(seed, t));
        if (r > 0 && problem.mu_hat > mu) {
            ++out.rejected;
            continue;
        }
        const double norm = problem.X0.norm();
        if (norm == 0.0) continue;
        acc.add(op.apply(problem.X0 / norm).squaredNorm());
    }
    out.stats = acc.finish();
    out.delta_hat = out.stats.delta_hat;
    return out;
}

}  // namespace lsr
