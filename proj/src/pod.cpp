#include "sem/pod.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sem/error.hpp"

namespace sem {

SnapshotSet::SnapshotSet(const Discretization& disc, std::vector<VectorField> snapshots, double sample_dt,
                         bool remove_mean)
    : disc_(&disc), snapshots_(std::move(snapshots)), sample_dt_(sample_dt), mean_removed_(remove_mean) {
    if (snapshots_.empty()) throw DimensionError("snapshot set is empty");
    if (!(sample_dt > 0.0)) throw ParameterError("snapshot spacing must be positive");
    const auto dim = static_cast<std::size_t>(disc.dim());
    for (const VectorField& s : snapshots_) {
        if (s.size() != dim) throw DimensionError("snapshot has the wrong number of velocity components");
        for (const Field& f : s) disc.check(f, "snapshot");
    }
    mean_.assign(dim, disc.zeros());
    if (!remove_mean) return;
    const double inv = 1.0 / static_cast<double>(snapshots_.size());
    for (const VectorField& s : snapshots_)
        for (std::size_t a = 0; a < dim; ++a) mean_[a].axpy(inv, s[a]);
    for (VectorField& s : snapshots_)
        for (std::size_t a = 0; a < dim; ++a) s[a] -= mean_[a];
}

ClipRegion::ClipRegion(const Discretization& disc, Field mask) : mask_(std::move(mask)) {
    disc.check(mask_, "clip mask");
    bool any = false;
    for (double v : mask_.values()) {
        if (v != 0.0 && v != 1.0) throw ParameterError("clip mask values must be 0 or 1");
        any = any || v == 1.0;
    }
    if (!any) throw ParameterError("clip mask selects no nodes");
    const auto global = disc.gather_scatter().gather(mask_.span());
    const auto back = disc.gather_scatter().scatter(global);
    for (std::size_t i = 0; i < back.size(); ++i)
        if (back[i] != mask_[i]) throw ParameterError("clip mask differs between copies of a node");
}

ClipRegion ClipRegion::box(const Discretization& disc, const Point& lo, const Point& hi) {
    const auto& x = disc.geometry().coordinates;
    Field mask = disc.zeros();
    for (std::size_t i = 0; i < x.size(); ++i) {
        bool inside = true;
        for (int d = 0; d < disc.dim(); ++d)
            inside = inside && x[i][d] >= lo[d] - node_tolerance && x[i][d] <= hi[d] + node_tolerance;
        mask[i] = inside ? 1.0 : 0.0;
    }
    // periodic copies of one node may sit on opposite sides of the domain
    dssum(disc, mask);
    for (double& v : mask.values()) v = v > 0.0 ? 1.0 : 0.0;
    return ClipRegion(disc, std::move(mask));
}

ClipRegion ClipRegion::full(const Discretization& disc) {
    return ClipRegion(Field(disc.num_local(), 1.0), nullptr);
}

ClipRegion ClipRegion::united(const ClipRegion& other) const {
    if (other.mask_.size() != mask_.size()) throw DimensionError("clip masks of different size");
    Field m = mask_;
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::max(m[i], other.mask_[i]);
    return ClipRegion(std::move(m), nullptr);
}

namespace {

const Field& effective_mask(const SnapshotSet& set, const ClipRegion* clip, Field& storage) {
    if (clip) {
        set.discretization().check(clip->mask(), "clip mask");
        return clip->mask();
    }
    storage = Field(set.discretization().num_local(), 1.0);
    return storage;
}

}  // namespace

Matrix build_covariance(const SnapshotSet& set, const ClipRegion* clip) {
    const Discretization& disc = set.discretization();
    Field ones;
    const Field& mask = effective_mask(set, clip, ones);
    const auto& b = disc.geometry().mass;
    const std::size_t m = set.size();
    const std::size_t n = disc.num_local();

    // clipped copies, one flat vector per snapshot
    std::vector<std::vector<double>> clipped(m);
    for (std::size_t s = 0; s < m; ++s) {
        clipped[s].reserve(n * set[s].size());
        for (const Field& f : set[s])
            for (std::size_t i = 0; i < n; ++i) clipped[s].push_back(mask[i] * f[i]);
    }
    const double inv_m = 1.0 / static_cast<double>(m);
    Matrix c(m, m);
    for (std::size_t p = 0; p < m; ++p)
        for (std::size_t q = p; q < m; ++q) {
            const double* up = clipped[p].data();
            const double* uq = clipped[q].data();
            double sum = 0.0;
            for (std::size_t k = 0; k < clipped[p].size(); ++k) sum += b[k % n] * up[k] * uq[k];
            c(p, q) = sum * inv_m;
            c(q, p) = c(p, q);
        }
    return c;
}

EigenDecomposition solve_eigen(const Matrix& input) {
    const auto m = static_cast<int>(input.rows());
    if (m == 0 || input.cols() != input.rows()) throw DimensionError("eigenproblem needs a square matrix");
    const double scale = std::max(1.0, input.cwiseAbs().maxCoeff());
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < i; ++j)
            if (std::abs(input(i, j) - input(j, i)) > 1e-10 * scale)
                throw ParameterError("eigenproblem input is not symmetric");

    Matrix a = 0.5 * (input + input.transpose());
    Matrix v = Matrix::Identity(m, m);
    const double norm = a.norm();
    auto off = [&] {
        double s = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                if (i != j) s += a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    EigenDecomposition out;
    constexpr int max_sweeps = 100;
    while (off() > 1e-12 * norm) {
        if (out.sweeps == max_sweeps)
            throw ConvergenceError("Jacobi eigensolver", out.sweeps, off() / norm, {});
        ++out.sweeps;
        for (int p = 0; p < m - 1; ++p)
            for (int q = p + 1; q < m; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < m; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < m; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < m; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }

    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) > a(j, j); });
    out.values.resize(m);
    out.vectors.resize(m, m);
    for (int k = 0; k < m; ++k) {
        out.values[k] = a(order[k], order[k]);
        out.vectors.col(k) = v.col(order[k]);
    }
    return out;
}

Mode reconstruct_mode(const SnapshotSet& set, std::span<const double> coefficients, const ClipRegion* clip) {
    if (coefficients.size() != set.size())
        throw DimensionError("need one coefficient per snapshot");
    const Discretization& disc = set.discretization();
    Field ones;
    const Field& mask = effective_mask(set, clip, ones);
    const std::size_t dim = set[0].size();
    Mode mode;
    mode.field.assign(dim, disc.zeros());
    for (std::size_t s = 0; s < set.size(); ++s)
        for (std::size_t a = 0; a < dim; ++a) mode.field[a].axpy(coefficients[s], set[s][a]);
    double energy = 0.0;
    for (Field& f : mode.field) {
        for (std::size_t i = 0; i < f.size(); ++i) f[i] *= mask[i];
        energy += disc.inner(f, f);
    }
    mode.norm = std::sqrt(energy);
    if (mode.norm > 0.0)
        for (Field& f : mode.field) f *= 1.0 / mode.norm;
    return mode;
}

PodResult compute_pod(const SnapshotSet& set, int num_modes, const ClipRegion* clip) {
    if (num_modes < 0) throw ParameterError("mode count must be non-negative");
    const EigenDecomposition eig = solve_eigen(build_covariance(set, clip));
    PodResult out;
    out.eigenvalues = eig.values;
    out.coefficients = eig.vectors;
    const int count = std::min<int>(num_modes, static_cast<int>(set.size()));
    std::vector<double> a(set.size());
    for (int i = 0; i < count; ++i) {
        for (std::size_t n = 0; n < set.size(); ++n) a[n] = eig.vectors(static_cast<Eigen::Index>(n), i);
        out.modes.push_back(reconstruct_mode(set, a, clip).field);
    }
    return out;
}

std::vector<std::pair<int, int>> detect_mode_pairs(std::span<const double> eigenvalues, double rel_tol) {
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw ParameterError("pair tolerance must lie in (0, 1)");
    std::vector<std::pair<int, int>> pairs;
    if (eigenvalues.empty()) return pairs;
    const double floor = 1e-10 * *std::max_element(eigenvalues.begin(), eigenvalues.end());
    const int n = static_cast<int>(eigenvalues.size());
    for (int i = 0; i + 1 < n;) {
        const double a = eigenvalues[i], b = eigenvalues[i + 1];
        if (a > floor && b > floor && std::abs(a - b) <= rel_tol * a) {
            pairs.emplace_back(i, i + 1);
            i += 2;
        } else {
            ++i;
        }
    }
    return pairs;
}

std::vector<double> autocorrelation(std::span<const double> series, int max_lag) {
    const auto n = static_cast<int>(series.size());
    if (max_lag < 1 || n <= max_lag) throw ParameterError("need series length > max_lag >= 1");
    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
    double var = 0.0;
    for (double x : series) var += (x - mean) * (x - mean);
    if (var == 0.0) throw StatisticsError("autocorrelation of a constant series is undefined");
    std::vector<double> rho(max_lag + 1);
    for (int tau = 0; tau <= max_lag; ++tau) {
        double s = 0.0;
        for (int t = 0; t + tau < n; ++t) s += (series[t] - mean) * (series[t + tau] - mean);
        rho[tau] = s / var;
    }
    rho[0] = 1.0;
    return rho;
}

Moments moments(std::span<const double> series) {
    const auto n = static_cast<double>(series.size());
    if (series.size() < 2) throw StatisticsError("moments need at least two samples");
    Moments out;
    out.mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : series) {
        const double d = x - out.mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    out.rms = std::sqrt(m2);
    if (m2 == 0.0) throw StatisticsError("skewness and kurtosis are undefined for zero variance");
    out.skewness = m3 / std::pow(m2, 1.5);
    out.kurtosis = m4 / (m2 * m2);
    return out;
}

}  // namespace sem
