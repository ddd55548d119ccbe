#pragma once

#include <span>
#include <utility>
#include <vector>

#include "sem/basis.hpp"
#include "sem/field.hpp"
#include "sem/operators.hpp"

namespace sem {

/// Velocity snapshots on one discretization, uniformly spaced in time.
class SnapshotSet {
public:
    /// Validates that every snapshot has dim components sized for `disc`. With
    /// `remove_mean` the temporal mean snapshot is subtracted.
    SnapshotSet(const Discretization& disc, std::vector<VectorField> snapshots, double sample_dt = 1.0,
                bool remove_mean = true);

    [[nodiscard]] const Discretization& discretization() const noexcept { return *disc_; }
    [[nodiscard]] std::size_t size() const noexcept { return snapshots_.size(); }
    [[nodiscard]] const VectorField& operator[](std::size_t m) const { return snapshots_[m]; }
    [[nodiscard]] double sample_dt() const noexcept { return sample_dt_; }
    [[nodiscard]] bool mean_removed() const noexcept { return mean_removed_; }
    /// Temporal mean that was subtracted (zero fields when the mean was kept).
    [[nodiscard]] const VectorField& mean() const noexcept { return mean_; }

private:
    const Discretization* disc_;
    std::vector<VectorField> snapshots_;
    double sample_dt_;
    bool mean_removed_;
    VectorField mean_;
};

/// 0/1 indicator applied to every velocity component.
class ClipRegion {
public:
    /// Rejects values other than 0 and 1, an all-zero mask, and masks that
    /// disagree between copies of a shared node.
    ClipRegion(const Discretization& disc, Field mask);

    /// Nodes with any copy inside the axis-aligned box [lo, hi] (inclusive, with node tolerance).
    [[nodiscard]] static ClipRegion box(const Discretization& disc, const Point& lo, const Point& hi);
    [[nodiscard]] static ClipRegion full(const Discretization& disc);
    [[nodiscard]] ClipRegion united(const ClipRegion& other) const;

    [[nodiscard]] const Field& mask() const noexcept { return mask_; }

private:
    ClipRegion(Field mask, std::nullptr_t) : mask_(std::move(mask)) {}
    Field mask_;
};

/// C_mn = (1/M) (L u_m, L u_n) with the mass-weighted inner product summed over
/// components. Without a clip the all-ones mask is used.
[[nodiscard]] Matrix build_covariance(const SnapshotSet& set, const ClipRegion* clip = nullptr);

struct EigenDecomposition {
    std::vector<double> values;  ///< descending
    Matrix vectors;              ///< column i belongs to values[i]; orthonormal columns
    int sweeps = 0;
};

/// Full spectrum of a symmetric matrix by cyclic Jacobi rotations.
[[nodiscard]] EigenDecomposition solve_eigen(const Matrix& c);

struct Mode {
    VectorField field;
    double norm = 0.0;  ///< M-norm of the unnormalized combination
};

/// sigma = L sum_n a_n u_n, scaled to unit M-norm (left unscaled when the
/// combination vanishes).
[[nodiscard]] Mode reconstruct_mode(const SnapshotSet& set, std::span<const double> coefficients,
                                    const ClipRegion* clip = nullptr);

struct PodResult {
    std::vector<double> eigenvalues;
    Matrix coefficients;  ///< column i: a_{n,i}
    std::vector<VectorField> modes;
};

[[nodiscard]] PodResult compute_pod(const SnapshotSet& set, int num_modes, const ClipRegion* clip = nullptr);

/// Greedy pairing of adjacent eigenvalues (0-based indices) with
/// |l_i - l_{i+1}| <= rel_tol * l_i; eigenvalues below 1e-10 * l_max are ignored.
[[nodiscard]] std::vector<std::pair<int, int>> detect_mode_pairs(std::span<const double> eigenvalues,
                                                                 double rel_tol);

/// rho(tau) for tau = 0..max_lag, normalized by the full-length variance sum.
[[nodiscard]] std::vector<double> autocorrelation(std::span<const double> series, int max_lag);

struct Moments {
    double mean = 0.0;
    double rms = 0.0;  ///< square root of the central second moment
    double skewness = 0.0;
    double kurtosis = 0.0;  ///< non-excess: 3 for a Gaussian
};

[[nodiscard]] Moments moments(std::span<const double> series);

}  // namespace sem
