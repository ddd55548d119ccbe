#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sem/field.hpp"
#include "sem/mesh.hpp"
#include "sem/operators.hpp"

namespace sem {

inline constexpr std::uint32_t snapshot_version = 1;

/// Snapshot header. Beyond counts and bounds it records grading and periodicity so
/// that a reader can rebuild the exact discretization.
struct SnapshotHeader {
    std::uint32_t dim = 2;
    std::uint32_t order = 1;
    std::array<std::uint32_t, 3> counts{1, 1, 1};
    std::array<double, 3> lo{0.0, 0.0, 0.0};
    std::array<double, 3> hi{1.0, 1.0, 1.0};
    std::array<double, 3> grading{1.0, 1.0, 1.0};
    std::uint32_t periodic_mask = 0;  ///< bit d set when axis d is periodic
    std::uint32_t field_count = 0;
    double time = 0.0;
    std::uint64_t step = 0;

    [[nodiscard]] std::size_t values_per_field() const;
    [[nodiscard]] bool same_mesh(const SnapshotHeader& other) const;
};

struct Snapshot {
    SnapshotHeader header;
    std::vector<Field> fields;
};

[[nodiscard]] SnapshotHeader make_header(const Mesh& mesh, std::uint32_t field_count, double time,
                                         std::uint64_t step);
/// Box description recovered from a header (boundary kinds default to Dirichlet).
[[nodiscard]] BoxSpec box_from_header(const SnapshotHeader& header);

/// Serializes as little-endian regardless of host byte order. Throws IoError.
void write_snapshot(const std::string& path, const SnapshotHeader& header, std::span<const Field> fields);
/// Rejects bad magic, unknown versions and payloads whose length disagrees with the header.
[[nodiscard]] Snapshot read_snapshot(const std::string& path);

/// 17 significant digits, enough to round-trip any binary64 value.
[[nodiscard]] std::string format_real(double value);

/// Numeric CSV with a header row.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    [[nodiscard]] std::vector<double> column(const std::string& name) const;
};

void write_csv(const std::string& path, const CsvTable& table);
[[nodiscard]] CsvTable read_csv(const std::string& path);

/// Sorted paths matching a shell glob pattern; empty when nothing matches.
[[nodiscard]] std::vector<std::string> expand_glob(const std::string& pattern);

}  // namespace sem
