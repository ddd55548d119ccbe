#include "sem/io.hpp"

#include <glob.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "sem/error.hpp"

namespace sem {

namespace {

constexpr char magic[4] = {'S', 'E', 'M', 'K'};

class Writer {
public:
    void u32(std::uint32_t v) { bytes(v, 4); }
    void u64(std::uint64_t v) { bytes(v, 8); }
    void f64(double v) { bytes(std::bit_cast<std::uint64_t>(v), 8); }
    void raw(const char* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }
    [[nodiscard]] const std::vector<char>& data() const { return buf_; }

private:
    void bytes(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
    std::vector<char> buf_;
};

class Reader {
public:
    Reader(const std::vector<char>& data, const std::string& path) : data_(data), path_(path) {}
    std::uint32_t u32() { return static_cast<std::uint32_t>(bytes(4)); }
    std::uint64_t u64() { return bytes(8); }
    double f64() { return std::bit_cast<double>(bytes(8)); }
    void raw(char* out, std::size_t n) {
        need(n);
        std::memcpy(out, data_.data() + pos_, n);
        pos_ += n;
    }
    [[nodiscard]] std::size_t remaining() const { return data_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (pos_ + n > data_.size()) throw IoError("snapshot '" + path_ + "' is truncated");
    }
    std::uint64_t bytes(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    const std::vector<char>& data_;
    const std::string& path_;
    std::size_t pos_ = 0;
};

}  // namespace

std::size_t SnapshotHeader::values_per_field() const {
    std::size_t n = 1;
    for (std::uint32_t d = 0; d < dim; ++d) n *= static_cast<std::size_t>(counts[d]) * (order + 1);
    return n;
}

bool SnapshotHeader::same_mesh(const SnapshotHeader& o) const {
    return dim == o.dim && order == o.order && counts == o.counts && lo == o.lo && hi == o.hi &&
           grading == o.grading && periodic_mask == o.periodic_mask;
}

SnapshotHeader make_header(const Mesh& mesh, std::uint32_t field_count, double time, std::uint64_t step) {
    SnapshotHeader h;
    const BoxSpec& b = mesh.box();
    h.dim = static_cast<std::uint32_t>(b.dim);
    h.order = static_cast<std::uint32_t>(mesh.order());
    for (int d = 0; d < 3; ++d) {
        h.counts[d] = d < b.dim ? static_cast<std::uint32_t>(b.counts[d]) : 1u;
        h.lo[d] = b.lo[d];
        h.hi[d] = b.hi[d];
        h.grading[d] = b.grading[d];
        if (d < b.dim && b.periodic[d]) h.periodic_mask |= 1u << d;
    }
    h.field_count = field_count;
    h.time = time;
    h.step = step;
    return h;
}

BoxSpec box_from_header(const SnapshotHeader& h) {
    BoxSpec b;
    b.dim = static_cast<int>(h.dim);
    for (int d = 0; d < 3; ++d) {
        b.counts[d] = static_cast<int>(h.counts[d]);
        b.lo[d] = h.lo[d];
        b.hi[d] = h.hi[d];
        b.grading[d] = h.grading[d];
        b.periodic[d] = (h.periodic_mask >> d) & 1u;
    }
    return b;
}

void write_snapshot(const std::string& path, const SnapshotHeader& h, std::span<const Field> fields) {
    if (fields.size() != h.field_count) throw DimensionError("snapshot field count disagrees with header");
    for (const Field& f : fields)
        if (f.size() != h.values_per_field()) throw DimensionError("snapshot field size disagrees with header");
    Writer w;
    w.raw(magic, 4);
    w.u32(snapshot_version);
    w.u32(h.dim);
    w.u32(h.order);
    for (std::uint32_t d = 0; d < h.dim; ++d) w.u32(h.counts[d]);
    for (std::uint32_t d = 0; d < h.dim; ++d) {
        w.f64(h.lo[d]);
        w.f64(h.hi[d]);
    }
    for (std::uint32_t d = 0; d < h.dim; ++d) w.f64(h.grading[d]);
    w.u32(h.periodic_mask);
    w.u32(h.field_count);
    w.f64(h.time);
    w.u64(h.step);
    for (const Field& f : fields)
        for (double v : f.values()) w.f64(v);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
    if (!out) throw IoError("failed writing '" + path + "'");
}

Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open snapshot '" + path + "'");
    const std::vector<char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Reader r(data, path);
    char m[4];
    r.raw(m, 4);
    if (std::memcmp(m, magic, 4) != 0) throw IoError("'" + path + "' is not a snapshot file");
    if (r.u32() != snapshot_version) throw IoError("unsupported snapshot version in '" + path + "'");
    Snapshot s;
    SnapshotHeader& h = s.header;
    h.dim = r.u32();
    if (h.dim != 2 && h.dim != 3) throw IoError("bad dimension in '" + path + "'");
    h.order = r.u32();
    if (h.order < 1 || h.order > static_cast<std::uint32_t>(max_order)) throw IoError("bad order in '" + path + "'");
    for (std::uint32_t d = 0; d < h.dim; ++d) {
        h.counts[d] = r.u32();
        if (h.counts[d] == 0) throw IoError("bad element count in '" + path + "'");
    }
    for (std::uint32_t d = 0; d < h.dim; ++d) {
        h.lo[d] = r.f64();
        h.hi[d] = r.f64();
    }
    for (std::uint32_t d = 0; d < h.dim; ++d) h.grading[d] = r.f64();
    h.periodic_mask = r.u32();
    h.field_count = r.u32();
    h.time = r.f64();
    h.step = r.u64();
    const std::size_t per_field = h.values_per_field();
    if (r.remaining() != static_cast<std::size_t>(h.field_count) * per_field * 8)
        throw IoError("payload length of '" + path + "' disagrees with its header");
    s.fields.reserve(h.field_count);
    for (std::uint32_t f = 0; f < h.field_count; ++f) {
        Field field(per_field);
        for (std::size_t i = 0; i < per_field; ++i) field[i] = r.f64();
        s.fields.push_back(std::move(field));
    }
    return s;
}

std::string format_real(double value) { return fmt::format("{:.17g}", value); }

std::vector<double> CsvTable::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw IoError("no column named '" + name + "'");
    const auto c = static_cast<std::size_t>(it - columns.begin());
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(row[c]);
    return out;
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::string text;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) text += ',';
        text += table.columns[c];
    }
    text += '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size()) throw DimensionError("csv row width disagrees with header");
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) text += ',';
            text += format_real(row[c]);
        }
        text += '\n';
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("failed writing '" + path + "'");
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open csv '" + path + "'");
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw IoError("csv '" + path + "' is empty");
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) t.columns.push_back(cell);
    }
    int number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw IoError(path + ":" + std::to_string(number) + ": not a number: '" + cell + "'");
            }
        }
        if (row.size() != t.columns.size())
            throw IoError(path + ":" + std::to_string(number) + ": wrong number of cells");
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::vector<std::string> expand_glob(const std::string& pattern) {
    glob_t g{};
    std::vector<std::string> out;
    const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
    if (rc == 0)
        for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
    globfree(&g);
    std::sort(out.begin(), out.end());
    if (rc != 0 && rc != GLOB_NOMATCH) throw IoError("cannot expand '" + pattern + "'");
    return out;
}

}  // namespace sem
