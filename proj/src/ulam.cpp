#include "ulamcert/ulam.hpp"

#include "ulamcert/error.hpp"
#include "ulamcert/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <utility>

namespace ulamcert {

UlamPartition::UlamPartition(std::int64_t n) : n_bins(n) {
    if (n <= 0) throw Error(ErrorCode::kInvalidArgument, "partition needs a positive number of bins");
}

Interval UlamPartition::bin(std::int64_t i) const {
    const double n = static_cast<double>(n_bins);
    return {static_cast<double>(i) / n, static_cast<double>(i + 1) / n};
}

std::int64_t UlamPartition::point_index(const Rational& x) const {
    std::int64_t k = 0;
    if (!to_int64(x * n_bins, k)) return -1;
    return k;
}

Hole::Hole(Rational a_in, Rational b_in) : a(std::move(a_in)), b(std::move(b_in)) {
    if (!(0 <= a && a < b && b <= 1)) {
        throw Error(ErrorCode::kInvalidArgument, "hole needs 0 <= a < b <= 1, got (" + format_rational(a) + ", " +
                                                     format_rational(b) + ")");
    }
}

std::pair<std::int64_t, std::int64_t> Hole::bin_range(const UlamPartition& partition) const {
    const std::int64_t lo = partition.point_index(a);
    const std::int64_t hi = partition.point_index(b);
    if (lo < 0 || hi < 0) {
        throw Error(ErrorCode::kAlignment, "hole " + describe() + " is not aligned to the " +
                                               std::to_string(partition.n_bins) + "-bin partition");
    }
    return {lo, hi};
}

std::string Hole::describe() const { return "(" + format_rational(a) + ", " + format_rational(b) + ")"; }

std::vector<double> UlamMatrix::row_sums() const {
    std::vector<double> sums(static_cast<std::size_t>(P.rows()), 0.0);
    for (Eigen::Index i = 0; i < P.outerSize(); ++i) {
        double s = 0.0;
        for (SparseMatrix::InnerIterator it(P, i); it; ++it) s += it.value();
        sums[static_cast<std::size_t>(i)] = s;
    }
    return sums;
}

namespace {

using RowEntries = std::vector<std::pair<std::int64_t, double>>;

void add_entry(RowEntries& row, std::int64_t col, double value) {
    if (value <= 0.0) return;
    row.emplace_back(col, value);
}

void linear_contribution(const LinearParams& lin, const Rational& s_lo, const Rational& s_hi,
                         std::int64_t n, RowEntries& row) {
    const Rational y0 = lin.slope * s_lo + lin.intercept;
    const Rational y1 = lin.slope * s_hi + lin.intercept;
    const Rational ymin = y0 < y1 ? y0 : y1;
    const Rational ymax = y0 < y1 ? y1 : y0;
    const Rational scale = Rational(n) / abs(lin.slope);
    std::int64_t j0 = 0;
    std::int64_t j1 = 0;
    to_int64(floor(ymin * n), j0);
    to_int64(ceil(ymax * n), j1);
    j0 = std::max<std::int64_t>(j0, 0);
    j1 = std::min<std::int64_t>(j1, n);
    for (std::int64_t j = j0; j < j1; ++j) {
        const Rational lo = std::max(ymin, Rational(j, n));
        const Rational hi = std::min(ymax, Rational(j + 1, n));
        if (hi > lo) add_entry(row, j, to_double((hi - lo) * scale));
    }
}

void generic_contribution(const Branch& b, double s_lo, double s_hi, std::int64_t n, RowEntries& row) {
    const double nd = static_cast<double>(n);
    double y0 = b.apply(s_lo);
    double y1 = b.apply(s_hi);
    const Interval range = b.range();
    // Exact branch endpoints map onto the stored range; reuse it to avoid drift.
    if (s_lo == b.domain().lo) y0 = b.orientation() == Orientation::kIncreasing ? range.lo : range.hi;
    if (s_hi == b.domain().hi) y1 = b.orientation() == Orientation::kIncreasing ? range.hi : range.lo;
    const double ymin = std::clamp(std::min(y0, y1), 0.0, 1.0);
    const double ymax = std::clamp(std::max(y0, y1), 0.0, 1.0);
    const std::int64_t j0 = std::max<std::int64_t>(static_cast<std::int64_t>(std::floor(ymin * nd)), 0);
    const std::int64_t j1 = std::min<std::int64_t>(static_cast<std::int64_t>(std::ceil(ymax * nd)), n);
    const Interval sub{s_lo, s_hi};
    for (std::int64_t j = j0; j < j1; ++j) {
        const Interval target{static_cast<double>(j) / nd, static_cast<double>(j + 1) / nd};
        const Interval pre = intersect(b.preimage(target), sub);
        add_entry(row, j, pre.length() * nd);
    }
}

RowEntries assemble_row(const PiecewiseMap& map, std::int64_t i, std::int64_t n) {
    RowEntries row;
    const Rational bin_lo(i, n);
    const Rational bin_hi(i + 1, n);
    const double nd = static_cast<double>(n);
    for (const Branch& b : map.branches()) {
        if (b.hi() <= bin_lo || b.lo() >= bin_hi) continue;
        const Rational s_lo = std::max(bin_lo, b.lo());
        const Rational s_hi = std::min(bin_hi, b.hi());
        if (const auto* lin = b.linear_params()) {
            linear_contribution(*lin, s_lo, s_hi, n, row);
        } else {
            const double lo_d = s_lo == b.lo() ? b.domain().lo : static_cast<double>(i) / nd;
            const double hi_d = s_hi == b.hi() ? b.domain().hi : static_cast<double>(i + 1) / nd;
            generic_contribution(b, lo_d, hi_d, n, row);
        }
    }
    std::sort(row.begin(), row.end());
    RowEntries merged;
    for (const auto& [col, value] : row) {
        if (!merged.empty() && merged.back().first == col) {
            merged.back().second += value;
        } else {
            merged.emplace_back(col, value);
        }
    }
    return merged;
}

SparseMatrix to_sparse(const std::vector<RowEntries>& rows, std::int64_t n) {
    std::size_t nnz = 0;
    for (const auto& r : rows) nnz += r.size();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(nnz);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (const auto& [col, value] : rows[i]) {
            triplets.emplace_back(static_cast<int>(i), static_cast<int>(col), value);
        }
    }
    SparseMatrix P(n, n);
    P.setFromTriplets(triplets.begin(), triplets.end());
    P.makeCompressed();
    return P;
}

constexpr double kRowSumTolerance = 1e-9;

}  // namespace

UlamMatrix build_closed(const PiecewiseMap& map, const UlamPartition& partition) {
    const std::int64_t n = partition.n_bins;
    if (n < static_cast<std::int64_t>(map.size())) {
        throw Error(ErrorCode::kInvalidArgument, "partition has fewer bins than the map has branches");
    }
    if (n > 2'000'000'000LL) throw Error(ErrorCode::kInvalidArgument, "partition too large");
    std::vector<RowEntries> rows(static_cast<std::size_t>(n));
    parallel_for(rows.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            RowEntries row = assemble_row(map, static_cast<std::int64_t>(i), n);
            double sum = 0.0;
            for (const auto& e : row) sum += e.second;
            if (std::abs(sum - 1.0) > kRowSumTolerance) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.3e", sum - 1.0);
                throw Error(ErrorCode::kNumericConsistency,
                            "row " + std::to_string(i) + " sums to 1 " + (sum >= 1.0 ? "+ " : "") + buf);
            }
            for (auto& e : row) e.second /= sum;
            rows[i] = std::move(row);
        }
    });
    UlamMatrix out;
    out.partition = partition;
    out.P = to_sparse(rows, n);
    out.mode = MatrixMode::kClosed;
    out.map_fingerprint = map.fingerprint();
    return out;
}

UlamMatrix make_open(const UlamMatrix& closed, const Hole& hole) {
    if (closed.mode != MatrixMode::kClosed) throw Error(ErrorCode::kInvalidArgument, "make_open needs a closed matrix");
    const auto [first, last] = hole.bin_range(closed.partition);
    UlamMatrix out = closed;
    for (std::int64_t i = first; i < last; ++i) {
        for (SparseMatrix::InnerIterator it(out.P, static_cast<Eigen::Index>(i)); it; ++it) it.valueRef() = 0.0;
    }
    out.P.prune(0.0, 0.0);
    out.mode = MatrixMode::kOpen;
    out.hole = hole;
    return out;
}

UlamMatrix build_open(const PiecewiseMap& map, const UlamPartition& partition, const Hole& hole) {
    hole.bin_range(partition);  // fail before the expensive assembly
    return make_open(build_closed(map, partition), hole);
}

void save_matrix(const UlamMatrix& matrix, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write matrix file '" + path + "'");
    out << "ulam-matrix 1\n" << matrix.partition.n_bins << "\n";
    if (matrix.mode == MatrixMode::kClosed) {
        out << "mode closed\n";
    } else {
        out << "mode open " << format_rational(matrix.hole->a) << " " << format_rational(matrix.hole->b) << "\n";
    }
    out << "fingerprint " << (matrix.map_fingerprint.empty() ? "-" : matrix.map_fingerprint) << "\n";
    out << "nnz " << matrix.P.nonZeros() << "\n";
    char buf[96];
    for (Eigen::Index i = 0; i < matrix.P.outerSize(); ++i) {
        for (SparseMatrix::InnerIterator it(matrix.P, i); it; ++it) {
            std::snprintf(buf, sizeof buf, "%lld %lld %.17g\n", static_cast<long long>(i),
                          static_cast<long long>(it.col()), it.value());
            out << buf;
        }
    }
    out << "end\n";
    if (!out) throw Error(ErrorCode::kIo, "failed writing matrix file '" + path + "'");
}

UlamMatrix load_matrix(const std::string& path, const std::string& expected_fingerprint,
                       std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIo, "cannot open matrix file '" + path + "'");
    auto fail = [&](const std::string& what) { return Error(ErrorCode::kParse, "matrix file '" + path + "': " + what); };

    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "ulam-matrix" || version != 1) throw fail("bad header");
    long long n = 0;
    if (!(in >> n) || n <= 0) throw fail("bad bin count");
    std::string word;
    std::string mode;
    if (!(in >> word >> mode) || word != "mode") throw fail("missing mode");
    UlamMatrix m;
    m.partition = UlamPartition(n);
    if (mode == "closed") {
        m.mode = MatrixMode::kClosed;
    } else if (mode == "open") {
        std::string a;
        std::string b;
        if (!(in >> a >> b)) throw fail("missing hole endpoints");
        m.mode = MatrixMode::kOpen;
        m.hole = Hole(parse_rational(a), parse_rational(b));
    } else {
        throw fail("unknown mode '" + mode + "'");
    }
    if (!(in >> word >> m.map_fingerprint) || word != "fingerprint") throw fail("missing fingerprint");
    if (m.map_fingerprint == "-") m.map_fingerprint.clear();
    long long nnz = 0;
    if (!(in >> word >> nnz) || word != "nnz" || nnz < 0) throw fail("missing nnz");

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(nnz));
    for (long long k = 0; k < nnz; ++k) {
        long long row = 0;
        long long col = 0;
        std::string value_text;
        if (!(in >> row >> col >> value_text)) throw fail("truncated after " + std::to_string(k) + " entries");
        if (row < 0 || row >= n || col < 0 || col >= n) throw fail("index out of range");
        char* endp = nullptr;
        const double value = std::strtod(value_text.c_str(), &endp);
        if (endp == value_text.c_str() || *endp != '\0') throw fail("bad value '" + value_text + "'");
        triplets.emplace_back(static_cast<int>(row), static_cast<int>(col), value);
    }
    if (!(in >> word) || word != "end") throw fail("missing end marker");
    m.P = SparseMatrix(n, n);
    m.P.setFromTriplets(triplets.begin(), triplets.end());
    m.P.makeCompressed();

    if (!expected_fingerprint.empty() && expected_fingerprint != m.map_fingerprint) {
        const std::string msg = "matrix file '" + path + "' was built from map " +
                                (m.map_fingerprint.empty() ? std::string("<unknown>") : m.map_fingerprint) +
                                ", expected " + expected_fingerprint;
        if (warnings) warnings->push_back(msg);
    }
    return m;
}

}  // namespace ulamcert
