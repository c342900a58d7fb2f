#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace fxrange {

/// Derives independent sub-seeds from one user seed (SplitMix64 finalizer).
enum class SeedStream : std::uint64_t {
    weights = 1,
    dataset = 2,
    baseline = 3,
    fxsim = 4,
    hypothesis = 5,
};

inline std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream)
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(stream) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct Split {
    Eigen::MatrixXd x;  // rows are samples, features in [0, 1]
    Eigen::MatrixXd t;  // rows are targets, one-hot or in [0, 1]

    Eigen::Index size() const { return x.rows(); }
};

struct Dataset {
    Split initial;
    Split online;
    Split test;

    Eigen::Index n() const { return initial.x.cols(); }
    Eigen::Index m() const { return initial.t.cols(); }
};

struct SplitCounts {
    int initial = 0;
    int online = 0;
    int test = 0;

    void validate() const
    {
        if (initial < 1 || online < 1 || test < 0) {
            throw std::invalid_argument("initial and online split sizes must be positive");
        }
    }
    int total() const { return initial + online + test; }

    friend bool operator==(const SplitCounts&, const SplitCounts&) = default;
};

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        auto field = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
            field.remove_prefix(1);
        }
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
            field.remove_suffix(1);
        }
        out.push_back(field);
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

inline double parse_double(std::string_view s, std::size_t line)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw DataError("line " + std::to_string(line) + ": malformed number '" + std::string(s) + "'");
    }
    return v;
}

inline Split make_split(const Eigen::MatrixXd& x, const Eigen::MatrixXd& t, Eigen::Index begin, Eigen::Index count)
{
    return {x.middleRows(begin, count), t.middleRows(begin, count)};
}

}  // namespace detail

/// Reads a CSV with a header row, `n` feature columns and one integer label
/// column. Features are min-max scaled to [0, 1] with statistics from the
/// initial and online rows (a constant column maps to 0; test rows are
/// clipped). Labels are one-hot encoded into `m` columns. Rows are taken in
/// file order: initial, online, then test.
inline Dataset load_csv(std::istream& in, int n, int m, const SplitCounts& counts)
{
    if (n < 1 || m < 1) {
        throw std::invalid_argument("load_csv: n and m must be positive");
    }
    counts.validate();
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("empty file");
    }
    std::vector<double> features;
    std::vector<int> labels;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto fields = detail::split_fields(line);
        if (fields.size() != static_cast<std::size_t>(n) + 1) {
            throw DataError("line " + std::to_string(lineno) + ": expected " + std::to_string(n + 1) +
                            " fields, found " + std::to_string(fields.size()));
        }
        for (int j = 0; j < n; ++j) {
            features.push_back(detail::parse_double(fields[static_cast<std::size_t>(j)], lineno));
        }
        const double label = detail::parse_double(fields.back(), lineno);
        if (label < 0 || label != std::floor(label)) {
            throw DataError("line " + std::to_string(lineno) + ": label must be a non-negative integer");
        }
        if (label >= m) {
            throw DataError("line " + std::to_string(lineno) + ": label " + std::string(fields.back()) +
                            " out of range for " + std::to_string(m) + " classes");
        }
        labels.push_back(static_cast<int>(label));
    }
    const auto rows = static_cast<Eigen::Index>(labels.size());
    if (rows == 0) {
        throw DataError("no data rows");
    }
    if (rows < counts.total()) {
        throw DataError("file has " + std::to_string(rows) + " rows but the splits need " +
                        std::to_string(counts.total()));
    }

    Eigen::MatrixXd x(rows, n);
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(rows, m);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            x(i, j) = features[static_cast<std::size_t>(i * n + j)];
        }
        t(i, labels[static_cast<std::size_t>(i)]) = 1.0;
    }
    const Eigen::Index fit_rows = counts.initial + counts.online;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double lo = x.col(j).head(fit_rows).minCoeff();
        const double hi = x.col(j).head(fit_rows).maxCoeff();
        for (Eigen::Index i = 0; i < rows; ++i) {
            x(i, j) = hi > lo ? std::clamp((x(i, j) - lo) / (hi - lo), 0.0, 1.0) : 0.0;
        }
    }
    return {detail::make_split(x, t, 0, counts.initial), detail::make_split(x, t, counts.initial, counts.online),
            detail::make_split(x, t, fit_rows, counts.test)};
}

inline Dataset load_csv(const std::string& path, int n, int m, const SplitCounts& counts)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    return load_csv(in, n, m, counts);
}

/// Uniform [0, 1] features labelled by a random linear teacher
/// (argmax of x W + c), one-hot encoded.
inline Dataset gen_synthetic(std::uint64_t seed, int n, int m, const SplitCounts& counts)
{
    if (n < 1 || m < 1) {
        throw std::invalid_argument("gen_synthetic: n and m must be positive");
    }
    counts.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> sym(-1.0, 1.0);
    Eigen::MatrixXd w(n, m);
    Eigen::RowVectorXd c(m);
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        w.data()[i] = sym(rng);
    }
    for (Eigen::Index j = 0; j < m; ++j) {
        c(j) = sym(rng);
    }
    auto make = [&](int rows) {
        Split s{Eigen::MatrixXd(rows, n), Eigen::MatrixXd::Zero(rows, m)};
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < n; ++j) {
                s.x(i, j) = unit(rng);
            }
            Eigen::RowVectorXd score = s.x.row(i) * w + c;
            Eigen::Index label = 0;
            score.maxCoeff(&label);
            s.t(i, label) = 1.0;
        }
        return s;
    };
    Dataset d;
    d.initial = make(counts.initial);
    d.online = make(counts.online);
    d.test = make(counts.test);
    return d;
}

/// Writes the dataset back as CSV (features then label), initial, online,
/// test rows in order. Targets must be one-hot.
inline void write_csv(std::ostream& os, const Dataset& d)
{
    const auto n = d.n();
    for (Eigen::Index j = 0; j < n; ++j) {
        os << 'f' << j << ',';
    }
    os << "label\n";
    char buf[32];
    for (const Split* s : {&d.initial, &d.online, &d.test}) {
        for (Eigen::Index i = 0; i < s->size(); ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                std::snprintf(buf, sizeof buf, "%.17g", s->x(i, j));
                os << buf << ',';
            }
            Eigen::Index label = 0;
            s->t.row(i).maxCoeff(&label);
            os << label << '\n';
        }
    }
}

struct RandomWeights {
    Eigen::MatrixXd alpha;  // n x hidden
    Eigen::MatrixXd bias;   // 1 x hidden
};

/// Input weights and hidden biases drawn uniformly from [-1, 1].
inline RandomWeights init_weights(std::uint64_t seed, int n, int hidden)
{
    if (n < 1 || hidden < 1) {
        throw std::invalid_argument("init_weights: n and hidden must be positive");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> sym(-1.0, 1.0);
    RandomWeights w{Eigen::MatrixXd(n, hidden), Eigen::MatrixXd(1, hidden)};
    for (Eigen::Index i = 0; i < w.alpha.size(); ++i) {
        w.alpha.data()[i] = sym(rng);
    }
    for (Eigen::Index j = 0; j < hidden; ++j) {
        w.bias(0, j) = sym(rng);
    }
    return w;
}

}  // namespace fxrange
