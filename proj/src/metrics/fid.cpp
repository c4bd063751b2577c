#include "idforge/fid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "idforge/error.hpp"
#include "idforge/imaging.hpp"
#include "idforge/manifest.hpp"
#include "idforge/parallel.hpp"

namespace idforge::fid {

namespace {

constexpr double kEigenTolerance = 1e-8;
constexpr double kFidClamp = 1e-6;
constexpr Eigen::Index kChunkRows = 512;

// Eigenvalues of a symmetric matrix, with small negatives (relative to the
// matrix scale) clamped to zero and larger ones rejected.
Eigen::SelfAdjointEigenSolver<Matrix> psd_eigen(const Matrix& m, const char* what) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::NotPSD, std::string(what) + ": eigendecomposition failed");
    const auto& ev = es.eigenvalues();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    if (ev.minCoeff() < -kEigenTolerance * scale) {
        throw Error(ErrorKind::NotPSD, std::string(what) + " has eigenvalue " + std::to_string(ev.minCoeff()));
    }
    return es;
}

Matrix checked_symmetric(const Matrix& m, const char* what) {
    if (m.rows() != m.cols()) throw Error(ErrorKind::DimensionMismatch, std::string(what) + " is not square");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
        throw Error(ErrorKind::NotPSD, std::string(what) + " is not symmetric");
    }
    return (m + m.transpose()) / 2.0;
}

}  // namespace

Accumulator::Accumulator(Eigen::Index d) : mean_(Vector::Zero(d)), scatter_(Matrix::Zero(d, d)) {}

void Accumulator::add(const Eigen::Ref<const Vector>& x) {
    if (n_ == 0 && mean_.size() == 0) *this = Accumulator(x.size());
    if (x.size() != mean_.size()) throw Error(ErrorKind::DimensionMismatch, "feature dimension changed");
    if (!x.allFinite()) throw Error(ErrorKind::InvalidArgument, "feature vector has non-finite entries");
    ++n_;
    const Vector delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    scatter_.noalias() += delta * (x - mean_).transpose();
}

void Accumulator::merge(const Accumulator& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
        *this = other;
        return;
    }
    if (other.mean_.size() != mean_.size()) throw Error(ErrorKind::DimensionMismatch, "feature dimension mismatch");
    const double na = static_cast<double>(n_), nb = static_cast<double>(other.n_), n = na + nb;
    const Vector delta = other.mean_ - mean_;
    mean_ += delta * (nb / n);
    scatter_ += other.scatter_ + delta * delta.transpose() * (na * nb / n);
    n_ += other.n_;
}

GaussianSummary Accumulator::summary() const {
    if (n_ < 2) throw Error(ErrorKind::TooFewSamples, "need at least 2 feature vectors, got " + std::to_string(n_));
    GaussianSummary s;
    s.mu = mean_;
    const Matrix cov = scatter_ / static_cast<double>(n_ - 1);
    s.sigma = (cov + cov.transpose()) / 2.0;
    return s;
}

GaussianSummary summarize(const Matrix& rows, unsigned threads) {
    if (rows.rows() < 2) {
        throw Error(ErrorKind::TooFewSamples, "need at least 2 feature vectors, got " + std::to_string(rows.rows()));
    }
    // Fixed chunking keeps the result independent of the thread count.
    const std::size_t chunks = static_cast<std::size_t>((rows.rows() + kChunkRows - 1) / kChunkRows);
    std::vector<Accumulator> partial(chunks, Accumulator(rows.cols()));
    parallel_for(chunks, threads, [&](std::size_t c) {
        const Eigen::Index begin = static_cast<Eigen::Index>(c) * kChunkRows;
        const Eigen::Index end = std::min<Eigen::Index>(rows.rows(), begin + kChunkRows);
        for (Eigen::Index i = begin; i < end; ++i) partial[c].add(rows.row(i).transpose());
    });
    Accumulator total(rows.cols());
    for (const auto& p : partial) total.merge(p);
    return total.summary();
}

Matrix sqrtm_psd(const Matrix& m) {
    const auto es = psd_eigen(checked_symmetric(m, "matrix"), "matrix");
    const Vector roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Matrix& v = es.eigenvectors();
    const Matrix r = v * roots.asDiagonal() * v.transpose();
    return (r + r.transpose()) / 2.0;
}

double sqrtm_product_trace(const Matrix& sa, const Matrix& sb) {
    if (sa.rows() != sb.rows() || sa.cols() != sb.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "covariance shapes differ");
    }
    const Matrix b = checked_symmetric(sb, "sigma_b");
    psd_eigen(b, "sigma_b");
    const Matrix root_a = sqrtm_psd(sa);
    Matrix inner = root_a * b * root_a;
    inner = (inner + inner.transpose()) / 2.0;
    const auto es = psd_eigen(inner, "sigma_a^1/2 sigma_b sigma_a^1/2");
    return es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

double fid(const GaussianSummary& a, const GaussianSummary& b) {
    if (a.mu.size() != b.mu.size() || a.sigma.rows() != a.mu.size() || b.sigma.rows() != b.mu.size()) {
        throw Error(ErrorKind::DimensionMismatch, "summaries have dimensions " + std::to_string(a.mu.size()) + " and " +
                                                      std::to_string(b.mu.size()));
    }
    const double mean_term = (a.mu - b.mu).squaredNorm();
    const double value = mean_term + a.sigma.trace() + b.sigma.trace() - 2.0 * sqrtm_product_trace(a.sigma, b.sigma);
    if (value < 0.0) {
        if (value >= -kFidClamp) return 0.0;
        throw Error(ErrorKind::NotPSD, "FID evaluated to " + std::to_string(value));
    }
    return value;
}

Vector smoke_features(const ImageBuffer& img) {
    Vector f = Vector::Zero(kSmokeDim);
    const int w = img.width(), h = img.height();
    const double pixels = static_cast<double>(w) * h;

    // 96-bin joint colour histogram: 4 red x 4 green x 6 blue levels.
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* p = img.row(y);
        for (int x = 0; x < w; ++x, p += 3) f[(p[0] * 4 / 256 * 4 + p[1] * 4 / 256) * 6 + p[2] * 6 / 256] += 1.0;
    }
    f.head(96) /= pixels;

    // 16 orientation bins weighted by gradient magnitude, then a 16-bin
    // magnitude histogram, both from central differences of luma.
    if (w < 3 || h < 3) return f;
    std::vector<double> luma(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const Rgb c = img.at(x, y);
            luma[static_cast<std::size_t>(y) * w + x] = 0.299 * c.r + 0.587 * c.g + 0.114 * c.b;
        }
    double total_mag = 0.0;
    const double interior = static_cast<double>(w - 2) * (h - 2);
    for (int y = 1; y < h - 1; ++y) {
        for (int x = 1; x < w - 1; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const double gx = (luma[i + 1] - luma[i - 1]) / 2.0;
            const double gy = (luma[i + w] - luma[i - w]) / 2.0;
            const double mag = std::hypot(gx, gy);
            f[112 + std::min(15, static_cast<int>(mag / 12.0))] += 1.0 / interior;
            if (mag == 0.0) continue;
            double angle = std::atan2(gy, gx);
            if (angle < 0) angle += 2.0 * std::numbers::pi;
            f[96 + std::min(15, static_cast<int>(angle / (2.0 * std::numbers::pi) * 16.0))] += mag;
            total_mag += mag;
        }
    }
    if (total_mag > 0.0) f.segment(96, 16) /= total_mag;
    return f;
}

FeatureSet smoke_features_dir(const std::filesystem::path& dir, unsigned threads) {
    const auto files = list_images(dir);
    FeatureSet out;
    out.rows = Matrix(static_cast<Eigen::Index>(files.size()), kSmokeDim);
    parallel_for(files.size(), threads, [&](std::size_t i) {
        out.rows.row(static_cast<Eigen::Index>(i)) = smoke_features(read_png(files[i])).transpose();
    });
    for (const auto& f : files) out.ids.push_back(f.filename().string());
    return out;
}

FeatureSet read_features(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto fail = [&](const std::string& msg) { return Error(ErrorKind::ParseError, path.string() + ": " + msg); };

    FeatureSet f;
    if (bytes.size() >= 4 && bytes.compare(0, 4, "FEAT") == 0) {
        if (bytes.size() < 12) throw fail("truncated header");
        std::uint32_t n = 0, d = 0;
        const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
        for (int k = 0; k < 4; ++k) {
            n |= static_cast<std::uint32_t>(raw[4 + k]) << (8 * k);
            d |= static_cast<std::uint32_t>(raw[8 + k]) << (8 * k);
        }
        if (d == 0) throw fail("zero feature dimension");
        if (bytes.size() != 12 + 4ull * n * d) throw fail("payload size does not match n*d");
        f.rows = Matrix(n, d);
        for (std::uint32_t i = 0; i < n; ++i) {
            for (std::uint32_t j = 0; j < d; ++j) {
                const unsigned char* p = raw + 12 + 4ull * (static_cast<std::uint64_t>(i) * d + j);
                const std::uint32_t bits = p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
                float v;
                std::memcpy(&v, &bits, sizeof v);
                if (!std::isfinite(v)) throw fail("non-finite value in row " + std::to_string(i));
                f.rows(i, j) = v;
            }
            f.ids.push_back("#" + std::to_string(i));
        }
        return f;
    }

    std::istringstream text(bytes);
    std::string line;
    std::getline(text, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    int d = 0;
    char tail = 0;
    if (std::sscanf(line.c_str(), "idfeat v1 d=%d%c", &d, &tail) != 1 || d <= 0) {
        throw fail("expected header 'idfeat v1 d=<D>'");
    }
    std::vector<std::vector<double>> rows;
    for (std::size_t lineno = 2; std::getline(text, line); ++lineno) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        // The id may itself contain commas: the last D fields are the values.
        std::vector<double> values(static_cast<std::size_t>(d));
        std::size_t end = line.size();
        for (int j = d - 1; j >= 0; --j) {
            const auto comma = end == 0 ? std::string::npos : line.rfind(',', end - 1);
            if (comma == std::string::npos) throw fail("line " + std::to_string(lineno) + ": expected id and " + std::to_string(d) + " values");
            const std::string field = line.substr(comma + 1, end - comma - 1);
            char* stop = nullptr;
            values[static_cast<std::size_t>(j)] = std::strtod(field.c_str(), &stop);
            if (field.empty() || stop != field.c_str() + field.size() || !std::isfinite(values[static_cast<std::size_t>(j)])) {
                throw fail("line " + std::to_string(lineno) + ": bad value '" + field + "'");
            }
            end = comma;
        }
        f.ids.push_back(line.substr(0, end));
        rows.push_back(std::move(values));
    }
    f.rows = Matrix(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < d; ++j) f.rows(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    return f;
}

void write_features_text(const std::filesystem::path& path, const FeatureSet& f) {
    std::string out = "idfeat v1 d=" + std::to_string(f.rows.cols()) + "\n";
    char buf[40];
    for (Eigen::Index i = 0; i < f.rows.rows(); ++i) {
        out += static_cast<std::size_t>(i) < f.ids.size() ? f.ids[static_cast<std::size_t>(i)] : "#" + std::to_string(i);
        for (Eigen::Index j = 0; j < f.rows.cols(); ++j) {
            std::snprintf(buf, sizeof buf, ",%.17g", f.rows(i, j));
            out += buf;
        }
        out += '\n';
    }
    data::atomic_write(path, out);
}

void write_features_binary(const std::filesystem::path& path, const FeatureSet& f) {
    std::string out = "FEAT";
    auto put = [&](std::uint32_t v) {
        for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xFF));
    };
    put(static_cast<std::uint32_t>(f.rows.rows()));
    put(static_cast<std::uint32_t>(f.rows.cols()));
    for (Eigen::Index i = 0; i < f.rows.rows(); ++i)
        for (Eigen::Index j = 0; j < f.rows.cols(); ++j) {
            const float v = static_cast<float>(f.rows(i, j));
            std::uint32_t bits;
            std::memcpy(&bits, &v, sizeof bits);
            put(bits);
        }
    data::atomic_write(path, out);
}

}  // namespace idforge::fid
