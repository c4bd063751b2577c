#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "idforge/image.hpp"

namespace idforge::fid {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// One row per image.
struct FeatureSet {
    std::vector<std::string> ids;
    Matrix rows;
};

struct GaussianSummary {
    Vector mu;
    Matrix sigma;
};

// Streaming mean/scatter with exact pooled merging.
class Accumulator {
public:
    explicit Accumulator(Eigen::Index d = 0);
    void add(const Eigen::Ref<const Vector>& x);
    void merge(const Accumulator& other);
    std::size_t count() const noexcept { return n_; }
    // Unbiased covariance, symmetrised; TooFewSamples below two rows.
    GaussianSummary summary() const;

private:
    std::size_t n_ = 0;
    Vector mean_;
    Matrix scatter_;
};

GaussianSummary summarize(const Matrix& rows, unsigned threads = 1);
inline GaussianSummary summarize(const FeatureSet& f, unsigned threads = 1) { return summarize(f.rows, threads); }

// Principal square root of a symmetric PSD matrix.
Matrix sqrtm_psd(const Matrix& m);
// Tr((sa sb)^{1/2}) through the symmetric form sa^{1/2} sb sa^{1/2}.
double sqrtm_product_trace(const Matrix& sa, const Matrix& sb);
double fid(const GaussianSummary& a, const GaussianSummary& b);

constexpr int kSmokeDim = 128;
// Handcrafted stand-in for network embeddings. Values are not comparable to
// Inception-based FID.
Vector smoke_features(const ImageBuffer& img);
FeatureSet smoke_features_dir(const std::filesystem::path& dir, unsigned threads = 1);

// Text ("idfeat v1 d=<D>" header, "<id>,<D floats>" rows) or binary ("FEAT",
// u32 n, u32 d, n*d little-endian float32); detected from the first bytes.
FeatureSet read_features(const std::filesystem::path& path);
void write_features_text(const std::filesystem::path& path, const FeatureSet& f);
void write_features_binary(const std::filesystem::path& path, const FeatureSet& f);

}  // namespace idforge::fid
