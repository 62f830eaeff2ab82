#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace audiorep {

// n x d row-major embeddings.
class EmbeddingSet {
public:
    EmbeddingSet(std::size_t n, std::size_t d, std::vector<double> data);

    std::size_t n() const { return n_; }
    std::size_t d() const { return d_; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * d_, d_}; }
    std::span<const double> data() const { return data_; }

private:
    std::size_t n_;
    std::size_t d_;
    std::vector<double> data_;
};

// n x C row-major class posteriors; rows are distributions.
class ProbMatrix {
public:
    static constexpr double kRowSumTolerance = 1e-6;

    ProbMatrix(std::size_t n, std::size_t classes, std::vector<double> data,
               double row_sum_tolerance = kRowSumTolerance);

    std::size_t n() const { return n_; }
    std::size_t classes() const { return classes_; }
    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * classes_, classes_};
    }
    std::span<const double> data() const { return data_; }

private:
    std::size_t n_;
    std::size_t classes_;
    std::vector<double> data_;
};

struct GaussianStats {
    std::vector<double> mu;
    std::vector<double> sigma; // d x d row-major

    std::size_t dim() const { return mu.size(); }
};

struct KernelParams {
    double gamma_sq = 8.0;
};

double imq_kernel(std::span<const double> x, std::span<const double> y, const KernelParams& params = {});

// Unbiased squared MMD. Kernel sums are accumulated in ascending order, so the
// result is exactly symmetric in (X, Y) and invariant to sample order.
double mmd2_unbiased(const EmbeddingSet& x, const EmbeddingSet& y, const KernelParams& params = {});
double kid(const EmbeddingSet& real, const EmbeddingSet& gen);

double inception_score(const ProbMatrix& probs);

GaussianStats gaussian_stats(const EmbeddingSet& x);
double frechet_distance(const GaussianStats& r, const GaussianStats& g);
double fad(const EmbeddingSet& real, const EmbeddingSet& gen);

} // namespace audiorep
