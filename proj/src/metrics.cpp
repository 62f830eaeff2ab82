#include "audiorep/metrics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace audiorep {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kSymmetryTolerance = 1e-9;

double sorted_sum(std::vector<double>& values) {
    std::sort(values.begin(), values.end());
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
}

// Sum of k(a_i, a_j) over i != j.
double within_sum(const EmbeddingSet& a, const KernelParams& params) {
    std::vector<double> values;
    values.reserve(a.n() * (a.n() - 1) / 2);
    for (std::size_t i = 0; i < a.n(); ++i) {
        for (std::size_t j = i + 1; j < a.n(); ++j) values.push_back(imq_kernel(a.row(i), a.row(j), params));
    }
    return 2.0 * sorted_sum(values);
}

double cross_sum(const EmbeddingSet& a, const EmbeddingSet& b, const KernelParams& params) {
    std::vector<double> values;
    values.reserve(a.n() * b.n());
    for (std::size_t i = 0; i < a.n(); ++i) {
        for (std::size_t j = 0; j < b.n(); ++j) values.push_back(imq_kernel(a.row(i), b.row(j), params));
    }
    return sorted_sum(values);
}

Matrix as_matrix(const std::vector<double>& sigma, std::size_t d) {
    return Eigen::Map<const Matrix>(sigma.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
}

void check_covariance(const Matrix& s, const char* which) {
    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
        throw std::invalid_argument(std::string("frechet_distance: ") + which + " covariance is not symmetric");
    }
    if (!s.allFinite()) {
        throw std::invalid_argument(std::string("frechet_distance: ") + which + " covariance is not finite");
    }
}

// Symmetric PSD square root with clamped eigenvalues.
Matrix psd_sqrt(const Matrix& s) {
    const Matrix sym = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    if (eig.info() != Eigen::Success) throw std::runtime_error("frechet_distance: eigendecomposition failed");
    const Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

} // namespace

EmbeddingSet::EmbeddingSet(std::size_t n, std::size_t d, std::vector<double> data)
    : n_(n), d_(d), data_(std::move(data)) {
    if (n_ < 1 || d_ < 1) throw std::invalid_argument("EmbeddingSet: need n >= 1 and d >= 1");
    if (data_.size() != n_ * d_) throw std::invalid_argument("EmbeddingSet: data size is not n * d");
    for (double v : data_) {
        if (!std::isfinite(v)) throw std::invalid_argument("EmbeddingSet: non-finite value");
    }
}

ProbMatrix::ProbMatrix(std::size_t n, std::size_t classes, std::vector<double> data,
                       double row_sum_tolerance)
    : n_(n), classes_(classes), data_(std::move(data)) {
    if (n_ < 1) throw std::invalid_argument("ProbMatrix: need at least one row");
    if (classes_ < 2) throw std::invalid_argument("ProbMatrix: need at least 2 classes");
    if (data_.size() != n_ * classes_) throw std::invalid_argument("ProbMatrix: data size is not n * C");
    for (std::size_t i = 0; i < n_; ++i) {
        double sum = 0.0;
        for (double p : row(i)) {
            if (!(p >= 0.0) || !std::isfinite(p)) {
                throw std::invalid_argument("ProbMatrix: row " + std::to_string(i) + " has a negative entry");
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > row_sum_tolerance) {
            throw std::invalid_argument("ProbMatrix: row " + std::to_string(i) + " sums to " +
                                        std::to_string(sum));
        }
    }
}

double imq_kernel(std::span<const double> x, std::span<const double> y, const KernelParams& params) {
    if (x.size() != y.size()) throw std::invalid_argument("imq_kernel: dimension mismatch");
    if (!(params.gamma_sq > 0.0)) throw std::invalid_argument("imq_kernel: gamma_sq must be positive");
    double dist = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double diff = x[i] - y[i];
        dist += diff * diff;
    }
    return 1.0 / (1.0 + dist / (2.0 * params.gamma_sq));
}

double mmd2_unbiased(const EmbeddingSet& x, const EmbeddingSet& y, const KernelParams& params) {
    if (x.n() < 2 || y.n() < 2) throw std::invalid_argument("mmd2_unbiased: need at least 2 samples per set");
    if (x.d() != y.d()) throw std::invalid_argument("mmd2_unbiased: dimension mismatch");
    const double m = static_cast<double>(x.n());
    const double n = static_cast<double>(y.n());
    const double xx = within_sum(x, params) / (m * (m - 1.0));
    const double yy = within_sum(y, params) / (n * (n - 1.0));
    const double xy = cross_sum(x, y, params) * (2.0 / (m * n));
    return (xx + yy) - xy;
}

double kid(const EmbeddingSet& real, const EmbeddingSet& gen) { return mmd2_unbiased(real, gen, KernelParams{}); }

double inception_score(const ProbMatrix& probs) {
    const std::size_t n = probs.n();
    const std::size_t c = probs.classes();
    std::vector<double> marginal(c, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = probs.row(i);
        for (std::size_t k = 0; k < c; ++k) marginal[k] += row[k];
    }
    for (double& q : marginal) q /= static_cast<double>(n);

    double kl_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = probs.row(i);
        double kl = 0.0;
        for (std::size_t k = 0; k < c; ++k) {
            if (row[k] > 0.0) kl += row[k] * std::log(row[k] / marginal[k]);
        }
        kl_sum += kl;
    }
    return std::exp(kl_sum / static_cast<double>(n));
}

GaussianStats gaussian_stats(const EmbeddingSet& x) {
    if (x.n() < 2) throw std::invalid_argument("gaussian_stats: need at least 2 samples");
    const std::size_t n = x.n();
    const std::size_t d = x.d();
    GaussianStats s;
    s.mu.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = x.row(i);
        for (std::size_t a = 0; a < d; ++a) s.mu[a] += row[a];
    }
    for (double& m : s.mu) m /= static_cast<double>(n);

    s.sigma.assign(d * d, 0.0);
    std::vector<double> centred(d);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = x.row(i);
        for (std::size_t a = 0; a < d; ++a) centred[a] = row[a] - s.mu[a];
        for (std::size_t a = 0; a < d; ++a) {
            for (std::size_t b = a; b < d; ++b) s.sigma[a * d + b] += centred[a] * centred[b];
        }
    }
    const double denom = static_cast<double>(n - 1);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a; b < d; ++b) {
            s.sigma[a * d + b] /= denom;
            s.sigma[b * d + a] = s.sigma[a * d + b];
        }
    }
    return s;
}

double frechet_distance(const GaussianStats& r, const GaussianStats& g) {
    const std::size_t d = r.dim();
    if (d == 0 || g.dim() != d || r.sigma.size() != d * d || g.sigma.size() != d * d) {
        throw std::invalid_argument("frechet_distance: dimension mismatch");
    }
    const Matrix sr = as_matrix(r.sigma, d);
    const Matrix sg = as_matrix(g.sigma, d);
    check_covariance(sr, "first");
    check_covariance(sg, "second");
    // Identical statistics are exactly 0; the square-root path leaves ~1e-15 of rounding.
    if (r.mu == g.mu && r.sigma == g.sigma) return 0.0;

    double mean_term = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double diff = r.mu[i] - g.mu[i];
        mean_term += diff * diff;
    }

    const Matrix root_r = psd_sqrt(sr);
    const Matrix inner = root_r * sg * root_r;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (inner + inner.transpose()), Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw std::runtime_error("frechet_distance: eigendecomposition failed");
    double cross = 0.0;
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) cross += std::sqrt(std::max(0.0, eig.eigenvalues()[i]));

    const double dist = mean_term + sr.trace() + sg.trace() - 2.0 * cross;
    return std::max(0.0, dist);
}

double fad(const EmbeddingSet& real, const EmbeddingSet& gen) {
    if (real.d() != gen.d()) throw std::invalid_argument("fad: dimension mismatch");
    return frechet_distance(gaussian_stats(real), gaussian_stats(gen));
}

} // namespace audiorep
