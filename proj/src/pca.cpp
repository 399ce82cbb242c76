#include "starmap/pca.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace starmap {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMatrix> as_eigen(const DataMatrix& M) {
    return {M.values().data(), static_cast<Eigen::Index>(M.rows()), static_cast<Eigen::Index>(M.cols())};
}

// Columns of `vecs` are unit directions; flip so the largest-magnitude entry is nonnegative.
void orient(Eigen::MatrixXd& vecs) {
    for (Eigen::Index c = 0; c < vecs.cols(); ++c) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index r = 0; r < vecs.rows(); ++r) {
            if (std::abs(vecs(r, c)) > best) {
                best = std::abs(vecs(r, c));
                arg = r;
            }
        }
        if (vecs(arg, c) < 0.0) {
            vecs.col(c) *= -1.0;
        }
    }
}

// Exact route: eigendecomposition of the D x D sample covariance.
void exact_directions(const Eigen::MatrixXd& centered, std::size_t q, Eigen::MatrixXd& vecs,
                      Eigen::VectorXd& vars) {
    const double denom = static_cast<double>(centered.rows() - 1);
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("fit_pca: eigendecomposition failed");
    }
    const auto qi = static_cast<Eigen::Index>(q);
    // eigenvalues come back ascending
    vecs = es.eigenvectors().rightCols(qi).rowwise().reverse();
    vars = es.eigenvalues().tail(qi).reverse();
}

// Randomized range finder with power iterations, then an exact SVD of the small projection.
void randomized_directions(const Eigen::MatrixXd& centered, std::size_t q, const PcaOptions& opt,
                           Eigen::MatrixXd& vecs, Eigen::VectorXd& vars) {
    const Eigen::Index n = centered.rows();
    const Eigen::Index d = centered.cols();
    const Eigen::Index l = std::min<Eigen::Index>(static_cast<Eigen::Index>(q + opt.oversampling), std::min(n, d));

    Rng rng(opt.seed);
    Eigen::MatrixXd omega(d, l);
    for (Eigen::Index j = 0; j < l; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
            omega(i, j) = rng.normal();
        }
    }
    auto orthonormal = [](const Eigen::MatrixXd& m) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
        return Eigen::MatrixXd(qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols()));
    };
    Eigen::MatrixXd basis = orthonormal(centered * omega);
    for (std::size_t it = 0; it < opt.power_iterations; ++it) {
        const Eigen::MatrixXd z = orthonormal(centered.transpose() * basis);
        basis = orthonormal(centered * z);
    }
    const Eigen::MatrixXd small = basis.transpose() * centered;  // l x d
    Eigen::BDCSVD<Eigen::MatrixXd> svd(small, Eigen::ComputeThinV);
    const auto qi = static_cast<Eigen::Index>(q);
    vecs = svd.matrixV().leftCols(qi);
    vars = svd.singularValues().head(qi).array().square() / static_cast<double>(n - 1);
}

}  // namespace

PcaModel fit_pca(const DataMatrix& M, std::size_t q, const PcaOptions& options) {
    if (M.rows() < 2) {
        throw InvalidArgument("fit_pca: need at least 2 rows");
    }
    if (q < 1 || q > std::min(M.rows(), M.cols())) {
        throw InvalidArgument("fit_pca: need 1 <= q <= min(rows, cols) (q=" + std::to_string(q) + ")");
    }
    const auto X = as_eigen(M);
    const Eigen::RowVectorXd mean = X.colwise().mean();
    const Eigen::MatrixXd centered = X.rowwise() - mean;

    Eigen::MatrixXd vecs;
    Eigen::VectorXd vars;
    if (M.cols() <= options.exact_max_cols) {
        exact_directions(centered, q, vecs, vars);
    } else {
        randomized_directions(centered, q, options, vecs, vars);
    }
    orient(vecs);

    PcaModel model;
    model.mean.assign(mean.data(), mean.data() + mean.size());
    model.components = DataMatrix(q, M.cols());
    for (std::size_t p = 0; p < q; ++p) {
        for (std::size_t j = 0; j < M.cols(); ++j) {
            model.components(p, j) = vecs(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(p));
        }
        model.explained_variance.push_back(std::max(0.0, vars(static_cast<Eigen::Index>(p))));
    }
    return model;
}

DataMatrix transform(const PcaModel& model, const DataMatrix& M) {
    if (M.cols() != model.dim()) {
        throw InvalidArgument("transform: expected " + std::to_string(model.dim()) + " columns, got " +
                              std::to_string(M.cols()));
    }
    const auto X = as_eigen(M);
    const Eigen::Map<const Eigen::RowVectorXd> mean(model.mean.data(), static_cast<Eigen::Index>(model.dim()));
    const auto C = as_eigen(model.components);
    const RowMatrix projected = (X.rowwise() - mean) * C.transpose();
    return DataMatrix(M.rows(), model.rank(),
                      std::vector<double>(projected.data(), projected.data() + projected.size()));
}

JointEmbedding joint_embed(const DataMatrix& X, const DataMatrix& A, std::size_t q, const PcaOptions& options) {
    if (X.cols() != A.cols()) {
        throw InvalidArgument("joint_embed: X and anchors differ in dimension");
    }
    const DataMatrix stacked = DataMatrix::vstack(X, A);
    const PcaModel model = fit_pca(stacked, q, options);
    const DataMatrix all = transform(model, stacked);
    return {all.slice_rows(0, X.rows()), all.slice_rows(X.rows(), stacked.rows())};
}

double init_scale_factor(const DataMatrix& Y0, const DataMatrix* S, double target_extent) {
    if (!(target_extent > 0.0)) {
        throw InvalidArgument("rescale_init: target extent must be positive");
    }
    double extent = 0.0;
    for (double v : Y0.values()) {
        extent = std::max(extent, std::abs(v));
    }
    if (S != nullptr) {
        for (double v : S->values()) {
            extent = std::max(extent, std::abs(v));
        }
    }
    return extent > 0.0 ? target_extent / extent : 1.0;
}

void rescale_init(DataMatrix& Y0, DataMatrix* S, double target_extent) {
    const double f = init_scale_factor(Y0, S, target_extent);
    if (f == 1.0) {
        return;
    }
    for (double& v : Y0.values()) {
        v *= f;
    }
    if (S != nullptr) {
        for (double& v : S->values()) {
            v *= f;
        }
    }
}

}  // namespace starmap
