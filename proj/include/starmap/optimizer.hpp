#pragma once

#include "starmap/core.hpp"
#include "starmap/knn_graph.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace starmap {

enum class Method { umap, starmap };

std::string to_string(Method m);
Method parse_method(const std::string& s);

struct Hyperparams {
    double a = 1.577;
    double b = 0.895;
    double lambda = 0.1;   // share of the star pull in the blended attraction
    std::size_t k = 20;
    std::size_t q = 2;
    std::size_t n_epochs = 0;  // 0: 500 when N <= 10000, otherwise 200
    std::size_t negative_sample_rate = 5;
    double initial_lr = 1.0;
    double clip = 0.4;
    double eps = 1e-3;
    std::uint64_t seed = 0;

    /// Throws InvalidArgument if any field is out of range.
    void validate() const;

    std::size_t epochs_for(std::size_t n) const noexcept {
        if (n_epochs != 0) {
            return n_epochs;
        }
        return n <= 10000 ? 500 : 200;
    }
};

struct EmbeddingState {
    DataMatrix Y;                           // N x q, updated in place
    DataMatrix S;                           // C x q, never written; empty in umap mode
    std::vector<std::uint32_t> assignment;  // N star indices; empty in umap mode
    std::size_t epoch = 0;
};

/// Thrown when coordinates stop being finite during optimization.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- pairwise force kernels -------------------------------------------------
//
// Coefficients multiply the displacement (y_i - y_j), so a negative value pulls
// y_i toward y_j and a positive value pushes it away. Wherever a power of the
// squared distance has a negative exponent, the squared distance is floored at
// eps^2.

/// (1 + a * d2^b)^-1 for squared distance d2.
double similarity_sq(double d2, double a, double b);

double similarity(std::span<const double> yi, std::span<const double> yj, double a, double b);

/// -2ab * max(d2, eps^2)^(b-1) * v * w.
double attraction_coefficient(double d2, double w, double a, double b, double eps);

/// 2b / max(d2, eps^2) * v * (1 - w).
double repulsion_coefficient(double d2, double w, double a, double b, double eps);

/// Star pull coefficient; the attraction form with the node degree in place of the weight.
inline double star_coefficient(double d2, double degree, double a, double b, double eps) {
    return attraction_coefficient(d2, degree, a, b, eps);
}

inline double clip_coeff(double c, double clip) noexcept { return c < -clip ? -clip : (c > clip ? clip : c); }

std::vector<double> attraction_term(std::span<const double> yi, std::span<const double> yj, double w, double a,
                                    double b, double eps);
std::vector<double> repulsion_term(std::span<const double> yi, std::span<const double> yj, double w, double a,
                                   double b, double eps);
std::vector<double> star_term(std::span<const double> yi, std::span<const double> star, double degree, double a,
                              double b, double eps);

/// lambda * star + (1 - lambda) * neighbor, componentwise.
std::vector<double> blend_attraction(double lambda, std::span<const double> star, std::span<const double> neighbor);

/**
 * Clipped repulsion displacement for one negative sample. Coincident points
 * are pushed along a random unit direction drawn from `rng`, with the
 * displacement taken to have length eps.
 */
void sampled_repulsion(std::span<const double> yi, std::span<const double> yj, const Hyperparams& params, Rng& rng,
                       std::span<double> out);

// --- dense oracle -------------------------------------------------------------

/// Fuzzy set cross-entropy over ordered pairs i != j with v clamped to [1e-12, 1 - 1e-12].
/// `W` is a dense row-major N x N weight matrix.
double loss(const DataMatrix& Y, std::span<const double> W, const Hyperparams& params);
double loss(const DataMatrix& Y, const FuzzyGraph& graph, const Hyperparams& params);

/// Per-point A_i + R_i summed over every j != i, without clipping or sampling.
DataMatrix pairwise_forces(const DataMatrix& Y, std::span<const double> W, const Hyperparams& params);

/**
 * Exact negative gradient of `loss`. Every unordered pair enters the loss
 * twice (as (i,j) and (j,i)), so this is 2 * pairwise_forces.
 */
DataMatrix full_gradient(const DataMatrix& Y, std::span<const double> W, const Hyperparams& params);
DataMatrix full_gradient(const DataMatrix& Y, const FuzzyGraph& graph, const Hyperparams& params);

// --- stochastic optimization ---------------------------------------------------

struct OptimizeOptions {
    /// Single-threaded edge loop with a fixed RNG stream; bit-reproducible.
    bool deterministic = true;
    /// Worker count for the lock-free parallel mode (0: default_thread_count()).
    std::size_t threads = 0;
    /// Positive-edge samples draw negative partners (disable for pure-attraction experiments).
    bool negative_sampling = true;
    /// Called after every epoch with the 1-based epoch count and current coordinates.
    std::function<void(std::size_t, const DataMatrix&)> on_epoch;
};

/**
 * Edge-sampled SGD on the fuzzy graph.
 *
 * Each directed copy of an edge (i, j) fires with period max_w / w_ij epochs.
 * A firing moves both endpoints with the clipped neighbor pull; in starmap
 * mode that pull is blended with the clipped pull toward the endpoint's own
 * star, lambda : (1 - lambda). Each firing then draws negative_sample_rate
 * uniform partners for i and applies clipped repulsion to i only. The
 * learning rate decays linearly from initial_lr to 0.
 */
void optimize(EmbeddingState& state, const FuzzyGraph& graph, const Hyperparams& params, Method method,
              const OptimizeOptions& options = {});

}  // namespace starmap
